#include "cptclone/wave_optics.hpp"

#include <cmath>
#include <mutex>

#include <fftw3.h>

namespace cptclone {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution on distinct
// buffers is. Plans here use FFTW_ESTIMATE so planning never measures and the
// chosen algorithm (hence bit-level output) is reproducible run to run.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

void GridSpec::validate() const {
    auto power_of_two = [](int n) { return n > 0 && (n & (n - 1)) == 0; };
    if (nx < 64 || ny < 64) throw ConfigError("GridSpec: nx, ny must be >= 64");
    if (!power_of_two(nx) || !power_of_two(ny))
        throw ConfigError("GridSpec: nx, ny must be powers of two");
    if (!(dx > 0.0) || !(dy > 0.0)) throw ConfigError("GridSpec: dx, dy must be > 0");
    if (!(wavelength > 0.0)) throw ConfigError("GridSpec: wavelength must be > 0");
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
    if (!(a == b)) throw GridMismatch(std::string(where) + ": grids differ");
}

void Mask2D::clamp() {
    for (double& t : transmission) t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
}

IntensityImage IntensityImage::from_field(const ComplexField2D& f) {
    IntensityImage img(f.grid());
    const auto& a = f.samples();
    for (std::size_t i = 0; i < a.size(); ++i) img.values[i] = std::norm(a[i]);
    return img;
}

double field_power(const ComplexField2D& field) {
    double sum = 0.0;
    for (const auto& v : field.samples()) sum += std::norm(v);
    return sum * field.grid().dx * field.grid().dy;
}

double border_power_fraction(const ComplexField2D& field) {
    const GridSpec& g = field.grid();
    double total = 0.0, frame = 0.0;
    for (int iy = 0; iy < g.ny; ++iy) {
        const bool edge_row = iy < 2 || iy >= g.ny - 2;
        for (int ix = 0; ix < g.nx; ++ix) {
            const double p = std::norm(field.at(ix, iy));
            total += p;
            if (edge_row || ix < 2 || ix >= g.nx - 2) frame += p;
        }
    }
    return total > 0.0 ? frame / total : 0.0;
}

Propagator::Propagator(const GridSpec& grid) : grid_(grid) {
    grid_.validate();
    const int nx = grid_.nx, ny = grid_.ny;
    buffer_.resize(grid_.samples());

    // Transverse wavenumbers in FFT index order: index i maps to
    // 2*pi*i/(n*d) for i < n/2 and to the negative branch above.
    k_squared_.resize(grid_.samples());
    std::vector<double> kx(nx), ky(ny);
    for (int i = 0; i < nx; ++i) {
        const int f = i < nx / 2 ? i : i - nx;
        kx[i] = 2.0 * units::pi * f / (nx * grid_.dx);
    }
    for (int j = 0; j < ny; ++j) {
        const int f = j < ny / 2 ? j : j - ny;
        ky[j] = 2.0 * units::pi * f / (ny * grid_.dy);
    }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            k_squared_[static_cast<std::size_t>(j) * nx + i] = kx[i] * kx[i] + ky[j] * ky[j];

    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* data = reinterpret_cast<fftw_complex*>(buffer_.data());
    fwd_ = fftw_plan_dft_2d(ny, nx, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(ny, nx, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw Error("Propagator: FFTW plan creation failed");
}

Propagator::~Propagator() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd_) fftw_destroy_plan(fwd_);
    if (bwd_) fftw_destroy_plan(bwd_);
}

void Propagator::fft_forward(std::vector<complexd>& data) const {
    fftw_execute_dft(fwd_, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
}

void Propagator::fft_backward(std::vector<complexd>& data) const {
    fftw_execute_dft(bwd_, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
}

void Propagator::check_border(const ComplexField2D& field, double z, const char* context) {
    const double frac = border_power_fraction(field);
    if (frac > border_energy_threshold)
        warnings_.push_back({PropagationWarning::Kind::border_energy, frac, z, context});
}

ComplexField2D Propagator::propagate_free(const ComplexField2D& field, double z) {
    require_same_grid(field.grid(), grid_, "propagate_free");
    if (z < 0.0) throw ConfigError("propagate_free: z must be >= 0");
    check_border(field, z_cursor_, "before free step");

    buffer_ = field.samples();
    fft_forward(buffer_);
    const double k = grid_.wavenumber();
    const double norm = 1.0 / static_cast<double>(grid_.samples());
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
        const double phase = -k_squared_[i] * z / (2.0 * k);
        buffer_[i] *= std::polar(norm, phase);
    }
    fft_backward(buffer_);

    ComplexField2D out(grid_);
    out.samples() = buffer_;
    z_cursor_ += z;
    check_border(out, z_cursor_, "after free step");
    return out;
}

ComplexField2D Propagator::medium_screen(const ComplexField2D& field, const SusceptibilityMap& chi,
                                         double dz) const {
    require_same_grid(field.grid(), grid_, "medium_screen");
    require_same_grid(chi.grid, grid_, "medium_screen");
    if (!(dz > 0.0)) throw ConfigError("medium_screen: dz must be > 0");

    const double k = grid_.wavenumber();
    ComplexField2D out(grid_);
    const auto& in = field.samples();
    auto& o = out.samples();
    const complexd factor_exponent = complexd(0.0, 1.0) * (k * dz / 2.0);
    for (std::size_t i = 0; i < in.size(); ++i)
        o[i] = in[i] * std::exp(factor_exponent * chi.chi[i]);
    return out;
}

ComplexField2D Propagator::propagate_medium(const ComplexField2D& field,
                                            const ChiProvider& chi_of_z, double length,
                                            double dz) {
    require_same_grid(field.grid(), grid_, "propagate_medium");
    if (!(length > 0.0)) throw ConfigError("propagate_medium: length must be > 0");
    if (!(dz > 0.0) || dz > length + 1e-15)
        throw ConfigError("propagate_medium: need 0 < dz <= length");

    const auto steps = static_cast<std::size_t>(std::ceil(length / dz - 1e-12));
    ComplexField2D cur = field;
    double z = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        const double h = std::min(dz, length - z);
        const SusceptibilityMap& chi = chi_of_z(s, z + h / 2.0, h);
        cur = medium_screen(cur, chi, h / 2.0);
        cur = propagate_free(cur, h);
        cur = medium_screen(cur, chi, h / 2.0);
        z += h;
    }
    return cur;
}

ComplexField2D propagate_free(const ComplexField2D& field, double z,
                              std::vector<PropagationWarning>* warnings) {
    Propagator p(field.grid());
    ComplexField2D out = p.propagate_free(field, z);
    if (warnings)
        warnings->insert(warnings->end(), p.warnings().begin(), p.warnings().end());
    return out;
}

ComplexField2D medium_screen(const ComplexField2D& field, const SusceptibilityMap& chi, double dz) {
    Propagator p(field.grid());
    return p.medium_screen(field, chi, dz);
}

} // namespace cptclone
