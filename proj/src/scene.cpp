#include "cptclone/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cptclone {

ComplexField2D gaussian_beam(const GridSpec& grid, double waist, double amplitude) {
    grid.validate();
    if (!(waist > 0.0)) throw ConfigError("gaussian_beam: waist must be > 0");
    ComplexField2D field(grid);
    const double inv_w2 = 1.0 / (waist * waist);
    for (int iy = 0; iy < grid.ny; ++iy) {
        const double y = grid.y(iy);
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double x = grid.x(ix);
            field.at(ix, iy) = amplitude * std::exp(-(x * x + y * y) * inv_w2);
        }
    }
    return field;
}

Mask2D double_slit(const GridSpec& grid, double slit_width, double separation) {
    grid.validate();
    if (slit_width < 2.0 * grid.dx)
        throw TooFine("double_slit: slit_width below 2 samples");
    if (!(separation > slit_width))
        throw ConfigError("double_slit: separation must exceed slit_width");
    Mask2D mask(grid);
    const double c = separation / 2.0, hw = slit_width / 2.0;
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double x = grid.x(ix);
            if (std::abs(x - c) <= hw || std::abs(x + c) <= hw) mask.at(ix, iy) = 1.0;
        }
    return mask;
}

Mask2D glyph_mask(const GridSpec& grid, Glyph glyph, double height, double stroke, double width) {
    grid.validate();
    if (width <= 0.0) width = 0.75 * height;
    if (stroke < 3.0 * grid.dx) throw TooFine("glyph_mask: stroke below 3 samples");
    if (!(height > 2.0 * stroke) || !(width > 2.0 * stroke))
        throw ConfigError("glyph_mask: glyph too small for its stroke");

    const double x0 = -width / 2.0, x1 = width / 2.0;
    const double y0 = -height / 2.0, y1 = height / 2.0;
    Mask2D mask(grid);
    for (int iy = 0; iy < grid.ny; ++iy) {
        const double y = grid.y(iy);
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double x = grid.x(ix);
            const bool outer = x >= x0 && x <= x1 && y >= y0 && y <= y1;
            if (!outer) continue;
            // 'U' keeps the inner cut open through the top edge.
            const double inner_top = glyph == Glyph::O ? y1 - stroke : y1;
            const bool inner =
                x >= x0 + stroke && x <= x1 - stroke && y >= y0 + stroke && y <= inner_top;
            if (!inner) mask.at(ix, iy) = 1.0;
        }
    }
    return mask;
}

Mask2D smooth_mask_edges(const Mask2D& mask) {
    // 3x3 raised-cosine kernel, one pixel of support.
    const GridSpec& g = mask.grid;
    Mask2D out(g);
    const double w_side = 0.5, w_diag = 0.25;
    const double norm = 1.0 + 4.0 * w_side + 4.0 * w_diag;
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            double acc = mask.at(ix, iy);
            auto sample = [&](int jx, int jy) -> double {
                if (jx < 0 || jx >= g.nx || jy < 0 || jy >= g.ny) return 0.0;
                return mask.at(jx, jy);
            };
            acc += w_side * (sample(ix - 1, iy) + sample(ix + 1, iy) + sample(ix, iy - 1) +
                             sample(ix, iy + 1));
            acc += w_diag * (sample(ix - 1, iy - 1) + sample(ix + 1, iy - 1) +
                             sample(ix - 1, iy + 1) + sample(ix + 1, iy + 1));
            out.at(ix, iy) = acc / norm;
        }
    out.clamp();
    return out;
}

ComplexField2D apply_mask(const ComplexField2D& field, const Mask2D& mask) {
    require_same_grid(field.grid(), mask.grid, "apply_mask");
    ComplexField2D out(field.grid());
    const auto& in = field.samples();
    for (std::size_t i = 0; i < in.size(); ++i) out.samples()[i] = in[i] * mask.transmission[i];
    return out;
}

ChiTable::ChiTable(const LambdaParams& params, std::complex<double> nominal_g, double g_max,
                   int points, double wavelength)
    : params_(params), nominal_g_(nominal_g), g_max_(g_max), wavelength_(wavelength) {
    params.validate();
    if (nominal_g == std::complex<double>{0.0, 0.0}) throw ZeroProbe("ChiTable: nominal g is zero");
    if (!(g_max > 0.0)) throw ConfigError("ChiTable: g_max must be > 0");
    if (points < 16) throw ConfigError("ChiTable: need at least 16 points");

    step_ = g_max / (points - 1);
    chi_per_density_.resize(points);
    for (int i = 0; i < points; ++i) {
        DriveParams drives{nominal_g, std::complex<double>(i * step_, 0.0)};
        chi_per_density_[i] = probe_susceptibility(params, drives, 1.0, wavelength).chi;
    }
}

std::complex<double> ChiTable::chi(double g_abs, double density) const {
    if (g_abs < 0.0) g_abs = -g_abs;
    if (g_abs > g_max_ * (1.0 + 1e-12))
        throw NumericGuard("ChiTable: |G| beyond table range; widen g_max");
    const auto n = static_cast<int>(chi_per_density_.size());
    double u = g_abs / step_;
    int i1 = static_cast<int>(u);
    if (i1 >= n - 1) i1 = n - 2;
    const double t = u - i1;
    // Catmull-Rom through the four surrounding nodes, clamped at the ends.
    const int i0 = std::max(i1 - 1, 0);
    const int i2 = i1 + 1;
    const int i3 = std::min(i2 + 1, n - 1);
    const std::complex<double> p0 = chi_per_density_[i0], p1 = chi_per_density_[i1],
                               p2 = chi_per_density_[i2], p3 = chi_per_density_[i3];
    const std::complex<double> v =
        p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                       t * (3.0 * (p1 - p2) + p3 - p0)));
    return v * density;
}

SusceptibilityMap susceptibility_from_coupling(const ComplexField2D& coupling,
                                               const ChiTable& table, double density,
                                               double rabi_scale) {
    if (!(rabi_scale > 0.0))
        throw ConfigError("susceptibility_from_coupling: rabi_scale must be > 0");
    SusceptibilityMap map(coupling.grid());
    const auto& a = coupling.samples();
    for (std::size_t i = 0; i < a.size(); ++i)
        map.chi[i] = table.chi(rabi_scale * std::abs(a[i]), density);
    return map;
}

SusceptibilityMap susceptibility_from_coupling(const ComplexField2D& coupling,
                                               std::complex<double> nominal_g,
                                               const LambdaParams& params, double density,
                                               double rabi_scale) {
    if (!(rabi_scale > 0.0))
        throw ConfigError("susceptibility_from_coupling: rabi_scale must be > 0");
    double peak = 0.0;
    for (const auto& v : coupling.samples()) peak = std::max(peak, std::abs(v));
    const double g_max = std::max(rabi_scale * peak * 1.25, 1.0);
    ChiTable table(params, nominal_g, g_max);
    return susceptibility_from_coupling(coupling, table, density, rabi_scale);
}

SusceptibilityMap susceptibility_from_coupling_direct(const ComplexField2D& coupling,
                                                      std::complex<double> nominal_g,
                                                      const LambdaParams& params, double density,
                                                      double rabi_scale, double wavelength) {
    if (!(rabi_scale > 0.0))
        throw ConfigError("susceptibility_from_coupling: rabi_scale must be > 0");
    SusceptibilityMap map(coupling.grid());
    const auto& a = coupling.samples();
    for (std::size_t i = 0; i < a.size(); ++i) {
        DriveParams drives{nominal_g, std::complex<double>(rabi_scale * std::abs(a[i]), 0.0)};
        map.chi[i] = probe_susceptibility(params, drives, density, wavelength).chi;
    }
    return map;
}

void write_mask_pgm(const std::filesystem::path& path, const Mask2D& mask) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_mask_pgm: cannot open " + path.string());
    const GridSpec& g = mask.grid;
    out << "P5\n" << g.nx << " " << g.ny << "\n255\n";
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            const double t = std::clamp(mask.at(ix, iy), 0.0, 1.0);
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0))));
        }
    if (!out) throw IoError("write_mask_pgm: write failed for " + path.string());

    std::ofstream meta(path.string() + ".meta");
    if (!meta) throw IoError("write_mask_pgm: cannot open sidecar for " + path.string());
    meta.precision(17);
    meta << "dx_m " << g.dx << "\n" << "dy_m " << g.dy << "\n";
}

Mask2D read_mask_pgm(const std::filesystem::path& path, double wavelength) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_mask_pgm: cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw IoError("read_mask_pgm: not a binary PGM: " + path.string());
    auto next_token = [&in, &path]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw IoError("read_mask_pgm: truncated header in " + path.string());
    };
    const int nx = std::stoi(next_token());
    const int ny = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (maxval != 255) throw IoError("read_mask_pgm: expected 8-bit PGM");
    in.get();   // single whitespace after maxval

    GridSpec g;
    g.nx = nx;
    g.ny = ny;
    g.wavelength = wavelength;

    std::ifstream meta(path.string() + ".meta");
    if (!meta) throw IoError("read_mask_pgm: missing sidecar " + path.string() + ".meta");
    std::string key;
    double val;
    while (meta >> key >> val) {
        if (key == "dx_m") g.dx = val;
        else if (key == "dy_m") g.dy = val;
    }
    g.validate();

    Mask2D mask(g);
    std::vector<unsigned char> row(static_cast<std::size_t>(nx));
    for (int iy = 0; iy < ny; ++iy) {
        in.read(reinterpret_cast<char*>(row.data()), nx);
        if (!in) throw IoError("read_mask_pgm: truncated samples in " + path.string());
        for (int ix = 0; ix < nx; ++ix) mask.at(ix, iy) = row[ix] / 255.0;
    }
    return mask;
}

} // namespace cptclone
