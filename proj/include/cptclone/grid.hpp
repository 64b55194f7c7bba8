#ifndef CPTCLONE_GRID_HPP
#define CPTCLONE_GRID_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "cptclone/errors.hpp"
#include "cptclone/units.hpp"

namespace cptclone {

using complexd = std::complex<double>;

// Sampled transverse plane. Physical coordinates are centred: the sample at
// index (nx/2, ny/2) sits at (0, 0), x(i) = (i - nx/2) * dx.
struct GridSpec {
    int nx = 512;
    int ny = 512;
    double dx = 10e-3 / 512;   // m
    double dy = 10e-3 / 512;   // m
    double wavelength = units::rb_d1_wavelength;

    double window_x() const { return nx * dx; }
    double window_y() const { return ny * dy; }
    double x(int i) const { return (i - nx / 2) * dx; }
    double y(int j) const { return (j - ny / 2) * dy; }
    double wavenumber() const { return 2.0 * units::pi / wavelength; }
    std::size_t samples() const { return static_cast<std::size_t>(nx) * ny; }

    bool operator==(const GridSpec& o) const {
        return nx == o.nx && ny == o.ny && dx == o.dx && dy == o.dy &&
               wavelength == o.wavelength;
    }

    void validate() const;

    static GridSpec square(int n, double window, double wavelength = units::rb_d1_wavelength) {
        GridSpec g;
        g.nx = g.ny = n;
        g.dx = g.dy = window / n;
        g.wavelength = wavelength;
        g.validate();
        return g;
    }
};

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

// Complex field envelope, row-major with y slow and x fast:
// sample (ix, iy) lives at a[iy * nx + ix].
class ComplexField2D {
public:
    ComplexField2D() = default;
    explicit ComplexField2D(const GridSpec& grid)
        : grid_(grid), a_(grid.samples(), complexd{0.0, 0.0}) {}

    const GridSpec& grid() const { return grid_; }
    complexd& at(int ix, int iy) { return a_[static_cast<std::size_t>(iy) * grid_.nx + ix]; }
    const complexd& at(int ix, int iy) const {
        return a_[static_cast<std::size_t>(iy) * grid_.nx + ix];
    }
    std::vector<complexd>& samples() { return a_; }
    const std::vector<complexd>& samples() const { return a_; }

    bool all_finite() const {
        for (const auto& v : a_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

private:
    GridSpec grid_;
    std::vector<complexd> a_;
};

struct SusceptibilityMap {
    GridSpec grid;
    std::vector<complexd> chi;

    SusceptibilityMap() = default;
    explicit SusceptibilityMap(const GridSpec& g) : grid(g), chi(g.samples(), complexd{0, 0}) {}
};

struct Mask2D {
    GridSpec grid;
    std::vector<double> transmission;   // in [0, 1]

    Mask2D() = default;
    explicit Mask2D(const GridSpec& g) : grid(g), transmission(g.samples(), 0.0) {}

    double& at(int ix, int iy) { return transmission[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    double at(int ix, int iy) const {
        return transmission[static_cast<std::size_t>(iy) * grid.nx + ix];
    }
    void clamp();
};

struct IntensityImage {
    GridSpec grid;
    std::vector<double> values;   // |E|^2, nonnegative

    IntensityImage() = default;
    explicit IntensityImage(const GridSpec& g) : grid(g), values(g.samples(), 0.0) {}

    double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * grid.nx + ix]; }
    double at(int ix, int iy) const {
        return values[static_cast<std::size_t>(iy) * grid.nx + ix];
    }

    static IntensityImage from_field(const ComplexField2D& f);
};

} // namespace cptclone

#endif
