#ifndef CPTCLONE_SCENE_HPP
#define CPTCLONE_SCENE_HPP

#include <filesystem>
#include <vector>

#include "cptclone/grid.hpp"
#include "cptclone/lambda_system.hpp"

namespace cptclone {

// Centred Gaussian with flat phase: E(r) = amplitude * exp(-r^2 / waist^2).
ComplexField2D gaussian_beam(const GridSpec& grid, double waist, double amplitude);

enum class Glyph { U, O };

// Two transparent vertical slits on an opaque background, centres at
// +/- separation/2.
Mask2D double_slit(const GridSpec& grid, double slit_width, double separation);

// Axis-aligned block glyph: 'O' is a rectangular annulus of the given stroke,
// 'U' is the same with the top bar removed. Width defaults to 0.75 * height.
Mask2D glyph_mask(const GridSpec& grid, Glyph glyph, double height, double stroke,
                  double width = 0.0);

// Optional 1-pixel raised-cosine softening of mask edges (default off in
// scenarios; hard chrome edges are the physical default).
Mask2D smooth_mask_edges(const Mask2D& mask);

ComplexField2D apply_mask(const ComplexField2D& field, const Mask2D& mask);

// chi(|G|) lookup for a fixed probe drive and atom parameters, sampled
// uniformly in |G| and interpolated with a Catmull-Rom cubic. Stores chi per
// unit density (chi is exactly linear in N); queries scale by the density.
// Immutable after construction and shareable across threads.
class ChiTable {
public:
    ChiTable(const LambdaParams& params, std::complex<double> nominal_g, double g_max,
             int points = 8192, double wavelength = units::rb_d1_wavelength);

    // chi at coupling Rabi magnitude |G|, for the given density.
    std::complex<double> chi(double g_abs, double density) const;

    double g_max() const { return g_max_; }
    const LambdaParams& params() const { return params_; }
    std::complex<double> nominal_g() const { return nominal_g_; }
    double wavelength() const { return wavelength_; }

private:
    LambdaParams params_;
    std::complex<double> nominal_g_;
    double g_max_;
    double step_;
    double wavelength_;
    std::vector<std::complex<double>> chi_per_density_;
};

// Spatially resolved chi from the local coupling amplitude:
// G_local(x, y) = rabi_scale * coupling(x, y), chi(x, y) = chi(|G_local|).
// The probe Rabi entering the steady state is the uniform nominal g.
SusceptibilityMap susceptibility_from_coupling(const ComplexField2D& coupling,
                                               const ChiTable& table, double density,
                                               double rabi_scale);

// Spec-shaped convenience overload; builds a throwaway table.
SusceptibilityMap susceptibility_from_coupling(const ComplexField2D& coupling,
                                               std::complex<double> nominal_g,
                                               const LambdaParams& params, double density,
                                               double rabi_scale);

// Validation route: dense per-pixel steady-state solves, no interpolation.
SusceptibilityMap susceptibility_from_coupling_direct(const ComplexField2D& coupling,
                                                      std::complex<double> nominal_g,
                                                      const LambdaParams& params, double density,
                                                      double rabi_scale,
                                                      double wavelength = units::rb_d1_wavelength);

// 8-bit P5 PGM mask export/import (0 = opaque, 255 = transparent) with a
// sidecar text header "<path>.meta" recording dx and dy in metres.
void write_mask_pgm(const std::filesystem::path& path, const Mask2D& mask);
Mask2D read_mask_pgm(const std::filesystem::path& path,
                     double wavelength = units::rb_d1_wavelength);

} // namespace cptclone

#endif
