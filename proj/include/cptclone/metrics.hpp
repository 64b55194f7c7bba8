#ifndef CPTCLONE_METRICS_HPP
#define CPTCLONE_METRICS_HPP

#include <vector>

#include "cptclone/grid.hpp"

namespace cptclone {

// Pixel-index rectangle, inclusive bounds.
struct PixelRect {
    int x0 = 0, x1 = 0, y0 = 0, y1 = 0;

    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
};

PixelRect full_frame(const GridSpec& grid);

// Zero-mean normalised cross-correlation at zero shift over the rectangle.
// Throws ZeroVariance when either image is constant there.
double ncc(const IntensityImage& a, const IntensityImage& b);
double ncc(const IntensityImage& a, const IntensityImage& b, const PixelRect& window);

// Same on raw sample buffers (used for background-subtracted signals that can
// go negative and so are not IntensityImages).
double ncc_samples(const std::vector<double>& a, const std::vector<double>& b);

// (Imax - Imin) / (Imax + Imin) using the local maximum nearest the profile
// centre and the mean of its two adjacent minima. Needs at least one interior
// maximum with minima on both sides, else NoFringes.
double fringe_visibility(const std::vector<double>& profile);

// Distance between the lo- and hi-fraction crossings of a monotone edge,
// in metres given the sample spacing. Throws NoEdge when no monotone edge
// spans both thresholds.
double edge_width(const std::vector<double>& profile, double dx, double lo = 0.1, double hi = 0.9);

// power(out) / power(in); throws ZeroInput on zero input power.
double transmitted_power_fraction(const ComplexField2D& out, const ComplexField2D& in);

// Horizontal cut through the intensity-weighted centroid row.
std::vector<double> horizontal_profile(const IntensityImage& img);
std::vector<double> horizontal_profile(const IntensityImage& img, const PixelRect& window);

// Bounding box of {values >= frac * max} dilated by `dilate_px` on each side.
PixelRect support_window(const IntensityImage& img, double frac, int dilate_px);

} // namespace cptclone

#endif
