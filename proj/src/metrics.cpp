#include "cptclone/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "cptclone/wave_optics.hpp"

namespace cptclone {

namespace {

void clip_to_grid(PixelRect& r, const GridSpec& g) {
    r.x0 = std::max(r.x0, 0);
    r.y0 = std::max(r.y0, 0);
    r.x1 = std::min(r.x1, g.nx - 1);
    r.y1 = std::min(r.y1, g.ny - 1);
}

std::vector<double> crop(const IntensityImage& img, const PixelRect& w) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(w.width()) * w.height());
    for (int iy = w.y0; iy <= w.y1; ++iy)
        for (int ix = w.x0; ix <= w.x1; ++ix) out.push_back(img.at(ix, iy));
    return out;
}

} // namespace

PixelRect full_frame(const GridSpec& grid) { return {0, grid.nx - 1, 0, grid.ny - 1}; }

double ncc_samples(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw GridMismatch("ncc: sample counts differ");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) throw ZeroVariance("ncc: constant input");
    return sab / std::sqrt(saa * sbb);
}

double ncc(const IntensityImage& a, const IntensityImage& b, const PixelRect& window) {
    require_same_grid(a.grid, b.grid, "ncc");
    return ncc_samples(crop(a, window), crop(b, window));
}

double ncc(const IntensityImage& a, const IntensityImage& b) {
    return ncc(a, b, full_frame(a.grid));
}

double fringe_visibility(const std::vector<double>& profile) {
    const int n = static_cast<int>(profile.size());
    if (n < 5) throw NoFringes("fringe_visibility: profile too short");

    std::vector<int> maxima, minima;
    for (int i = 1; i + 1 < n; ++i) {
        const double l = profile[i - 1], c = profile[i], r = profile[i + 1];
        const bool up = c > l || c > r;
        if (c >= l && c >= r && up) maxima.push_back(i);
        if (c <= l && c <= r && (c < l || c < r)) minima.push_back(i);
    }
    if (maxima.empty() || static_cast<int>(maxima.size() + minima.size()) < 3)
        throw NoFringes("fringe_visibility: fewer than 3 extrema");

    const int centre = n / 2;
    const int ic = *std::min_element(maxima.begin(), maxima.end(), [centre](int a, int b) {
        return std::abs(a - centre) < std::abs(b - centre);
    });
    int left = -1, right = -1;
    for (int m : minima) {
        if (m < ic) left = m;
        if (m > ic) {
            right = m;
            break;
        }
    }
    if (left < 0 || right < 0)
        throw NoFringes("fringe_visibility: central fringe lacks adjacent minima");

    const double imax = profile[ic];
    const double imin = 0.5 * (profile[left] + profile[right]);
    if (imax + imin <= 0.0) throw NoFringes("fringe_visibility: dark profile");
    return (imax - imin) / (imax + imin);
}

double edge_width(const std::vector<double>& profile, double dx, double lo, double hi) {
    const int n = static_cast<int>(profile.size());
    if (n < 3) throw NoEdge("edge_width: profile too short");
    if (!(dx > 0.0)) throw ConfigError("edge_width: dx must be > 0");
    if (!(lo > 0.0 && hi < 1.0 && lo < hi)) throw ConfigError("edge_width: need 0 < lo < hi < 1");

    const double pmin = *std::min_element(profile.begin(), profile.end());
    const double pmax = *std::max_element(profile.begin(), profile.end());
    if (pmax <= pmin) throw NoEdge("edge_width: flat profile");
    const double vlo = pmin + lo * (pmax - pmin);
    const double vhi = pmin + hi * (pmax - pmin);

    auto crossing = [&](int i, double level) {
        // linear interpolation inside [i, i+1]
        return i + (level - profile[i]) / (profile[i + 1] - profile[i]);
    };

    // Search monotone runs for one spanning both thresholds, either direction.
    int i = 0;
    while (i + 1 < n) {
        int j = i;
        const bool rising = profile[j + 1] >= profile[j];
        while (j + 1 < n && (rising ? profile[j + 1] >= profile[j] : profile[j + 1] <= profile[j]))
            ++j;
        const double a = profile[i], b = profile[j];
        const double runlo = std::min(a, b), runhi = std::max(a, b);
        if (runlo <= vlo && runhi >= vhi) {
            double xlo = -1.0, xhi = -1.0;
            for (int s = i; s < j; ++s) {
                const double p0 = profile[s], p1 = profile[s + 1];
                const double lo_in = (p0 - vlo) * (p1 - vlo);
                const double hi_in = (p0 - vhi) * (p1 - vhi);
                if (xlo < 0.0 && lo_in <= 0.0 && p0 != p1) xlo = crossing(s, vlo);
                if (xhi < 0.0 && hi_in <= 0.0 && p0 != p1) xhi = crossing(s, vhi);
            }
            if (xlo >= 0.0 && xhi >= 0.0) return std::abs(xhi - xlo) * dx;
        }
        i = j > i ? j : i + 1;
    }
    throw NoEdge("edge_width: no monotone edge spans the thresholds");
}

double transmitted_power_fraction(const ComplexField2D& out, const ComplexField2D& in) {
    require_same_grid(out.grid(), in.grid(), "transmitted_power_fraction");
    const double pin = field_power(in);
    if (!(pin > 0.0)) throw ZeroInput("transmitted_power_fraction: zero input power");
    return field_power(out) / pin;
}

std::vector<double> horizontal_profile(const IntensityImage& img, const PixelRect& win) {
    PixelRect w = win;
    clip_to_grid(w, img.grid);
    double total = 0.0, ysum = 0.0;
    for (int iy = w.y0; iy <= w.y1; ++iy)
        for (int ix = w.x0; ix <= w.x1; ++ix) {
            total += img.at(ix, iy);
            ysum += img.at(ix, iy) * iy;
        }
    const int row =
        total > 0.0 ? static_cast<int>(std::lround(ysum / total)) : (w.y0 + w.y1) / 2;
    std::vector<double> profile;
    profile.reserve(static_cast<std::size_t>(w.width()));
    for (int ix = w.x0; ix <= w.x1; ++ix) profile.push_back(img.at(ix, row));
    return profile;
}

std::vector<double> horizontal_profile(const IntensityImage& img) {
    return horizontal_profile(img, full_frame(img.grid));
}

PixelRect support_window(const IntensityImage& img, double frac, int dilate_px) {
    const GridSpec& g = img.grid;
    double peak = 0.0;
    for (double v : img.values) peak = std::max(peak, v);
    if (!(peak > 0.0)) throw ZeroInput("support_window: empty image");
    const double level = frac * peak;
    PixelRect r{g.nx, -1, g.ny, -1};
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            if (img.at(ix, iy) >= level) {
                r.x0 = std::min(r.x0, ix);
                r.x1 = std::max(r.x1, ix);
                r.y0 = std::min(r.y0, iy);
                r.y1 = std::max(r.y1, iy);
            }
    r.x0 -= dilate_px;
    r.x1 += dilate_px;
    r.y0 -= dilate_px;
    r.y1 += dilate_px;
    clip_to_grid(r, g);
    return r;
}

} // namespace cptclone
