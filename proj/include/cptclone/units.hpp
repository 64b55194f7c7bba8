#ifndef CPTCLONE_UNITS_HPP
#define CPTCLONE_UNITS_HPP

#include <numbers>

namespace cptclone::units {

inline constexpr double pi = std::numbers::pi;

// Rb D1 line (5S1/2 -> 5P1/2).
inline constexpr double rb_d1_wavelength = 795e-9;                 // m
inline constexpr double rb_d1_gamma = 2.0 * pi * 5.75e6;           // rad/s, natural linewidth

// Reference anchor for the temperature -> density mapping.
inline constexpr double density_anchor_celsius = 76.0;
inline constexpr double density_anchor_per_m3 = 2.5e18;            // 2.5e12 cm^-3

// Ordinary frequency in MHz -> angular frequency in rad/s.
constexpr double mhz_to_angular(double mhz) { return 2.0 * pi * 1e6 * mhz; }
constexpr double angular_to_mhz(double w) { return w / (2.0 * pi * 1e6); }

constexpr double per_cm3_to_per_m3(double n) { return n * 1e6; }
constexpr double per_m3_to_per_cm3(double n) { return n * 1e-6; }

// Rb number density vs cell temperature, Alcock liquid-phase vapor pressure
// rescaled so the reference anchor (76 C <-> 2.5e12 cm^-3) is exact.
double density_from_temperature(double celsius);

} // namespace cptclone::units

#endif
