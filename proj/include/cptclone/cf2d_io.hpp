#ifndef CPTCLONE_CF2D_IO_HPP
#define CPTCLONE_CF2D_IO_HPP

#include <filesystem>

#include "cptclone/grid.hpp"

namespace cptclone {

// "CF2D" field dump: magic "CF2D", u32 version = 1, u32 nx, u32 ny,
// f64 dx (m), f64 dy (m), f64 wavelength (m), then nx*ny samples as
// interleaved little-endian f64 (re, im), row-major (y slow, x fast).
// All integers little-endian.
void write_cf2d(const std::filesystem::path& path, const ComplexField2D& field);
ComplexField2D read_cf2d(const std::filesystem::path& path);

} // namespace cptclone

#endif
