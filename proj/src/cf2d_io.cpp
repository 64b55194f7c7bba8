#include "cptclone/cf2d_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace cptclone {

static_assert(std::endian::native == std::endian::little,
              "CF2D I/O assumes a little-endian host");

namespace {

constexpr char magic[4] = {'C', 'F', '2', 'D'};
constexpr std::uint32_t version = 1;

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::ifstream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

} // namespace

void write_cf2d(const std::filesystem::path& path, const ComplexField2D& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_cf2d: cannot open " + path.string());
    const GridSpec& g = field.grid();
    out.write(magic, 4);
    put<std::uint32_t>(out, version);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.nx));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.ny));
    put<double>(out, g.dx);
    put<double>(out, g.dy);
    put<double>(out, g.wavelength);
    out.write(reinterpret_cast<const char*>(field.samples().data()),
              static_cast<std::streamsize>(field.samples().size() * sizeof(complexd)));
    if (!out) throw IoError("write_cf2d: write failed for " + path.string());
}

ComplexField2D read_cf2d(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_cf2d: cannot open " + path.string());
    char m[4];
    in.read(m, 4);
    if (!in || std::memcmp(m, magic, 4) != 0)
        throw IoError("read_cf2d: bad magic in " + path.string());
    if (get<std::uint32_t>(in) != version)
        throw IoError("read_cf2d: unsupported version in " + path.string());
    GridSpec g;
    g.nx = static_cast<int>(get<std::uint32_t>(in));
    g.ny = static_cast<int>(get<std::uint32_t>(in));
    g.dx = get<double>(in);
    g.dy = get<double>(in);
    g.wavelength = get<double>(in);
    if (!in) throw IoError("read_cf2d: truncated header in " + path.string());
    g.validate();
    ComplexField2D field(g);
    in.read(reinterpret_cast<char*>(field.samples().data()),
            static_cast<std::streamsize>(field.samples().size() * sizeof(complexd)));
    if (!in) throw IoError("read_cf2d: truncated samples in " + path.string());
    return field;
}

} // namespace cptclone
