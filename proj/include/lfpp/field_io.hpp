#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "lfpp/errors.hpp"
#include "lfpp/grid.hpp"

namespace lfpp {

// Field dump format (bit-exact, little-endian):
//   magic "LFPP" | version u32 = 1 | generator u8 | width u32 | height u32
//   | mesh f64 | origin 2xf64 | delta f64 | delta' f64 | seed u64
//   | width*height f64 values, row-major.

namespace io_detail {

static_assert(std::endian::native == std::endian::little,
              "field dump writer assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DomainError("field dump: truncated input");
    return v;
}

}  // namespace io_detail

inline void write_field(std::ostream& os, const FieldSample& f) {
    using namespace io_detail;
    os.write("LFPP", 4);
    put<std::uint32_t>(os, 1u);
    put<std::uint8_t>(os, static_cast<std::uint8_t>(f.generator));
    put<std::uint32_t>(os, f.grid.width);
    put<std::uint32_t>(os, f.grid.height);
    put<double>(os, f.grid.mesh);
    put<double>(os, f.grid.origin.x);
    put<double>(os, f.grid.origin.y);
    put<double>(os, f.band.delta);
    put<double>(os, f.band.delta_prime);
    put<std::uint64_t>(os, f.seed);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

inline FieldSample read_field(std::istream& is) {
    using namespace io_detail;
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "LFPP", 4) != 0)
        throw DomainError("field dump: bad magic");
    const auto version = get<std::uint32_t>(is);
    if (version != 1) throw DomainError("field dump: unsupported version");
    FieldSample f;
    f.generator = static_cast<Generator>(get<std::uint8_t>(is));
    const auto w = get<std::uint32_t>(is);
    const auto h = get<std::uint32_t>(is);
    const auto mesh = get<double>(is);
    const auto ox = get<double>(is);
    const auto oy = get<double>(is);
    f.grid = GridSpec(w, h, mesh, {ox, oy});
    f.band.delta = get<double>(is);
    f.band.delta_prime = get<double>(is);
    f.seed = get<std::uint64_t>(is);
    f.values.resize(f.grid.cells());
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!is) throw DomainError("field dump: truncated values");
    return f;
}

inline void save_field(const std::string& path, const FieldSample& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DomainError("cannot open for writing: " + path);
    write_field(os, f);
}

inline FieldSample load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DomainError("cannot open for reading: " + path);
    return read_field(is);
}

}  // namespace lfpp
