#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "spsim/error.hpp"

namespace spsim::binary {

// Little-endian primitive encoding shared by snapshots and design records.

inline std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    return r;
  }
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  v = to_le(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void write_f64s(std::ostream& out, std::span<const double> values) {
  for (double v : values) write_f64(out, v);
}

inline void write_bytes(std::ostream& out, std::string_view bytes) {
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline void read_exact(std::istream& in, char* dst, std::size_t n, std::string_view what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw SchemaError("truncated file while reading " + std::string(what));
  }
}

inline std::uint64_t read_u64(std::istream& in, std::string_view what) {
  std::uint64_t v = 0;
  read_exact(in, reinterpret_cast<char*>(&v), sizeof v, what);
  return to_le(v);
}

inline double read_f64(std::istream& in, std::string_view what) {
  return std::bit_cast<double>(read_u64(in, what));
}

inline void read_f64s(std::istream& in, std::span<double> dst, std::string_view what) {
  for (double& v : dst) v = read_f64(in, what);
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  read_exact(in, got.data(), got.size(), "magic");
  if (got != magic) throw SchemaError("bad magic: expected " + std::string(magic));
}

}  // namespace spsim::binary
