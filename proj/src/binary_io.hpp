#pragma once

// Little-endian primitives shared by the checkpoint and snapshot formats.

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <type_traits>

namespace acerac::io {

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_integral_v<T>);
  std::array<unsigned char, sizeof(T)> buf{};
  auto u = static_cast<std::make_unsigned_t<T>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(u & 0xff);
    u = static_cast<decltype(u)>(u >> 8);
  }
  os.write(reinterpret_cast<const char*>(buf.data()), buf.size());
}

template <typename T>
T read_le(std::istream& is) {
  static_assert(std::is_integral_v<T>);
  std::array<unsigned char, sizeof(T)> buf{};
  is.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (!is) throw std::runtime_error("unexpected end of binary file");
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) u = static_cast<decltype(u)>((u << 8) | buf[i]);
  return static_cast<T>(u);
}

inline void write_f64(std::ostream& os, double v) {
  write_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
}

inline double read_f64(std::istream& is) {
  return std::bit_cast<double>(read_le<std::uint64_t>(is));
}

}  // namespace acerac::io
