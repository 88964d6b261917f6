#pragma once

// Little-endian primitives shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "cvp/error.hpp"

namespace cvp::binio {

template <typename U>
void put_uint(std::ostream& out, U value) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  out.write(bytes, sizeof(U));
}

inline void put_f64(std::ostream& out, double v) { put_uint(out, std::bit_cast<std::uint64_t>(v)); }
inline void put_f32(std::ostream& out, float v) { put_uint(out, std::bit_cast<std::uint32_t>(v)); }

inline void put_string(std::ostream& out, std::string_view s) {
  put_uint(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

// Reads exactly n bytes or throws `kind`.
inline void get_bytes(std::istream& in, char* dst, std::size_t n, ErrorKind kind, const std::string& what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw Error(kind, "unexpected end of file while reading " + what);
  }
}

template <typename U>
U get_uint(std::istream& in, ErrorKind kind, const std::string& what) {
  unsigned char bytes[sizeof(U)];
  get_bytes(in, reinterpret_cast<char*>(bytes), sizeof(U), kind, what);
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

inline double get_f64(std::istream& in, ErrorKind kind, const std::string& what) {
  return std::bit_cast<double>(get_uint<std::uint64_t>(in, kind, what));
}

// Length-prefixed string; lengths above `limit` are rejected as BadHeader.
inline std::string get_string(std::istream& in, ErrorKind kind, const std::string& what,
                              std::uint32_t limit = 1u << 20) {
  const auto len = get_uint<std::uint32_t>(in, kind, what + " length");
  if (len > limit) throw Error(ErrorKind::BadHeader, what + " length " + std::to_string(len) + " is implausible");
  std::string s(len, '\0');
  if (len) get_bytes(in, s.data(), len, kind, what);
  return s;
}

inline bool at_eof(std::istream& in) {
  return in.peek() == std::char_traits<char>::eof();
}

}  // namespace cvp::binio
