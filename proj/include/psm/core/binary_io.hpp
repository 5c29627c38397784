#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "psm/core/errors.hpp"

namespace psm {

/// Little-endian primitive writer used by the PSMD and PSMW formats.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  template <class T>
  void put(T value) {
    static_assert(std::is_arithmetic_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    out_.write(reinterpret_cast<const char*>(bytes), sizeof(T));
  }
  void put_doubles(const std::vector<double>& v) {
    for (double x : v) put(x);
  }
  void put_raw(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  template <class T>
  T get() {
    static_assert(std::is_arithmetic_v<T>);
    unsigned char bytes[sizeof(T)];
    in_.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (in_.gcount() != static_cast<std::streamsize>(sizeof(T))) {
      throw IoError(what_ + ": unexpected end of file");
    }
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
  std::vector<double> get_doubles(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = get<double>();
    return v;
  }
  void expect_magic(const char (&magic)[5]) {
    char buf[4];
    in_.read(buf, 4);
    if (in_.gcount() != 4 || std::memcmp(buf, magic, 4) != 0) {
      throw IoError(what_ + ": bad magic (expected " + std::string(magic, 4) + ")");
    }
  }

 private:
  std::istream& in_;
  std::string what_;
};

}  // namespace psm
