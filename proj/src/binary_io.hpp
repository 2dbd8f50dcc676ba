#pragma once

// Little-endian primitives shared by the checkpoint and expert formats.

#include "common.hpp"

#include <bit>
#include <cstring>
#include <string>
#include <string_view>

namespace idrl::bin {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint32_t u32(const std::string& field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64(const std::string& field) {
    need(8, field);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

  std::string bytes(std::size_t n, const std::string& field) {
    need(n, field);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::string str(const std::string& field) { return bytes(u32(field), field); }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n, const std::string& field) const {
    if (data_.size() - pos_ < n) throw FormatError(field, "unexpected end of file");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace idrl::bin
