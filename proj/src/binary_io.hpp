// SPDX-License-Identifier: Apache-2.0
// Little/big-endian primitives shared by the file formats. Internal.
#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dcwhash::detail {

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void magic(std::string_view tag) { out_.write(tag.data(), static_cast<std::streamsize>(tag.size())); }
  void u8(std::uint8_t v) { put(&v, 1); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void check(const std::string& what);

 private:
  void put(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  std::ostream& out_;
};

// Reads with byte-offset tracking so truncation errors can say where.
class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  void expect_magic(std::string_view tag);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::uint32_t u32_be();
  float f32();
  double f64();
  void bytes(void* dst, std::size_t n);
  std::uint64_t offset() const { return offset_; }
  const std::string& source() const { return source_; }
  // Throws unless the stream is exhausted.
  void expect_end();

 private:
  std::istream& in_;
  std::string source_;
  std::uint64_t offset_ = 0;
};

}  // namespace dcwhash::detail
