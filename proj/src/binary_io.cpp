// SPDX-License-Identifier: Apache-2.0
#include "binary_io.hpp"

#include <bit>

#include "dcwhash/error.hpp"

namespace dcwhash::detail {
namespace {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

}  // namespace

void BinaryWriter::u32(std::uint32_t v) { put(&v, sizeof v); }
void BinaryWriter::u64(std::uint64_t v) { put(&v, sizeof v); }
void BinaryWriter::f32(float v) { put(&v, sizeof v); }
void BinaryWriter::f64(double v) { put(&v, sizeof v); }

void BinaryWriter::check(const std::string& what) {
  out_.flush();
  if (!out_) throw FormatError("write failed: " + what);
}

void BinaryReader::bytes(void* dst, std::size_t n) {
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got != n) {
    throw FormatError(source_ + ": truncated at byte offset " + std::to_string(offset_ + got) +
                      " (needed " + std::to_string(n) + " bytes at offset " +
                      std::to_string(offset_) + ")");
  }
  offset_ += n;
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  bytes(got.data(), got.size());
  if (got != tag) {
    throw FormatError(source_ + ": bad magic at byte offset 0, expected \"" + std::string(tag) +
                      "\"");
  }
}

std::uint8_t BinaryReader::u8() {
  std::uint8_t v;
  bytes(&v, 1);
  return v;
}

std::uint32_t BinaryReader::u32() {
  std::uint32_t v;
  bytes(&v, sizeof v);
  return v;
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v;
  bytes(&v, sizeof v);
  return v;
}

std::uint32_t BinaryReader::u32_be() {
  unsigned char b[4];
  bytes(b, 4);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

float BinaryReader::f32() {
  float v;
  bytes(&v, sizeof v);
  return v;
}

double BinaryReader::f64() {
  double v;
  bytes(&v, sizeof v);
  return v;
}

void BinaryReader::expect_end() {
  if (in_.peek() != std::char_traits<char>::eof()) {
    throw FormatError(source_ + ": trailing data after byte offset " + std::to_string(offset_));
  }
}

}  // namespace dcwhash::detail
