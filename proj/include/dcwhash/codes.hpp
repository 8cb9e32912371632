// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcwhash/matrix.hpp"

namespace dcwhash {

// n packed m-bit codes. Bit i of a code is bit (i % 64) of word (i / 64);
// padding bits past m in the last word are always zero.
class CodeSet {
 public:
  CodeSet() = default;
  CodeSet(std::size_t n, std::size_t m);
  CodeSet(std::size_t n, std::size_t m, std::vector<std::uint64_t> words,
          std::optional<std::vector<std::uint32_t>> labels = std::nullopt);

  std::size_t size() const { return n_; }
  std::size_t bits() const { return m_; }
  std::size_t words_per_code() const { return words_per_code_; }

  std::span<const std::uint64_t> code(std::size_t i) const {
    return {words_.data() + i * words_per_code_, words_per_code_};
  }
  bool bit(std::size_t i, std::size_t b) const {
    return (words_[i * words_per_code_ + b / 64] >> (b % 64)) & 1u;
  }
  void set_bit(std::size_t i, std::size_t b, bool value);

  const std::vector<std::uint64_t>& words() const { return words_; }
  const std::optional<std::vector<std::uint32_t>>& labels() const { return labels_; }
  void set_labels(std::vector<std::uint32_t> labels);

  friend bool operator==(const CodeSet&, const CodeSet&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t words_per_code_ = 0;
  std::vector<std::uint64_t> words_;
  std::optional<std::vector<std::uint32_t>> labels_;
};

// Bit i set iff latent(r, i) > threshold.
CodeSet binarize(const Matrix& latent, double threshold = 0.5);

// Popcount of the XOR over packed words.
std::size_t hamming(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

struct Neighbor {
  std::uint32_t index = 0;
  std::uint32_t distance = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct RetrievalResult {
  std::size_t query = 0;
  std::vector<Neighbor> neighbors;  // ascending distance, ties by ascending index
};

// Full ranking of the database for one query: a bucket sort on distance,
// stable in database index.
std::vector<Neighbor> rank_database(std::span<const std::uint64_t> query, const CodeSet& database);

// Exact linear scan keeping the r nearest per query.
std::vector<RetrievalResult> top_r(const CodeSet& queries, const CodeSet& database, std::size_t r);

// Random-projection LSH baseline: bit k = (x . w_k > t_k), where t_k is the
// median projection over the fitting data. Directions are canonicalized so
// their first nonzero component is positive.
struct LshHasher {
  Matrix directions;  // m x d
  std::vector<double> thresholds;

  CodeSet encode(const Matrix& data) const;
};

LshHasher fit_lsh(const Matrix& data, std::size_t m, std::uint64_t seed);
// fit_lsh(data, m, seed).encode(data)
CodeSet lsh_codes(const Matrix& data, std::size_t m, std::uint64_t seed);

// "HCDS" file: magic, u32 version, u64 n, u32 m, u8 labels flag, packed words
// row-major, then u32 labels when flagged.
void write_codes(std::ostream& out, const CodeSet& codes);
void save_codes(const std::string& path, const CodeSet& codes);
CodeSet read_codes(std::istream& in, const std::string& source);
CodeSet load_codes(const std::string& path);

}  // namespace dcwhash
