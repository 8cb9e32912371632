// SPDX-License-Identifier: Apache-2.0
#include "dcwhash/codes.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <random>

#include "binary_io.hpp"
#include "dcwhash/error.hpp"
#include "dcwhash/rng.hpp"

namespace dcwhash {
namespace {

constexpr char kCodesMagic[] = "HCDS";
constexpr std::uint32_t kCodesVersion = 1;

std::size_t words_for(std::size_t m) { return (m + 63) / 64; }

// Plain dot products, so equal rows always project to equal values.
Matrix project_rows(const Matrix& data, const Matrix& directions) {
  Matrix proj(data.rows(), directions.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const auto x = data.row(r);
    for (std::size_t k = 0; k < directions.rows(); ++k) {
      const auto w = directions.row(k);
      double acc = 0.0;
      for (std::size_t c = 0; c < x.size(); ++c) acc += x[c] * w[c];
      proj(r, k) = acc;
    }
  }
  return proj;
}

std::uint64_t tail_mask(std::size_t m) {
  const std::size_t used = m % 64;
  return used == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << used) - 1;
}

}  // namespace

CodeSet::CodeSet(std::size_t n, std::size_t m)
    : n_(n), m_(m), words_per_code_(words_for(m)), words_(n * words_for(m), 0) {
  if (m == 0) throw UsageError("code length must be positive");
}

CodeSet::CodeSet(std::size_t n, std::size_t m, std::vector<std::uint64_t> words,
                 std::optional<std::vector<std::uint32_t>> labels)
    : n_(n), m_(m), words_per_code_(words_for(m)), words_(std::move(words)) {
  if (m == 0) throw UsageError("code length must be positive");
  if (words_.size() != n_ * words_per_code_) {
    throw SizeError("code words: expected " + std::to_string(n_ * words_per_code_) + ", got " +
                    std::to_string(words_.size()));
  }
  const std::uint64_t mask = tail_mask(m_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (words_[i * words_per_code_ + words_per_code_ - 1] & ~mask) {
      throw FormatError("code " + std::to_string(i) + " has bits set past m=" +
                        std::to_string(m_));
    }
  }
  if (labels) set_labels(std::move(*labels));
}

void CodeSet::set_bit(std::size_t i, std::size_t b, bool value) {
  auto& w = words_[i * words_per_code_ + b / 64];
  const std::uint64_t mask = std::uint64_t{1} << (b % 64);
  w = value ? (w | mask) : (w & ~mask);
}

void CodeSet::set_labels(std::vector<std::uint32_t> labels) {
  if (labels.size() != n_) {
    throw SizeError("labels: expected " + std::to_string(n_) + ", got " +
                    std::to_string(labels.size()));
  }
  labels_ = std::move(labels);
}

CodeSet binarize(const Matrix& latent, double threshold) {
  CodeSet codes(latent.rows(), latent.cols());
  for (std::size_t r = 0; r < latent.rows(); ++r) {
    const auto row = latent.row(r);
    for (std::size_t b = 0; b < row.size(); ++b) {
      if (row[b] > threshold) codes.set_bit(r, b, true);
    }
  }
  return codes;
}

std::size_t hamming(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) {
    throw SizeError("hamming: code lengths differ (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + " words)");
  }
  std::size_t d = 0;
  for (std::size_t w = 0; w < a.size(); ++w) d += static_cast<std::size_t>(std::popcount(a[w] ^ b[w]));
  return d;
}

std::vector<Neighbor> rank_database(std::span<const std::uint64_t> query,
                                    const CodeSet& database) {
  if (query.size() != database.words_per_code()) {
    throw SizeError("rank_database: query and database code lengths differ");
  }
  const std::size_t n = database.size();
  std::vector<std::uint32_t> dist(n);
  std::vector<std::size_t> count(database.bits() + 2, 0);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = static_cast<std::uint32_t>(hamming(query, database.code(i)));
    ++count[dist[i] + 1];
  }
  for (std::size_t d = 1; d < count.size(); ++d) count[d] += count[d - 1];
  std::vector<Neighbor> ranked(n);
  for (std::size_t i = 0; i < n; ++i) {
    ranked[count[dist[i]]++] = {static_cast<std::uint32_t>(i), dist[i]};
  }
  return ranked;
}

std::vector<RetrievalResult> top_r(const CodeSet& queries, const CodeSet& database,
                                   std::size_t r) {
  if (queries.bits() != database.bits()) {
    throw SizeError("top_r: query codes have m=" + std::to_string(queries.bits()) +
                    ", database has m=" + std::to_string(database.bits()));
  }
  if (r > database.size()) {
    throw SizeError("top_r: r=" + std::to_string(r) + " exceeds database size " +
                    std::to_string(database.size()));
  }
  std::vector<RetrievalResult> out(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    auto ranked = rank_database(queries.code(q), database);
    ranked.resize(r);
    out[q] = {q, std::move(ranked)};
  }
  return out;
}

LshHasher fit_lsh(const Matrix& data, std::size_t m, std::uint64_t seed) {
  if (m == 0) throw UsageError("lsh: m must be at least 1");
  if (data.rows() == 0) throw SizeError("lsh: cannot fit thresholds on an empty matrix");
  const std::size_t n = data.rows();
  Rng rng = make_stream(seed, "lsh");
  std::normal_distribution<double> normal(0.0, 1.0);

  LshHasher h{Matrix(m, data.cols()), std::vector<double>(m)};
  for (std::size_t k = 0; k < m; ++k) {
    auto dir = h.directions.row(k);
    for (double& v : dir) v = normal(rng);
    const auto lead = std::find_if(dir.begin(), dir.end(), [](double v) { return v != 0.0; });
    if (lead != dir.end() && *lead < 0.0) {
      for (double& v : dir) v = -v;
    }
  }
  const Matrix proj = project_rows(data, h.directions);
  std::vector<double> col(n);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t r = 0; r < n; ++r) col[r] = proj(r, k);
    std::sort(col.begin(), col.end());
    h.thresholds[k] = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  return h;
}

CodeSet LshHasher::encode(const Matrix& data) const {
  if (data.cols() != directions.cols()) {
    throw DimensionError("lsh encode: data has " + std::to_string(data.cols()) +
                         " columns, hasher expects " + std::to_string(directions.cols()));
  }
  const Matrix proj = project_rows(data, directions);
  CodeSet codes(data.rows(), directions.rows());
  for (std::size_t r = 0; r < proj.rows(); ++r) {
    for (std::size_t k = 0; k < proj.cols(); ++k) {
      if (proj(r, k) > thresholds[k]) codes.set_bit(r, k, true);
    }
  }
  return codes;
}

CodeSet lsh_codes(const Matrix& data, std::size_t m, std::uint64_t seed) {
  return fit_lsh(data, m, seed).encode(data);
}

void write_codes(std::ostream& out, const CodeSet& codes) {
  detail::BinaryWriter w(out);
  w.magic(kCodesMagic);
  w.u32(kCodesVersion);
  w.u64(codes.size());
  w.u32(static_cast<std::uint32_t>(codes.bits()));
  w.u8(codes.labels() ? 1 : 0);
  for (auto word : codes.words()) w.u64(word);
  if (codes.labels()) {
    for (auto l : *codes.labels()) w.u32(l);
  }
  w.check("code set");
}

void save_codes(const std::string& path, const CodeSet& codes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  write_codes(out, codes);
}

CodeSet read_codes(std::istream& in, const std::string& source) {
  detail::BinaryReader r(in, source);
  r.expect_magic(kCodesMagic);
  const auto version = r.u32();
  if (version != kCodesVersion) {
    throw FormatError(source + ": unsupported code file version " + std::to_string(version));
  }
  const auto n = r.u64();
  const auto m = r.u32();
  if (m == 0) throw FormatError(source + ": code length 0 at byte offset 16");
  const auto flag = r.u8();
  if (flag > 1) throw FormatError(source + ": bad labels flag at byte offset 20");
  if (n > (std::uint64_t{1} << 40)) throw FormatError(source + ": implausible code count");
  std::vector<std::uint64_t> words(n * words_for(m));
  r.bytes(words.data(), words.size() * sizeof(std::uint64_t));
  std::optional<std::vector<std::uint32_t>> labels;
  if (flag) {
    labels.emplace(n);
    r.bytes(labels->data(), labels->size() * sizeof(std::uint32_t));
  }
  r.expect_end();
  return CodeSet(n, m, std::move(words), std::move(labels));
}

CodeSet load_codes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open code file " + path);
  return read_codes(in, path);
}

}  // namespace dcwhash
