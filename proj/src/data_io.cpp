// SPDX-License-Identifier: Apache-2.0
#include "dcwhash/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "binary_io.hpp"
#include "dcwhash/error.hpp"
#include "dcwhash/rng.hpp"

namespace dcwhash {
namespace {

constexpr char kFeatureMagic[] = "FTRX";
constexpr char kLabelMagic[] = "LBLS";
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;
// Refuse headers that would ask for absurd allocations.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return in;
}

std::ofstream create_binary(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  return out;
}

std::string leading_bytes(const std::string& path) {
  auto in = open_binary(path);
  std::string head(4, '\0');
  in.read(head.data(), 4);
  head.resize(static_cast<std::size_t>(in.gcount()));
  return head;
}

std::uint32_t be32(const std::string& s) {
  return (std::uint32_t{static_cast<unsigned char>(s[0])} << 24) |
         (std::uint32_t{static_cast<unsigned char>(s[1])} << 16) |
         (std::uint32_t{static_cast<unsigned char>(s[2])} << 8) |
         std::uint32_t{static_cast<unsigned char>(s[3])};
}

void check_version(detail::BinaryReader& r) {
  const auto v = r.u32();
  if (v != kFormatVersion) {
    throw FormatError(r.source() + ": unsupported version " + std::to_string(v) +
                      " at byte offset 4");
  }
}

}  // namespace

Matrix read_idx_images(std::istream& in, const std::string& source) {
  detail::BinaryReader r(in, source);
  const auto magic = r.u32_be();
  if (magic != kIdxImages) {
    throw FormatError(source + ": bad IDX image magic at byte offset 0");
  }
  const std::uint64_t n = r.u32_be();
  const std::uint64_t rows = r.u32_be();
  const std::uint64_t cols = r.u32_be();
  const std::uint64_t d = rows * cols;
  if (n * d > kMaxElements) throw FormatError(source + ": implausible IDX dimensions");
  std::vector<unsigned char> pixels(n * d);
  r.bytes(pixels.data(), pixels.size());
  r.expect_end();
  Matrix out(n, d);
  auto v = out.values();
  for (std::size_t i = 0; i < pixels.size(); ++i) v[i] = static_cast<double>(pixels[i]) / 255.0;
  return out;
}

std::vector<std::uint32_t> read_idx_labels(std::istream& in, const std::string& source) {
  detail::BinaryReader r(in, source);
  const auto magic = r.u32_be();
  if (magic != kIdxLabels) {
    throw FormatError(source + ": bad IDX label magic at byte offset 0");
  }
  const std::uint64_t n = r.u32_be();
  if (n > kMaxElements) throw FormatError(source + ": implausible IDX label count");
  std::vector<unsigned char> raw(n);
  r.bytes(raw.data(), raw.size());
  r.expect_end();
  return {raw.begin(), raw.end()};
}

FeatureMatrix load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  auto img_in = open_binary(images_path);
  auto lbl_in = open_binary(labels_path);
  FeatureMatrix fm;
  fm.values = read_idx_images(img_in, images_path);
  fm.labels = read_idx_labels(lbl_in, labels_path);
  if (fm.labels->size() != fm.values.rows()) {
    throw FormatError("IDX count mismatch: " + std::to_string(fm.values.rows()) + " images in " +
                      images_path + " but " + std::to_string(fm.labels->size()) + " labels in " +
                      labels_path);
  }
  return fm;
}

void write_features(std::ostream& out, const Matrix& values) {
  if (!values.all_finite()) throw NumericError("write_features: non-finite feature values");
  detail::BinaryWriter w(out);
  w.magic(kFeatureMagic);
  w.u32(kFormatVersion);
  w.u64(values.rows());
  w.u64(values.cols());
  for (double v : values.values()) w.f32(static_cast<float>(v));
  w.check("feature file");
}

void save_features(const std::string& path, const Matrix& values) {
  auto out = create_binary(path);
  write_features(out, values);
}

Matrix read_features(std::istream& in, const std::string& source) {
  detail::BinaryReader r(in, source);
  r.expect_magic(kFeatureMagic);
  check_version(r);
  const auto n = r.u64();
  const auto d = r.u64();
  if (n != 0 && d > kMaxElements / n) {
    throw FormatError(source + ": implausible feature dimensions " + std::to_string(n) + "x" +
                      std::to_string(d));
  }
  std::vector<float> raw(n * d);
  r.bytes(raw.data(), raw.size() * sizeof(float));
  r.expect_end();
  Matrix out(n, d);
  auto v = out.values();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i])) {
      throw FormatError(source + ": non-finite value at byte offset " +
                        std::to_string(24 + i * sizeof(float)));
    }
    v[i] = raw[i];
  }
  return out;
}

void write_labels(std::ostream& out, const std::vector<std::uint32_t>& labels) {
  detail::BinaryWriter w(out);
  w.magic(kLabelMagic);
  w.u32(kFormatVersion);
  w.u64(labels.size());
  for (auto l : labels) w.u32(l);
  w.check("label file");
}

void save_labels(const std::string& path, const std::vector<std::uint32_t>& labels) {
  auto out = create_binary(path);
  write_labels(out, labels);
}

std::vector<std::uint32_t> read_labels(std::istream& in, const std::string& source) {
  detail::BinaryReader r(in, source);
  r.expect_magic(kLabelMagic);
  check_version(r);
  const auto n = r.u64();
  if (n > kMaxElements) throw FormatError(source + ": implausible label count");
  std::vector<std::uint32_t> labels(n);
  r.bytes(labels.data(), labels.size() * sizeof(std::uint32_t));
  r.expect_end();
  return labels;
}

Matrix load_features(const std::string& path) {
  const auto head = leading_bytes(path);
  auto in = open_binary(path);
  if (head == kFeatureMagic) return read_features(in, path);
  if (head.size() == 4 && be32(head) == kIdxImages) return read_idx_images(in, path);
  throw FormatError(path + ": not a feature file (expected FTRX or IDX image magic)");
}

std::vector<std::uint32_t> load_labels(const std::string& path) {
  const auto head = leading_bytes(path);
  auto in = open_binary(path);
  if (head == kLabelMagic) return read_labels(in, path);
  if (head.size() == 4 && be32(head) == kIdxLabels) return read_idx_labels(in, path);
  throw FormatError(path + ": not a label file (expected LBLS or IDX label magic)");
}

Split split(const FeatureMatrix& data, const SplitSpec& spec) {
  if (!data.labels) throw UsageError("split: labels are required");
  const auto& labels = *data.labels;
  if (labels.size() != data.size()) throw SizeError("split: label count does not match rows");

  std::map<std::uint32_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  Rng rng = make_stream(spec.seed, "split");
  std::vector<char> is_query(data.size(), 0);
  for (auto& [label, members] : by_class) {
    if (members.size() < spec.queries_per_class) {
      throw SizeError("split: class " + std::to_string(label) + " has " +
                      std::to_string(members.size()) + " members, fewer than " +
                      std::to_string(spec.queries_per_class) + " queries per class");
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t k = 0; k < spec.queries_per_class; ++k) is_query[members[k]] = 1;
  }

  Split out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (is_query[i] ? out.query_indices : out.retrieval_indices).push_back(i);
  }
  auto take = [&](const std::vector<std::size_t>& idx) {
    FeatureMatrix fm;
    fm.values = data.values.gather_rows(idx);
    std::vector<std::uint32_t> l(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) l[k] = labels[idx[k]];
    fm.labels = std::move(l);
    return fm;
  };
  out.query = take(out.query_indices);
  out.retrieval = take(out.retrieval_indices);
  return out;
}

}  // namespace dcwhash
