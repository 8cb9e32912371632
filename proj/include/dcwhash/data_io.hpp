// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dcwhash/matrix.hpp"

namespace dcwhash {

struct FeatureMatrix {
  Matrix values;  // n x d
  std::optional<std::vector<std::uint32_t>> labels;

  std::size_t size() const { return values.rows(); }
  std::size_t dims() const { return values.cols(); }
};

// MNIST IDX pair (images 0x00000803, labels 0x00000801, big-endian header).
// Pixels are scaled to [0,1].
FeatureMatrix load_mnist_idx(const std::string& images_path, const std::string& labels_path);
Matrix read_idx_images(std::istream& in, const std::string& source);
std::vector<std::uint32_t> read_idx_labels(std::istream& in, const std::string& source);

// "FTRX" feature file: magic, u32 version=1, u64 n, u64 d, n*d f32 row-major.
void write_features(std::ostream& out, const Matrix& values);
void save_features(const std::string& path, const Matrix& values);
Matrix read_features(std::istream& in, const std::string& source);

// "LBLS" label file: magic, u32 version=1, u64 n, n u32.
void write_labels(std::ostream& out, const std::vector<std::uint32_t>& labels);
void save_labels(const std::string& path, const std::vector<std::uint32_t>& labels);
std::vector<std::uint32_t> read_labels(std::istream& in, const std::string& source);

// Dispatch on the file's leading bytes: FTRX or IDX images.
Matrix load_features(const std::string& path);
// LBLS or IDX labels.
std::vector<std::uint32_t> load_labels(const std::string& path);

struct SplitSpec {
  std::size_t queries_per_class = 1000;
  std::uint64_t seed = 0;
};

struct Split {
  FeatureMatrix query;
  FeatureMatrix retrieval;  // also the training set
  std::vector<std::size_t> query_indices;      // ascending source rows
  std::vector<std::size_t> retrieval_indices;  // ascending source rows
};

// Per class, queries_per_class rows drawn uniformly without replacement go to
// the query set; everything else is retrieval.
Split split(const FeatureMatrix& data, const SplitSpec& spec);

}  // namespace dcwhash
