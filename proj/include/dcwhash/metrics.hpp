// SPDX-License-Identifier: Apache-2.0
//
// Retrieval metrics over ranked lists. A ranking is turned into a 0/1
// relevance vector (item relevant iff its label equals the query's label);
// the metrics operate on that vector:
//
//   Precision(R)  = hits in top R / R
//   AP            = (1/N_q) * sum_r Precision(r) * rel(r), over the full ranking
//   MAP           = mean AP over queries with at least one relevant item
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcwhash/codes.hpp"

namespace dcwhash {

class RelevanceJudge {
 public:
  RelevanceJudge(std::vector<std::uint32_t> query_labels,
                 std::vector<std::uint32_t> database_labels);

  bool relevant(std::size_t query, std::size_t item) const {
    return query_labels_[query] == database_labels_[item];
  }
  // N_q: relevant items in the whole database.
  std::size_t relevant_count(std::size_t query) const;
  std::size_t query_count() const { return query_labels_.size(); }
  std::size_t database_size() const { return database_labels_.size(); }

  std::vector<std::uint8_t> relevance(std::size_t query,
                                      std::span<const std::uint32_t> ranking) const;
  std::vector<std::uint8_t> relevance(std::size_t query, std::span<const Neighbor> ranking) const;

 private:
  std::vector<std::uint32_t> query_labels_;
  std::vector<std::uint32_t> database_labels_;
  std::vector<std::size_t> label_counts_;
  std::vector<std::uint32_t> label_keys_;
};

double precision_at(std::span<const std::uint8_t> relevance, std::size_t r);

// nullopt when the ranking holds no relevant item (N_q = 0).
std::optional<double> average_precision(std::span<const std::uint8_t> relevance);

// Mean of the defined APs; throws when none is defined.
double mean_average_precision(std::span<const std::optional<double>> aps);
double mean_average_precision(const std::vector<std::vector<std::uint32_t>>& rankings,
                              const RelevanceJudge& judge);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

// One point per rank; empty when N_q = 0.
std::vector<PrPoint> pr_curve(std::span<const std::uint8_t> relevance);

// 11-point interpolated curve (recall 0, 0.1, ..., 1) averaged over the given
// per-query curves. Interpolated precision at t is the best precision at any
// recall >= t.
std::vector<PrPoint> interpolate_11_point(const std::vector<std::vector<PrPoint>>& curves);

struct EvalOptions {
  std::vector<std::size_t> precision_ranks{1000};
  // 0 keeps the index tie-break; s > 0 averages over s random orderings of
  // each equal-distance group.
  std::size_t tie_shuffles = 0;
  std::uint64_t seed = 0;
};

struct MetricReport {
  double map = 0.0;
  std::vector<std::pair<std::size_t, double>> precision_at;
  std::size_t query_count = 0;
  std::size_t excluded_queries = 0;
  std::vector<std::optional<double>> per_query_ap;
  std::vector<PrPoint> pr_curve;

  // {"map", "precision_at": {"R": value}, "query_count", "excluded_queries"}
  std::string to_json() const;
};

// Hamming ranking of the full database for each query, then the metrics.
// Both code sets must carry labels.
MetricReport evaluate(const CodeSet& queries, const CodeSet& database, const EvalOptions& options);

void write_pr_csv(std::ostream& out, const std::vector<PrPoint>& curve);

struct CodeDiagnostics {
  std::vector<double> activation;  // mean of each bit
  std::vector<double> entropy;     // binary entropy of each bit, in bits
  double duplicate_fraction = 0.0; // (n - distinct codes) / n
};

CodeDiagnostics code_diagnostics(const CodeSet& codes);

}  // namespace dcwhash
