// SPDX-License-Identifier: Apache-2.0
#include "dcwhash/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>

#include "json.hpp"

#include "dcwhash/error.hpp"
#include "dcwhash/rng.hpp"

namespace dcwhash {
namespace {

// Randomly reorders each run of equal distances.
void shuffle_ties(std::vector<Neighbor>& ranked, Rng& rng) {
  std::size_t begin = 0;
  while (begin < ranked.size()) {
    std::size_t end = begin + 1;
    while (end < ranked.size() && ranked[end].distance == ranked[begin].distance) ++end;
    std::shuffle(ranked.begin() + static_cast<std::ptrdiff_t>(begin),
                 ranked.begin() + static_cast<std::ptrdiff_t>(end), rng);
    begin = end;
  }
}

double binary_entropy(double q) {
  if (q <= 0.0 || q >= 1.0) return 0.0;
  return -(q * std::log2(q) + (1.0 - q) * std::log2(1.0 - q));
}

}  // namespace

RelevanceJudge::RelevanceJudge(std::vector<std::uint32_t> query_labels,
                               std::vector<std::uint32_t> database_labels)
    : query_labels_(std::move(query_labels)), database_labels_(std::move(database_labels)) {
  label_keys_ = database_labels_;
  std::sort(label_keys_.begin(), label_keys_.end());
  label_keys_.erase(std::unique(label_keys_.begin(), label_keys_.end()), label_keys_.end());
  label_counts_.assign(label_keys_.size(), 0);
  for (auto l : database_labels_) {
    const auto it = std::lower_bound(label_keys_.begin(), label_keys_.end(), l);
    ++label_counts_[static_cast<std::size_t>(it - label_keys_.begin())];
  }
}

std::size_t RelevanceJudge::relevant_count(std::size_t query) const {
  const auto l = query_labels_.at(query);
  const auto it = std::lower_bound(label_keys_.begin(), label_keys_.end(), l);
  if (it == label_keys_.end() || *it != l) return 0;
  return label_counts_[static_cast<std::size_t>(it - label_keys_.begin())];
}

std::vector<std::uint8_t> RelevanceJudge::relevance(std::size_t query,
                                                    std::span<const std::uint32_t> ranking) const {
  std::vector<std::uint8_t> rel(ranking.size());
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (ranking[i] >= database_labels_.size()) {
      throw SizeError("ranking refers to database item " + std::to_string(ranking[i]) +
                      " beyond database size " + std::to_string(database_labels_.size()));
    }
    rel[i] = relevant(query, ranking[i]) ? 1 : 0;
  }
  return rel;
}

std::vector<std::uint8_t> RelevanceJudge::relevance(std::size_t query,
                                                    std::span<const Neighbor> ranking) const {
  std::vector<std::uint32_t> ids(ranking.size());
  for (std::size_t i = 0; i < ranking.size(); ++i) ids[i] = ranking[i].index;
  return relevance(query, std::span<const std::uint32_t>(ids));
}

double precision_at(std::span<const std::uint8_t> relevance, std::size_t r) {
  if (r == 0) throw UsageError("precision_at: R must be at least 1");
  if (r > relevance.size()) {
    throw SizeError("precision_at: R=" + std::to_string(r) + " exceeds ranking length " +
                    std::to_string(relevance.size()));
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < r; ++i) hits += relevance[i];
  return static_cast<double>(hits) / static_cast<double>(r);
}

std::optional<double> average_precision(std::span<const std::uint8_t> relevance) {
  if (relevance.empty()) throw SizeError("average_precision: empty database");
  // Extended precision so the result is the correctly rounded value for
  // small instances.
  long double sum = 0.0L;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < relevance.size(); ++r) {
    if (relevance[r]) {
      ++hits;
      sum += static_cast<long double>(hits) / static_cast<long double>(r + 1);
    }
  }
  if (hits == 0) return std::nullopt;
  return static_cast<double>(sum / static_cast<long double>(hits));
}

double mean_average_precision(std::span<const std::optional<double>> aps) {
  double sum = 0.0;
  std::size_t valid = 0;
  for (const auto& ap : aps) {
    if (ap) {
      sum += *ap;
      ++valid;
    }
  }
  if (valid == 0) throw UsageError("MAP: no query has a relevant item");
  return sum / static_cast<double>(valid);
}

double mean_average_precision(const std::vector<std::vector<std::uint32_t>>& rankings,
                              const RelevanceJudge& judge) {
  if (rankings.size() != judge.query_count()) {
    throw SizeError("MAP: ranking count does not match query count");
  }
  std::vector<std::optional<double>> aps(rankings.size());
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    if (rankings[q].size() != judge.database_size()) {
      throw SizeError("MAP: ranking for query " + std::to_string(q) +
                      " does not cover the database");
    }
    aps[q] = average_precision(judge.relevance(q, rankings[q]));
  }
  return mean_average_precision(aps);
}

std::vector<PrPoint> pr_curve(std::span<const std::uint8_t> relevance) {
  std::size_t total = 0;
  for (auto v : relevance) total += v;
  std::vector<PrPoint> curve;
  if (total == 0) return curve;
  curve.reserve(relevance.size());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < relevance.size(); ++r) {
    hits += relevance[r];
    curve.push_back({static_cast<double>(hits) / static_cast<double>(total),
                     static_cast<double>(hits) / static_cast<double>(r + 1)});
  }
  return curve;
}

std::vector<PrPoint> interpolate_11_point(const std::vector<std::vector<PrPoint>>& curves) {
  std::vector<PrPoint> out(11);
  std::size_t used = 0;
  for (std::size_t k = 0; k < 11; ++k) out[k].recall = static_cast<double>(k) / 10.0;
  for (const auto& curve : curves) {
    if (curve.empty()) continue;
    ++used;
    // Running max of precision from the tail gives the interpolated value.
    std::vector<double> best(curve.size());
    double run = 0.0;
    for (std::size_t i = curve.size(); i-- > 0;) {
      run = std::max(run, curve[i].precision);
      best[i] = run;
    }
    std::size_t i = 0;
    for (std::size_t k = 0; k < 11; ++k) {
      // Small slack so recall 0.3 is reached by hits/N_q that round below it.
      const double level = out[k].recall - 1e-12;
      while (i < curve.size() && curve[i].recall < level) ++i;
      if (i < curve.size()) out[k].precision += best[i];
    }
  }
  if (used > 0) {
    for (auto& p : out) p.precision /= static_cast<double>(used);
  }
  return out;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["map"] = map;
  nlohmann::ordered_json p = nlohmann::ordered_json::object();
  for (const auto& [r, v] : precision_at) p[std::to_string(r)] = v;
  j["precision_at"] = p;
  j["query_count"] = query_count;
  j["excluded_queries"] = excluded_queries;
  return j.dump(2);
}

MetricReport evaluate(const CodeSet& queries, const CodeSet& database,
                      const EvalOptions& options) {
  if (!queries.labels() || !database.labels()) {
    throw UsageError("evaluate: query and database codes must carry labels");
  }
  if (queries.bits() != database.bits()) {
    throw SizeError("evaluate: query codes have m=" + std::to_string(queries.bits()) +
                    ", database has m=" + std::to_string(database.bits()));
  }
  if (database.size() == 0) throw SizeError("evaluate: empty database");
  for (auto r : options.precision_ranks) {
    if (r == 0 || r > database.size()) {
      throw UsageError("evaluate: precision rank " + std::to_string(r) +
                       " outside 1.." + std::to_string(database.size()));
    }
  }

  const RelevanceJudge judge(*queries.labels(), *database.labels());
  const std::size_t rounds = std::max<std::size_t>(1, options.tie_shuffles);

  MetricReport report;
  report.per_query_ap.resize(queries.size());
  std::vector<double> p_sum(options.precision_ranks.size(), 0.0);
  std::vector<std::vector<PrPoint>> curves;
  double ap_sum = 0.0;

  for (std::size_t q = 0; q < queries.size(); ++q) {
    if (judge.relevant_count(q) == 0) {
      ++report.excluded_queries;
      continue;
    }
    const auto base = rank_database(queries.code(q), database);
    double ap_q = 0.0;
    std::vector<double> p_q(options.precision_ranks.size(), 0.0);
    for (std::size_t s = 0; s < rounds; ++s) {
      auto ranked = base;
      if (options.tie_shuffles > 0) {
        Rng rng = make_stream(options.seed, "ties", q * rounds + s);
        shuffle_ties(ranked, rng);
      }
      const auto rel = judge.relevance(q, ranked);
      ap_q += *average_precision(rel);
      for (std::size_t k = 0; k < options.precision_ranks.size(); ++k) {
        p_q[k] += precision_at(rel, options.precision_ranks[k]);
      }
      if (s == 0) curves.push_back(pr_curve(rel));
    }
    ap_q /= static_cast<double>(rounds);
    report.per_query_ap[q] = ap_q;
    ap_sum += ap_q;
    for (std::size_t k = 0; k < p_q.size(); ++k) p_sum[k] += p_q[k] / static_cast<double>(rounds);
    ++report.query_count;
  }
  if (report.query_count == 0) throw UsageError("evaluate: no query has a relevant item");

  const double valid = static_cast<double>(report.query_count);
  report.map = ap_sum / valid;
  for (std::size_t k = 0; k < p_sum.size(); ++k) {
    report.precision_at.emplace_back(options.precision_ranks[k], p_sum[k] / valid);
  }
  report.pr_curve = interpolate_11_point(curves);
  return report;
}

void write_pr_csv(std::ostream& out, const std::vector<PrPoint>& curve) {
  out << "recall,precision\n";
  const auto old = out.precision(17);
  for (const auto& p : curve) out << p.recall << ',' << p.precision << '\n';
  out.precision(old);
}

CodeDiagnostics code_diagnostics(const CodeSet& codes) {
  if (codes.size() == 0) throw SizeError("code_diagnostics: empty code set");
  const std::size_t n = codes.size();
  const std::size_t m = codes.bits();
  CodeDiagnostics d;
  d.activation.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < m; ++b) d.activation[b] += codes.bit(i, b) ? 1.0 : 0.0;
  }
  d.entropy.resize(m);
  for (std::size_t b = 0; b < m; ++b) {
    d.activation[b] /= static_cast<double>(n);
    d.entropy[b] = binary_entropy(d.activation[b]);
  }
  std::set<std::vector<std::uint64_t>> distinct;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = codes.code(i);
    distinct.emplace(c.begin(), c.end());
  }
  d.duplicate_fraction = static_cast<double>(n - distinct.size()) / static_cast<double>(n);
  return d;
}

}  // namespace dcwhash
