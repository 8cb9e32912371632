// SPDX-License-Identifier: Apache-2.0
#include "dcwhash/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcwhash/codes.hpp"
#include "dcwhash/data_io.hpp"
#include "dcwhash/distances.hpp"
#include "dcwhash/error.hpp"
#include "dcwhash/metrics.hpp"
#include "dcwhash/rng.hpp"
#include "dcwhash/trainer.hpp"

namespace dcwhash::cli {
namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t parse_count(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || s[0] == '-') {
    throw UsageError("bad " + what + " '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

std::ofstream open_text(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  return out;
}

// Writes to a file when a path is given, otherwise to the fallback stream.
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
  } else {
    auto out = open_text(path);
    fn(out);
    if (!out) throw FormatError("write failed: " + path);
  }
}

FeatureMatrix load_feature_matrix(const std::string& features, const std::string& labels) {
  FeatureMatrix fm;
  fm.values = load_features(features);
  if (!labels.empty()) {
    fm.labels = load_labels(labels);
    if (fm.labels->size() != fm.values.rows()) {
      throw FormatError("count mismatch: " + std::to_string(fm.values.rows()) + " rows in " +
                        features + " but " + std::to_string(fm.labels->size()) + " labels in " +
                        labels);
    }
  }
  return fm;
}

// ---------------------------------------------------------------------------
// Training settings: defaults < JSON config file < explicit flags.

struct TrainSettings {
  std::size_t m = 32;
  double bernoulli_p = 0.5;
  std::size_t batch_size = 128;
  std::size_t recon_steps = 5;
  std::size_t iterations = 1000;
  double lr = 1e-3;
  int p_norm = 2;
  std::string matcher = "dcw";
  std::size_t n_omega = 100;
  double match_weight = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden{1000, 1000, 500};
  std::string decoder_output = "linear";

  json to_json() const {
    return json{{"m", m},
                {"bernoulli_p", bernoulli_p},
                {"batch_size", batch_size},
                {"recon_steps", recon_steps},
                {"iterations", iterations},
                {"lr", lr},
                {"p_norm", p_norm},
                {"matcher", matcher},
                {"n_omega", n_omega},
                {"match_weight", match_weight},
                {"seed", seed},
                {"hidden", hidden},
                {"decoder_output", decoder_output}};
  }

  void merge_json(const json& j, const std::string& source) {
    static const std::vector<std::string> known = {
        "m",     "bernoulli_p", "batch_size",   "recon_steps", "iterations", "lr",
        "p_norm", "matcher",    "n_omega",      "match_weight", "seed",      "hidden",
        "decoder_output"};
    if (!j.is_object()) throw FormatError(source + ": config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw FormatError(source + ": unknown config key '" + key + "'");
      }
    }
    try {
      if (j.contains("m")) m = j["m"].get<std::size_t>();
      if (j.contains("bernoulli_p")) bernoulli_p = j["bernoulli_p"].get<double>();
      if (j.contains("batch_size")) batch_size = j["batch_size"].get<std::size_t>();
      if (j.contains("recon_steps")) recon_steps = j["recon_steps"].get<std::size_t>();
      if (j.contains("iterations")) iterations = j["iterations"].get<std::size_t>();
      if (j.contains("lr")) lr = j["lr"].get<double>();
      if (j.contains("p_norm")) p_norm = j["p_norm"].get<int>();
      if (j.contains("matcher")) matcher = j["matcher"].get<std::string>();
      if (j.contains("n_omega")) n_omega = j["n_omega"].get<std::size_t>();
      if (j.contains("match_weight")) match_weight = j["match_weight"].get<double>();
      if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
      if (j.contains("hidden")) hidden = j["hidden"].get<std::vector<std::size_t>>();
      if (j.contains("decoder_output")) decoder_output = j["decoder_output"].get<std::string>();
    } catch (const json::exception& e) {
      throw FormatError(source + ": " + e.what());
    }
  }

  void merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw FormatError(path + ": " + e.what());
    }
    merge_json(j, path);
  }

  Activation decoder_activation() const {
    if (decoder_output == "linear") return Activation::kReluHiddenLinearOut;
    if (decoder_output == "sigmoid") return Activation::kReluHiddenSigmoidOut;
    throw UsageError("decoder_output must be 'linear' or 'sigmoid'");
  }

  TrainConfig train_config() const {
    TrainConfig c;
    c.batch_size = batch_size;
    c.recon_steps = recon_steps;
    c.iterations = iterations;
    c.lr = lr;
    c.p_norm = p_norm;
    c.matcher = parse_matcher(matcher);
    c.n_omega = n_omega;
    c.match_weight = match_weight;
    c.seed = seed;
    c.validate();
    return c;
  }

  PriorConfig prior_config() const {
    PriorConfig p{m, bernoulli_p, seed};
    p.validate();
    return p;
  }
};

// Flag storage for the training options shared by train and bench-train.
struct TrainFlags {
  std::string config;
  TrainSettings values;
  std::string hidden;
  std::vector<std::pair<CLI::Option*, std::function<void(TrainSettings&)>>> overrides;

  template <typename T>
  void add(CLI::App* app, const std::string& name, T& slot, T TrainSettings::*field,
           const std::string& help) {
    auto* opt = app->add_option(name, slot, help)->capture_default_str();
    overrides.emplace_back(opt, [&slot, field](TrainSettings& s) { s.*field = slot; });
  }

  void attach(CLI::App* app, bool with_matcher) {
    app->add_option("--config", config, "JSON config (keys mirror the flag names below)");
    add(app, "--m", values.m, &TrainSettings::m, "Code length in bits");
    add(app, "--batch", values.batch_size, &TrainSettings::batch_size, "Mini-batch size N");
    add(app, "--recon-steps", values.recon_steps, &TrainSettings::recon_steps,
        "Reconstruction steps per matching step (l)");
    add(app, "--iters", values.iterations, &TrainSettings::iterations,
        "Outer iterations K");
    add(app, "--lr", values.lr, &TrainSettings::lr, "Adam learning rate");
    add(app, "--prior-p", values.bernoulli_p, &TrainSettings::bernoulli_p,
        "Bernoulli parameter of the code prior");
    add(app, "--p-norm", values.p_norm, &TrainSettings::p_norm, "Ground cost exponent (1 or 2)");
    if (with_matcher) {
      add(app, "--matcher", values.matcher, &TrainSettings::matcher,
          "Latent matching loss: dcw, swd, ot or none");
    }
    add(app, "--n-omega", values.n_omega, &TrainSettings::n_omega,
        "Random projections per step for swd");
    add(app, "--match-weight", values.match_weight, &TrainSettings::match_weight,
        "Scale on the matching loss");
    add(app, "--decoder-output", values.decoder_output, &TrainSettings::decoder_output,
        "Decoder output activation: linear or sigmoid");
    hidden = "1000,1000,500";
    auto* h = app->add_option("--hidden", hidden, "Encoder hidden sizes, comma separated")
                  ->capture_default_str();
    overrides.emplace_back(h, [this](TrainSettings& s) {
      s.hidden.clear();
      for (const auto& item : split_list(hidden)) s.hidden.push_back(parse_count(item, "hidden size"));
    });
  }

  TrainSettings resolve(std::uint64_t seed, bool seed_given) const {
    TrainSettings s;
    if (!config.empty()) s.merge_file(config);
    for (const auto& [opt, apply] : overrides) {
      if (opt->count() > 0) apply(s);
    }
    if (seed_given) s.seed = seed;
    return s;
  }
};

std::string csv_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ---------------------------------------------------------------------------

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  bool seed_given() const { return seed_opt->count() > 0; }
};

void cmd_split(const Context& ctx, const std::string& features, const std::string& labels,
               std::size_t per_class, const std::string& out_dir) {
  const auto data = load_feature_matrix(features, labels);
  const auto parts = split(data, {per_class, ctx.seed});
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  save_features((dir / "query.ftrx").string(), parts.query.values);
  save_labels((dir / "query.lbls").string(), *parts.query.labels);
  save_features((dir / "retrieval.ftrx").string(), parts.retrieval.values);
  save_labels((dir / "retrieval.lbls").string(), *parts.retrieval.labels);
  auto csv = open_text((dir / "split_index.csv").string());
  csv << "set,row,source_index\n";
  for (std::size_t i = 0; i < parts.query_indices.size(); ++i) {
    csv << "query," << i << ',' << parts.query_indices[i] << '\n';
  }
  for (std::size_t i = 0; i < parts.retrieval_indices.size(); ++i) {
    csv << "retrieval," << i << ',' << parts.retrieval_indices[i] << '\n';
  }
  ctx.out << json{{"queries", parts.query.size()},
                  {"retrieval", parts.retrieval.size()},
                  {"queries_per_class", per_class},
                  {"seed", ctx.seed}}
                 .dump()
          << '\n';
}

void cmd_train(const Context& ctx, const TrainFlags& flags, const std::string& features,
               const std::string& out_model, const std::string& trace_path) {
  const auto settings = flags.resolve(ctx.seed, ctx.seed_given());
  const auto cfg = settings.train_config();
  const auto prior = settings.prior_config();
  ctx.out << settings.to_json().dump() << '\n';

  const Matrix data = load_features(features);
  auto model = make_autoencoder(data.cols(), settings.hidden, settings.m,
                                settings.decoder_activation(), settings.seed);
  auto result = train(data, std::move(model), cfg, prior);
  save_model(out_model, result.model);
  if (!trace_path.empty()) {
    auto out = open_text(trace_path);
    write_trace_csv(out, result.trace);
  }
}

void cmd_encode(const Context& ctx, const std::string& model_path, const std::string& features,
                const std::string& labels, double threshold, const std::string& out_codes) {
  const auto model = load_model(model_path);
  const auto data = load_feature_matrix(features, labels);
  auto codes = binarize(encode_batch(model, data.values), threshold);
  if (data.labels) codes.set_labels(*data.labels);
  save_codes(out_codes, codes);
  ctx.out << json{{"codes", codes.size()}, {"m", codes.bits()}}.dump() << '\n';
}

void cmd_lsh(const Context& ctx, const std::string& features, const std::string& labels,
             const std::string& fit_features, std::size_t m, const std::string& out_codes) {
  const auto data = load_feature_matrix(features, labels);
  const Matrix fit = fit_features.empty() ? data.values : load_features(fit_features);
  auto codes = fit_lsh(fit, m, ctx.seed).encode(data.values);
  if (data.labels) codes.set_labels(*data.labels);
  save_codes(out_codes, codes);
  ctx.out << json{{"codes", codes.size()}, {"m", codes.bits()}}.dump() << '\n';
}

void cmd_retrieve(const Context& ctx, const std::string& db_path, const std::string& query_path,
                  std::size_t topk, const std::string& out_path) {
  const auto db = load_codes(db_path);
  const auto queries = load_codes(query_path);
  const auto results = top_r(queries, db, topk);
  emit(out_path, ctx.out, [&](std::ostream& os) {
    os << "query,rank,db_index,hamming\n";
    for (const auto& r : results) {
      for (std::size_t k = 0; k < r.neighbors.size(); ++k) {
        os << r.query << ',' << k + 1 << ',' << r.neighbors[k].index << ','
           << r.neighbors[k].distance << '\n';
      }
    }
  });
}

void cmd_eval(const Context& ctx, const std::string& db_path, const std::string& query_path,
              const std::string& metrics, const std::string& pr_path, const std::string& out_path,
              std::size_t tie_shuffles) {
  const auto db = load_codes(db_path);
  const auto queries = load_codes(query_path);
  EvalOptions opts;
  opts.precision_ranks.clear();
  opts.tie_shuffles = tie_shuffles;
  opts.seed = ctx.seed;
  bool want_map = false;
  for (const auto& metric : split_list(metrics)) {
    if (metric == "map") {
      want_map = true;
    } else if (metric.rfind("p@", 0) == 0) {
      opts.precision_ranks.push_back(parse_count(metric.substr(2), "precision rank"));
    } else {
      throw UsageError("unknown metric '" + metric + "' (expected map or p@R)");
    }
  }
  const auto report = evaluate(queries, db, opts);
  json j;
  if (want_map) j["map"] = report.map;
  json p = json::object();
  for (const auto& [r, v] : report.precision_at) p[std::to_string(r)] = v;
  j["precision_at"] = p;
  j["query_count"] = report.query_count;
  j["excluded_queries"] = report.excluded_queries;
  j["tie_shuffles"] = tie_shuffles;
  emit(out_path, ctx.out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  if (!pr_path.empty()) {
    auto out = open_text(pr_path);
    write_pr_csv(out, report.pr_curve);
  }
}

void cmd_codestats(const Context& ctx, const std::string& codes_path) {
  const auto d = code_diagnostics(load_codes(codes_path));
  ctx.out << json{{"activation", d.activation},
                  {"entropy", d.entropy},
                  {"duplicate_fraction", d.duplicate_fraction}}
                 .dump(2)
          << '\n';
}

struct EstimatorSpec {
  std::string label;
  std::string kind;
  std::size_t n_omega = 0;
};

EstimatorSpec parse_estimator(const std::string& s) {
  if (s == "dcw" || s == "ot") return {s, s, 0};
  if (s.rfind("swd:", 0) == 0) return {s, "swd", parse_count(s.substr(4), "projection count")};
  if (s == "swd") return {"swd:100", "swd", 100};
  throw UsageError("unknown estimator '" + s + "' (expected dcw, swd:NOMEGA or ot)");
}

void cmd_bench_dist(const Context& ctx, const std::string& estimators, const std::string& ns,
                    std::size_t m, int p, std::size_t trials, const std::string& mode,
                    double prior_p, bool distance, const std::string& out_path) {
  std::vector<EstimatorSpec> specs;
  for (const auto& e : split_list(estimators)) specs.push_back(parse_estimator(e));
  std::vector<std::size_t> sizes;
  for (const auto& n : split_list(ns)) sizes.push_back(parse_count(n, "sample size"));
  if (specs.empty() || sizes.empty()) throw UsageError("bench-dist needs estimators and sizes");
  if (mode != "self" && mode != "shift") throw UsageError("mode must be 'self' or 'shift'");
  const PriorConfig prior{m, prior_p, ctx.seed};
  prior.validate();
  const Mode est_mode = distance ? Mode::kDistance : Mode::kLoss;

  emit(out_path, ctx.out, [&](std::ostream& os) {
    os << "estimator,n,m,p,trial,estimate,wall_ns\n";
    for (const auto n : sizes) {
      for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t draw = (static_cast<std::uint64_t>(n) << 24) + 2 * t;
        const Matrix a = sample_prior(prior, n, draw);
        Matrix b;
        if (mode == "self") {
          b = sample_prior(prior, n, draw + 1);
        } else {
          Rng rng = make_stream(ctx.seed, "bench-shift", draw);
          std::uniform_real_distribution<double> u(0.0, 1.0);
          b = Matrix(n, m);
          for (double& v : b.values()) v = u(rng);
        }
        for (const auto& spec : specs) {
          const auto start = std::chrono::steady_clock::now();
          double estimate = 0.0;
          if (spec.kind == "dcw") {
            estimate = dcw(a, b, p, est_mode).value;
          } else if (spec.kind == "swd") {
            const auto proj_seed = make_stream(ctx.seed, "bench-proj", draw)();
            estimate = swd(a, b, sample_projections(m, spec.n_omega, proj_seed), p, est_mode);
          } else {
            estimate = ot_exact(a, b, p).mean_cost;
            if (distance && p == 2) estimate = std::sqrt(estimate);
          }
          const auto ns_elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(
                                      std::chrono::steady_clock::now() - start)
                                      .count();
          os << spec.label << ',' << n << ',' << m << ',' << p << ',' << t << ','
             << csv_double(estimate) << ',' << ns_elapsed << '\n';
        }
      }
    }
  });
}

void cmd_bench_train(const Context& ctx, const TrainFlags& flags, const std::string& features,
                     const std::string& matchers, std::size_t epochs,
                     const std::string& out_path) {
  const auto settings = flags.resolve(ctx.seed, ctx.seed_given());
  const auto names = split_list(matchers);
  if (names.empty()) throw UsageError("bench-train needs at least one matcher");
  if (epochs == 0) throw UsageError("epochs must be at least 1");
  const Matrix data = load_features(features);

  auto echo = settings.to_json();
  echo.erase("matcher");
  echo.erase("iterations");
  echo["matchers"] = names;
  echo["epochs"] = epochs;
  const std::size_t per_epoch = std::max<std::size_t>(
      1, data.rows() / (settings.batch_size * (settings.recon_steps + 1)));
  echo["iterations_per_epoch"] = per_epoch;
  ctx.out << echo.dump() << '\n';

  emit(out_path, ctx.out, [&](std::ostream& os) {
    os << "matcher,epoch_wall_ns\n";
    for (const auto& name : names) {
      TrainSettings s = settings;
      s.matcher = name;
      s.iterations = per_epoch * epochs;
      auto model = make_autoencoder(data.cols(), s.hidden, s.m, s.decoder_activation(), s.seed);
      const auto start = std::chrono::steady_clock::now();
      train(data, std::move(model), s.train_config(), s.prior_config());
      const auto total = std::chrono::duration_cast<std::chrono::nanoseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
      os << name << ',' << total / static_cast<std::int64_t>(epochs) << '\n';
    }
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dcwhash: binary hashing with component-wise Wasserstein autoencoders"};
  app.name("dcwhash");
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx{out, err};
  ctx.seed_opt = app.add_option("--seed", ctx.seed, "Global u64 seed for every random stream")
                     ->capture_default_str();

  // split
  std::string features, labels, out_dir, out_path, model_path, codes_path, db_codes,
      query_codes, fit_features, trace_path;
  std::size_t per_class = 1000;
  auto* split_cmd = app.add_subcommand("split", "Per-class query / retrieval split");
  split_cmd->add_option("--features", features, "Feature file (FTRX or IDX images)")->required();
  split_cmd->add_option("--labels", labels, "Label file (LBLS or IDX labels)")->required();
  split_cmd->add_option("--queries-per-class", per_class, "Queries drawn per class")
      ->capture_default_str();
  split_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

  // train
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train an autoencoder hash function");
  train_cmd->add_option("--features", features, "Training features (FTRX or IDX)")->required();
  train_flags.attach(train_cmd, true);
  train_cmd->add_option("--out-model", model_path, "Checkpoint output (DCWM)")->required();
  train_cmd->add_option("--trace", trace_path, "Training trace CSV");

  // encode
  double threshold = 0.5;
  auto* encode_cmd = app.add_subcommand("encode", "Encode features into hash codes");
  encode_cmd->add_option("--model", model_path, "Checkpoint (DCWM)")->required();
  encode_cmd->add_option("--features", features, "Features (FTRX or IDX)")->required();
  encode_cmd->add_option("--labels", labels, "Optional labels stored with the codes");
  encode_cmd->add_option("--threshold", threshold, "Binarization threshold")
      ->capture_default_str();
  encode_cmd->add_option("--out-codes", codes_path, "Code file output (HCDS)")->required();

  // lsh
  std::size_t lsh_m = 32;
  auto* lsh_cmd = app.add_subcommand("lsh", "Random-projection LSH baseline codes");
  lsh_cmd->add_option("--features", features, "Features to encode")->required();
  lsh_cmd->add_option("--labels", labels, "Optional labels stored with the codes");
  lsh_cmd->add_option("--fit-features", fit_features,
                      "Features used for the median thresholds (default: --features)");
  lsh_cmd->add_option("--m", lsh_m, "Code length")->capture_default_str();
  lsh_cmd->add_option("--out-codes", codes_path, "Code file output (HCDS)")->required();

  // retrieve
  std::size_t topk = 10;
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Hamming top-k retrieval");
  retrieve_cmd->add_option("--db-codes", db_codes, "Database codes")->required();
  retrieve_cmd->add_option("--query-codes", query_codes, "Query codes")->required();
  retrieve_cmd->add_option("--topk", topk, "Results per query")->capture_default_str();
  retrieve_cmd->add_option("--out", out_path, "CSV output (default stdout)");

  // eval
  std::string metrics = "map,p@1000", pr_path;
  std::size_t tie_shuffles = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Retrieval metrics over the full Hamming ranking");
  eval_cmd->add_option("--db-codes", db_codes, "Database codes with labels")->required();
  eval_cmd->add_option("--query-codes", query_codes, "Query codes with labels")->required();
  eval_cmd->add_option("--metrics", metrics, "Comma list of map and p@R")->capture_default_str();
  eval_cmd->add_option("--pr-curve", pr_path, "11-point PR curve CSV output");
  eval_cmd->add_option("--tie-shuffles", tie_shuffles,
                       "Average over this many random tie orders (0: index order)")
      ->capture_default_str();
  eval_cmd->add_option("--out", out_path, "JSON output (default stdout)");

  // codestats
  auto* stats_cmd = app.add_subcommand("codestats", "Per-bit balance and entropy of a code set");
  stats_cmd->add_option("--codes", codes_path, "Code file")->required();

  // bench-dist
  std::string estimators = "dcw,swd:100,ot", ns = "128,256,512", mode = "self";
  std::size_t bench_m = 32, trials = 10;
  int bench_p = 2;
  double bench_prior = 0.5;
  bool distance = false;
  auto* bench_dist_cmd =
      app.add_subcommand("bench-dist", "Distance estimates and timings on prior samples");
  bench_dist_cmd->add_option("--estimators", estimators, "dcw, swd:NOMEGA, ot")
      ->capture_default_str();
  bench_dist_cmd->add_option("--n", ns, "Comma list of sample sizes")->capture_default_str();
  bench_dist_cmd->add_option("--m", bench_m, "Dimension")->capture_default_str();
  bench_dist_cmd->add_option("--p", bench_p, "Ground cost exponent")->capture_default_str();
  bench_dist_cmd->add_option("--trials", trials, "Trials per size")->capture_default_str();
  bench_dist_cmd->add_option("--mode", mode,
                             "self: two prior samples; shift: prior vs uniform(0,1)")
      ->capture_default_str();
  bench_dist_cmd->add_option("--prior-p", bench_prior, "Bernoulli parameter")
      ->capture_default_str();
  bench_dist_cmd->add_flag("--distance", distance, "Report p-th root distances instead of losses");
  bench_dist_cmd->add_option("--out", out_path, "CSV output (default stdout)");

  // bench-train
  std::string matchers = "dcw,ot";
  std::size_t epochs = 1;
  TrainFlags bench_flags;
  auto* bench_train_cmd = app.add_subcommand("bench-train", "Per-epoch training time per matcher");
  bench_train_cmd->add_option("--features", features, "Training features")->required();
  bench_train_cmd->add_option("--matchers", matchers, "Comma list of matchers")
      ->capture_default_str();
  bench_train_cmd->add_option("--epochs", epochs, "Epochs to time")->capture_default_str();
  bench_flags.attach(bench_train_cmd, false);
  bench_train_cmd->add_option("--out", out_path, "CSV output (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*split_cmd) {
      cmd_split(ctx, features, labels, per_class, out_dir);
    } else if (*train_cmd) {
      cmd_train(ctx, train_flags, features, model_path, trace_path);
    } else if (*encode_cmd) {
      cmd_encode(ctx, model_path, features, labels, threshold, codes_path);
    } else if (*lsh_cmd) {
      cmd_lsh(ctx, features, labels, fit_features, lsh_m, codes_path);
    } else if (*retrieve_cmd) {
      cmd_retrieve(ctx, db_codes, query_codes, topk, out_path);
    } else if (*eval_cmd) {
      cmd_eval(ctx, db_codes, query_codes, metrics, pr_path, out_path, tie_shuffles);
    } else if (*stats_cmd) {
      cmd_codestats(ctx, codes_path);
    } else if (*bench_dist_cmd) {
      cmd_bench_dist(ctx, estimators, ns, bench_m, bench_p, trials, mode, bench_prior, distance,
                     out_path);
    } else if (*bench_train_cmd) {
      cmd_bench_train(ctx, bench_flags, features, matchers, epochs, out_path);
    }
  } catch (const NumericError& e) {
    err << "dcwhash: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "dcwhash: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "dcwhash: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace dcwhash::cli
