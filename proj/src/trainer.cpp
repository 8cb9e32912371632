// SPDX-License-Identifier: Apache-2.0
#include "dcwhash/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>

#include "dcwhash/error.hpp"
#include "dcwhash/rng.hpp"

namespace dcwhash {
namespace {

// Shuffled passes over the data without replacement; reshuffles when fewer
// than a full batch remains.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, std::uint64_t seed)
      : batch_(batch), order_(n), rng_(make_stream(seed, "batch")) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    reshuffle();
  }

  std::vector<std::size_t> next() {
    if (pos_ + batch_ > order_.size()) reshuffle();
    std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(pos_ + batch_));
    pos_ += batch_;
    return out;
  }

 private:
  void reshuffle() {
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }

  std::size_t batch_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  Rng rng_;
};

void require_finite(double v, const char* what, std::size_t iter) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("non-finite ") + what + " at iteration " +
                       std::to_string(iter + 1) + "; training aborted");
  }
}

std::vector<std::size_t> mirrored(std::size_t first, const std::vector<std::size_t>& hidden,
                                  std::size_t last) {
  std::vector<std::size_t> sizes{first};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(last);
  return sizes;
}

}  // namespace

void PriorConfig::validate() const {
  if (m == 0) throw UsageError("prior: code length m must be positive");
  if (!(bernoulli_p > 0.0 && bernoulli_p < 1.0)) {
    throw UsageError("prior: bernoulli_p must lie strictly between 0 and 1");
  }
}

Matrix sample_prior(const PriorConfig& cfg, std::size_t n, std::uint64_t draw_index) {
  cfg.validate();
  if (n == 0) throw UsageError("sample_prior: n must be at least 1");
  Rng rng = make_stream(cfg.seed, "prior", draw_index);
  std::bernoulli_distribution coin(cfg.bernoulli_p);
  Matrix z(n, cfg.m);
  for (double& v : z.values()) v = coin(rng) ? 1.0 : 0.0;
  return z;
}

const char* matcher_name(Matcher m) {
  switch (m) {
    case Matcher::kDcw:
      return "dcw";
    case Matcher::kSwd:
      return "swd";
    case Matcher::kOt:
      return "ot";
    case Matcher::kNone:
      return "none";
  }
  return "?";
}

Matcher parse_matcher(const std::string& name) {
  if (name == "dcw") return Matcher::kDcw;
  if (name == "swd") return Matcher::kSwd;
  if (name == "ot") return Matcher::kOt;
  if (name == "none") return Matcher::kNone;
  throw UsageError("unknown matcher '" + name + "' (expected dcw, swd, ot or none)");
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw UsageError("batch_size must be at least 2");
  if (recon_steps < 1) throw UsageError("recon_steps must be at least 1");
  if (iterations < 1) throw UsageError("iterations must be at least 1");
  if (!(lr > 0.0)) throw UsageError("lr must be positive");
  if (p_norm != 1 && p_norm != 2) throw UsageError("p_norm must be 1 or 2");
  if (matcher == Matcher::kSwd && !fixed_projections && n_omega < 1) {
    throw UsageError("n_omega must be at least 1");
  }
  if (matcher == Matcher::kOt && batch_size > kMaxExactOtSize) {
    throw CapacityError("batch_size exceeds the exact OT limit");
  }
}

AutoencoderModel make_autoencoder(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                                  std::size_t m, Activation decoder_activation,
                                  std::uint64_t seed) {
  Rng rng = make_stream(seed, "init");
  std::vector<std::size_t> rev(hidden.rbegin(), hidden.rend());
  AutoencoderModel model;
  model.encoder =
      init_mlp(mirrored(input_dim, hidden, m), Activation::kReluHiddenSigmoidOut, rng);
  model.decoder = init_mlp(mirrored(m, rev, input_dim), decoder_activation, rng);
  return model;
}

void write_model(std::ostream& out, const AutoencoderModel& model) {
  write_network(out, model.encoder, model.encoder_adam ? &*model.encoder_adam : nullptr);
  write_network(out, model.decoder, model.decoder_adam ? &*model.decoder_adam : nullptr);
  write_adam(out, model.match_adam ? &*model.match_adam : nullptr);
}

void save_model(const std::string& path, const AutoencoderModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  write_model(out, model);
}

AutoencoderModel read_model(std::istream& in, Activation decoder_activation,
                            const std::string& source) {
  auto enc = read_network(in, Activation::kReluHiddenSigmoidOut, source + " (encoder)");
  auto dec = read_network(in, decoder_activation, source + " (decoder)");
  if (enc.params.output_size() != dec.params.input_size()) {
    throw FormatError(source + ": encoder output size does not match decoder input size");
  }
  auto match = read_adam(in, enc.params, source + " (matching optimizer)");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(source + ": trailing data after the last record");
  }
  return {std::move(enc.params), std::move(dec.params), std::move(enc.adam), std::move(dec.adam),
          std::move(match)};
}

AutoencoderModel load_model(const std::string& path, Activation decoder_activation) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file " + path);
  return read_model(in, decoder_activation, path);
}

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
  out << "iter,loss_recon,loss_match,grad_norm,wall_ns\n";
  out << std::setprecision(17);
  for (const auto& r : trace.records) {
    out << r.iter << ',' << r.loss_recon << ',' << r.loss_match << ',' << r.grad_norm << ','
        << r.wall_ns << '\n';
  }
}

MatchGradient matching_gradient(const Matrix& prior_batch, const Matrix& latent,
                                const TrainConfig& cfg, std::uint64_t step) {
  MatchGradient out;
  switch (cfg.matcher) {
    case Matcher::kDcw: {
      auto g = dcw_backward(prior_batch, latent, cfg.p_norm);
      out = {g.loss, std::move(g.grad)};
      break;
    }
    case Matcher::kSwd: {
      SwdGradient g;
      if (cfg.fixed_projections) {
        g = swd_backward(prior_batch, latent, *cfg.fixed_projections, cfg.p_norm);
      } else {
        const std::uint64_t proj_seed = make_stream(cfg.seed, "swd-directions", step)();
        g = swd_backward(prior_batch, latent,
                         sample_projections(latent.cols(), cfg.n_omega, proj_seed), cfg.p_norm);
      }
      out = {g.loss, std::move(g.grad)};
      break;
    }
    case Matcher::kOt: {
      auto g = ot_backward(prior_batch, latent, cfg.p_norm);
      out = {g.loss, std::move(g.grad)};
      break;
    }
    case Matcher::kNone:
      return {0.0, Matrix(latent.rows(), latent.cols())};
  }
  out.loss *= cfg.match_weight;
  for (double& v : out.grad.values()) v *= cfg.match_weight;
  return out;
}

TrainResult train(const Matrix& data, AutoencoderModel model, const TrainConfig& cfg,
                  const PriorConfig& prior) {
  cfg.validate();
  prior.validate();
  model.encoder.validate();
  model.decoder.validate();
  if (model.encoder.input_size() != data.cols()) {
    throw DimensionError("train: encoder input size " +
                         std::to_string(model.encoder.input_size()) + " != data dimension " +
                         std::to_string(data.cols()));
  }
  if (model.encoder.output_size() != prior.m) {
    throw DimensionError("train: encoder output size " +
                         std::to_string(model.encoder.output_size()) + " != code length " +
                         std::to_string(prior.m));
  }
  if (model.decoder.input_size() != prior.m || model.decoder.output_size() != data.cols()) {
    throw DimensionError("train: decoder shape does not mirror the encoder");
  }
  if (data.rows() < cfg.batch_size) {
    throw SizeError("train: " + std::to_string(data.rows()) +
                    " examples is fewer than one batch of " + std::to_string(cfg.batch_size));
  }

  if (!model.encoder_adam) model.encoder_adam = make_adam(model.encoder, cfg.lr);
  if (!model.decoder_adam) model.decoder_adam = make_adam(model.decoder, cfg.lr);
  if (!model.match_adam) model.match_adam = make_adam(model.encoder, cfg.lr);
  model.encoder_adam->lr = cfg.lr;
  model.match_adam->lr = cfg.lr;
  model.decoder_adam->lr = cfg.lr;

  BatchSampler sampler(data.rows(), cfg.batch_size, cfg.seed);
  TrainResult result;
  result.trace.records.reserve(cfg.iterations);

  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    TraceRecord rec;
    rec.iter = iter + 1;

    double recon_sum = 0.0;
    for (std::size_t s = 0; s < cfg.recon_steps; ++s) {
      const Matrix x = data.gather_rows(sampler.next());
      auto enc = forward(model.encoder, x);
      auto dec = forward(model.decoder, enc.output);
      const auto mse = mse_loss(dec.output, x);
      require_finite(mse.loss, "reconstruction loss", iter);
      const auto dec_back = backward(model.decoder, dec.tape, mse.grad);
      const auto enc_back = backward(model.encoder, enc.tape, dec_back.input_grad);
      adam_step(model.encoder, enc_back.param_grads, *model.encoder_adam);
      adam_step(model.decoder, dec_back.param_grads, *model.decoder_adam);
      recon_sum += mse.loss;
    }
    rec.loss_recon = recon_sum / static_cast<double>(cfg.recon_steps);

    if (cfg.matcher != Matcher::kNone) {
      const Matrix x = data.gather_rows(sampler.next());
      auto enc = forward(model.encoder, x);
      const Matrix z = sample_prior(prior, cfg.batch_size, iter);
      const auto match = matching_gradient(z, enc.output, cfg, iter);
      require_finite(match.loss, "matching loss", iter);
      const auto enc_back = backward(model.encoder, enc.tape, match.grad);
      rec.loss_match = match.loss;
      rec.grad_norm = grad_norm(enc_back.param_grads);
      require_finite(rec.grad_norm, "encoder gradient", iter);
      adam_step(model.encoder, enc_back.param_grads, *model.match_adam);
    }

    rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    result.trace.records.push_back(rec);
  }
  result.model = std::move(model);
  return result;
}

Matrix encode_batch(const AutoencoderModel& model, const Matrix& data) {
  if (data.cols() != model.encoder.input_size()) {
    throw DimensionError("encode: data has " + std::to_string(data.cols()) +
                         " columns, encoder expects " +
                         std::to_string(model.encoder.input_size()));
  }
  constexpr std::size_t kChunk = 1024;
  Matrix out(data.rows(), model.encoder.output_size());
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < data.rows(); begin += kChunk) {
    const std::size_t end = std::min(data.rows(), begin + kChunk);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const Matrix part = predict(model.encoder, data.gather_rows(idx));
    std::copy(part.values().begin(), part.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(begin * out.cols()));
  }
  return out;
}

}  // namespace dcwhash
