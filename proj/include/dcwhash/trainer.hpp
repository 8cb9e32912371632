// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dcwhash/distances.hpp"
#include "dcwhash/matrix.hpp"
#include "dcwhash/mlp.hpp"

namespace dcwhash {

// i.i.d. Bernoulli(bernoulli_p) prior over m-bit codes.
struct PriorConfig {
  std::size_t m = 32;
  double bernoulli_p = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

// n x m draw; deterministic in (seed, draw_index).
Matrix sample_prior(const PriorConfig& cfg, std::size_t n, std::uint64_t draw_index = 0);

enum class Matcher { kDcw, kSwd, kOt, kNone };

const char* matcher_name(Matcher m);
Matcher parse_matcher(const std::string& name);

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t recon_steps = 5;
  std::size_t iterations = 1000;
  double lr = 1e-3;
  int p_norm = 2;
  Matcher matcher = Matcher::kDcw;
  std::size_t n_omega = 100;  // swd only
  double match_weight = 1.0;  // scales L_G; 1 leaves the objective unweighted
  std::uint64_t seed = 0;
  // swd only: use these directions every step instead of resampling.
  std::optional<ProjectionSet> fixed_projections;

  void validate() const;
};

struct AutoencoderModel {
  MlpParams encoder;  // sigmoid output, m units
  MlpParams decoder;
  std::optional<AdamState> encoder_adam;
  std::optional<AdamState> decoder_adam;
  // Encoder optimizer used by the matching step only.
  std::optional<AdamState> match_adam;

  friend bool operator==(const AutoencoderModel&, const AutoencoderModel&) = default;
};

// input -> hidden... -> m for the encoder, mirrored for the decoder.
AutoencoderModel make_autoencoder(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                                  std::size_t m, Activation decoder_activation,
                                  std::uint64_t seed);

// Checkpoint: encoder "DCWM" record, decoder record, then the matching
// optimizer section (see write_adam).
void write_model(std::ostream& out, const AutoencoderModel& model);
void save_model(const std::string& path, const AutoencoderModel& model);
AutoencoderModel read_model(std::istream& in, Activation decoder_activation,
                            const std::string& source);
AutoencoderModel load_model(const std::string& path,
                            Activation decoder_activation = Activation::kReluHiddenLinearOut);

struct TraceRecord {
  std::size_t iter = 0;
  double loss_recon = 0.0;  // mean L_A over the iteration's reconstruction steps
  double loss_match = 0.0;  // L_G at the matching step
  double grad_norm = 0.0;   // ||dL_G/dW_f||_2
  std::int64_t wall_ns = 0;
};

struct TrainTrace {
  std::vector<TraceRecord> records;
};

// CSV with header iter,loss_recon,loss_match,grad_norm,wall_ns.
void write_trace_csv(std::ostream& out, const TrainTrace& trace);

struct TrainResult {
  AutoencoderModel model;
  TrainTrace trace;
};

// Alternating training: per iteration, recon_steps updates of both networks
// on the reconstruction loss, then one update of the encoder only on the
// latent matching loss against fresh prior draws.
TrainResult train(const Matrix& data, AutoencoderModel model, const TrainConfig& cfg,
                  const PriorConfig& prior);

// Encoder outputs in (0,1)^m, one row per input row.
Matrix encode_batch(const AutoencoderModel& model, const Matrix& data);

// Matching loss and its gradient w.r.t. the latent batch.
struct MatchGradient {
  double loss = 0.0;
  Matrix grad;
};
MatchGradient matching_gradient(const Matrix& prior_batch, const Matrix& latent,
                                const TrainConfig& cfg, std::uint64_t step);

}  // namespace dcwhash
