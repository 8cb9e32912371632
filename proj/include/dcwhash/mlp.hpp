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
#include "dcwhash/rng.hpp"

namespace dcwhash {

// Hidden layers always use ReLU; this selects the output nonlinearity.
enum class Activation {
  kReluHiddenSigmoidOut,
  kReluHiddenLinearOut,
};

// One affine layer: y = x * weight + bias, weight is fan_in x fan_out.
struct Layer {
  Matrix weight;
  std::vector<double> bias;

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct MlpParams {
  std::vector<std::size_t> layer_sizes;
  std::vector<Layer> layers;
  Activation activation = Activation::kReluHiddenLinearOut;

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t parameter_count() const;
  // Throws DimensionError when layers disagree with layer_sizes.
  void validate() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// Gradients share the parameter layout.
using MlpGrads = std::vector<Layer>;

// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
MlpParams init_mlp(std::span<const std::size_t> layer_sizes, Activation activation, Rng& rng);
// All weights and biases zero.
MlpParams zero_mlp(std::span<const std::size_t> layer_sizes, Activation activation);

// Activation cache from forward, consumed by backward.
struct Tape {
  std::vector<Matrix> inputs;       // input to layer k (post-activation of k-1)
  std::vector<Matrix> pre_activations;
  Matrix output;

  bool empty() const { return inputs.empty(); }
};

struct ForwardResult {
  Matrix output;
  Tape tape;
};

ForwardResult forward(const MlpParams& params, const Matrix& input);
// Forward without keeping the cache.
Matrix predict(const MlpParams& params, const Matrix& input);

struct BackwardResult {
  MlpGrads param_grads;
  Matrix input_grad;
};

BackwardResult backward(const MlpParams& params, const Tape& tape, const Matrix& output_grad);

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;
};

// (1/N) sum_j ||x_hat_j - x_j||^2 and its gradient w.r.t. x_hat.
LossAndGrad mse_loss(const Matrix& x_hat, const Matrix& x);

// Euclidean norm over every gradient entry.
double grad_norm(const MlpGrads& grads);

struct AdamState {
  MlpGrads first_moment;
  MlpGrads second_moment;
  std::uint64_t step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

AdamState make_adam(const MlpParams& params, double lr = 1e-3);

// Bias-corrected Adam update in place.
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state);

// "DCWM" network record: magic, u32 version, u32 size count, u64 sizes,
// per layer the weights then the bias (little-endian f64), then a presence
// byte followed by the Adam state when set.
void write_network(std::ostream& out, const MlpParams& params, const AdamState* adam);
struct NetworkRecord {
  MlpParams params;
  std::optional<AdamState> adam;
};
// Optional optimizer section on its own: presence byte, then u64 step, f64
// lr, beta1, beta2, epsilon, first moments, second moments.
void write_adam(std::ostream& out, const AdamState* adam);
std::optional<AdamState> read_adam(std::istream& in, const MlpParams& params,
                                   const std::string& source);

NetworkRecord read_network(std::istream& in, Activation activation, const std::string& source);

}  // namespace dcwhash
