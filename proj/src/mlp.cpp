// SPDX-License-Identifier: Apache-2.0
#include "dcwhash/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "binary_io.hpp"
#include "dcwhash/error.hpp"

namespace dcwhash {
namespace {

constexpr char kNetworkMagic[] = "DCWM";
constexpr std::uint32_t kNetworkVersion = 1;

// Largest double below 1 and smallest positive normal: keeps sigmoid outputs
// strictly inside (0,1) even when exp saturates.
constexpr double kSigmoidHi = 1.0 - 0x1p-53;
constexpr double kSigmoidLo = std::numeric_limits<double>::min();

double sigmoid(double x) {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  return std::clamp(s, kSigmoidLo, kSigmoidHi);
}

std::vector<Layer> zeros_like(const MlpParams& params) {
  std::vector<Layer> out;
  out.reserve(params.layers.size());
  for (const auto& layer : params.layers) {
    out.push_back({Matrix(layer.weight.rows(), layer.weight.cols()),
                   std::vector<double>(layer.bias.size(), 0.0)});
  }
  return out;
}

void check_sizes(std::span<const std::size_t> sizes) {
  if (sizes.size() < 2) throw DimensionError("an MLP needs at least two layer sizes");
  for (auto s : sizes) {
    if (s == 0) throw DimensionError("layer sizes must be positive");
  }
}

void check_grads(const MlpParams& params, const MlpGrads& grads, const char* what) {
  if (grads.size() != params.layers.size()) {
    throw DimensionError(std::string(what) + ": layer count mismatch");
  }
  for (std::size_t k = 0; k < grads.size(); ++k) {
    require_same_shape(grads[k].weight, params.layers[k].weight, what);
    if (grads[k].bias.size() != params.layers[k].bias.size()) {
      throw DimensionError(std::string(what) + ": bias length mismatch at layer " +
                           std::to_string(k));
    }
  }
}

void write_layers(detail::BinaryWriter& w, const std::vector<Layer>& layers) {
  for (const auto& layer : layers) {
    for (double v : layer.weight.values()) w.f64(v);
    for (double v : layer.bias) w.f64(v);
  }
}

void read_layers(detail::BinaryReader& r, std::vector<Layer>& layers) {
  for (auto& layer : layers) {
    for (double& v : layer.weight.values()) v = r.f64();
    for (double& v : layer.bias) v = r.f64();
  }
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

void MlpParams::validate() const {
  check_sizes(layer_sizes);
  if (layers.size() + 1 != layer_sizes.size()) {
    throw DimensionError("MLP has " + std::to_string(layers.size()) + " layers for " +
                         std::to_string(layer_sizes.size()) + " sizes");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.weight.rows() != layer_sizes[k] || l.weight.cols() != layer_sizes[k + 1] ||
        l.bias.size() != layer_sizes[k + 1]) {
      throw DimensionError("layer " + std::to_string(k) + " shape disagrees with layer sizes");
    }
  }
}

MlpParams zero_mlp(std::span<const std::size_t> layer_sizes, Activation activation) {
  check_sizes(layer_sizes);
  MlpParams p;
  p.layer_sizes.assign(layer_sizes.begin(), layer_sizes.end());
  p.activation = activation;
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    p.layers.push_back({Matrix(layer_sizes[k], layer_sizes[k + 1]),
                        std::vector<double>(layer_sizes[k + 1], 0.0)});
  }
  return p;
}

MlpParams init_mlp(std::span<const std::size_t> layer_sizes, Activation activation, Rng& rng) {
  MlpParams p = zero_mlp(layer_sizes, activation);
  for (auto& layer : p.layers) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : layer.weight.values()) v = dist(rng);
  }
  return p;
}

ForwardResult forward(const MlpParams& params, const Matrix& input) {
  if (input.cols() != params.input_size()) {
    throw DimensionError("forward: input has " + std::to_string(input.cols()) +
                         " columns, network expects " + std::to_string(params.input_size()));
  }
  ForwardResult result;
  Tape& tape = result.tape;
  tape.inputs.reserve(params.layers.size());
  tape.pre_activations.reserve(params.layers.size());

  Matrix current = input;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto& layer = params.layers[k];
    Matrix pre = matmul(current, layer.weight);
    for (std::size_t r = 0; r < pre.rows(); ++r) {
      auto row = pre.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.bias[c];
    }
    Matrix post = pre;
    const bool last = k + 1 == params.layers.size();
    if (!last) {
      for (double& v : post.values()) v = v > 0.0 ? v : 0.0;
    } else if (params.activation == Activation::kReluHiddenSigmoidOut) {
      for (double& v : post.values()) v = sigmoid(v);
    }
    tape.inputs.push_back(std::move(current));
    tape.pre_activations.push_back(std::move(pre));
    current = std::move(post);
  }
  tape.output = current;
  result.output = std::move(current);
  return result;
}

Matrix predict(const MlpParams& params, const Matrix& input) {
  return forward(params, input).output;
}

BackwardResult backward(const MlpParams& params, const Tape& tape, const Matrix& output_grad) {
  if (tape.empty() || tape.inputs.size() != params.layers.size()) {
    throw UsageError("backward called without a matching forward tape");
  }
  require_same_shape(output_grad, tape.output, "backward: output gradient");

  BackwardResult result;
  result.param_grads.resize(params.layers.size());
  Matrix grad = output_grad;
  for (std::size_t k = params.layers.size(); k-- > 0;) {
    const bool last = k + 1 == params.layers.size();
    if (!last) {
      const auto pre = tape.pre_activations[k].values();
      auto g = grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(pre[i] > 0.0)) g[i] = 0.0;
      }
    } else if (params.activation == Activation::kReluHiddenSigmoidOut) {
      const auto out = tape.output.values();
      auto g = grad.values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= out[i] * (1.0 - out[i]);
    }
    auto& lg = result.param_grads[k];
    lg.weight = matmul_at_b(tape.inputs[k], grad);
    lg.bias.assign(grad.cols(), 0.0);
    for (std::size_t r = 0; r < grad.rows(); ++r) {
      const auto row = grad.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) lg.bias[c] += row[c];
    }
    grad = matmul_a_bt(grad, params.layers[k].weight);
  }
  result.input_grad = std::move(grad);
  return result;
}

LossAndGrad mse_loss(const Matrix& x_hat, const Matrix& x) {
  require_same_shape(x_hat, x, "mse_loss");
  if (x.rows() == 0) throw SizeError("mse_loss on an empty batch");
  const double n = static_cast<double>(x.rows());
  LossAndGrad out{0.0, Matrix(x.rows(), x.cols())};
  const auto a = x_hat.values();
  const auto b = x.values();
  auto g = out.grad.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
    g[i] = 2.0 * d / n;
  }
  out.loss = sum / n;
  return out;
}

double grad_norm(const MlpGrads& grads) {
  double sq = 0.0;
  for (const auto& layer : grads) {
    for (double v : layer.weight.values()) sq += v * v;
    for (double v : layer.bias) sq += v * v;
  }
  return std::sqrt(sq);
}

AdamState make_adam(const MlpParams& params, double lr) {
  AdamState s;
  s.first_moment = zeros_like(params);
  s.second_moment = zeros_like(params);
  s.lr = lr;
  return s;
}

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state) {
  check_grads(params, grads, "adam_step");
  check_grads(params, state.first_moment, "adam_step: first moment");
  check_grads(params, state.second_moment, "adam_step: second moment");

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double b1 = state.beta1;
  const double b2 = state.beta2;

  auto update = [&](std::span<double> theta, std::span<const double> g, std::span<double> m,
                    std::span<double> v) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      theta[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  };
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    auto& layer = params.layers[k];
    update(layer.weight.values(), grads[k].weight.values(),
           state.first_moment[k].weight.values(), state.second_moment[k].weight.values());
    update(layer.bias, grads[k].bias, state.first_moment[k].bias, state.second_moment[k].bias);
  }
}

void write_network(std::ostream& out, const MlpParams& params, const AdamState* adam) {
  params.validate();
  detail::BinaryWriter w(out);
  w.magic(kNetworkMagic);
  w.u32(kNetworkVersion);
  w.u32(static_cast<std::uint32_t>(params.layer_sizes.size()));
  for (auto s : params.layer_sizes) w.u64(s);
  write_layers(w, params.layers);
  w.check("network record");
  write_adam(out, adam);
}

void write_adam(std::ostream& out, const AdamState* adam) {
  detail::BinaryWriter w(out);
  w.u8(adam ? 1 : 0);
  if (adam) {
    w.u64(adam->step_count);
    w.f64(adam->lr);
    w.f64(adam->beta1);
    w.f64(adam->beta2);
    w.f64(adam->epsilon);
    write_layers(w, adam->first_moment);
    write_layers(w, adam->second_moment);
  }
  w.check("optimizer state");
}

NetworkRecord read_network(std::istream& in, Activation activation, const std::string& source) {
  detail::BinaryReader r(in, source);
  r.expect_magic(kNetworkMagic);
  const auto version = r.u32();
  if (version != kNetworkVersion) {
    throw FormatError(source + ": unsupported network version " + std::to_string(version));
  }
  const auto count = r.u32();
  if (count < 2 || count > 1024) {
    throw FormatError(source + ": implausible layer count " + std::to_string(count) +
                      " at byte offset 8");
  }
  std::vector<std::size_t> sizes(count);
  for (auto& s : sizes) {
    const auto at = r.offset();
    s = r.u64();
    if (s == 0 || s > (1u << 24)) {
      throw FormatError(source + ": implausible layer size at byte offset " + std::to_string(at));
    }
  }
  NetworkRecord rec{zero_mlp(sizes, activation), std::nullopt};
  read_layers(r, rec.params.layers);
  rec.adam = read_adam(in, rec.params, source);
  return rec;
}

std::optional<AdamState> read_adam(std::istream& in, const MlpParams& params,
                                   const std::string& source) {
  detail::BinaryReader r(in, source);
  const auto flag = r.u8();
  if (flag > 1) throw FormatError(source + ": bad optimizer presence flag");
  if (flag == 0) return std::nullopt;
  AdamState s = make_adam(params);
  s.step_count = r.u64();
  s.lr = r.f64();
  s.beta1 = r.f64();
  s.beta2 = r.f64();
  s.epsilon = r.f64();
  read_layers(r, s.first_moment);
  read_layers(r, s.second_moment);
  return s;
}

}  // namespace dcwhash
