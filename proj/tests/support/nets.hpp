// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "dcwhash/mlp.hpp"

namespace nets {

using dcwhash::Matrix;
using dcwhash::MlpGrads;
using dcwhash::MlpParams;

inline std::vector<double*> parameter_slots(MlpParams& params) {
  std::vector<double*> out;
  for (auto& layer : params.layers) {
    for (double& v : layer.weight.values()) out.push_back(&v);
    for (double& v : layer.bias) out.push_back(&v);
  }
  return out;
}

inline std::vector<double> flatten(const MlpGrads& grads) {
  std::vector<double> out;
  for (const auto& layer : grads) {
    out.insert(out.end(), layer.weight.values().begin(), layer.weight.values().end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
  return out;
}

// Central differences of loss(params) over every parameter.
inline std::vector<double> numeric_param_gradient(MlpParams params,
                                                  const std::function<double(const MlpParams&)>& loss,
                                                  double h = 1e-5) {
  auto slots = parameter_slots(params);
  std::vector<double> g(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double keep = *slots[i];
    *slots[i] = keep + h;
    const double up = loss(params);
    *slots[i] = keep - h;
    const double down = loss(params);
    *slots[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// True when some hidden pre-activation sits close enough to the ReLU kink
// that a finite-difference step could cross it.
inline bool near_relu_kink(const MlpParams& params, const Matrix& input, double margin = 1e-3) {
  const auto fr = dcwhash::forward(params, input);
  for (std::size_t k = 0; k + 1 < fr.tape.pre_activations.size(); ++k) {
    for (double v : fr.tape.pre_activations[k].values()) {
      if (std::abs(v) < margin) return true;
    }
  }
  return false;
}

}  // namespace nets
