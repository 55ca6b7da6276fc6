#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "semx/error.hpp"

namespace semx::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::size_t step = 0;

  explicit AdamState(AdamConfig c = {}) : config(c) {}
};

/// Bias-corrected Adam over parallel lists of parameter and gradient views.
/// Moments are sized on the first call and shape-checked afterwards.
inline void adam_step(std::span<const std::span<double>> params,
                      std::span<const std::span<double>> grads, AdamState& state) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: parameter/gradient count mismatch");
  if (state.step == 0 && state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) throw ShapeError("adam_step: state/parameter count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size() != grads[k].size() || state.first_moment[k].size() != params[k].size())
      throw ShapeError("adam_step: shape mismatch in tensor " + std::to_string(k));
  }

  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      const double g = grads[k][i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      params[k][i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

inline double global_norm(std::span<const std::span<double>> grads) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double v : g) sq += v * v;
  return std::sqrt(sq);
}

/// Rescales gradients so their joint L2 norm is at most max_norm; returns the
/// norm before clipping.
inline double clip_global_norm(std::span<const std::span<double>> grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (const auto& g : grads)
      for (double& v : g) v *= scale;
  }
  return norm;
}

}  // namespace semx::nn
