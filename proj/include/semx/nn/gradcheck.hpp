#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semx/error.hpp"
#include "semx/nn/mlp.hpp"
#include "semx/random.hpp"

namespace semx::nn {

struct GradientCheckReport {
  bool passed = false;
  double max_relative_error = 0.0;
  std::string worst_parameter;  // e.g. "layer1.weight[3]"
  std::size_t checked = 0;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;
// Denominator floor; keeps near-zero gradients from amplifying round-off.
inline constexpr double kRelativeErrorFloor = 1e-6;

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
}

/// Compares backward() against central differences on a random 4-row batch
/// with loss = sum(c .* output) for random weights c. `corrupt` may edit the
/// analytic gradients before comparison (fault injection in tests).
inline GradientCheckReport gradient_check(const MlpSpec& spec, std::uint64_t seed, double tolerance = 1e-4,
                                          const std::function<void(MlpGradients&)>& corrupt = {}) {
  Mlp net = init_mlp(spec, seed);
  if (net.parameter_count() > 1000) throw ShapeError("gradient_check is limited to 1000 parameters");

  SplitMix64 rng(derive_seed(seed, 1));
  // Random nonzero biases so the check does not sit on the init symmetry point.
  for (auto& l : net.layers)
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.5 * (2.0 * rng.uniform() - 1.0);
  const auto batch = Eigen::Index{4};
  Matrix x(batch, static_cast<Eigen::Index>(spec.input_width()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * rng.uniform() - 1.0;
  Matrix c(batch, static_cast<Eigen::Index>(spec.output_width()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = 2.0 * rng.uniform() - 1.0;

  auto loss = [&](const Mlp& n) { return (predict(n, x).array() * c.array()).sum(); };

  auto [y, record] = forward(net, x);
  MlpGradients grads = backward(net, record, c);
  if (corrupt) corrupt(grads);

  std::vector<std::span<double>> params, analytic;
  append_spans(net, params);
  append_spans(grads, analytic);
  std::vector<std::string> names;
  append_names(net, "", names);

  GradientCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      const double saved = params[k][i];
      params[k][i] = saved + kFiniteDifferenceStep;
      const double up = loss(net);
      params[k][i] = saved - kFiniteDifferenceStep;
      const double down = loss(net);
      params[k][i] = saved;
      const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
      const double err = relative_error(analytic[k][i], numeric);
      ++report.checked;
      if (report.worst_parameter.empty() || err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_parameter = names[k] + "[" + std::to_string(i) + "]";
      }
    }
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace semx::nn
