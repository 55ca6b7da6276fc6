#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "semx/rl/buffer.hpp"

namespace semx::rl {

struct AdvantageEstimate {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

/// Generalized advantage estimation.
///   delta_t = r_t + gamma * V_next(t) - V_t
///   A_t     = delta_t + gamma * lambda * A_{t+1}   (within one episode)
/// V_next is 0 after a goal, V(final observation) after a timeout, and the
/// next stored value (or the bootstrap value) otherwise. The trace stops at
/// every episode boundary.
inline AdvantageEstimate compute_gae(const RolloutBuffer& buf, double gamma, double lambda) {
  const std::size_t n = buf.size();
  AdvantageEstimate out{std::vector<double>(n), std::vector<double>(n)};
  double next_advantage = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    double next_value = 0.0;
    double carry = 0.0;
    if (buf.terminal[t]) {
      next_value = 0.0;
    } else if (buf.timeout[t]) {
      next_value = buf.timeout_values[t];
    } else if (t + 1 == n) {
      next_value = buf.bootstrap_value;
    } else {
      next_value = buf.values[t + 1];
      carry = 1.0;
    }
    const double delta = buf.rewards[t] + gamma * next_value - buf.values[t];
    next_advantage = delta + gamma * lambda * carry * next_advantage;
    out.advantages[t] = next_advantage;
    out.returns[t] = next_advantage + buf.values[t];
  }
  return out;
}

inline constexpr double kAdvantageStdFloor = 1e-8;

/// Zero mean, unit (population) standard deviation; the divisor is floored
/// at 1e-8 for constant inputs.
inline std::vector<double> normalize_advantages(const std::vector<double>& adv) {
  if (adv.empty()) return {};
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double sd = std::max(std::sqrt(var), kAdvantageStdFloor);
  std::vector<double> out(adv.size());
  for (std::size_t i = 0; i < adv.size(); ++i) out[i] = (adv[i] - mean) / sd;
  return out;
}

}  // namespace semx::rl
