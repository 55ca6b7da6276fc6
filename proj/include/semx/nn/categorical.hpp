#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "semx/error.hpp"
#include "semx/random.hpp"

namespace semx::nn {

/// Discrete distribution over actions parameterized by unnormalized logits.
class Categorical {
 public:
  explicit Categorical(std::span<const double> logits)
      : log_probs_(logits.begin(), logits.end()), probs_(logits.size()) {
    if (logits.empty()) throw ShapeError("categorical over zero actions");
    double m = logits[0];
    for (double z : logits) m = std::max(m, z);
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - m);
    const double lse = m + std::log(sum);
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      log_probs_[i] -= lse;
      probs_[i] = std::exp(log_probs_[i]);
    }
  }

  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<double>& log_probs() const { return log_probs_; }
  double log_prob(std::size_t action) const { return log_probs_.at(action); }

  double entropy() const {
    double h = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) h -= probs_[i] * log_probs_[i];
    return h;
  }

  /// Inverse CDF: the first action whose cumulative probability exceeds u.
  std::size_t sample(double u) const {
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      cumulative += probs_[i];
      if (u < cumulative) return i;
    }
    return probs_.size() - 1;
  }

  std::size_t sample_seeded(std::uint64_t seed) const {
    SplitMix64 rng(seed);
    return sample(rng.uniform());
  }

  // Lowest index on ties.
  std::size_t argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs_.size(); ++i)
      if (log_probs_[i] > log_probs_[best]) best = i;
    return best;
  }

  /// d log p(action) / d logits = onehot(action) - p.
  void log_prob_grad(std::size_t action, std::span<double> out) const {
    for (std::size_t i = 0; i < probs_.size(); ++i) out[i] = (i == action ? 1.0 : 0.0) - probs_[i];
  }

  /// d entropy / d logits_j = -p_j (log p_j + H).
  void entropy_grad(std::span<double> out) const {
    const double h = entropy();
    for (std::size_t i = 0; i < probs_.size(); ++i) out[i] = -probs_[i] * (log_probs_[i] + h);
  }

 private:
  std::vector<double> log_probs_;
  std::vector<double> probs_;
};

}  // namespace semx::nn
