#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "semx/nn/mlp.hpp"

namespace semx::rl {

struct RolloutBuffer {
  nn::Matrix observations;  // T x obs_dim
  std::vector<std::size_t> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;    // total reward fed to the learner
  std::vector<double> intrinsic;  // raw curiosity signal
  std::vector<std::uint8_t> terminal;
  std::vector<std::uint8_t> timeout;
  // V(final observation) at timeout steps, where the next stored row already
  // belongs to a new episode. Zero elsewhere.
  std::vector<double> timeout_values;
  double bootstrap_value = 0.0;  // V of the state after the last step

  // Episodes that finished inside this rollout.
  std::vector<double> episode_returns;
  std::size_t episodes_succeeded = 0;

  std::size_t size() const { return actions.size(); }

  void resize(std::size_t steps, std::size_t obs_dim) {
    observations.resize(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(obs_dim));
    actions.assign(steps, 0);
    log_probs.assign(steps, 0.0);
    values.assign(steps, 0.0);
    rewards.assign(steps, 0.0);
    intrinsic.assign(steps, 0.0);
    terminal.assign(steps, 0);
    timeout.assign(steps, 0);
    timeout_values.assign(steps, 0.0);
    bootstrap_value = 0.0;
    episode_returns.clear();
    episodes_succeeded = 0;
  }
};

}  // namespace semx::rl
