#pragma once

// Clipped-surrogate PPO over separate policy and value MLPs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "semx/error.hpp"
#include "semx/nn/adam.hpp"
#include "semx/nn/categorical.hpp"
#include "semx/nn/mlp.hpp"
#include "semx/nn/tensor.hpp"
#include "semx/random.hpp"
#include "semx/rl/buffer.hpp"
#include "semx/rl/env.hpp"
#include "semx/rl/gae.hpp"

namespace semx::rl {

inline constexpr std::size_t kPolicyHidden = 64;

struct PpoConfig {
  std::size_t rollout_length = 128;
  std::size_t epochs_per_rollout = 3;
  std::size_t minibatch_size = 32;
  double clip_ratio = 0.2;
  double discount = 0.99;
  double gae_lambda = 0.95;
  double value_loss_coef = 0.5;
  double entropy_coef = 0.01;
  double learning_rate = 3e-4;
  double grad_norm_clip = 0.5;
  std::size_t total_updates = 500;
  std::size_t eval_every = 50;
  std::size_t eval_episodes = 100;

  void validate() const {
    if (rollout_length < 1 || minibatch_size < 1) throw ConfigError("ppo.rollout_length and ppo.minibatch_size must be >= 1");
    if (rollout_length % minibatch_size != 0)
      throw ConfigError("ppo.rollout_length must be divisible by ppo.minibatch_size");
    if (clip_ratio < 0 || value_loss_coef < 0 || entropy_coef < 0 || learning_rate < 0 || grad_norm_clip < 0 ||
        gae_lambda < 0)
      throw ConfigError("ppo coefficients must be >= 0");
    if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("ppo.discount must lie in (0, 1]");
    if (eval_every < 1) throw ConfigError("ppo.eval_every must be >= 1");
    if (eval_episodes < 1) throw ConfigError("ppo.eval_episodes must be >= 1");
  }
};

struct PolicyValueNets {
  nn::Mlp policy;
  nn::Mlp value;

  static nn::MlpSpec policy_spec(std::size_t obs_dim, std::size_t actions) {
    return {{obs_dim, kPolicyHidden, kPolicyHidden, actions}, nn::Activation::kTanh, nn::Activation::kIdentity};
  }
  static nn::MlpSpec value_spec(std::size_t obs_dim) {
    return {{obs_dim, kPolicyHidden, kPolicyHidden, 1}, nn::Activation::kTanh, nn::Activation::kIdentity};
  }
  static PolicyValueNets create(std::size_t obs_dim, std::size_t actions, std::uint64_t master_seed) {
    return {nn::init_mlp(policy_spec(obs_dim, actions), subsystem_seed(master_seed, seed_tags::kPolicyInit)),
            nn::init_mlp(value_spec(obs_dim), subsystem_seed(master_seed, seed_tags::kValueInit))};
  }

  nn::Categorical distribution(std::span<const double> obs) const {
    Eigen::Map<const nn::RowVector> x(obs.data(), static_cast<Eigen::Index>(obs.size()));
    const nn::Matrix logits = nn::predict(policy, x);
    return nn::Categorical(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())));
  }
  double state_value(std::span<const double> obs) const {
    Eigen::Map<const nn::RowVector> x(obs.data(), static_cast<Eigen::Index>(obs.size()));
    return nn::predict(value, x)(0, 0);
  }
  std::size_t greedy_action(std::span<const double> obs) const { return distribution(obs).argmax(); }

  std::vector<nn::ParamTensor> tensors() const {
    std::vector<nn::ParamTensor> out;
    nn::append_tensors(policy, "policy", out);
    nn::append_tensors(value, "value", out);
    return out;
  }
  static PolicyValueNets from_tensors(const std::vector<nn::ParamTensor>& t, std::size_t obs_dim, std::size_t actions) {
    return {nn::mlp_from_tensors(policy_spec(obs_dim, actions), t, "policy"),
            nn::mlp_from_tensors(value_spec(obs_dim), t, "value")};
  }
  bool operator==(const PolicyValueNets&) const = default;
};

/// Networks plus the optimizer state that persists across updates.
struct PpoLearner {
  PolicyValueNets nets;
  nn::AdamState adam;

  PpoLearner(PolicyValueNets n, double learning_rate)
      : nets(std::move(n)), adam(nn::AdamConfig{.learning_rate = learning_rate}) {}
};

/// Runs exactly rollout_length steps, resetting the environment at episode
/// ends. Actions come from the policy by inverse CDF on the stream `seed`.
template <Environment E>
RolloutBuffer collect_rollout(const PolicyValueNets& nets, E& env, const PpoConfig& cfg, std::uint64_t seed) {
  RolloutBuffer buf;
  buf.resize(cfg.rollout_length, env.observation_size());
  SplitMix64 rng(seed);
  double episode_return = 0.0;
  for (std::size_t t = 0; t < cfg.rollout_length; ++t) {
    const std::vector<double> obs = env.observation();
    const auto dist = nets.distribution(obs);
    const std::size_t action = dist.sample(rng.uniform());
    const auto row = static_cast<Eigen::Index>(t);
    for (std::size_t i = 0; i < obs.size(); ++i) buf.observations(row, static_cast<Eigen::Index>(i)) = obs[i];
    buf.actions[t] = action;
    buf.log_probs[t] = dist.log_prob(action);
    buf.values[t] = nets.state_value(obs);

    const StepOutcome out = env.step(action);
    buf.rewards[t] = out.reward;
    buf.intrinsic[t] = out.intrinsic;
    buf.terminal[t] = out.terminal;
    buf.timeout[t] = out.timeout;
    episode_return += out.reward;
    if (out.terminal || out.timeout) {
      if (out.timeout) buf.timeout_values[t] = nets.state_value(env.observation());
      buf.episode_returns.push_back(episode_return);
      buf.episodes_succeeded += out.terminal;
      episode_return = 0.0;
      env.reset();
    }
  }
  buf.bootstrap_value = nets.state_value(env.observation());
  return buf;
}

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;  // mean squared error, before the coefficient
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double first_minibatch_max_ratio_error = 0.0;  // max |ratio - 1| before any step
};

/// epochs_per_rollout passes of shuffled minibatches over one rollout.
/// Per-sample loss: -min(rho*A, clip(rho, 1-eps, 1+eps)*A) + c_v*(V-R)^2 - c_e*H,
/// averaged over the minibatch. Gradients are clipped to a joint L2 norm.
inline UpdateStats ppo_update(PpoLearner& learner, const RolloutBuffer& buf, const std::vector<double>& advantages,
                              const std::vector<double>& returns, const PpoConfig& cfg, std::uint64_t seed) {
  const std::size_t n = buf.size();
  if (advantages.size() != n || returns.size() != n) throw ShapeError("ppo_update: advantage/return length mismatch");
  const std::vector<double> adv = normalize_advantages(advantages);
  auto& nets = learner.nets;
  const std::size_t actions = nets.policy.spec.output_width();

  std::vector<std::span<double>> params;
  nn::append_spans(nets.policy, params);
  nn::append_spans(nets.value, params);

  UpdateStats stats;
  std::size_t samples_seen = 0, minibatches = 0;
  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 0; epoch < cfg.epochs_per_rollout; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng(derive_seed(seed, epoch));
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += cfg.minibatch_size) {
      const std::size_t b = std::min(cfg.minibatch_size, n - start);
      const auto bd = static_cast<double>(b);
      nn::Matrix obs(static_cast<Eigen::Index>(b), buf.observations.cols());
      for (std::size_t k = 0; k < b; ++k) obs.row(static_cast<Eigen::Index>(k)) = buf.observations.row(static_cast<Eigen::Index>(order[start + k]));

      auto [logits, policy_record] = nn::forward(nets.policy, obs);
      auto [values, value_record] = nn::forward(nets.value, obs);
      nn::Matrix d_logits = nn::Matrix::Zero(logits.rows(), logits.cols());
      nn::Matrix d_values(values.rows(), 1);

      double pg_loss = 0.0, v_loss = 0.0, entropy = 0.0;
      std::vector<double> g_logp(actions), g_ent(actions);
      for (std::size_t k = 0; k < b; ++k) {
        const std::size_t i = order[start + k];
        const auto row = static_cast<Eigen::Index>(k);
        std::vector<double> z(actions);
        for (std::size_t a = 0; a < actions; ++a) z[a] = logits(row, static_cast<Eigen::Index>(a));
        const nn::Categorical pi(z);
        const double ratio = std::exp(pi.log_prob(buf.actions[i]) - buf.log_probs[i]);
        if (minibatches == 0) stats.first_minibatch_max_ratio_error = std::max(stats.first_minibatch_max_ratio_error, std::abs(ratio - 1.0));
        const double clipped = std::clamp(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio);
        const double surr_unclipped = ratio * adv[i];
        const double surr_clipped = clipped * adv[i];
        pg_loss -= std::min(surr_unclipped, surr_clipped);
        // The clipped branch is constant in the parameters.
        const double d_logp = surr_unclipped <= surr_clipped ? -adv[i] * ratio : 0.0;
        const double h = pi.entropy();
        entropy += h;
        stats.mean_ratio += ratio;
        stats.clip_fraction += std::abs(ratio - 1.0) > cfg.clip_ratio ? 1.0 : 0.0;

        pi.log_prob_grad(buf.actions[i], g_logp);
        pi.entropy_grad(g_ent);
        for (std::size_t a = 0; a < actions; ++a)
          d_logits(row, static_cast<Eigen::Index>(a)) = (d_logp * g_logp[a] - cfg.entropy_coef * g_ent[a]) / bd;

        const double err = values(row, 0) - returns[i];
        v_loss += err * err;
        d_values(row, 0) = 2.0 * cfg.value_loss_coef * err / bd;
      }
      const double total = (pg_loss + cfg.value_loss_coef * v_loss - cfg.entropy_coef * entropy) / bd;
      if (!std::isfinite(total)) throw TrainingDivergedError("PPO loss became non-finite");
      stats.policy_loss += pg_loss;
      stats.value_loss += v_loss;
      stats.entropy += entropy;
      samples_seen += b;
      ++minibatches;

      nn::MlpGradients g_policy = nn::backward(nets.policy, policy_record, d_logits);
      nn::MlpGradients g_value = nn::backward(nets.value, value_record, d_values);
      std::vector<std::span<double>> grads;
      nn::append_spans(g_policy, grads);
      nn::append_spans(g_value, grads);
      if (cfg.grad_norm_clip > 0.0) nn::clip_global_norm(grads, cfg.grad_norm_clip);
      nn::adam_step(params, grads, learner.adam);
    }
  }
  const auto s = static_cast<double>(std::max<std::size_t>(samples_seen, 1));
  stats.policy_loss /= s;
  stats.value_loss /= s;
  stats.entropy /= s;
  stats.mean_ratio /= s;
  stats.clip_fraction /= s;
  return stats;
}

}  // namespace semx::rl
