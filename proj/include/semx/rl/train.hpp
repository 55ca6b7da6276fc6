#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "semx/random.hpp"
#include "semx/rl/env.hpp"
#include "semx/rl/gae.hpp"
#include "semx/rl/ppo.hpp"

namespace semx::rl {

/// Success rate of `act` over `episodes` consecutive episodes of `env`.
/// An episode succeeds when it ends on a goal rather than a timeout.
template <Environment E, typename ActionFn>
double evaluate_policy(ActionFn&& act, E& env, std::size_t episodes) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  std::size_t successes = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    for (;;) {
      const std::vector<double> obs = env.observation();
      const StepOutcome out = env.step(act(obs));
      if (out.terminal || out.timeout) {
        successes += out.terminal;
        break;
      }
    }
    env.reset();
  }
  return static_cast<double>(successes) / static_cast<double>(episodes);
}

/// Greedy (argmax) evaluation on the arrangement task with no curiosity
/// signal. Episodes follow the stream of `seed`, so equal seeds give equal
/// episode sets.
inline double evaluate_policy(const PolicyValueNets& nets, const world::ArenaConfig& arena,
                              std::shared_ptr<const questions::QuestionCatalog> catalog, std::size_t episodes,
                              std::uint64_t seed) {
  ArrangementEnv env(arena, std::move(catalog), reward::SelectionPolicy{}, reward::QueryConfig{.beta = 0.0}, seed);
  return evaluate_policy([&](const std::vector<double>& obs) { return nets.greedy_action(obs); }, env, episodes);
}

struct UpdateRow {
  std::size_t update = 0;  // 1-based
  std::size_t env_steps = 0;
  std::optional<double> success_rate;  // only on evaluation updates
  double mean_intrinsic = 0.0;         // per step, before beta
  std::optional<double> mean_return;   // over episodes finished in this rollout
  UpdateStats stats;
};

struct TrainHooks {
  std::function<double(const PolicyValueNets&, std::size_t update)> evaluate;
  std::function<void(const PpoLearner&, std::size_t update)> checkpoint;  // on evaluation updates
  std::function<void(const UpdateRow&)> on_row;
};

/// total_updates rounds of collect -> GAE -> update. Rollout u samples actions
/// from derive_seed(seed ^ kActions, u) and shuffles minibatches from
/// derive_seed(seed ^ kUpdates, u).
template <Environment E>
std::vector<UpdateRow> train(PpoLearner& learner, E& env, const PpoConfig& cfg, std::uint64_t seed,
                             const TrainHooks& hooks = {}) {
  cfg.validate();
  std::vector<UpdateRow> log;
  log.reserve(cfg.total_updates);
  for (std::size_t u = 1; u <= cfg.total_updates; ++u) {
    const RolloutBuffer buf = collect_rollout(learner.nets, env, cfg, derive_seed(seed ^ seed_tags::kActions, u));
    const AdvantageEstimate est = compute_gae(buf, cfg.discount, cfg.gae_lambda);
    UpdateRow row;
    try {
      row.stats = ppo_update(learner, buf, est.advantages, est.returns, cfg, derive_seed(seed ^ seed_tags::kUpdates, u));
    } catch (const TrainingDivergedError& e) {
      throw TrainingDivergedError(std::string(e.what()) + " at update " + std::to_string(u));
    }
    row.update = u;
    row.env_steps = u * cfg.rollout_length;
    double intrinsic = 0.0;
    for (double v : buf.intrinsic) intrinsic += v;
    row.mean_intrinsic = intrinsic / static_cast<double>(buf.size());
    if (!buf.episode_returns.empty()) {
      double sum = 0.0;
      for (double r : buf.episode_returns) sum += r;
      row.mean_return = sum / static_cast<double>(buf.episode_returns.size());
    }
    if (u % cfg.eval_every == 0) {
      if (hooks.evaluate) row.success_rate = hooks.evaluate(learner.nets, u);
      if (hooks.checkpoint) hooks.checkpoint(learner, u);
    }
    if (hooks.on_row) hooks.on_row(row);
    log.push_back(row);
  }
  return log;
}

}  // namespace semx::rl
