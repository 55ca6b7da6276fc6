#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "semx/questions.hpp"
#include "semx/random.hpp"
#include "semx/reward.hpp"
#include "semx/task.hpp"
#include "semx/world.hpp"

namespace semx::rl {

struct StepOutcome {
  double reward = 0.0;     // what the learner optimizes
  double extrinsic = 0.0;
  double intrinsic = 0.0;  // raw flip count (or mean), before beta
  bool terminal = false;   // episode reached its goal
  bool timeout = false;    // episode hit the step cap without reaching it
};

/// Episodic environment driven by the PPO trainer. reset() begins the next
/// episode; episodes are seeded from the environment's own stream.
template <typename E>
concept Environment = requires(E& env, const E& cenv, std::size_t action) {
  { cenv.observation_size() } -> std::convertible_to<std::size_t>;
  { cenv.action_count() } -> std::convertible_to<std::size_t>;
  { cenv.observation() } -> std::convertible_to<std::vector<double>>;
  { env.step(action) } -> std::same_as<StepOutcome>;
  env.reset();
};

/// The arrangement task on the kinematic world, with curiosity shaping.
/// Episode j starts from reset(derive_seed(seed, j)); its goal is drawn with
/// derive_seed(episode_seed, 1).
class ArrangementEnv {
 public:
  ArrangementEnv(world::ArenaConfig arena, std::shared_ptr<const questions::QuestionCatalog> catalog,
                 reward::SelectionPolicy selection, reward::QueryConfig query, std::uint64_t seed)
      : arena_(arena), catalog_(std::move(catalog)), selection_(std::move(selection)), query_(query), seed_(seed) {
    arena_.validate(catalog_->num_colors());
    query_.validate();
    selection_.validate(catalog_->size());
    reset();
  }

  std::size_t observation_size() const { return world::observation_size(arena_, *catalog_); }
  std::size_t action_count() const { return arena_.action_count(); }
  std::vector<double> observation() const { return world::observe(state_, goal_, arena_, *catalog_); }

  void reset() {
    episode_seed_ = derive_seed(seed_, episode_index_++);
    state_ = world::reset(arena_, episode_seed_);
    goal_ = world::sample_goal(state_, *catalog_, derive_seed(episode_seed_, 1));
  }

  StepOutcome step(std::size_t action) {
    world::WorldState next = world::step(state_, action, arena_);
    const std::size_t t = state_.step_count;
    const auto r = reward::compute_step_reward(state_, next, goal_, *catalog_, arena_, selection_, query_, t,
                                               derive_seed(episode_seed_ ^ seed_tags::kQuestions, t));
    state_ = std::move(next);
    StepOutcome out{r.total, r.extrinsic, r.intrinsic, false, false};
    out.terminal = r.extrinsic > 0.0;
    out.timeout = !out.terminal && state_.step_count >= arena_.max_episode_steps;
    return out;
  }

  const world::WorldState& state() const { return state_; }
  const world::Goal& goal() const { return goal_; }
  const world::ArenaConfig& arena() const { return arena_; }
  const questions::QuestionCatalog& catalog() const { return *catalog_; }
  std::uint64_t episodes_started() const { return episode_index_; }

 private:
  world::ArenaConfig arena_;
  std::shared_ptr<const questions::QuestionCatalog> catalog_;
  reward::SelectionPolicy selection_;
  reward::QueryConfig query_;
  std::uint64_t seed_;
  std::uint64_t episode_index_ = 0;
  std::uint64_t episode_seed_ = 0;
  world::WorldState state_;
  world::Goal goal_;
};

/// One-step bandit: action 0 pays 1, every other action pays 0.
class BanditEnv {
 public:
  explicit BanditEnv(std::size_t actions = 2) : actions_(actions) {}
  std::size_t observation_size() const { return 1; }
  std::size_t action_count() const { return actions_; }
  std::vector<double> observation() const { return {1.0}; }
  void reset() {}
  StepOutcome step(std::size_t action) {
    const double r = action == 0 ? 1.0 : 0.0;
    return {r, r, 0.0, true, false};
  }

 private:
  std::size_t actions_;
};

static_assert(Environment<ArrangementEnv>);
static_assert(Environment<BanditEnv>);

}  // namespace semx::rl
