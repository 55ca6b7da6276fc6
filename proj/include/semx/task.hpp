#pragma once

// Goal instructions for the arrangement task: one catalog question that
// must become "yes".

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "semx/error.hpp"
#include "semx/questions.hpp"
#include "semx/random.hpp"
#include "semx/world.hpp"

namespace semx::world {

struct Goal {
  std::size_t question_index = 0;
  bool operator==(const Goal&) const = default;
};

inline std::size_t observation_size(const ArenaConfig& config,
                                    const questions::QuestionCatalog& catalog) {
  return 2 * config.num_objects + catalog.size();
}

/// Policy input: normalized positions in color order, then a one-hot goal.
inline std::vector<double> observe(const WorldState& state, const Goal& goal,
                                   const ArenaConfig& config,
                                   const questions::QuestionCatalog& catalog) {
  if (goal.question_index >= catalog.size()) throw ShapeError("goal index outside the catalog");
  std::vector<double> out = state_features(state, config);
  out.resize(2 * state.size() + catalog.size(), 0.0);
  out[2 * state.size() + goal.question_index] = 1.0;
  return out;
}

inline bool check_success(const WorldState& state, const Goal& goal,
                          const questions::QuestionCatalog& catalog) {
  return questions::answer(state, catalog[goal.question_index]);
}

/// Uniform over the questions currently answered "no", so every episode
/// starts unsolved. Uses the first draw of the stream seeded with `seed`.
inline Goal sample_goal(const WorldState& state, const questions::QuestionCatalog& catalog,
                        std::uint64_t seed) {
  std::vector<std::size_t> unsolved;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (!questions::answer(state, catalog[i])) unsolved.push_back(i);
  }
  if (unsolved.empty()) throw InternalError("sample_goal: every catalog question already holds");
  SplitMix64 rng(seed);
  return Goal{unsolved[rng.uniform_index(unsolved.size())]};
}

}  // namespace semx::world
