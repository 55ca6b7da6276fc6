#pragma once

// Question selection and the answer-flip curiosity reward:
//   r_t = sum over selected q of 1[A(s_t, q) != A(s_{t+1}, q)]
// mixed with the sparse task reward as extrinsic + beta * r_t.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "semx/classifier/model.hpp"
#include "semx/error.hpp"
#include "semx/questions.hpp"
#include "semx/random.hpp"
#include "semx/task.hpp"
#include "semx/world.hpp"

namespace semx::reward {

inline constexpr double kSuccessReward = 10.0;

enum class Method {
  kClassifierTopN,  // "ours"
  kAllQuestions,    // "ane"
  kRandomN,         // "random"
  kNoQuestions,     // "ppo"
};

inline std::string method_name(Method m) {
  switch (m) {
    case Method::kClassifierTopN: return "ours";
    case Method::kAllQuestions: return "ane";
    case Method::kRandomN: return "random";
    case Method::kNoQuestions: return "ppo";
  }
  return "?";
}

inline Method parse_method(const std::string& name) {
  if (name == "ours") return Method::kClassifierTopN;
  if (name == "ane") return Method::kAllQuestions;
  if (name == "random") return Method::kRandomN;
  if (name == "ppo") return Method::kNoQuestions;
  throw ConfigError("unknown method '" + name + "' (expected ours, ane, random or ppo)");
}

enum class Aggregate { kSum, kMean };

inline std::string aggregate_name(Aggregate a) { return a == Aggregate::kSum ? "sum" : "mean"; }

inline Aggregate parse_aggregate(const std::string& name) {
  if (name == "sum") return Aggregate::kSum;
  if (name == "mean") return Aggregate::kMean;
  throw ConfigError("unknown aggregate '" + name + "' (expected sum or mean)");
}

struct QueryConfig {
  std::size_t n = 1;
  std::size_t period = 1;  // query every k-th step
  double beta = 0.1;
  Aggregate aggregate = Aggregate::kSum;

  void validate() const {
    if (n < 1) throw ConfigError("query.n must be >= 1");
    if (period < 1) throw ConfigError("query.period must be >= 1");
    if (!(beta >= 0.0)) throw ConfigError("query.beta must be >= 0");
  }
};

struct SelectionPolicy {
  Method method = Method::kNoQuestions;
  std::size_t n = 1;
  std::shared_ptr<const classifier::FrozenScorer> scorer;  // kClassifierTopN only

  void validate(std::size_t num_questions) const {
    if ((method == Method::kClassifierTopN || method == Method::kRandomN) && (n < 1 || n > num_questions))
      throw ConfigError("selection size n must lie in [1, " + std::to_string(num_questions) + "]");
    if (method == Method::kClassifierTopN && !scorer)
      throw ConfigError("method 'ours' needs a trained relevance classifier");
  }
};

/// n highest scores, ties to the lower index.
inline std::vector<std::size_t> top_n(std::span<const double> scores, std::size_t n) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  n = std::min(n, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
  idx.resize(n);
  return idx;
}

/// n distinct indices by a partial Fisher-Yates from the front, in draw order.
inline std::vector<std::size_t> random_n(std::size_t num_questions, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(num_questions);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SplitMix64 rng(seed);
  n = std::min(n, num_questions);
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.uniform_index(num_questions - i)]);
  idx.resize(n);
  return idx;
}

inline std::vector<std::size_t> select_questions(const SelectionPolicy& policy, std::span<const double> state_features,
                                                 const questions::QuestionCatalog& catalog, std::uint64_t seed) {
  switch (policy.method) {
    case Method::kClassifierTopN: {
      policy.validate(catalog.size());
      if (policy.scorer->num_questions() != catalog.size())
        throw ShapeError("classifier output width does not match the catalog");
      const auto scores = policy.scorer->scores(state_features);
      return top_n(scores, policy.n);
    }
    case Method::kAllQuestions: {
      std::vector<std::size_t> all(catalog.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      return all;
    }
    case Method::kRandomN:
      policy.validate(catalog.size());
      return random_n(catalog.size(), policy.n, seed);
    case Method::kNoQuestions: return {};
  }
  return {};
}

inline double intrinsic_reward(const questions::AnswerVector& before, const questions::AnswerVector& after,
                               std::span<const std::size_t> selected, Aggregate aggregate) {
  if (before.size() != after.size()) throw ShapeError("answer vectors differ in length");
  double flips = 0.0;
  for (std::size_t i : selected) {
    if (i >= before.size())
      throw ShapeError("selected question " + std::to_string(i) + " outside answer vector of length " +
                       std::to_string(before.size()));
    flips += before[i] != after[i] ? 1.0 : 0.0;
  }
  if (aggregate == Aggregate::kMean) return selected.empty() ? 0.0 : flips / static_cast<double>(selected.size());
  return flips;
}

struct StepReward {
  double total = 0.0;
  double extrinsic = 0.0;
  double intrinsic = 0.0;  // before beta scaling
  bool operator==(const StepReward&) const = default;
};

/// Reward for the transition before -> after taken at episode step t.
/// Questions are chosen from the pre-transition state and only on steps with
/// t mod period == 0. `selection_seed` feeds RandomN.
inline StepReward compute_step_reward(const world::WorldState& before, const world::WorldState& after,
                                      const world::Goal& goal, const questions::QuestionCatalog& catalog,
                                      const world::ArenaConfig& arena, const SelectionPolicy& policy,
                                      const QueryConfig& query, std::size_t t, std::uint64_t selection_seed = 0) {
  StepReward r;
  r.extrinsic = world::check_success(after, goal, catalog) ? kSuccessReward : 0.0;
  if (policy.method != Method::kNoQuestions && t % query.period == 0) {
    const auto features = world::state_features(before, arena);
    const auto selected = select_questions(policy, features, catalog, selection_seed);
    // Only the selected questions are put to the oracle.
    questions::AnswerVector a_before(catalog.size()), a_after(catalog.size());
    for (std::size_t i : selected) {
      a_before[i] = questions::answer(before, catalog[i]);
      a_after[i] = questions::answer(after, catalog[i]);
    }
    r.intrinsic = intrinsic_reward(a_before, a_after, selected, query.aggregate);
  }
  r.total = r.extrinsic + query.beta * r.intrinsic;
  return r;
}

}  // namespace semx::reward
