#pragma once

// Supervised data for the relevance classifier. A question is labeled 1 for
// a state when at least one single push changes its answer.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semx/digest.hpp"
#include "semx/error.hpp"
#include "semx/questions.hpp"
#include "semx/random.hpp"
#include "semx/world.hpp"

namespace semx::classifier {

inline constexpr std::size_t kMaxWarmupActions = 10;

struct LabeledSample {
  std::vector<double> state_features;  // 2N normalized coordinates
  std::vector<std::uint8_t> labels;    // one bit per catalog question
  bool operator==(const LabeledSample&) const = default;
};

struct DatasetMetadata {
  std::size_t num_objects = 0;
  std::size_t num_questions = 0;
  std::uint64_t seed = 0;
  std::uint64_t environment_digest = 0;
  bool operator==(const DatasetMetadata&) const = default;
};

struct Dataset {
  DatasetMetadata metadata;
  std::vector<LabeledSample> samples;

  std::size_t size() const { return samples.size(); }
  std::size_t state_dim() const { return 2 * metadata.num_objects; }
  bool operator==(const Dataset&) const = default;
};

inline std::uint64_t arena_digest(const world::ArenaConfig& c) {
  return fnv1a64(format_double(c.half_extent) + "|" + format_double(c.object_radius) + "|" +
                 format_double(c.push_distance) + "|" + std::to_string(c.num_objects) + "|" +
                 std::to_string(c.max_episode_steps));
}

/// For each question, the first action (in index order) whose push changes
/// the answer, or nullopt if none does.
inline std::vector<std::optional<std::size_t>> flip_witnesses(const world::WorldState& state,
                                                              const world::ArenaConfig& config,
                                                              const questions::QuestionCatalog& catalog) {
  const auto before = questions::answer_all(state, catalog);
  std::vector<std::optional<std::size_t>> witness(catalog.size());
  for (std::size_t a = 0; a < config.action_count(); ++a) {
    const auto after = questions::answer_all(world::step(state, a, config), catalog);
    for (std::size_t i = 0; i < catalog.size(); ++i) {
      if (!witness[i] && before[i] != after[i]) witness[i] = a;
    }
  }
  return witness;
}

inline std::vector<std::uint8_t> flip_labels(const world::WorldState& state, const world::ArenaConfig& config,
                                             const questions::QuestionCatalog& catalog) {
  const auto witness = flip_witnesses(state, config, catalog);
  std::vector<std::uint8_t> labels(catalog.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = witness[i] ? 1 : 0;
  return labels;
}

/// The state behind sample i: a fresh reset from derive_seed(seed, i), then
/// U{0..10} uniformly random pushes drawn from a tagged side stream.
inline world::WorldState sample_state(const world::ArenaConfig& config, std::uint64_t seed, std::size_t index) {
  const std::uint64_t sample_seed = derive_seed(seed, index);
  world::WorldState s = world::reset(config, sample_seed);
  SplitMix64 rng(sample_seed ^ seed_tags::kActions);
  const std::size_t warmup = rng.uniform_index(kMaxWarmupActions + 1);
  for (std::size_t k = 0; k < warmup; ++k) s = world::step(s, rng.uniform_index(config.action_count()), config);
  return s;
}

inline Dataset generate_dataset(const world::ArenaConfig& config, const questions::QuestionCatalog& catalog,
                                std::size_t num_samples, std::uint64_t seed) {
  if (num_samples < 1) throw ConfigError("dataset needs at least one sample");
  config.validate(catalog.num_colors());
  Dataset ds;
  ds.metadata = {config.num_objects, catalog.size(), seed, arena_digest(config)};
  ds.samples.reserve(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const auto s = sample_state(config, seed, i);
    ds.samples.push_back({world::state_features(s, config), flip_labels(s, config, catalog)});
  }
  return ds;
}

/// Seeded shuffle, then the first round(fraction * size) samples train.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
  if (n_train == 0 || n_train >= ds.size())
    throw ConfigError("split of " + std::to_string(ds.size()) + " samples leaves one side empty");
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 rng(seed);
  rng.shuffle(order);
  Dataset train{ds.metadata, {}}, test{ds.metadata, {}};
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < n_train ? train : test).samples.push_back(ds.samples[order[k]]);
  return {std::move(train), std::move(test)};
}

}  // namespace semx::classifier
