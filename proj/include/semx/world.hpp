#pragma once

// Kinematic tabletop: N colored balls on the square [-H, H]^2, moved one at a
// time by fixed-length pushes in eight compass directions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "semx/error.hpp"
#include "semx/random.hpp"

namespace semx::world {

inline constexpr std::size_t kNumDirections = 8;
inline constexpr std::size_t kMaxResetRejections = 10000;

struct ArenaConfig {
  double half_extent = 1.0;
  double object_radius = 0.1;  // only used to separate balls at reset
  double push_distance = 0.15;
  std::size_t num_objects = 5;
  std::size_t max_episode_steps = 50;

  std::size_t action_count() const { return num_objects * kNumDirections; }

  // `num_colors` is the palette size the catalog was built from.
  void validate(std::size_t num_colors) const {
    if (!(half_extent > 0.0)) throw ConfigError("arena.half_extent must be > 0");
    if (!(object_radius > 0.0 && object_radius < half_extent))
      throw ConfigError("arena.object_radius must lie in (0, half_extent)");
    if (!(push_distance > 0.0 && push_distance < 2.0 * half_extent))
      throw ConfigError("arena.push_distance must lie in (0, 2 * half_extent)");
    if (num_objects < 1 || num_objects > num_colors)
      throw ConfigError("arena.num_objects must lie in [1, " + std::to_string(num_colors) + "]");
    if (max_episode_steps < 1) throw ConfigError("arena.max_episode_steps must be >= 1");
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct WorldState {
  std::vector<Point> positions;
  std::vector<std::size_t> color_ids;  // color of each ball; a permutation of 0..N-1
  std::size_t step_count = 0;

  std::size_t size() const { return positions.size(); }
  bool operator==(const WorldState&) const = default;

  // Builds a state with ball i colored i.
  static WorldState from_positions(std::vector<Point> positions, std::size_t step_count = 0) {
    WorldState s;
    s.color_ids.resize(positions.size());
    std::iota(s.color_ids.begin(), s.color_ids.end(), std::size_t{0});
    s.positions = std::move(positions);
    s.step_count = step_count;
    return s;
  }
};

struct DecodedAction {
  std::size_t object = 0;
  std::size_t direction = 0;
  bool operator==(const DecodedAction&) const = default;
};

/// Unit push vectors, d = 0 along +x, counterclockwise in 45 degree steps.
/// Axis-aligned entries are exact zeros so a push never nudges the other
/// coordinate (which would break exact ties in the relation oracle).
inline constexpr std::array<Point, kNumDirections> kDirections = {{
    {1.0, 0.0},
    {0.70710678118654752440, 0.70710678118654752440},
    {0.0, 1.0},
    {-0.70710678118654752440, 0.70710678118654752440},
    {-1.0, 0.0},
    {-0.70710678118654752440, -0.70710678118654752440},
    {0.0, -1.0},
    {0.70710678118654752440, -0.70710678118654752440},
}};

inline DecodedAction decode_action(std::size_t action, const ArenaConfig& config) {
  if (action >= config.action_count()) {
    throw InvalidActionError("action " + std::to_string(action) + " outside [0, " +
                             std::to_string(config.action_count()) + ")");
  }
  return {action / kNumDirections, action % kNumDirections};
}

/// Uniform placement over [-H + r, H - r]^2. Balls are placed in index order,
/// x then y from the stream; a ball closer than 2r to an earlier one is redrawn.
inline WorldState reset(const ArenaConfig& config, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const double lo = -config.half_extent + config.object_radius;
  const double hi = config.half_extent - config.object_radius;
  const double min_dist = 2.0 * config.object_radius;

  std::vector<Point> placed;
  placed.reserve(config.num_objects);
  for (std::size_t i = 0; i < config.num_objects; ++i) {
    std::size_t rejections = 0;
    for (;;) {
      const double x = lo + (hi - lo) * rng.uniform();
      const double y = lo + (hi - lo) * rng.uniform();
      bool clear = true;
      for (const auto& p : placed) {
        if (std::hypot(x - p.x, y - p.y) < min_dist) {
          clear = false;
          break;
        }
      }
      if (clear) {
        placed.push_back({x, y});
        break;
      }
      if (++rejections >= kMaxResetRejections) {
        throw ConfigError("reset: could not separate " + std::to_string(config.num_objects) +
                          " balls of radius " + std::to_string(config.object_radius) +
                          " after " + std::to_string(kMaxResetRejections) + " attempts");
      }
    }
  }
  return WorldState::from_positions(std::move(placed));
}

inline WorldState step(const WorldState& state, std::size_t action, const ArenaConfig& config) {
  const auto [object, direction] = decode_action(action, config);
  if (object >= state.size()) {
    throw InvalidActionError("action " + std::to_string(action) + " targets missing ball " +
                             std::to_string(object));
  }
  WorldState next = state;
  const double h = config.half_extent;
  auto& p = next.positions[object];
  p.x = std::clamp(p.x + config.push_distance * kDirections[direction].x, -h, h);
  p.y = std::clamp(p.y + config.push_distance * kDirections[direction].y, -h, h);
  ++next.step_count;
  return next;
}

/// Normalized positions in color order: entries 2c, 2c+1 hold the ball of color c.
inline std::vector<double> state_features(const WorldState& state, const ArenaConfig& config) {
  std::vector<double> out(2 * state.size(), 0.0);
  for (std::size_t i = 0; i < state.size(); ++i) {
    const std::size_t c = state.color_ids[i];
    if (c >= state.size()) throw ShapeError("color id out of range in world state");
    out[2 * c] = state.positions[i].x / config.half_extent;
    out[2 * c + 1] = state.positions[i].y / config.half_extent;
  }
  return out;
}

}  // namespace semx::world
