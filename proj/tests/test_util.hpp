#pragma once

#include <cstdint>
#include <vector>

#include "semx/random.hpp"
#include "semx/world.hpp"

namespace semx::testing {

// Random scene with coordinates drawn uniformly from [-1, 1]^2.
inline world::WorldState random_scene(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<world::Point> pts(n);
  for (auto& p : pts) p = {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
  return world::WorldState::from_positions(std::move(pts));
}

}  // namespace semx::testing
