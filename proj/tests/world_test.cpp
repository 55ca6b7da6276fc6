#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "semx/questions.hpp"
#include "semx/task.hpp"
#include "semx/world.hpp"
#include "test_util.hpp"

namespace semx::world {
namespace {

const questions::QuestionCatalog& default_catalog() {
  static const auto c = questions::build_catalog(questions::default_palette());
  return c;
}

double min_pairwise(const WorldState& s) {
  double best = INFINITY;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      best = std::min(best, std::hypot(s.positions[i].x - s.positions[j].x, s.positions[i].y - s.positions[j].y));
  return best;
}

TEST(SplitMix64, MatchesReferenceFirstOutput) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(derive_seed(0, 0), 0xE220A8397B1DCDAFULL);
  SplitMix64 again(0);
  again.next();
  EXPECT_EQ(again.next(), derive_seed(0, 1));
}

TEST(SplitMix64, SubsystemSeedsAreIndependentOfOtherTags) {
  EXPECT_EQ(subsystem_seed(7, seed_tags::kDataset), derive_seed(7 ^ seed_tags::kDataset, 0));
  EXPECT_NE(subsystem_seed(7, seed_tags::kDataset), subsystem_seed(7, seed_tags::kSplit));
}

TEST(Reset, DefaultSeed42RespectsBoundsAndSeparation) {
  const auto s = reset(ArenaConfig{}, 42);
  ASSERT_EQ(s.size(), 5u);
  for (const auto& p : s.positions) {
    EXPECT_GE(p.x, -0.9);
    EXPECT_LE(p.x, 0.9);
    EXPECT_GE(p.y, -0.9);
    EXPECT_LE(p.y, 0.9);
  }
  EXPECT_GE(min_pairwise(s), 0.2);
  EXPECT_EQ(s.step_count, 0u);
}

TEST(Reset, SingleObject) {
  ArenaConfig c;
  c.num_objects = 1;
  const auto s = reset(c, 99);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_LE(std::abs(s.positions[0].x), 0.9);
  EXPECT_LE(std::abs(s.positions[0].y), 0.9);
  EXPECT_EQ(s.step_count, 0u);
}

TEST(Reset, Seed1MatchesReferenceStream) {
  // Frozen from tests/oracles/reference_streams.py.
  const std::vector<Point> expected = {
      {0.11981083531010561, 0.442407163072862},   {0.8478049564562332, -0.10015340929961025},
      {-0.10032353851255549, 0.4732099054411699}, {0.6792276361755113, 0.041520923731766524},
      {-0.3860843680854601, 0.5291938901921501},
  };
  EXPECT_EQ(reset(ArenaConfig{}, 1).positions, expected);
}

TEST(Reset, DeterministicAndSeparatedOverManySeeds) {
  const ArenaConfig c;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto a = reset(c, seed);
    ASSERT_EQ(a, reset(c, seed));
    ASSERT_GE(min_pairwise(a), 2.0 * c.object_radius) << "seed " << seed;
    std::set<std::size_t> colors(a.color_ids.begin(), a.color_ids.end());
    ASSERT_EQ(colors.size(), c.num_objects);
  }
}

TEST(Reset, ImpossibleGeometryIsAConfigError) {
  ArenaConfig c;
  c.object_radius = 0.6;  // two balls cannot fit 1.2 apart inside [-0.4, 0.4]^2
  c.num_objects = 2;
  EXPECT_THROW(reset(c, 3), ConfigError);
}

TEST(DecodeAction, Examples) {
  const ArenaConfig c;
  EXPECT_EQ(decode_action(0, c), (DecodedAction{0, 0}));
  EXPECT_EQ(decode_action(13, c), (DecodedAction{1, 5}));
  EXPECT_EQ(decode_action(39, c), (DecodedAction{4, 7}));
  EXPECT_THROW(decode_action(40, c), InvalidActionError);
}

TEST(Step, EastPush) {
  const ArenaConfig c;
  auto s = WorldState::from_positions({{0, 0}, {0.5, 0.5}});
  const auto next = step(s, 0, c);
  EXPECT_EQ(next.positions[0], (Point{0.15, 0.0}));
  EXPECT_EQ(next.positions[1], s.positions[1]);
  EXPECT_EQ(next.step_count, 1u);
}

TEST(Step, ClampsAtTheWall) {
  const auto next = step(WorldState::from_positions({{0.95, 0}, {0, 0.5}}), 0, ArenaConfig{});
  EXPECT_EQ(next.positions[0], (Point{1.0, 0.0}));
}

TEST(Step, DiagonalPush) {
  const auto next = step(WorldState::from_positions({{0, 0}, {0, 0.5}}), 1, ArenaConfig{});
  EXPECT_NEAR(next.positions[0].x, 0.15 * std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(next.positions[0].y, 0.15 * std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(next.positions[0].x, 0.106066, 1e-6);
}

TEST(Step, AxisPushLeavesOtherCoordinateBitwiseUnchanged) {
  const auto s = WorldState::from_positions({{0.3, -0.2}, {0, 0.5}});
  EXPECT_EQ(step(s, 2, ArenaConfig{}).positions[0].x, 0.3);  // north
  EXPECT_EQ(step(s, 4, ArenaConfig{}).positions[0].y, -0.2); // west
}

TEST(Step, RejectsInvalidAction) {
  EXPECT_THROW(step(reset(ArenaConfig{}, 1), 40, ArenaConfig{}), InvalidActionError);
}

TEST(StepProperty, ContainmentAndLocality) {
  const ArenaConfig c;
  SplitMix64 rng(2024);
  for (int episode = 0; episode < 50; ++episode) {
    auto s = reset(c, rng.next());
    for (int t = 0; t < 200; ++t) {
      const std::size_t a = rng.uniform_index(c.action_count());
      const auto next = step(s, a, c);
      const std::size_t moved = a / kNumDirections;
      for (std::size_t i = 0; i < s.size(); ++i) {
        ASSERT_LE(std::abs(next.positions[i].x), c.half_extent);
        ASSERT_LE(std::abs(next.positions[i].y), c.half_extent);
        if (i != moved) ASSERT_EQ(next.positions[i], s.positions[i]);
      }
      ASSERT_EQ(next, step(s, a, c));
      s = next;
    }
  }
}

TEST(Observe, LayoutAndGoalBlock) {
  const ArenaConfig c;
  const auto& cat = default_catalog();
  auto s = WorldState::from_positions(std::vector<Point>(5, Point{0, 0}));
  const auto obs = observe(s, Goal{17}, c, cat);
  ASSERT_EQ(obs.size(), 90u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(obs[i], 0.0);
  double sum = 0.0;
  for (std::size_t i = 10; i < 90; ++i) sum += obs[i];
  EXPECT_EQ(sum, 1.0);
  EXPECT_EQ(obs[10 + 17], 1.0);
}

TEST(Observe, UsesColorOrder) {
  const ArenaConfig c;
  auto s = WorldState::from_positions({{0.2, 0.3}, {1, -1}, {0, 0}, {0, 0}, {0, 0}});
  s.color_ids = {1, 0, 2, 3, 4};
  const auto obs = observe(s, Goal{0}, c, default_catalog());
  EXPECT_EQ(obs[0], 1.0);
  EXPECT_EQ(obs[1], -1.0);
  EXPECT_EQ(obs[2], 0.2);
}

TEST(ObserveProperty, BoundedAndOneHot) {
  const ArenaConfig c;
  const auto& cat = default_catalog();
  SplitMix64 rng(5);
  for (int i = 0; i < 200; ++i) {
    auto s = reset(c, rng.next());
    for (int k = 0; k < 30; ++k) s = step(s, rng.uniform_index(c.action_count()), c);
    const auto obs = observe(s, Goal{rng.uniform_index(cat.size())}, c, cat);
    ASSERT_EQ(obs.size(), 2 * c.num_objects + cat.size());
    double hot = 0.0;
    for (std::size_t j = 0; j < 10; ++j) ASSERT_LE(std::abs(obs[j]), 1.0);
    for (std::size_t j = 10; j < obs.size(); ++j) {
      ASSERT_TRUE(obs[j] == 0.0 || obs[j] == 1.0);
      hot += obs[j];
    }
    ASSERT_EQ(hot, 1.0);
  }
}

TEST(CheckSuccess, LeftOfAnchor) {
  const auto& cat = default_catalog();
  // red = 0, green = 2
  const auto goal = Goal{*cat.index_of({0, 2, questions::Relation::kLeft})};
  auto s = WorldState::from_positions({{0.5, 0}, {0, 0.8}, {-0.5, 0}, {0, -0.8}, {0.8, 0.8}});
  EXPECT_TRUE(check_success(s, goal, cat));
  s.positions[0].x = -0.5;
  s.positions[2].x = 0.5;
  EXPECT_FALSE(check_success(s, goal, cat));
  s.positions[2].x = -0.5;  // exact tie
  EXPECT_FALSE(check_success(s, goal, cat));
}

TEST(SampleGoal, PicksTheOnlyUnsolvedQuestion) {
  const auto cat = questions::build_catalog({"red", "blue"}, 1);  // left only
  const auto s = WorldState::from_positions({{0, 0}, {0.5, 0}});  // blue right of red
  // (red, blue, left) = no; (blue, red, left) = yes
  for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(sample_goal(s, cat, seed).question_index, 0u);
}

TEST(SampleGoal, AlwaysUnsolvedAndMatchesReference) {
  const auto& cat = default_catalog();
  const auto s = reset(ArenaConfig{}, 1);
  EXPECT_EQ(sample_goal(s, cat, 7).question_index, 30u);  // reference_streams.py
  SplitMix64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto st = reset(ArenaConfig{}, rng.next());
    const auto g = sample_goal(st, cat, rng.next());
    ASSERT_FALSE(check_success(st, g, cat));
  }
}

}  // namespace
}  // namespace semx::world
