#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "semx/classifier.hpp"
#include "semx/nn/loss.hpp"

namespace semx::classifier {
namespace {

using world::ArenaConfig;
using world::Point;
using world::WorldState;

ArenaConfig two_ball_arena() {
  ArenaConfig c;
  c.num_objects = 2;
  return c;
}

const questions::QuestionCatalog& two_color_catalog() {
  static const auto c = questions::build_catalog({"red", "cyan"});
  return c;
}

const questions::QuestionCatalog& five_color_catalog() {
  static const auto c = questions::build_catalog(questions::default_palette());
  return c;
}

// Reverse-order flip scan with its own push and relation code.
std::vector<std::uint8_t> reverse_scan_labels(const WorldState& s, const ArenaConfig& c,
                                              const questions::QuestionCatalog& cat) {
  const double r = std::sqrt(2.0) / 2.0;
  const double dx[8] = {1, r, 0, -r, -1, -r, 0, r};
  const double dy[8] = {0, r, 1, r, 0, -r, -1, -r};
  auto pos = [&](const std::vector<Point>& p, std::size_t color) {
    for (std::size_t i = 0; i < p.size(); ++i)
      if (s.color_ids[i] == color) return p[i];
    return Point{NAN, NAN};
  };
  auto holds = [&](const std::vector<Point>& p, const questions::Question& q) {
    const Point a = pos(p, q.anchor), t = pos(p, q.target);
    switch (q.relation) {
      case questions::Relation::kLeft: return a.x - t.x > 0;
      case questions::Relation::kRight: return t.x - a.x > 0;
      case questions::Relation::kFront: return a.y - t.y > 0;
      case questions::Relation::kBehind: return t.y - a.y > 0;
    }
    return false;
  };
  std::vector<std::uint8_t> labels(cat.size(), 0);
  for (std::size_t action = 8 * s.size(); action-- > 0;) {
    auto p = s.positions;
    const std::size_t obj = action / 8, dir = action % 8;
    p[obj].x = std::min(c.half_extent, std::max(-c.half_extent, p[obj].x + c.push_distance * dx[dir]));
    p[obj].y = std::min(c.half_extent, std::max(-c.half_extent, p[obj].y + c.push_distance * dy[dir]));
    for (std::size_t i = 0; i < cat.size(); ++i)
      if (holds(p, cat[i]) != holds(s.positions, cat[i])) labels[i] = 1;
  }
  return labels;
}

TEST(FlipLabels, PushAcrossAnchorIsRelevant) {
  const auto& cat = two_color_catalog();
  const auto s = WorldState::from_positions({{0.1, 0}, {0, 0}});  // red, cyan
  const auto labels = flip_labels(s, two_ball_arena(), cat);
  const auto k = *cat.index_of({0, 1, questions::Relation::kLeft});
  EXPECT_EQ(labels[k], 1);
  const auto w = flip_witnesses(s, two_ball_arena(), cat)[k];
  ASSERT_TRUE(w.has_value());
  EXPECT_NE(questions::answer(world::step(s, *w, two_ball_arena()), cat[k]), questions::answer(s, cat[k]));
}

TEST(FlipLabels, FarApartIsIrrelevant) {
  const auto& cat = two_color_catalog();
  const auto s = WorldState::from_positions({{-0.9, 0}, {0.9, 0}});
  const auto labels = flip_labels(s, two_ball_arena(), cat);
  EXPECT_EQ(labels[*cat.index_of({0, 1, questions::Relation::kLeft})], 0);
  EXPECT_EQ(labels[*cat.index_of({0, 1, questions::Relation::kRight})], 0);
  // y equal: a diagonal push breaks the tie either way
  EXPECT_EQ(labels[*cat.index_of({0, 1, questions::Relation::kFront})], 1);
}

TEST(FlipLabels, MatchReverseScanAndWitnessesReplay) {
  const ArenaConfig arena;
  const auto& cat = five_color_catalog();
  for (std::size_t i = 0; i < 100; ++i) {
    const auto s = sample_state(arena, 4242, i);
    const auto labels = flip_labels(s, arena, cat);
    ASSERT_EQ(labels, reverse_scan_labels(s, arena, cat)) << "sample " << i;
    const auto witness = flip_witnesses(s, arena, cat);
    for (std::size_t q = 0; q < cat.size(); ++q) {
      ASSERT_EQ(witness[q].has_value(), labels[q] == 1);
      if (witness[q]) {
        ASSERT_NE(questions::answer(world::step(s, *witness[q], arena), cat[q]), questions::answer(s, cat[q]));
      }
    }
  }
}

TEST(GenerateDataset, ShapeRangeAndDeterminism) {
  const ArenaConfig arena;
  const auto& cat = five_color_catalog();
  const auto a = generate_dataset(arena, cat, 50, 9);
  ASSERT_EQ(a.size(), 50u);
  EXPECT_EQ(a.metadata.num_objects, 5u);
  EXPECT_EQ(a.metadata.num_questions, 80u);
  for (const auto& s : a.samples) {
    ASSERT_EQ(s.state_features.size(), 10u);
    ASSERT_EQ(s.labels.size(), 80u);
    for (double f : s.state_features) ASSERT_LE(std::abs(f), 1.0);
  }
  EXPECT_EQ(a, generate_dataset(arena, cat, 50, 9));
  EXPECT_NE(a, generate_dataset(arena, cat, 50, 10));
  EXPECT_THROW(generate_dataset(arena, cat, 0, 9), ConfigError);
}

TEST(GenerateDataset, SampleIndexIsIndependentOfCount) {
  const ArenaConfig arena;
  const auto& cat = five_color_catalog();
  const auto small = generate_dataset(arena, cat, 5, 3);
  const auto large = generate_dataset(arena, cat, 12, 3);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(small.samples[i], large.samples[i]);
}

TEST(SplitDataset, SizesDisjointAndSeeded) {
  const auto ds = generate_dataset(two_ball_arena(), two_color_catalog(), 10000, 1);
  const auto [train, test] = split_dataset(ds, 0.9, 5);
  EXPECT_EQ(train.size(), 9000u);
  EXPECT_EQ(test.size(), 1000u);

  auto key = [](const LabeledSample& s) { return std::make_pair(s.state_features, s.labels); };
  std::vector<std::pair<std::vector<double>, std::vector<std::uint8_t>>> all, merged;
  for (const auto& s : ds.samples) all.push_back(key(s));
  for (const auto& s : train.samples) merged.push_back(key(s));
  for (const auto& s : test.samples) merged.push_back(key(s));
  std::sort(all.begin(), all.end());
  std::sort(merged.begin(), merged.end());
  EXPECT_EQ(all, merged);

  EXPECT_EQ(split_dataset(ds, 0.9, 5).first, train);
  EXPECT_NE(split_dataset(ds, 0.9, 6).first, train);
  EXPECT_THROW(split_dataset(ds, 1.0, 5), ConfigError);
  const auto tiny = generate_dataset(two_ball_arena(), two_color_catalog(), 2, 1);
  EXPECT_THROW(split_dataset(tiny, 0.1, 5), ConfigError);
}

RelevanceModel small_model(std::uint64_t seed) {
  return init_relevance_model(4, two_color_catalog(), seed);
}

TEST(Scoring, FusedPathMatchesPlainConcatenation) {
  const auto& cat = five_color_catalog();
  auto model = init_relevance_model(10, cat, 3);
  for (auto& l : model.decoder.layers) l.bias.setConstant(0.05);
  const auto ds = generate_dataset(ArenaConfig{}, cat, 3, 2);
  const std::vector<std::size_t> rows = {0, 1, 2};
  const Matrix states = feature_matrix(ds, rows);
  const Matrix qs = question_inputs(cat);
  const Matrix fused = score_pairs(model, states, qs);
  const Matrix s_codes = nn::predict(model.state_encoder, states);
  const Matrix q_codes = nn::predict(model.question_encoder, qs);
  const FrozenScorer scorer(model, cat);
  for (Eigen::Index b = 0; b < 3; ++b) {
    const auto frozen = scorer.scores(ds.samples[static_cast<std::size_t>(b)].state_features);
    const auto single = predict_scores(model, ds.samples[static_cast<std::size_t>(b)].state_features, cat);
    for (Eigen::Index q = 0; q < qs.rows(); ++q) {
      Matrix joint(1, 64);
      joint << s_codes.row(b), q_codes.row(q);
      const double plain = nn::predict(model.decoder, joint)(0, 0);
      ASSERT_NEAR(fused(b, q), plain, 1e-12);
      ASSERT_NEAR(frozen[static_cast<std::size_t>(q)], plain, 1e-12);
      ASSERT_NEAR(single[static_cast<std::size_t>(q)], fused(b, q), 1e-15);
      ASSERT_GT(plain, 0.0);
      ASSERT_LT(plain, 1.0);
    }
  }
  EXPECT_EQ(scorer.scores(ds.samples[0].state_features), scorer.scores(ds.samples[0].state_features));
  EXPECT_THROW(predict_scores(model, std::vector<double>(4, 0.0), cat), ShapeError);
}

TEST(Scoring, PermutingQuestionRowsPermutesScores) {
  const auto& cat = five_color_catalog();
  const auto model = init_relevance_model(10, cat, 8);
  const auto ds = generate_dataset(ArenaConfig{}, cat, 2, 2);
  const std::vector<std::size_t> rows = {0, 1};
  const Matrix states = feature_matrix(ds, rows);
  const Matrix qs = question_inputs(cat);
  std::vector<std::size_t> perm(cat.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  SplitMix64(4).shuffle(perm);
  Matrix permuted(qs.rows(), qs.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) permuted.row(static_cast<Eigen::Index>(i)) = qs.row(static_cast<Eigen::Index>(perm[i]));
  const Matrix a = score_pairs(model, states, qs);
  const Matrix b = score_pairs(model, states, permuted);
  for (Eigen::Index r = 0; r < 2; ++r)
    for (std::size_t i = 0; i < perm.size(); ++i)
      ASSERT_EQ(b(r, static_cast<Eigen::Index>(i)), a(r, static_cast<Eigen::Index>(perm[i])));
}

TEST(Scoring, BackwardMatchesFiniteDifferences) {
  const auto& cat = two_color_catalog();
  auto model = small_model(11);
  SplitMix64 rng(5);
  for (auto* net : {&model.state_encoder, &model.question_encoder, &model.decoder})
    for (auto& l : net->layers)
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.4 * (2.0 * rng.uniform() - 1.0);
  Matrix states(3, 4);
  for (Eigen::Index i = 0; i < states.size(); ++i) states.data()[i] = 2.0 * rng.uniform() - 1.0;
  const Matrix qs = question_inputs(cat);
  Matrix c(3, static_cast<Eigen::Index>(cat.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = 2.0 * rng.uniform() - 1.0;

  ScoreRecord rec;
  score_pairs(model, states, qs, &rec);
  auto grads = backward_scores(model, rec, c);
  std::vector<std::span<double>> params, analytic;
  append_spans(model, params);
  append_spans(grads, analytic);
  ASSERT_EQ(params.size(), analytic.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      const double saved = params[k][i];
      params[k][i] = saved + 1e-5;
      const double up = (score_pairs(model, states, qs).array() * c.array()).sum();
      params[k][i] = saved - 1e-5;
      const double down = (score_pairs(model, states, qs).array() * c.array()).sum();
      params[k][i] = saved;
      const double numeric = (up - down) / 2e-5;
      worst = std::max(worst, std::abs(analytic[k][i] - numeric) / std::max({std::abs(analytic[k][i]), std::abs(numeric), 1e-6}));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(TrainClassifier, ZeroEpochsReturnsInitialization) {
  const auto ds = generate_dataset(two_ball_arena(), two_color_catalog(), 20, 1);
  const auto out = train_classifier(ds, two_color_catalog(), {0, 32, 1e-3}, 17);
  EXPECT_TRUE(out.loss_history.empty());
  EXPECT_EQ(out.model, init_relevance_model(4, two_color_catalog(), derive_seed(17, 0xFFFF'FFFFULL)));
}

TEST(TrainClassifier, OverfitsASingleSample) {
  const auto ds = generate_dataset(two_ball_arena(), two_color_catalog(), 1, 3);
  const auto out = train_classifier(ds, two_color_catalog(), {200, 32, 1e-3}, 1);
  ASSERT_EQ(out.loss_history.size(), 200u);
  const Matrix scores = score_pairs(out.model, feature_matrix(ds, std::vector<std::size_t>{0}),
                                    question_inputs(two_color_catalog()));
  const auto loss = nn::bce_loss(scores, label_matrix(ds, std::vector<std::size_t>{0})).loss;
  EXPECT_LT(loss, 0.01);
  EXPECT_EQ(evaluate_accuracy(out.model, ds, two_color_catalog()).elementwise, 1.0);
  EXPECT_EQ(evaluate_accuracy(out.model, ds, two_color_catalog()).exact_match, 1.0);
}

TEST(TrainClassifier, DeterministicAndLossDecreases) {
  const auto& cat = five_color_catalog();
  const auto ds = generate_dataset(ArenaConfig{}, cat, 200, 6);
  std::vector<std::size_t> seen;
  const auto a = train_classifier(ds, cat, {5, 32, 1e-3}, 2, [&](std::size_t e, double) { seen.push_back(e); });
  const auto b = train_classifier(ds, cat, {5, 32, 1e-3}, 2);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_LT(a.loss_history.back(), a.loss_history.front());
}

TEST(TrainClassifier, RejectsMismatchedInputs) {
  const auto ds = generate_dataset(two_ball_arena(), two_color_catalog(), 4, 1);
  EXPECT_THROW(train_classifier(ds, five_color_catalog(), {}, 1), ShapeError);
  EXPECT_THROW(train_classifier(Dataset{ds.metadata, {}}, two_color_catalog(), {}, 1), ConfigError);
}

TEST(EvaluateAccuracy, ConstantHalfPredictsPositive) {
  const auto& cat = five_color_catalog();
  const auto ds = generate_dataset(ArenaConfig{}, cat, 40, 12);
  auto model = init_relevance_model(10, cat, 1);
  model.decoder.layers[1].weight.setZero();
  model.decoder.layers[1].bias.setZero();
  const auto r = evaluate_accuracy(model, ds, cat);
  double ones = 0.0;
  for (const auto& s : ds.samples)
    for (auto l : s.labels) ones += l;
  EXPECT_DOUBLE_EQ(r.elementwise, ones / (40.0 * 80.0));
  EXPECT_DOUBLE_EQ(r.positive_rate, r.elementwise);
  EXPECT_THROW(evaluate_accuracy(model, Dataset{ds.metadata, {}}, cat), ConfigError);
}

TEST(ModelTensors, RoundTrip) {
  const auto& cat = five_color_catalog();
  const auto m = init_relevance_model(10, cat, 5);
  EXPECT_EQ(model_from_tensors(model_tensors(m), 10, 14), m);
}

}  // namespace
}  // namespace semx::classifier
