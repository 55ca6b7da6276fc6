#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semx/classifier/dataset.hpp"
#include "semx/classifier/model.hpp"
#include "semx/error.hpp"
#include "semx/nn/adam.hpp"
#include "semx/nn/loss.hpp"
#include "semx/random.hpp"

namespace semx::classifier {

struct ClassifierHyperparams {
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
};

struct TrainedClassifier {
  RelevanceModel model;
  std::vector<double> loss_history;  // mean train BCE per epoch
};

inline Matrix feature_matrix(const Dataset& ds, std::span<const std::size_t> rows) {
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ds.state_dim()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = ds.samples[rows[r]].state_features;
    for (std::size_t c = 0; c < f.size(); ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f[c];
  }
  return x;
}

inline Matrix label_matrix(const Dataset& ds, std::span<const std::size_t> rows) {
  Matrix y(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ds.metadata.num_questions));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& l = ds.samples[rows[r]].labels;
    for (std::size_t c = 0; c < l.size(); ++c) y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = l[c];
  }
  return y;
}

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Minibatch Adam on mean BCE over all (state, question) outputs. Epoch e
/// shuffles with the stream derive_seed(seed, e); the model is initialized
/// from derive_seed(seed, kInitIndex).
inline TrainedClassifier train_classifier(const Dataset& train, const questions::QuestionCatalog& catalog,
                                          const ClassifierHyperparams& hp, std::uint64_t seed,
                                          const EpochCallback& on_epoch = {}) {
  constexpr std::uint64_t kInitIndex = 0xFFFF'FFFFULL;
  if (train.size() == 0) throw ConfigError("train_classifier: empty training set");
  if (hp.batch_size == 0) throw ConfigError("classifier.batch_size must be >= 1");
  if (train.metadata.num_questions != catalog.size())
    throw ShapeError("dataset question count does not match the catalog");

  TrainedClassifier out{init_relevance_model(train.state_dim(), catalog, derive_seed(seed, kInitIndex)), {}};
  const Matrix q_rows = question_inputs(catalog);
  nn::AdamState adam(nn::AdamConfig{.learning_rate = hp.learning_rate});
  std::vector<std::span<double>> params;
  append_spans(out.model, params);

  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    SplitMix64 rng(derive_seed(seed, epoch));
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t count = std::min(hp.batch_size, order.size() - start);
      const std::span<const std::size_t> rows(order.data() + start, count);
      ScoreRecord record;
      score_pairs(out.model, feature_matrix(train, rows), q_rows, &record);
      const auto bce = nn::bce_loss(record.scores, label_matrix(train, rows));
      if (!std::isfinite(bce.loss))
        throw TrainingDivergedError("classifier training diverged in epoch " + std::to_string(epoch + 1));
      loss_sum += bce.loss * static_cast<double>(count);

      RelevanceGradients grads = backward_scores(out.model, record, bce.grad);
      std::vector<std::span<double>> grad_spans;
      append_spans(grads, grad_spans);
      nn::adam_step(params, grad_spans, adam);
    }
    const double mean = loss_sum / static_cast<double>(order.size());
    out.loss_history.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return out;
}

struct AccuracyReport {
  double elementwise = 0.0;   // mean over samples and questions
  double exact_match = 0.0;   // fraction of samples with every bit right
  double positive_rate = 0.0; // fraction of label bits equal to 1
};

/// Score >= threshold predicts 1.
inline AccuracyReport evaluate_accuracy(const RelevanceModel& model, const Dataset& test,
                                        const questions::QuestionCatalog& catalog, double threshold = 0.5) {
  if (test.size() == 0) throw ConfigError("evaluate_accuracy: empty test set");
  const Matrix q_rows = question_inputs(catalog);
  std::size_t correct = 0, exact = 0, positives = 0, total = 0;
  constexpr std::size_t kChunk = 256;
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < test.size(); start += kChunk) {
    rows.clear();
    for (std::size_t i = start; i < std::min(test.size(), start + kChunk); ++i) rows.push_back(i);
    const Matrix scores = score_pairs(model, feature_matrix(test, rows), q_rows);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& labels = test.samples[rows[r]].labels;
      bool all = true;
      for (std::size_t q = 0; q < labels.size(); ++q) {
        const bool predicted = scores(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) >= threshold;
        const bool ok = predicted == (labels[q] == 1);
        correct += ok;
        all = all && ok;
        positives += labels[q];
        ++total;
      }
      exact += all;
    }
  }
  return {static_cast<double>(correct) / static_cast<double>(total),
          static_cast<double>(exact) / static_cast<double>(test.size()),
          static_cast<double>(positives) / static_cast<double>(total)};
}

}  // namespace semx::classifier
