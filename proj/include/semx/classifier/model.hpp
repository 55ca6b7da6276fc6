#pragma once

// Dual-encoder relevance model. A state encoder and a question encoder feed a
// decoder over their concatenation, which outputs one relevance score.
//
// Scoring a batch of B states against all Q catalog questions uses the split
// of the decoder's first weight matrix into [W_state | W_question]:
//   pre(b, q) = W_state * s_b + W_question * e_q + bias
// so each state and each question is projected once and the B*Q hidden rows
// are formed by broadcast addition. The result equals running the decoder MLP
// on every concatenated pair.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "semx/error.hpp"
#include "semx/nn/mlp.hpp"
#include "semx/nn/tensor.hpp"
#include "semx/questions.hpp"
#include "semx/random.hpp"

namespace semx::classifier {

using nn::Matrix;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kStateHidden = 64;
inline constexpr std::size_t kEncodingWidth = 32;
inline constexpr std::size_t kDecoderHidden = 64;

struct RelevanceModel {
  nn::Mlp state_encoder;
  nn::Mlp question_encoder;
  nn::Mlp decoder;

  std::size_t state_dim() const { return state_encoder.spec.input_width(); }
  std::size_t question_dim() const { return question_encoder.spec.input_width(); }
  bool operator==(const RelevanceModel&) const = default;

  static nn::MlpSpec state_spec(std::size_t state_dim) {
    return {{state_dim, kStateHidden, kEncodingWidth}, nn::Activation::kTanh, nn::Activation::kIdentity};
  }
  static nn::MlpSpec question_spec(std::size_t question_dim) {
    return {{question_dim, kEncodingWidth, kEncodingWidth}, nn::Activation::kTanh, nn::Activation::kIdentity};
  }
  static nn::MlpSpec decoder_spec() {
    return {{2 * kEncodingWidth, kDecoderHidden, 1}, nn::Activation::kTanh, nn::Activation::kSigmoid};
  }
};

struct RelevanceGradients {
  nn::MlpGradients state_encoder;
  nn::MlpGradients question_encoder;
  nn::MlpGradients decoder;
};

inline std::size_t question_input_width(const questions::QuestionCatalog& catalog) {
  return 2 * catalog.num_colors() + catalog.num_relations();
}

/// One-hot rows [anchor color | target color | relation], one per question.
inline Matrix question_inputs(const questions::QuestionCatalog& catalog) {
  const std::size_t c = catalog.num_colors();
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(catalog.size()),
                          static_cast<Eigen::Index>(question_input_width(catalog)));
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& q = catalog[i];
    const auto row = static_cast<Eigen::Index>(i);
    m(row, static_cast<Eigen::Index>(q.anchor)) = 1.0;
    m(row, static_cast<Eigen::Index>(c + q.target)) = 1.0;
    m(row, static_cast<Eigen::Index>(2 * c + static_cast<std::size_t>(q.relation))) = 1.0;
  }
  return m;
}

inline RelevanceModel init_relevance_model(std::size_t state_dim, const questions::QuestionCatalog& catalog,
                                           std::uint64_t seed) {
  return {nn::init_mlp(RelevanceModel::state_spec(state_dim), derive_seed(seed, 0)),
          nn::init_mlp(RelevanceModel::question_spec(question_input_width(catalog)), derive_seed(seed, 1)),
          nn::init_mlp(RelevanceModel::decoder_spec(), derive_seed(seed, 2))};
}

struct ScoreRecord {
  nn::ForwardRecord state_record;
  nn::ForwardRecord question_record;
  Matrix state_codes;       // B x 32
  Matrix question_codes;    // Q x 32
  RowMajorMatrix hidden;    // (B*Q) x 64, row b*Q + q
  Matrix scores;            // B x Q
};

/// Scores every (state row, question row) pair. Returns B x Q in (0, 1).
inline Matrix score_pairs(const RelevanceModel& model, const Matrix& states, const Matrix& question_rows,
                          ScoreRecord* record = nullptr) {
  if (static_cast<std::size_t>(states.cols()) != model.state_dim())
    throw ShapeError("state feature width " + std::to_string(states.cols()) + " != model input " +
                     std::to_string(model.state_dim()));
  auto [s_codes, s_rec] = nn::forward(model.state_encoder, states);
  auto [q_codes, q_rec] = nn::forward(model.question_encoder, question_rows);

  const auto& first = model.decoder.layers[0];
  const auto& last = model.decoder.layers[1];
  const Eigen::Index w = static_cast<Eigen::Index>(kEncodingWidth);
  const Matrix state_proj = s_codes * first.weight.leftCols(w).transpose();  // B x H
  Matrix question_proj = q_codes * first.weight.rightCols(w).transpose();    // Q x H
  question_proj.rowwise() += first.bias.transpose();

  const Eigen::Index b_count = states.rows();
  const Eigen::Index q_count = question_rows.rows();
  RowMajorMatrix hidden(b_count * q_count, first.weight.rows());
  for (Eigen::Index b = 0; b < b_count; ++b)
    for (Eigen::Index q = 0; q < q_count; ++q)
      hidden.row(b * q_count + q) = state_proj.row(b) + question_proj.row(q);
  nn::tanh_in_place(hidden);

  Matrix logits = hidden * last.weight.transpose();  // (B*Q) x 1
  logits.array() += last.bias(0);
  nn::apply_activation(nn::Activation::kSigmoid, logits);
  Matrix scores = Eigen::Map<const RowMajorMatrix>(logits.data(), b_count, q_count);

  if (record != nullptr) {
    record->state_record = std::move(s_rec);
    record->question_record = std::move(q_rec);
    record->state_codes = std::move(s_codes);
    record->question_codes = std::move(q_codes);
    record->hidden = std::move(hidden);
    record->scores = scores;
  }
  return scores;
}

/// Reverse mode through score_pairs given dLoss/dScores (B x Q).
inline RelevanceGradients backward_scores(const RelevanceModel& model, const ScoreRecord& record,
                                          const Matrix& score_grad) {
  const Eigen::Index b_count = record.scores.rows();
  const Eigen::Index q_count = record.scores.cols();
  if (score_grad.rows() != b_count || score_grad.cols() != q_count)
    throw ShapeError("score gradient shape does not match the record");
  const auto& first = model.decoder.layers[0];
  const auto& last = model.decoder.layers[1];
  const Eigen::Index w = static_cast<Eigen::Index>(kEncodingWidth);

  // through the sigmoid, flattened to row b*Q + q
  Eigen::VectorXd d_logit(b_count * q_count);
  for (Eigen::Index b = 0; b < b_count; ++b)
    for (Eigen::Index q = 0; q < q_count; ++q) {
      const double p = record.scores(b, q);
      d_logit(b * q_count + q) = score_grad(b, q) * p * (1.0 - p);
    }

  RelevanceGradients g;
  g.decoder = nn::zero_gradients(model.decoder);
  g.decoder.layers[1].weight = d_logit.transpose() * record.hidden;
  g.decoder.layers[1].bias(0) = d_logit.sum();

  RowMajorMatrix d_pre = d_logit * last.weight;  // (B*Q) x H
  d_pre.array() *= 1.0 - record.hidden.array().square();

  Matrix d_state_proj = Matrix::Zero(b_count, first.weight.rows());
  Matrix d_question_proj = Matrix::Zero(q_count, first.weight.rows());
  for (Eigen::Index b = 0; b < b_count; ++b) {
    auto block = d_pre.middleRows(b * q_count, q_count);
    d_state_proj.row(b) = block.colwise().sum();
    d_question_proj += block;
  }
  g.decoder.layers[0].weight.leftCols(w) = d_state_proj.transpose() * record.state_codes;
  g.decoder.layers[0].weight.rightCols(w) = d_question_proj.transpose() * record.question_codes;
  g.decoder.layers[0].bias = d_question_proj.colwise().sum().transpose();

  const Matrix d_state_codes = d_state_proj * first.weight.leftCols(w);
  const Matrix d_question_codes = d_question_proj * first.weight.rightCols(w);
  g.state_encoder = nn::backward(model.state_encoder, record.state_record, d_state_codes);
  g.question_encoder = nn::backward(model.question_encoder, record.question_record, d_question_codes);
  return g;
}

inline void append_spans(RelevanceModel& m, std::vector<std::span<double>>& out) {
  nn::append_spans(m.state_encoder, out);
  nn::append_spans(m.question_encoder, out);
  nn::append_spans(m.decoder, out);
}

inline void append_spans(RelevanceGradients& g, std::vector<std::span<double>>& out) {
  nn::append_spans(g.state_encoder, out);
  nn::append_spans(g.question_encoder, out);
  nn::append_spans(g.decoder, out);
}

/// Scores of one state against the whole catalog, in catalog order.
inline std::vector<double> predict_scores(const RelevanceModel& model, std::span<const double> state_features,
                                          const questions::QuestionCatalog& catalog) {
  if (state_features.size() != model.state_dim())
    throw ShapeError("predict_scores: feature length " + std::to_string(state_features.size()) +
                     " != " + std::to_string(model.state_dim()));
  Matrix x(1, static_cast<Eigen::Index>(state_features.size()));
  for (std::size_t i = 0; i < state_features.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = state_features[i];
  const Matrix s = score_pairs(model, x, question_inputs(catalog));
  return std::vector<double>(s.data(), s.data() + s.size());
}

/// Inference-only scorer for a frozen model; the question side is projected
/// once at construction.
class FrozenScorer {
 public:
  FrozenScorer(RelevanceModel model, const questions::QuestionCatalog& catalog) : model_(std::move(model)) {
    const Matrix q_codes = nn::predict(model_.question_encoder, question_inputs(catalog));
    const auto& first = model_.decoder.layers[0];
    question_proj_ = q_codes * first.weight.rightCols(static_cast<Eigen::Index>(kEncodingWidth)).transpose();
    question_proj_.rowwise() += first.bias.transpose();
  }

  std::size_t num_questions() const { return static_cast<std::size_t>(question_proj_.rows()); }
  const RelevanceModel& model() const { return model_; }

  std::vector<double> scores(std::span<const double> state_features) const {
    if (state_features.size() != model_.state_dim()) throw ShapeError("FrozenScorer: feature length mismatch");
    Eigen::Map<const nn::RowVector> x(state_features.data(), static_cast<Eigen::Index>(state_features.size()));
    const nn::Matrix code = nn::predict(model_.state_encoder, x);
    const auto& first = model_.decoder.layers[0];
    const auto& last = model_.decoder.layers[1];
    const nn::RowVector proj = code * first.weight.leftCols(static_cast<Eigen::Index>(kEncodingWidth)).transpose();
    Matrix hidden = question_proj_.rowwise() + proj;
    nn::tanh_in_place(hidden);
    Matrix logits = hidden * last.weight.transpose();
    logits.array() += last.bias(0);
    nn::apply_activation(nn::Activation::kSigmoid, logits);
    return std::vector<double>(logits.data(), logits.data() + logits.size());
  }

 private:
  RelevanceModel model_;
  Matrix question_proj_;  // Q x H, bias included
};

inline std::vector<nn::ParamTensor> model_tensors(const RelevanceModel& m) {
  std::vector<nn::ParamTensor> out;
  nn::append_tensors(m.state_encoder, "state_encoder", out);
  nn::append_tensors(m.question_encoder, "question_encoder", out);
  nn::append_tensors(m.decoder, "decoder", out);
  return out;
}

inline RelevanceModel model_from_tensors(const std::vector<nn::ParamTensor>& tensors, std::size_t state_dim,
                                         std::size_t question_dim) {
  return {nn::mlp_from_tensors(RelevanceModel::state_spec(state_dim), tensors, "state_encoder"),
          nn::mlp_from_tensors(RelevanceModel::question_spec(question_dim), tensors, "question_encoder"),
          nn::mlp_from_tensors(RelevanceModel::decoder_spec(), tensors, "decoder")};
}

}  // namespace semx::classifier
