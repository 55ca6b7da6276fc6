#pragma once

#include <algorithm>
#include <cmath>

#include "semx/error.hpp"
#include "semx/nn/mlp.hpp"

namespace semx::nn {

inline constexpr double kBceClamp = 1e-7;

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // dLoss/dPrediction, same shape as the predictions
};

/// Mean binary cross-entropy over every element. Predictions are clamped to
/// [1e-7, 1 - 1e-7]; the gradient is evaluated at the clamped value.
inline LossResult bce_loss(const Matrix& predictions, const Matrix& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
    throw ShapeError("bce_loss: predictions and targets differ in shape");
  const double count = static_cast<double>(predictions.size());
  LossResult out{0.0, Matrix(predictions.rows(), predictions.cols())};
  double total = 0.0;
  for (Eigen::Index j = 0; j < predictions.cols(); ++j) {
    for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
      const double p = std::clamp(predictions(i, j), kBceClamp, 1.0 - kBceClamp);
      const double y = targets(i, j);
      total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
      out.grad(i, j) = (p - y) / (p * (1.0 - p) * count);
    }
  }
  out.loss = total / count;
  return out;
}

}  // namespace semx::nn
