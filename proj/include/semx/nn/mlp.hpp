#pragma once

// Dense multilayer perceptron with hand-written reverse mode. Batches are
// row-major in the logical sense: one sample per row.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semx/error.hpp"
#include "semx/random.hpp"

namespace semx::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class Activation { kIdentity, kTanh, kSigmoid, kSoftmax };

struct MlpSpec {
  std::vector<std::size_t> widths;  // input, hidden..., output
  Activation hidden = Activation::kTanh;
  Activation output = Activation::kIdentity;

  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::size_t num_layers() const { return widths.size() - 1; }

  void validate() const {
    if (widths.size() < 3) throw ShapeError("MLP needs at least one hidden layer");
    for (auto w : widths)
      if (w < 1) throw ShapeError("MLP layer widths must be >= 1");
    if (hidden == Activation::kSoftmax) throw ShapeError("softmax is only allowed as output");
  }
};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

struct Mlp {
  MlpSpec spec;
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  bool operator==(const Mlp& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].weight != other.layers[i].weight || layers[i].bias != other.layers[i].bias)
        return false;
    }
    return true;
  }
};

// Same layout as Mlp::layers; `input` is dLoss/dInput.
struct MlpGradients {
  std::vector<DenseLayer> layers;
  Matrix input;
};

// activations[0] is the input batch, activations[l + 1] the output of layer l.
struct ForwardRecord {
  std::vector<Matrix> activations;
};

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kSoftmax: return "softmax";
  }
  return "?";
}

/// Xavier-uniform weights, bound sqrt(6 / (fan_in + fan_out)), drawn layer by
/// layer in (row, column) order; zero biases.
inline Mlp init_mlp(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  SplitMix64 rng(seed);
  Mlp net{spec, {}};
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const auto in = static_cast<Eigen::Index>(spec.widths[l]);
    const auto out = static_cast<Eigen::Index>(spec.widths[l + 1]);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer layer{Matrix(out, in), Vector::Zero(out)};
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

/// tanh as 1 - 2 / (exp(2x) + 1): vectorizes through Eigen's exp, saturates
/// cleanly to +-1, and is accurate to about 1e-16 absolute.
template <typename Derived>
void tanh_in_place(Eigen::MatrixBase<Derived>& z) {
  z.array() = 1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0);
}

inline void apply_activation(Activation a, Matrix& z) {
  switch (a) {
    case Activation::kIdentity: return;
    case Activation::kTanh: tanh_in_place(z); return;
    case Activation::kSigmoid:
      z = z.unaryExpr([](double v) {
        // split by sign so exp never overflows
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      });
      return;
    case Activation::kSoftmax:
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const double m = z.row(r).maxCoeff();
        z.row(r) = (z.row(r).array() - m).exp();
        z.row(r) /= z.row(r).sum();
      }
      return;
  }
}

// Turns dLoss/dOutput into dLoss/dPreactivation, given the layer output y.
inline Matrix activation_backward(Activation a, const Matrix& y, const Matrix& dy) {
  switch (a) {
    case Activation::kIdentity: return dy;
    case Activation::kTanh: return (dy.array() * (1.0 - y.array().square())).matrix();
    case Activation::kSigmoid: return (dy.array() * y.array() * (1.0 - y.array())).matrix();
    case Activation::kSoftmax: {
      Matrix dz(dy.rows(), dy.cols());
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        const double dot = y.row(r).dot(dy.row(r));
        dz.row(r) = (y.row(r).array() * (dy.row(r).array() - dot)).matrix();
      }
      return dz;
    }
  }
  return dy;
}

inline std::pair<Matrix, ForwardRecord> forward(const Mlp& net, const Matrix& input) {
  if (static_cast<std::size_t>(input.cols()) != net.spec.input_width()) {
    throw ShapeError("MLP input width " + std::to_string(input.cols()) + " != expected " +
                     std::to_string(net.spec.input_width()));
  }
  ForwardRecord record;
  record.activations.reserve(net.layers.size() + 1);
  record.activations.push_back(input);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Matrix z = record.activations.back() * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    apply_activation(l + 1 == net.layers.size() ? net.spec.output : net.spec.hidden, z);
    record.activations.push_back(std::move(z));
  }
  Matrix out = record.activations.back();
  return {std::move(out), std::move(record)};
}

/// Output only; skips keeping the intermediate activations.
inline Matrix predict(const Mlp& net, const Matrix& input) { return forward(net, input).first; }

inline MlpGradients backward(const Mlp& net, const ForwardRecord& record, const Matrix& output_grad) {
  if (record.activations.size() != net.layers.size() + 1)
    throw ShapeError("forward record does not match the network depth");
  const Matrix& out = record.activations.back();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols())
    throw ShapeError("output gradient shape does not match the recorded output");

  MlpGradients grads;
  grads.layers.resize(net.layers.size());
  Matrix delta = activation_backward(net.spec.output, out, output_grad);
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const Matrix& in = record.activations[l];
    grads.layers[l].weight = delta.transpose() * in;
    grads.layers[l].bias = delta.colwise().sum().transpose();
    Matrix d_in = delta * net.layers[l].weight;
    if (l == 0) {
      grads.input = std::move(d_in);
    } else {
      delta = activation_backward(net.spec.hidden, record.activations[l], d_in);
    }
  }
  return grads;
}

inline MlpGradients zero_gradients(const Mlp& net) {
  MlpGradients g;
  for (const auto& l : net.layers)
    g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  return g;
}

/// Flat views in the fixed order layer0.weight, layer0.bias, layer1.weight, ...
inline void append_spans(Mlp& net, std::vector<std::span<double>>& out) {
  for (auto& l : net.layers) {
    out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
}

inline void append_spans(MlpGradients& grads, std::vector<std::span<double>>& out) {
  for (auto& l : grads.layers) {
    out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
}

inline void append_names(const Mlp& net, const std::string& prefix, std::vector<std::string>& out) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    out.push_back(prefix + "layer" + std::to_string(l) + ".weight");
    out.push_back(prefix + "layer" + std::to_string(l) + ".bias");
  }
}

}  // namespace semx::nn
