#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "semx/error.hpp"
#include "semx/nn/mlp.hpp"

namespace semx::nn {

/// Named row-major tensor; the unit of checkpoint serialization.
struct ParamTensor {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<double> values;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
  bool operator==(const ParamTensor&) const = default;
};

inline void append_tensors(const Mlp& net, const std::string& prefix, std::vector<ParamTensor>& out) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    ParamTensor w{prefix + ".layer" + std::to_string(l) + ".weight",
                  {static_cast<std::uint32_t>(layer.weight.rows()),
                   static_cast<std::uint32_t>(layer.weight.cols())},
                  {}};
    w.values.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.values.push_back(layer.weight(r, c));
    ParamTensor b{prefix + ".layer" + std::to_string(l) + ".bias",
                  {static_cast<std::uint32_t>(layer.bias.size())},
                  std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())};
    out.push_back(std::move(w));
    out.push_back(std::move(b));
  }
}

inline const ParamTensor& find_tensor(const std::vector<ParamTensor>& tensors, const std::string& name) {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw FormatError("checkpoint has no tensor named '" + name + "'");
}

/// Rebuilds an MLP of the given spec from tensors written by append_tensors.
inline Mlp mlp_from_tensors(const MlpSpec& spec, const std::vector<ParamTensor>& tensors,
                            const std::string& prefix) {
  spec.validate();
  Mlp net{spec, {}};
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const auto rows = static_cast<Eigen::Index>(spec.widths[l + 1]);
    const auto cols = static_cast<Eigen::Index>(spec.widths[l]);
    const auto& w = find_tensor(tensors, prefix + ".layer" + std::to_string(l) + ".weight");
    const auto& b = find_tensor(tensors, prefix + ".layer" + std::to_string(l) + ".bias");
    if (w.shape != std::vector<std::uint32_t>{static_cast<std::uint32_t>(rows), static_cast<std::uint32_t>(cols)} ||
        b.shape != std::vector<std::uint32_t>{static_cast<std::uint32_t>(rows)})
      throw ShapeError("tensor '" + w.name + "' does not match the expected layer shape");
    DenseLayer layer{Matrix(rows, cols), Vector(rows)};
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = w.values[static_cast<std::size_t>(r * cols + c)];
    for (Eigen::Index r = 0; r < rows; ++r) layer.bias(r) = b.values[static_cast<std::size_t>(r)];
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace semx::nn
