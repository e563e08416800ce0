#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gradalign/tensor.hpp"

namespace gradalign {

enum class Activation { Relu, Identity };

inline std::string_view to_string(Activation a) { return a == Activation::Relu ? "relu" : "identity"; }

inline Activation activation_from_string(std::string_view s) {
  if (s == "relu") return Activation::Relu;
  if (s == "identity") return Activation::Identity;
  throw ParameterError("unknown activation: " + std::string(s));
}

// Dense layer computing act(W x + b). W is rows x cols, row-major, with
// rows = output width and cols = input width.
struct DenseLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::Identity;

  double w(std::size_t r, std::size_t c) const noexcept { return weights[r * cols + c]; }
};

// Feed-forward classifier producing raw logits. Immutable after construction
// except through training, so it can be shared across threads for reading.
class Model {
 public:
  Model() = default;

  explicit Model(std::vector<DenseLayer> layers) : layers_(std::move(layers)) { validate(); }

  [[nodiscard]] std::size_t input_dim() const noexcept { return layers_.front().cols; }
  [[nodiscard]] std::size_t num_classes() const noexcept { return layers_.back().rows; }
  [[nodiscard]] const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  [[nodiscard]] std::vector<DenseLayer>& mutable_layers() noexcept { return layers_; }

  // Widths as [input_dim, hidden..., num_classes].
  [[nodiscard]] std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w{input_dim()};
    for (const auto& l : layers_) w.push_back(l.rows);
    return w;
  }

  void validate() const {
    if (layers_.empty()) throw ShapeError("model has no layers");
    for (std::size_t k = 0; k < layers_.size(); ++k) {
      const auto& l = layers_[k];
      if (l.rows == 0 || l.cols == 0) throw ShapeError("layer dimensions must be positive");
      if (l.weights.size() != l.rows * l.cols || l.bias.size() != l.rows)
        throw ShapeError("layer " + std::to_string(k) + " parameter size mismatch");
      if (k > 0 && l.cols != layers_[k - 1].rows)
        throw ShapeError("layer " + std::to_string(k) + " input width does not chain");
    }
    if (layers_.back().activation != Activation::Identity)
      throw ShapeError("final layer must produce raw logits (identity activation)");
    if (num_classes() < 2) throw ShapeError("model needs at least two classes");
  }

 private:
  std::vector<DenseLayer> layers_;
};

// Per-layer outputs of a forward pass. activations[0] is the input,
// activations[k+1] is the output of layer k after its activation.
struct ForwardCache {
  std::vector<std::vector<double>> activations;
};

inline ForwardCache forward_cached(const Model& model, const Tensor& x) {
  if (x.size() != model.input_dim())
    throw ShapeError("input length " + std::to_string(x.size()) + " != model input_dim " +
                     std::to_string(model.input_dim()));
  ForwardCache cache;
  cache.activations.reserve(model.layers().size() + 1);
  cache.activations.push_back(x.values());
  for (const auto& layer : model.layers()) {
    const auto& in = cache.activations.back();
    std::vector<double> out(layer.rows);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      const double* row = layer.weights.data() + r * layer.cols;
      double s = layer.bias[r];
      for (std::size_t c = 0; c < layer.cols; ++c) s += row[c] * in[c];
      out[r] = (layer.activation == Activation::Relu && s < 0.0) ? 0.0 : s;
    }
    cache.activations.push_back(std::move(out));
  }
  return cache;
}

inline Tensor forward(const Model& model, const Tensor& x) {
  return Tensor(std::move(forward_cached(model, x).activations.back()));
}

inline std::size_t predict(const Model& model, const Tensor& x) { return argmax(forward(model, x)); }

namespace detail {

// Backpropagates `upstream` (gradient w.r.t. the output of layer k) through
// the activation of layer k. The relu derivative at exactly 0 is 0: a unit
// whose output is 0 passes no gradient.
inline void through_activation(const DenseLayer& layer, const std::vector<double>& out,
                               std::vector<double>& upstream) {
  if (layer.activation != Activation::Relu) return;
  for (std::size_t r = 0; r < layer.rows; ++r)
    if (out[r] <= 0.0) upstream[r] = 0.0;
}

}  // namespace detail

// Vector-Jacobian product sum_i dL_dz[i] * dz_i/dx through every layer.
inline Tensor input_vjp(const Model& model, const Tensor& x, const Tensor& dL_dz) {
  if (dL_dz.size() != model.num_classes()) throw ShapeError("input_vjp: logit gradient length mismatch");
  const auto cache = forward_cached(model, x);
  const auto& layers = model.layers();
  std::vector<double> grad = dL_dz.values();
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& layer = layers[k];
    detail::through_activation(layer, cache.activations[k + 1], grad);
    std::vector<double> below(layer.cols, 0.0);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      const double g = grad[r];
      if (g == 0.0) continue;
      const double* row = layer.weights.data() + r * layer.cols;
      for (std::size_t c = 0; c < layer.cols; ++c) below[c] += g * row[c];
    }
    grad = std::move(below);
  }
  return Tensor(std::move(grad));
}

// Gradients of a scalar loss w.r.t. every parameter, laid out like the model.
struct ParamGrads {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  explicit ParamGrads(const Model& m) {
    for (const auto& l : m.layers()) {
      weights.emplace_back(l.weights.size(), 0.0);
      bias.emplace_back(l.bias.size(), 0.0);
    }
  }
};

// Accumulates dL/dtheta for one example into `grads`, given the forward
// cache and dL/dz.
inline void accumulate_param_grads(const Model& model, const ForwardCache& cache,
                                   const Tensor& dL_dz, ParamGrads& grads) {
  const auto& layers = model.layers();
  std::vector<double> grad = dL_dz.values();
  for (std::size_t k = layers.size(); k-- > 0;) {
    const auto& layer = layers[k];
    detail::through_activation(layer, cache.activations[k + 1], grad);
    const auto& in = cache.activations[k];
    auto& gw = grads.weights[k];
    auto& gb = grads.bias[k];
    std::vector<double> below(layer.cols, 0.0);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      const double g = grad[r];
      if (g == 0.0) continue;
      gb[r] += g;
      double* gw_row = gw.data() + r * layer.cols;
      const double* row = layer.weights.data() + r * layer.cols;
      for (std::size_t c = 0; c < layer.cols; ++c) {
        gw_row[c] += g * in[c];
        below[c] += g * row[c];
      }
    }
    grad = std::move(below);
  }
}

// He-normal initialised relu network; widths = [input_dim, hidden..., C].
inline Model make_model(const std::vector<std::size_t>& widths, std::uint64_t seed) {
  if (widths.size() < 2) throw ParameterError("need at least input and output widths");
  std::mt19937_64 rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    DenseLayer l;
    l.cols = widths[k];
    l.rows = widths[k + 1];
    if (l.rows == 0 || l.cols == 0) throw ParameterError("widths must be positive");
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / static_cast<double>(l.cols)));
    l.weights.resize(l.rows * l.cols);
    for (double& w : l.weights) w = init(rng);
    l.bias.assign(l.rows, 0.0);
    l.activation = (k + 2 == widths.size()) ? Activation::Identity : Activation::Relu;
    layers.push_back(std::move(l));
  }
  return Model(std::move(layers));
}

// Recipes for the default surrogate/victim pair.
inline const std::vector<std::size_t>& default_surrogate_widths() {
  static const std::vector<std::size_t> w{64, 128, 128, 10};
  return w;
}

inline const std::vector<std::size_t>& default_victim_widths() {
  static const std::vector<std::size_t> w{64, 96, 96, 96, 10};
  return w;
}

}  // namespace gradalign
