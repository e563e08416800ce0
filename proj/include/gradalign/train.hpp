#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "gradalign/dataset.hpp"
#include "gradalign/losses.hpp"
#include "gradalign/model.hpp"

namespace gradalign {

inline double accuracy(const Model& model, const Dataset& data) {
  if (data.examples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& e : data.examples) hits += predict(model, e.x) == e.y ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

// Minibatch SGD on the (base-2) cross-entropy loss. Single-threaded and
// deterministic given `seed`, which only drives the per-epoch shuffle.
inline Model train_sgd(Model model, const Dataset& data, int epochs, double lr, std::size_t batch,
                       std::uint64_t seed) {
  if (epochs < 1) throw ParameterError("train_sgd: epochs must be >= 1");
  if (!(lr > 0.0)) throw ParameterError("train_sgd: lr must be > 0");
  if (batch == 0) throw ParameterError("train_sgd: batch must be >= 1");
  if (data.input_dim != model.input_dim() || data.num_classes != model.num_classes())
    throw ShapeError("train_sgd: dataset does not match model shape");
  if (data.examples.empty()) return model;

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      ParamGrads grads(model);
      for (std::size_t k = start; k < stop; ++k) {
        const auto& ex = data.examples[order[k]];
        const auto cache = forward_cached(model, ex.x);
        const auto lv = ce_loss(Tensor(cache.activations.back()), ex.y);
        accumulate_param_grads(model, cache, lv.grad.g, grads);
      }
      const double scale = lr / static_cast<double>(stop - start);
      auto& layers = model.mutable_layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].weights.size(); ++i) layers[l].weights[i] -= scale * grads.weights[l][i];
        for (std::size_t i = 0; i < layers[l].bias.size(); ++i) layers[l].bias[i] -= scale * grads.bias[l][i];
      }
    }
  }
  return model;
}

}  // namespace gradalign
