#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "gradalign/tensor.hpp"

namespace gradalign {

struct Example {
  Tensor x;  // entries in [0, 1]
  std::size_t y = 0;
};

struct Dataset {
  std::vector<Example> examples;
  std::size_t num_classes = 0;
  std::size_t input_dim = 0;

  [[nodiscard]] std::size_t size() const noexcept { return examples.size(); }

  void validate() const {
    if (num_classes < 2) throw ShapeError("dataset needs at least two classes");
    for (const auto& e : examples) {
      if (e.x.size() != input_dim) throw ShapeError("example width differs from dataset input_dim");
      if (e.y >= num_classes) throw ShapeError("example label out of range");
      for (double v : e.x)
        if (!(v >= 0.0 && v <= 1.0)) throw ShapeError("example entry outside [0, 1]");
    }
  }
};

struct MeanRange {
  double low = 0.2;
  double high = 0.8;
};

// Gaussian blobs: C means uniform in [low, high]^d, examples are mean plus
// N(0, sigma^2) noise clamped to [0, 1]. Examples are grouped by class.
inline Dataset gen_dataset(std::size_t d, std::size_t num_classes, std::size_t n_per_class, double sigma,
                           std::uint64_t seed, MeanRange means_in = {}) {
  if (d < 2) throw ParameterError("gen_dataset: d must be >= 2");
  if (num_classes < 2) throw ParameterError("gen_dataset: C must be >= 2");
  if (!(sigma > 0.0)) throw ParameterError("gen_dataset: sigma must be > 0");
  if (!(0.0 <= means_in.low && means_in.low < means_in.high && means_in.high <= 1.0))
    throw ParameterError("gen_dataset: class-mean range must satisfy 0 <= low < high <= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mean_dist(means_in.low, means_in.high);
  std::vector<Tensor> means(num_classes, Tensor(d));
  for (auto& m : means)
    for (double& v : m) v = mean_dist(rng);

  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset data{{}, num_classes, d};
  data.examples.reserve(num_classes * n_per_class);
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t n = 0; n < n_per_class; ++n) {
      Tensor x(d);
      for (std::size_t i = 0; i < d; ++i) x[i] = std::clamp(means[c][i] + sigma * noise(rng), 0.0, 1.0);
      data.examples.push_back({std::move(x), c});
    }
  }
  return data;
}

// Seeded shuffle, then the first ceil((1 - holdout) * n) examples train and
// the rest are held out.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double holdout, std::uint64_t seed) {
  if (!(holdout >= 0.0 && holdout < 1.0)) throw ParameterError("holdout fraction must be in [0, 1)");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_hold = static_cast<std::size_t>(std::floor(holdout * static_cast<double>(data.size())));
  Dataset train{{}, data.num_classes, data.input_dim};
  Dataset test{{}, data.num_classes, data.input_dim};
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < order.size() - n_hold ? train : test).examples.push_back(data.examples[order[k]]);
  return {std::move(train), std::move(test)};
}

}  // namespace gradalign
