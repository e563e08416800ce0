#pragma once

// Test-only helpers. The finite-difference oracle here is deliberately
// independent of the library's backward pass: it only calls forward().

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "gradalign/gradalign.hpp"

namespace gradalign::testing {

// Central differences of a scalar function, step h.
inline Tensor central_difference(const std::function<double(const Tensor&)>& f, const Tensor& x, double h = 1e-5) {
  Tensor g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Tensor plus = x, minus = x;
    plus[i] += h;
    minus[i] -= h;
    g[i] = (f(plus) - f(minus)) / (2.0 * h);
  }
  return g;
}

// max_i |a_i - b_i| / (|b_i| + 1e-12), with b the reference.
inline double max_relative_error(const Tensor& a, const Tensor& ref) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - ref[i]) / (std::abs(ref[i]) + 1e-12));
  return worst;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline Tensor random_tensor(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(n);
  for (double& v : t) v = u(rng);
  return t;
}

// Random relu network with 1-4 layers, hidden widths <= 128, nonzero biases.
inline Model random_model(std::mt19937_64& rng, std::size_t input_dim, std::size_t classes) {
  std::uniform_int_distribution<int> depth(1, 4);
  std::uniform_int_distribution<std::size_t> width(4, 128);
  std::vector<std::size_t> widths{input_dim};
  const int layers = depth(rng);
  for (int k = 0; k + 1 < layers; ++k) widths.push_back(width(rng));
  widths.push_back(classes);
  Model m = make_model(widths, rng());
  std::normal_distribution<double> b(0.0, 0.1);
  for (auto& l : m.mutable_layers())
    for (double& v : l.bias) v = b(rng);
  return m;
}

// Desk-scale attack setup: class means in [0.4, 0.6]^64, sigma 0.05.
inline Dataset attack_dataset(std::uint64_t seed) { return gen_dataset(64, 10, 100, 0.05, seed, {0.4, 0.6}); }

struct TrainedPair {
  Dataset data;
  Model surrogate;
  Model victim;
};

inline TrainedPair train_pair(std::uint64_t seed) {
  TrainedPair p;
  p.data = attack_dataset(seed);
  p.surrogate = train_sgd(make_model(default_surrogate_widths(), seed * 10 + 1), p.data, 30, 0.02, 32, seed * 10 + 2);
  p.victim = train_sgd(make_model(default_victim_widths(), seed * 10 + 3), p.data, 30, 0.02, 32, seed * 10 + 4);
  return p;
}

// Trained once per test binary.
inline const TrainedPair& default_pair() {
  static const TrainedPair pair = train_pair(1);
  return pair;
}

inline std::vector<Example> correctly_classified(const Model& victim, const Dataset& data, std::size_t limit) {
  std::vector<Example> out;
  for (const auto& e : data.examples) {
    if (out.size() >= limit) break;
    if (predict(victim, e.x) == e.y) out.push_back(e);
  }
  return out;
}

}  // namespace gradalign::testing
