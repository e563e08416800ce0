#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>

#include "gradalign/model.hpp"
#include "gradalign/tensor.hpp"

namespace gradalign {

// Softmax output: nonnegative entries summing to 1 within 1e-9.
struct ProbVector {
  Tensor p;

  [[nodiscard]] std::size_t size() const noexcept { return p.size(); }
  double operator[](std::size_t i) const noexcept { return p[i]; }

  [[nodiscard]] bool valid(double tol = 1e-9) const noexcept {
    double s = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
      s += v;
    }
    return std::abs(s - 1.0) <= tol;
  }
};

// dL/dz, one coefficient per logit.
struct LogitGrad {
  Tensor g;
};

struct LossValue {
  double value = 0.0;
  LogitGrad grad;
};

struct MarginValue {
  double value = 0.0;
  LogitGrad grad;
  std::size_t i_star = 0;
};

inline constexpr double kLn2 = std::numbers::ln2;

inline ProbVector softmax(const Tensor& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  Tensor p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - zmax);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return ProbVector{std::move(p)};
}

namespace detail {

inline void check_class(std::size_t y, std::size_t c) {
  if (y >= c) throw ParameterError("class index out of range");
}

// (p - onehot(y)) / ln 2. CE and GACE share this exact expression so that a
// victim-queried p reproduces the white-box CE coefficients bit for bit.
inline Tensor ce_coefficients(const Tensor& p, std::size_t y) {
  Tensor c(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) c[i] = (p[i] - (i == y ? 1.0 : 0.0)) / kLn2;
  return c;
}

inline Tensor margin_coefficients(std::size_t c, std::size_t i_star, std::size_t y) {
  Tensor g(c);
  g[i_star] = 1.0;
  g[y] = -1.0;
  return g;
}

}  // namespace detail

// Cross-entropy in bits: -log2 softmax(z)_y.
inline LossValue ce_loss(const Tensor& z, std::size_t y) {
  detail::check_class(y, z.size());
  const double zmax = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - zmax);
  const double log_p_y = (z[y] - zmax) - std::log(s);
  const auto p = softmax(z);
  return {-log_p_y / kLn2, LogitGrad{detail::ce_coefficients(p.p, y)}};
}

// max_{i != y} z_i - z_y, lowest index on ties.
inline MarginValue margin_loss(const Tensor& z, std::size_t y) {
  detail::check_class(y, z.size());
  if (z.size() < 2) throw ShapeError("margin loss needs at least two classes");
  const std::size_t i_star = argmax(z, y);
  return {z[i_star] - z[y], LogitGrad{detail::margin_coefficients(z.size(), i_star, y)}, i_star};
}

// Generic gradient-aligned loss: the victim's logit coefficients weight the
// surrogate's logits, so the surrogate gradient w.r.t. its logits is exactly
// the victim's.
inline LossValue ga_transform(const LogitGrad& victim_coeffs, const Tensor& z_surrogate) {
  require_same_size(victim_coeffs.g, z_surrogate, "ga_transform");
  return {dot(victim_coeffs.g, z_surrogate), victim_coeffs};
}

inline LossValue gace_loss(const ProbVector& p_victim, const Tensor& z_surrogate, std::size_t y) {
  detail::check_class(y, p_victim.size());
  return ga_transform(LogitGrad{detail::ce_coefficients(p_victim.p, y)}, z_surrogate);
}

// `victim_scores` may be victim logits or victim probabilities; softmax is
// monotone so both select the same index.
inline MarginValue gam_loss(const Tensor& victim_scores, const Tensor& z_surrogate, std::size_t y) {
  require_same_size(victim_scores, z_surrogate, "gam_loss");
  detail::check_class(y, z_surrogate.size());
  const std::size_t i = argmax(victim_scores, y);
  auto lv = ga_transform(LogitGrad{detail::margin_coefficients(z_surrogate.size(), i, y)}, z_surrogate);
  return {lv.value, std::move(lv.grad), i};
}

// Loss selection for input gradients. Aligned losses carry what the victim
// revealed: its probability vector (GACE) or its scores (GAM).
struct CrossEntropy {};
struct Margin {};
struct AlignedCrossEntropy {
  ProbVector victim_probs;
};
struct AlignedMargin {
  Tensor victim_scores;
};

using LossSpec = std::variant<CrossEntropy, Margin, AlignedCrossEntropy, AlignedMargin>;

inline LossValue evaluate_loss(const LossSpec& spec, const Tensor& z, std::size_t y) {
  return std::visit(
      [&](const auto& s) -> LossValue {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, CrossEntropy>) {
          return ce_loss(z, y);
        } else if constexpr (std::is_same_v<S, Margin>) {
          auto m = margin_loss(z, y);
          return {m.value, std::move(m.grad)};
        } else if constexpr (std::is_same_v<S, AlignedCrossEntropy>) {
          return gace_loss(s.victim_probs, z, y);
        } else {
          auto m = gam_loss(s.victim_scores, z, y);
          return {m.value, std::move(m.grad)};
        }
      },
      spec);
}

inline double loss_value(const Model& model, const Tensor& x, const LossSpec& spec, std::size_t y) {
  return evaluate_loss(spec, forward(model, x), y).value;
}

inline Tensor input_grad(const Model& model, const Tensor& x, const LossSpec& spec, std::size_t y) {
  const auto lv = evaluate_loss(spec, forward(model, x), y);
  return input_vjp(model, x, lv.grad.g);
}

// d softmax(f(x))_k / dx, used as the white-box reference for score estimators.
inline Tensor prob_grad(const Model& model, const Tensor& x, std::size_t k) {
  const auto p = softmax(forward(model, x));
  detail::check_class(k, p.size());
  Tensor coeffs(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) coeffs[i] = p[k] * ((i == k ? 1.0 : 0.0) - p[i]);
  return input_vjp(model, x, coeffs);
}

}  // namespace gradalign
