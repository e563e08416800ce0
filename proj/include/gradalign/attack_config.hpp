#pragma once

#include <algorithm>
#include <cstddef>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gradalign/tensor.hpp"

namespace gradalign {

enum class Norm { L2, Linf };

inline std::string_view to_string(Norm n) { return n == Norm::L2 ? "l2" : "linf"; }

inline Norm norm_from_string(std::string_view s) {
  if (s == "l2" || s == "L2") return Norm::L2;
  if (s == "linf" || s == "Linf" || s == "LINF") return Norm::Linf;
  throw ParameterError("unknown norm: " + std::string(s));
}

struct AttackConfig {
  Norm norm = Norm::Linf;
  double epsilon = 8.0 / 255.0;
  double alpha = 0.8 / 255.0;  // step size
  int iterations = 10;         // T
  double mu = 1.0;             // momentum decay
  std::optional<int> omega;    // query budget, query attacks only
  bool targeted = false;
  std::optional<std::size_t> target;

  // alpha = epsilon / T, the per-iteration step used by the gradient aligned attack.
  static AttackConfig standard(Norm norm, double epsilon, int iterations, double mu = 1.0) {
    AttackConfig c;
    c.norm = norm;
    c.epsilon = epsilon;
    c.iterations = iterations;
    c.alpha = epsilon / static_cast<double>(iterations);
    c.mu = mu;
    return c;
  }

  // Label the loss is evaluated against: the target for targeted attacks.
  [[nodiscard]] std::size_t loss_label(std::size_t y) const { return targeted ? *target : y; }

  void validate(std::size_t y, std::size_t num_classes) const {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    if (!(alpha > 0.0)) throw ParameterError("alpha must be > 0");
    if (iterations < 1) throw ParameterError("T must be >= 1");
    if (!(mu >= 0.0)) throw ParameterError("mu must be >= 0");
    if (omega && *omega < 0) throw ParameterError("Omega must be >= 0");
    if (targeted) {
      if (!target) throw ParameterError("targeted attack needs a target label");
      if (*target == y) throw ParameterError("target label equals the true label");
      if (*target >= num_classes) throw ParameterError("target label out of range");
    }
  }

  // alpha > epsilon is allowed but suspicious for iterative attacks.
  void warn_if_unusual(std::ostream& os = std::cerr) const {
    if (alpha > epsilon) os << "warning: step size alpha exceeds epsilon\n";
  }
};

// x_0 ... x_T and the objective gradient used at each step.
struct IterateTrace {
  std::vector<Tensor> iterates;
  std::vector<Tensor> grads;
};

// Projects x onto the epsilon ball around x0, then onto the [0, 1] box.
// For L2 the rescaled point lies in the ball; the box clamp only moves
// coordinates toward x0 when x0 is itself in the box, so it stays there.
inline Tensor clip_ball(const Tensor& x0, const Tensor& x, double epsilon, Norm norm) {
  require_same_size(x0, x, "clip_ball");
  Tensor out(x.size());
  if (norm == Norm::Linf) {
    for (std::size_t i = 0; i < x.size(); ++i)
      out[i] = std::clamp(std::clamp(x[i], x0[i] - epsilon, x0[i] + epsilon), 0.0, 1.0);
    return out;
  }
  Tensor delta = x - x0;
  const double n = norm_l2(delta);
  const double scale = n > epsilon ? epsilon / n : 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x0[i] + scale * delta[i], 0.0, 1.0);
  return out;
}

// Distance of x from x0 under the attack norm.
inline double perturbation_norm(const Tensor& x0, const Tensor& x, Norm norm) {
  const Tensor d = x - x0;
  return norm == Norm::Linf ? norm_linf(d) : norm_l2(d);
}

inline bool within_box(const Tensor& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

// Ball tolerances: 1e-12 for Linf, 1e-9 for L2.
inline bool within_constraints(const Tensor& x0, const Tensor& x, double epsilon, Norm norm) {
  const double tol = norm == Norm::Linf ? 1e-12 : 1e-9;
  return within_box(x) && perturbation_norm(x0, x, norm) <= epsilon + tol;
}

}  // namespace gradalign
