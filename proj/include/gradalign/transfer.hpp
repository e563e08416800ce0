#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "gradalign/attack_config.hpp"
#include "gradalign/dataset.hpp"
#include "gradalign/losses.hpp"
#include "gradalign/model.hpp"

namespace gradalign {

enum class SurrogateLoss { CE, Margin };

inline LossSpec to_loss_spec(SurrogateLoss l) {
  return l == SurrogateLoss::CE ? LossSpec{CrossEntropy{}} : LossSpec{Margin{}};
}

// A gradient whose L1 norm falls below this is treated as exactly zero.
inline constexpr double kVanishingGradient = 1e-20;

// How the momentum accumulator is normalised and applied.
//  Transfer: g += grad / |grad|_1; Linf steps alpha*sign(g), L2 steps alpha*g/|g|_2.
//  Aligned:  Linf as Transfer; L2 uses g += grad / |grad|_2 and steps alpha*g.
enum class MomentumStyle { Transfer, Aligned };

namespace detail {

// Ascent direction of the attack objective: the loss gradient, negated for
// targeted attacks (which descend L(x, target)).
inline Tensor objective_grad(const Model& model, const Tensor& x, const LossSpec& spec,
                             const AttackConfig& cfg, std::size_t y) {
  Tensor g = input_grad(model, x, spec, cfg.loss_label(y));
  if (cfg.targeted) g = -g;
  return g;
}

inline Tensor sign_step(const Tensor& x, const Tensor& direction, double alpha) {
  Tensor out = x;
  if (norm_l1(direction) < kVanishingGradient) return out;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * sign(direction[i]);
  return out;
}

// Shared momentum iteration. `grad_at(t, x_t, g_t)` returns the ascent
// gradient evaluated for step t.
template <class GradFn>
IterateTrace momentum_iterate(const Tensor& x, const AttackConfig& cfg, MomentumStyle style,
                              GradFn&& grad_at) {
  IterateTrace trace;
  trace.iterates.reserve(cfg.iterations + 1);
  trace.iterates.push_back(x);
  Tensor g(x.size(), 0.0);
  const bool l2_normalised_grad = style == MomentumStyle::Aligned && cfg.norm == Norm::L2;
  for (int t = 0; t < cfg.iterations; ++t) {
    const Tensor& xt = trace.iterates.back();
    Tensor grad = grad_at(t, xt, g);
    const double n = l2_normalised_grad ? norm_l2(grad) : norm_l1(grad);
    const bool vanished = norm_l1(grad) < kVanishingGradient;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = cfg.mu * g[i] + (vanished ? 0.0 : grad[i] / n);

    Tensor next = xt;
    if (cfg.norm == Norm::Linf) {
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += cfg.alpha * sign(g[i]);
    } else if (style == MomentumStyle::Aligned) {
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += cfg.alpha * g[i];
    } else {
      const double gn = norm_l2(g);
      if (gn > 0.0)
        for (std::size_t i = 0; i < next.size(); ++i) next[i] += cfg.alpha * (g[i] / gn);
    }
    trace.grads.push_back(std::move(grad));
    trace.iterates.push_back(clip_ball(x, next, cfg.epsilon, cfg.norm));
  }
  return trace;
}

inline void require_linf(const AttackConfig& cfg, const char* name) {
  if (cfg.norm != Norm::Linf) throw ParameterError(std::string(name) + " is an Linf attack");
}

}  // namespace detail

// Single step of size epsilon along the gradient sign.
inline IterateTrace fgsm(const Model& surrogate, const Example& ex, const AttackConfig& cfg,
                         SurrogateLoss loss = SurrogateLoss::CE) {
  detail::require_linf(cfg, "fgsm");
  cfg.validate(ex.y, surrogate.num_classes());
  IterateTrace trace;
  trace.iterates.push_back(ex.x);
  Tensor grad = detail::objective_grad(surrogate, ex.x, to_loss_spec(loss), cfg, ex.y);
  trace.iterates.push_back(clip_ball(ex.x, detail::sign_step(ex.x, grad, cfg.epsilon), cfg.epsilon, cfg.norm));
  trace.grads.push_back(std::move(grad));
  return trace;
}

inline IterateTrace ifgsm(const Model& surrogate, const Example& ex, const AttackConfig& cfg,
                          SurrogateLoss loss = SurrogateLoss::CE) {
  detail::require_linf(cfg, "ifgsm");
  cfg.validate(ex.y, surrogate.num_classes());
  const LossSpec spec = to_loss_spec(loss);
  IterateTrace trace;
  trace.iterates.push_back(ex.x);
  for (int t = 0; t < cfg.iterations; ++t) {
    const Tensor& xt = trace.iterates.back();
    Tensor grad = detail::objective_grad(surrogate, xt, spec, cfg, ex.y);
    Tensor next = clip_ball(ex.x, detail::sign_step(xt, grad, cfg.alpha), cfg.epsilon, cfg.norm);
    trace.grads.push_back(std::move(grad));
    trace.iterates.push_back(std::move(next));
  }
  return trace;
}

inline IterateTrace mifgsm(const Model& surrogate, const Example& ex, const AttackConfig& cfg,
                           SurrogateLoss loss = SurrogateLoss::CE) {
  cfg.validate(ex.y, surrogate.num_classes());
  const LossSpec spec = to_loss_spec(loss);
  return detail::momentum_iterate(ex.x, cfg, MomentumStyle::Transfer,
                                  [&](int, const Tensor& xt, const Tensor&) {
                                    return detail::objective_grad(surrogate, xt, spec, cfg, ex.y);
                                  });
}

// Nesterov variant: the gradient is taken at the look-ahead x_t + alpha*mu*g_t.
inline IterateTrace nifgsm(const Model& surrogate, const Example& ex, const AttackConfig& cfg,
                           SurrogateLoss loss = SurrogateLoss::CE) {
  cfg.validate(ex.y, surrogate.num_classes());
  const LossSpec spec = to_loss_spec(loss);
  return detail::momentum_iterate(ex.x, cfg, MomentumStyle::Transfer,
                                  [&](int, const Tensor& xt, const Tensor& g) {
                                    Tensor ahead = xt;
                                    for (std::size_t i = 0; i < ahead.size(); ++i)
                                      ahead[i] += cfg.alpha * cfg.mu * g[i];
                                    return detail::objective_grad(surrogate, ahead, spec, cfg, ex.y);
                                  });
}

struct VarianceTuning {
  int samples = 20;    // M
  double beta = 1.5;   // neighbourhood radius, in units of epsilon
  std::uint64_t seed = 0;
};

// Variance-tuned momentum: step t uses grad(x_t) + v_t with
// v_{t+1} = mean_i [grad(x_t + r_i) - grad(x_t)], r_i ~ U[-beta*eps, beta*eps]^N.
inline IterateTrace vmifgsm(const Model& surrogate, const Example& ex, const AttackConfig& cfg,
                            const VarianceTuning& vt, SurrogateLoss loss = SurrogateLoss::CE) {
  cfg.validate(ex.y, surrogate.num_classes());
  if (vt.samples < 1) throw ParameterError("vmifgsm: M must be >= 1");
  if (!(vt.beta > 0.0)) throw ParameterError("vmifgsm: beta must be > 0");
  const LossSpec spec = to_loss_spec(loss);
  const double radius = vt.beta * cfg.epsilon;
  std::mt19937_64 rng(vt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Tensor v(ex.x.size(), 0.0);
  return detail::momentum_iterate(
      ex.x, cfg, MomentumStyle::Transfer, [&](int, const Tensor& xt, const Tensor&) {
        const Tensor grad = detail::objective_grad(surrogate, xt, spec, cfg, ex.y);
        Tensor tuned = grad + v;
        // Summing differences keeps v exactly zero when every neighbour
        // gradient equals grad.
        Tensor next_v(xt.size(), 0.0);
        for (int m = 0; m < vt.samples; ++m) {
          Tensor neighbour = xt;
          for (double& c : neighbour) c += radius * unit(rng);
          const Tensor gn = detail::objective_grad(surrogate, neighbour, spec, cfg, ex.y);
          for (std::size_t i = 0; i < next_v.size(); ++i) next_v[i] += gn[i] - grad[i];
        }
        for (double& c : next_v) c /= static_cast<double>(vt.samples);
        v = std::move(next_v);
        return tuned;
      });
}

// The n_bar highest-scoring classes other than y, ties to the lower index.
inline std::vector<std::size_t> top_wrong_classes(const Tensor& logits, std::size_t y, std::size_t n_bar) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (i != y) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
  idx.resize(std::min(n_bar, idx.size()));
  return idx;
}

struct TopNAsr {
  std::size_t n_bar = 0;
  std::vector<double> rates;                // rate_t for t = 1..T over all examples
  std::vector<double> success_conditioned;  // same count over misclassified x_t only
};

// Per-iteration top-n_bar rates computed from existing white-box traces.
inline TopNAsr top_n_asr_from_traces(const Model& model, std::span<const IterateTrace> traces,
                                     std::span<const std::size_t> labels, std::size_t n_bar) {
  if (traces.empty()) throw ParameterError("top-n ASR needs at least one example");
  if (traces.size() != labels.size()) throw ShapeError("one label per trace required");
  const std::size_t c = model.num_classes();
  if (n_bar < 1 || n_bar >= c) throw ParameterError("n_bar must be in [1, C-1]");
  const std::size_t steps = traces.front().iterates.size() - 1;
  std::vector<std::size_t> hits(steps, 0), wrong(steps, 0);
  for (std::size_t s = 0; s < traces.size(); ++s) {
    const auto& it = traces[s].iterates;
    if (it.size() != steps + 1) throw ShapeError("traces must share T");
    Tensor prev_logits = forward(model, it[0]);
    for (std::size_t t = 1; t <= steps; ++t) {
      const Tensor logits = forward(model, it[t]);
      const std::size_t pred = argmax(logits);
      const auto top = top_wrong_classes(prev_logits, labels[s], n_bar);
      if (std::find(top.begin(), top.end(), pred) != top.end()) ++hits[t - 1];
      if (pred != labels[s]) ++wrong[t - 1];
      prev_logits = logits;
    }
  }
  TopNAsr out{n_bar, {}, {}};
  for (std::size_t t = 0; t < steps; ++t) {
    out.rates.push_back(static_cast<double>(hits[t]) / static_cast<double>(traces.size()));
    out.success_conditioned.push_back(wrong[t] ? static_cast<double>(hits[t]) / static_cast<double>(wrong[t]) : 0.0);
  }
  return out;
}

// White-box IFGSM on `model` over every example, then top-n_bar rates.
inline TopNAsr top_n_asr_protocol(const Model& model, const Dataset& data, const AttackConfig& cfg,
                                  std::size_t n_bar) {
  if (n_bar < 1 || n_bar >= model.num_classes()) throw ParameterError("n_bar must be in [1, C-1]");
  std::vector<IterateTrace> traces;
  std::vector<std::size_t> labels;
  for (const auto& ex : data.examples) {
    traces.push_back(ifgsm(model, ex, cfg));
    labels.push_back(ex.y);
  }
  return top_n_asr_from_traces(model, traces, labels, n_bar);
}

}  // namespace gradalign
