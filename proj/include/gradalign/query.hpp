#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "gradalign/attack_config.hpp"
#include "gradalign/dataset.hpp"
#include "gradalign/losses.hpp"
#include "gradalign/model.hpp"
#include "gradalign/transfer.hpp"

namespace gradalign {

// Score-based access to a victim model. Every probability-vector query
// counts; once a budget is set it can never be exceeded.
class QueryOracle {
 public:
  explicit QueryOracle(const Model& victim, std::optional<int> budget = std::nullopt)
      : victim_(&victim), budget_(budget) {
    if (budget_ && *budget_ < 0) throw ParameterError("query budget must be >= 0");
  }

  ProbVector query(const Tensor& x) {
    if (exhausted()) throw BudgetError("query budget of " + std::to_string(*budget_) + " exhausted");
    auto p = softmax(forward(*victim_, x));
    ++count_;
    return p;
  }

  [[nodiscard]] int count() const noexcept { return count_; }
  [[nodiscard]] std::size_t num_classes() const noexcept { return victim_->num_classes(); }
  [[nodiscard]] std::size_t input_dim() const noexcept { return victim_->input_dim(); }
  [[nodiscard]] std::optional<int> budget() const noexcept { return budget_; }
  [[nodiscard]] bool exhausted() const noexcept { return budget_ && count_ >= *budget_; }
  [[nodiscard]] bool can_afford(int n) const noexcept { return !budget_ || count_ + n <= *budget_; }

  // Experimenter-side evaluation pass used to score an attack once it has
  // finished. Not a query and never counted.
  [[nodiscard]] std::size_t evaluation_label(const Tensor& x) const { return predict(*victim_, x); }

 private:
  const Model* victim_;
  std::optional<int> budget_;
  int count_ = 0;
};

struct AttackOutcome {
  Tensor x_adv;
  bool success = false;
  int queries_used = 0;
  IterateTrace trace;
  std::size_t final_prediction = 0;
  // Objective values of accepted iterates for accept/reject attacks
  // (true-class probability untargeted, negated target probability targeted).
  std::vector<double> accepted_scores;
};

inline bool is_success(const AttackConfig& cfg, std::size_t y, std::size_t prediction) {
  return cfg.targeted ? prediction == *cfg.target : prediction != y;
}

inline AttackOutcome finish_outcome(const QueryOracle& oracle, const Example& ex, const AttackConfig& cfg,
                                    IterateTrace trace, std::vector<double> accepted_scores = {}) {
  AttackOutcome out;
  out.x_adv = trace.iterates.back();
  out.final_prediction = oracle.evaluation_label(out.x_adv);
  out.success = is_success(cfg, ex.y, out.final_prediction);
  out.queries_used = oracle.count();
  out.trace = std::move(trace);
  out.accepted_scores = std::move(accepted_scores);
  return out;
}

// Equidistant query iterations {floor(T/Omega * i) | i = 0..Omega-1}, computed
// in exact integer arithmetic.
inline std::vector<int> query_schedule(int iterations, int omega) {
  if (omega < 0 || iterations < 0) throw ParameterError("query_schedule: negative argument");
  if (omega > iterations) throw ParameterError("query_schedule: Omega must not exceed T");
  std::vector<int> out;
  for (int i = 0; i < omega; ++i)
    out.push_back(static_cast<int>((static_cast<long long>(iterations) * i) / omega));
  return out;
}

enum class AlignedLoss { GACE, GAM };

namespace detail {

inline Tensor ensemble_objective_grad(std::span<const Model> surrogates, const Tensor& x, const LossSpec& spec,
                                      const AttackConfig& cfg, std::size_t y) {
  if (surrogates.empty()) throw ParameterError("at least one surrogate model is required");
  Tensor sum = objective_grad(surrogates[0], x, spec, cfg, y);
  if (surrogates.size() == 1) return sum;
  for (std::size_t k = 1; k < surrogates.size(); ++k) sum = sum + objective_grad(surrogates[k], x, spec, cfg, y);
  return (1.0 / static_cast<double>(surrogates.size())) * sum;
}

}  // namespace detail

// Gradient aligned attack. The victim's probability vector is refreshed at the
// scheduled iterations and held in between; the surrogate ensemble follows the
// victim's logit coefficients through GACE or GAM. With Omega = 0 no victim
// information exists and the attack runs plain CE (margin for GAM) momentum,
// which for Linf is exactly MIFGSM.
inline AttackOutcome gaa(std::span<const Model> surrogates, QueryOracle& oracle, const Example& ex,
                         const AttackConfig& cfg, AlignedLoss loss = AlignedLoss::GACE) {
  if (surrogates.empty()) throw ParameterError("gaa needs at least one surrogate");
  cfg.validate(ex.y, surrogates[0].num_classes());
  const int omega = cfg.omega.value_or(0);
  const auto schedule = query_schedule(cfg.iterations, omega);

  std::optional<ProbVector> held;
  std::size_t next = 0;
  auto trace = detail::momentum_iterate(ex.x, cfg, MomentumStyle::Aligned, [&](int t, const Tensor& xt, const Tensor&) {
    if (next < schedule.size() && schedule[next] == t) {
      held = oracle.query(xt);
      ++next;
    }
    LossSpec spec;
    if (!held)
      spec = loss == AlignedLoss::GACE ? LossSpec{CrossEntropy{}} : LossSpec{Margin{}};
    else if (loss == AlignedLoss::GACE)
      spec = AlignedCrossEntropy{*held};
    else
      spec = AlignedMargin{held->p};
    return detail::ensemble_objective_grad(surrogates, xt, spec, cfg, ex.y);
  });
  return finish_outcome(oracle, ex, cfg, std::move(trace));
}

inline AttackOutcome gaa(const Model& surrogate, QueryOracle& oracle, const Example& ex, const AttackConfig& cfg,
                         AlignedLoss loss = AlignedLoss::GACE) {
  return gaa(std::span<const Model>(&surrogate, 1), oracle, ex, cfg, loss);
}

// ---------------------------------------------------------------------------
// ZOO: coordinate-wise finite differences with a Newton step.

struct ZooEstimate {
  double g = 0.0;
  double h = 0.0;
};

// A second difference within rounding noise of the three values is taken as 0.
inline ZooEstimate zoo_differences(double f_plus, double f_center, double f_minus, double lambda) {
  double second = f_plus - 2.0 * f_center + f_minus;
  const double scale = std::max({std::abs(f_plus), std::abs(f_center), std::abs(f_minus)});
  if (std::abs(second) <= 8.0 * std::numeric_limits<double>::epsilon() * scale) second = 0.0;
  return {(f_plus - f_minus) / (2.0 * lambda), second / (lambda * lambda)};
}

// alpha*g when the curvature estimate is non-positive, alpha*g/h otherwise.
inline double zoo_update(const ZooEstimate& e, double alpha) { return e.h <= 0.0 ? alpha * e.g : alpha * e.g / e.h; }

// CE in bits of a queried probability vector. Probabilities are floored at
// the smallest normal double so the value stays finite.
inline double ce_from_probs(const ProbVector& p, std::size_t y) {
  return -std::log2(std::max(p[y], std::numeric_limits<double>::min()));
}

using ProbObjective = std::function<double(const ProbVector&)>;

struct ZooStep {
  ZooEstimate estimate;
  double center = 0.0;
};

// Queries x +- lambda e_coord, plus x itself unless `center` is supplied.
inline ZooStep zoo_step(QueryOracle& oracle, const Tensor& x, std::size_t coord, double lambda,
                        const ProbObjective& objective, std::optional<double> center = std::nullopt) {
  if (coord >= x.size()) throw ShapeError("zoo_step: coordinate out of range");
  const double fc = center ? *center : objective(oracle.query(x));
  Tensor plus = x, minus = x;
  plus[coord] += lambda;
  minus[coord] -= lambda;
  const double fp = objective(oracle.query(plus));
  const double fm = objective(oracle.query(minus));
  return {zoo_differences(fp, fc, fm, lambda), fc};
}

struct ZooOptions {
  double lambda = 1e-4;
  std::uint64_t seed = 0;
};

// Ascends CE(y) untargeted, or -CE(target) targeted, one random coordinate per
// iteration, for at most T iterations or until the budget runs out.
inline AttackOutcome zoo_attack(QueryOracle& oracle, const Example& ex, const AttackConfig& cfg,
                                const ZooOptions& opt = {}) {
  cfg.validate(ex.y, oracle.num_classes());
  const ProbObjective objective = [&](const ProbVector& p) {
    return cfg.targeted ? -ce_from_probs(p, *cfg.target) : ce_from_probs(p, ex.y);
  };
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, ex.x.size() - 1);
  IterateTrace trace;
  trace.iterates.push_back(ex.x);
  std::optional<double> center;
  for (int t = 0; t < cfg.iterations; ++t) {
    if (!oracle.can_afford(center ? 2 : 3)) break;
    const Tensor& xt = trace.iterates.back();
    const std::size_t coord = pick(rng);
    const auto step = zoo_step(oracle, xt, coord, opt.lambda, objective, center);
    center = step.center;
    const double delta = zoo_update(step.estimate, cfg.alpha);
    if (delta == 0.0) continue;
    Tensor next = xt;
    next[coord] += delta;
    next = clip_ball(ex.x, next, cfg.epsilon, cfg.norm);
    if (next == xt) continue;
    trace.iterates.push_back(std::move(next));
    center.reset();
  }
  return finish_outcome(oracle, ex, cfg, std::move(trace));
}

// ---------------------------------------------------------------------------
// NES: antithetic Gaussian estimate of the gradient of softmax(f(x))_k.

inline Tensor nes_grad(QueryOracle& oracle, const Tensor& x, std::size_t k, int n, double sigma,
                       std::uint64_t seed) {
  if (n < 1) throw ParameterError("nes_grad: n must be >= 1");
  if (!(sigma > 0.0)) throw ParameterError("nes_grad: sigma must be > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor g(x.size(), 0.0);
  Tensor u(x.size());
  for (int i = 0; i < n; ++i) {
    for (double& v : u) v = normal(rng);
    Tensor plus = x, minus = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
      plus[j] += sigma * u[j];
      minus[j] -= sigma * u[j];
    }
    const double diff = oracle.query(plus)[k] - oracle.query(minus)[k];
    for (std::size_t j = 0; j < x.size(); ++j) g[j] += diff * u[j];
  }
  const double scale = 1.0 / (2.0 * static_cast<double>(n) * sigma);
  for (double& v : g) v *= scale;
  return g;
}

struct NesOptions {
  int samples = 50;  // antithetic pairs per estimate
  double sigma = 0.01;
  std::uint64_t seed = 0;
};

// Signed steps that lower the true-class probability (untargeted) or raise
// the target probability (targeted). Stops when the next estimate would not
// fit in the budget.
inline AttackOutcome nes_attack(QueryOracle& oracle, const Example& ex, const AttackConfig& cfg,
                                const NesOptions& opt = {}) {
  cfg.validate(ex.y, oracle.num_classes());
  const std::size_t k = cfg.loss_label(ex.y);
  const double direction = cfg.targeted ? 1.0 : -1.0;
  IterateTrace trace;
  trace.iterates.push_back(ex.x);
  for (int t = 0; t < cfg.iterations; ++t) {
    if (!oracle.can_afford(2 * opt.samples)) break;
    const Tensor& xt = trace.iterates.back();
    Tensor g = nes_grad(oracle, xt, k, opt.samples, opt.sigma, opt.seed + static_cast<std::uint64_t>(t));
    Tensor next = xt;
    for (std::size_t j = 0; j < next.size(); ++j) next[j] += direction * cfg.alpha * sign(g[j]);
    trace.grads.push_back(direction * g);
    trace.iterates.push_back(clip_ball(ex.x, next, cfg.epsilon, cfg.norm));
  }
  return finish_outcome(oracle, ex, cfg, std::move(trace));
}

// ---------------------------------------------------------------------------
// Accept/reject search shared by SimBA and ODS.

namespace detail {

// Lower is better: p_y untargeted, -p_target targeted.
inline double acceptance_score(const ProbVector& p, const AttackConfig& cfg, std::size_t y) {
  return cfg.targeted ? -p[*cfg.target] : p[y];
}

inline bool probs_show_success(const ProbVector& p, const AttackConfig& cfg, std::size_t y) {
  return is_success(cfg, y, argmax(p.p));
}

class AcceptRejectSearch {
 public:
  AcceptRejectSearch(QueryOracle& oracle, const Example& ex, const AttackConfig& cfg)
      : oracle_(oracle), ex_(ex), cfg_(cfg) {
    trace_.iterates.push_back(ex.x);
  }

  // Queries the starting point. False if the budget does not allow it.
  bool start() {
    if (!oracle_.can_afford(1)) return false;
    const auto p = oracle_.query(ex_.x);
    scores_.push_back(acceptance_score(p, cfg_, ex_.y));
    done_ = probs_show_success(p, cfg_, ex_.y);
    return true;
  }

  [[nodiscard]] bool done() const noexcept { return done_ || oracle_.exhausted(); }
  [[nodiscard]] const Tensor& current() const { return trace_.iterates.back(); }

  // Tries current + step, then current - step; keeps the first that strictly
  // lowers the score. Candidates are projected before querying; a candidate
  // that projects back onto the current point is skipped without a query.
  bool try_step(const Tensor& step) {
    for (double s : {1.0, -1.0}) {
      if (done()) return false;
      Tensor cand = current();
      for (std::size_t j = 0; j < cand.size(); ++j) cand[j] += s * step[j];
      cand = clip_ball(ex_.x, cand, cfg_.epsilon, cfg_.norm);
      if (cand == current()) continue;
      const auto p = oracle_.query(cand);
      const double score = acceptance_score(p, cfg_, ex_.y);
      if (score < scores_.back()) {
        trace_.iterates.push_back(std::move(cand));
        scores_.push_back(score);
        done_ = probs_show_success(p, cfg_, ex_.y);
        return true;
      }
    }
    return false;
  }

  AttackOutcome finish() { return finish_outcome(oracle_, ex_, cfg_, std::move(trace_), std::move(scores_)); }

 private:
  QueryOracle& oracle_;
  const Example& ex_;
  const AttackConfig& cfg_;
  IterateTrace trace_;
  std::vector<double> scores_;
  bool done_ = false;
};

}  // namespace detail

struct SimbaOptions {
  std::uint64_t seed = 0;
  // Directions to try; 0 keeps cycling through reshuffled bases until the
  // budget runs out (or a single pass when no budget is set).
  int max_directions = 0;
};

// SimBA over the standard basis in a seeded random order, step size alpha.
inline AttackOutcome simba_attack(QueryOracle& oracle, const Example& ex, const AttackConfig& cfg,
                                  const SimbaOptions& opt = {}) {
  cfg.validate(ex.y, oracle.num_classes());
  detail::AcceptRejectSearch search(oracle, ex, cfg);
  if (!search.start()) return search.finish();
  const std::size_t d = ex.x.size();
  const long long limit = opt.max_directions > 0 ? opt.max_directions
                          : oracle.budget()       ? std::numeric_limits<long long>::max()
                                                  : static_cast<long long>(d);
  std::mt19937_64 rng(opt.seed);
  std::vector<std::size_t> order(d);
  long long tried = 0;
  while (tried < limit && !search.done()) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < d && tried < limit && !search.done(); ++k, ++tried) {
      Tensor step(d, 0.0);
      step[order[k]] = cfg.alpha;
      search.try_step(step);
    }
  }
  return search.finish();
}

// Unit-L2 output-diversified direction grad_x(w . f(x)) / |.|_2, or nullopt
// when the raw gradient vanishes.
inline std::optional<Tensor> ods_direction(const Model& surrogate, const Tensor& x, const Tensor& weights) {
  Tensor g = input_vjp(surrogate, x, weights);
  const double n = norm_l2(g);
  if (!(n >= kVanishingGradient)) return std::nullopt;
  return (1.0 / n) * g;
}

struct OdsOptions {
  std::uint64_t seed = 0;
};

// Output diversified sampling: each of at most T steps draws w ~ U[-1,1]^C,
// follows the surrogate's diversified direction (alpha*d for L2,
// alpha*sign(d) for Linf) and keeps it SimBA-style.
inline AttackOutcome ods_attack(const Model& surrogate, QueryOracle& oracle, const Example& ex,
                                const AttackConfig& cfg, const OdsOptions& opt = {}) {
  cfg.validate(ex.y, oracle.num_classes());
  detail::AcceptRejectSearch search(oracle, ex, cfg);
  if (!search.start()) return search.finish();
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Tensor w(surrogate.num_classes());
  for (int t = 0; t < cfg.iterations && !search.done(); ++t) {
    for (double& v : w) v = unit(rng);
    const auto dir = ods_direction(surrogate, search.current(), w);
    if (!dir) continue;
    Tensor step = *dir;
    for (double& v : step) v = cfg.alpha * (cfg.norm == Norm::Linf ? sign(v) : v);
    search.try_step(step);
  }
  return search.finish();
}

}  // namespace gradalign
