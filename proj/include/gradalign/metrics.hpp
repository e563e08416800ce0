#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradalign/attack_config.hpp"
#include "gradalign/losses.hpp"
#include "gradalign/query.hpp"
#include "gradalign/transfer.hpp"

namespace gradalign {

struct CampaignResult {
  std::vector<AttackOutcome> outcomes;
  AttackConfig cfg;
  std::string attack_name;
  std::size_t num_surrogates = 1;
  std::string loss_name;
};

inline double asr(std::span<const AttackOutcome> outcomes) {
  if (outcomes.empty()) throw ParameterError("asr: no outcomes");
  const auto wins = std::count_if(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.success; });
  return static_cast<double>(wins) / static_cast<double>(outcomes.size());
}

inline double asr(const CampaignResult& r) { return asr(std::span<const AttackOutcome>(r.outcomes)); }

inline double average_queries(std::span<const AttackOutcome> outcomes) {
  if (outcomes.empty()) throw ParameterError("average_queries: no outcomes");
  double s = 0.0;
  for (const auto& o : outcomes) s += o.queries_used;
  return s / static_cast<double>(outcomes.size());
}

struct CurvePoint {
  double avg_queries = 0.0;
  double asr = 0.0;
};

// One (Avg.Q, ASR) point per campaign, sorted by Avg.Q (stable for ties).
inline std::vector<CurvePoint> avgq_asr_curve(std::span<const CurvePoint> points) {
  if (points.size() < 2) throw ParameterError("an Avg.Q-ASR curve needs at least two budget levels");
  std::vector<CurvePoint> out(points.begin(), points.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.avg_queries < b.avg_queries; });
  return out;
}

inline std::vector<CurvePoint> avgq_asr_curve(std::span<const CampaignResult> campaigns) {
  std::vector<CurvePoint> pts;
  for (const auto& c : campaigns) pts.push_back({average_queries(c.outcomes), asr(c)});
  return avgq_asr_curve(std::span<const CurvePoint>(pts));
}

// Per-example, per-iteration cosines between attack gradients and the
// victim's CE gradients; nullopt marks pairs where either norm is ~0.
struct AlignmentRecord {
  std::vector<std::vector<std::optional<double>>> cosines;
};

struct NuReport {
  double nu = 0.0;        // sum of defined cosines
  double mean_cos = 0.0;  // nu / number of defined pairs
  std::size_t excluded = 0;
  std::size_t pairs = 0;
  AlignmentRecord record;
};

inline constexpr double kNegligibleGradient = 1e-20;

// Gradient alignment between each trace's recorded surrogate gradients and the
// victim's CE gradient at the same iterate and true label.
inline NuReport nu_metric(std::span<const IterateTrace> traces, const Model& victim,
                          std::span<const std::size_t> labels) {
  if (traces.size() != labels.size()) throw ShapeError("nu_metric: one label per trace required");
  NuReport rep;
  for (std::size_t s = 0; s < traces.size(); ++s) {
    const auto& tr = traces[s];
    std::vector<std::optional<double>> row;
    for (std::size_t t = 0; t < tr.grads.size(); ++t) {
      const Tensor& gs = tr.grads[t];
      const Tensor gv = input_grad(victim, tr.iterates[t], CrossEntropy{}, labels[s]);
      if (norm_l2(gs) < kNegligibleGradient || norm_l2(gv) < kNegligibleGradient) {
        ++rep.excluded;
        row.emplace_back(std::nullopt);
        continue;
      }
      const double c = std::clamp(cosine(gs, gv), -1.0, 1.0);
      rep.nu += c;
      ++rep.pairs;
      row.emplace_back(c);
    }
    rep.record.cosines.push_back(std::move(row));
  }
  rep.mean_cos = rep.pairs ? rep.nu / static_cast<double>(rep.pairs) : 0.0;
  return rep;
}

}  // namespace gradalign
