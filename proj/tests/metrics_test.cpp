#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace gradalign;
using namespace gradalign::testing;

namespace {

std::vector<AttackOutcome> outcomes(std::initializer_list<std::pair<bool, int>> spec) {
  std::vector<AttackOutcome> out;
  for (auto [success, queries] : spec) {
    AttackOutcome o;
    o.success = success;
    o.queries_used = queries;
    out.push_back(o);
  }
  return out;
}

}  // namespace

TEST(Asr, Examples) {
  EXPECT_EQ(asr(outcomes({{true, 0}, {true, 0}})), 1.0);
  EXPECT_EQ(asr(outcomes({{true, 0}, {true, 0}, {false, 0}, {true, 0}})), 0.75);
  EXPECT_THROW(asr(std::vector<AttackOutcome>{}), ParameterError);
}

TEST(AverageQueries, Mean) {
  EXPECT_EQ(average_queries(outcomes({{true, 5}, {false, 5}})), 5.0);
  EXPECT_EQ(average_queries(outcomes({{true, 1}, {false, 4}})), 2.5);
}

TEST(AvgqAsrCurve, SortedPointsAndPrecondition) {
  CampaignResult a{outcomes({{true, 5}, {false, 5}}), {}, "gaa", 1, "gace"};
  CampaignResult b{outcomes({{false, 0}, {false, 0}}), {}, "gaa", 1, "gace"};
  const std::vector<CampaignResult> both{a, b};
  const auto curve = avgq_asr_curve(std::span<const CampaignResult>(both));
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_EQ(curve[0].avg_queries, 0.0);
  EXPECT_EQ(curve[1].avg_queries, 5.0);
  EXPECT_EQ(curve[1].asr, 0.5);
  EXPECT_THROW(avgq_asr_curve(std::span<const CampaignResult>(both.data(), 1)), ParameterError);
}

TEST(NuMetric, SelfAlignedCeScoresOne) {
  const auto& p = default_pair();
  const auto cfg = AttackConfig::standard(Norm::Linf, 8.0 / 255.0, 10);
  std::vector<IterateTrace> traces;
  std::vector<std::size_t> labels;
  for (const auto& e : correctly_classified(p.victim, p.data, 20)) {
    traces.push_back(mifgsm(p.victim, e, cfg));
    labels.push_back(e.y);
  }
  const auto rep = nu_metric(traces, p.victim, labels);
  EXPECT_NEAR(rep.nu, static_cast<double>(rep.pairs), 1e-9);
  EXPECT_EQ(rep.pairs + rep.excluded, 20u * 10u);
  EXPECT_NEAR(rep.mean_cos, 1.0, 1e-12);
}

TEST(NuMetric, AntipodalAndScaleInvariant) {
  std::mt19937_64 rng(1);
  const Model v = random_model(rng, 8, 3);
  std::vector<IterateTrace> neg, scaled;
  std::vector<std::size_t> labels;
  for (int s = 0; s < 5; ++s) {
    IterateTrace a, b;
    for (int t = 0; t < 4; ++t) {
      const Tensor x = random_tensor(rng, 8, 0, 1);
      const Tensor g = input_grad(v, x, CrossEntropy{}, 1);
      a.iterates.push_back(x);
      a.grads.push_back(-g);
      b.iterates.push_back(x);
      b.grads.push_back(7.5 * g);
    }
    neg.push_back(a);
    scaled.push_back(b);
    labels.push_back(1);
  }
  const auto rn = nu_metric(neg, v, labels);
  EXPECT_NEAR(rn.nu, -static_cast<double>(rn.pairs), 1e-9);
  const auto rs = nu_metric(scaled, v, labels);
  EXPECT_NEAR(rs.nu, static_cast<double>(rs.pairs), 1e-9);
  EXPECT_GE(rs.nu, -20.0);
  EXPECT_LE(rs.nu, 20.0);
}

TEST(NuMetric, VanishingGradientsAreExcluded) {
  std::mt19937_64 rng(2);
  const Model v = random_model(rng, 4, 3);
  IterateTrace tr;
  tr.iterates = {Tensor(4, 0.5), Tensor(4, 0.6)};
  tr.grads = {Tensor(4, 0.0), input_grad(v, Tensor(4, 0.6), CrossEntropy{}, 0)};
  const std::vector<IterateTrace> traces{tr};
  const std::vector<std::size_t> labels{0};
  const auto rep = nu_metric(traces, v, labels);
  EXPECT_EQ(rep.excluded, 1u);
  EXPECT_EQ(rep.pairs, 1u);
  EXPECT_FALSE(rep.record.cosines[0][0].has_value());
}
