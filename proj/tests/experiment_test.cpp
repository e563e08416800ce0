#include <gtest/gtest.h>

#include <cstdlib>

#include "gradalign/experiment.hpp"
#include "test_support.hpp"

using namespace gradalign;
using namespace gradalign::testing;

namespace {

json base_config() {
  return json{{"dataset", "d.json"}, {"victim", "v.json"}, {"surrogates", {"s.json"}}, {"attack", "gaa"},
              {"loss", "gace"},      {"norm", "linf"},      {"epsilon", 8.0 / 255.0},   {"T", 10},
              {"mu", 1.0},           {"omega", 5},          {"seed", 3},                {"max_examples", 40}};
}

ExperimentConfig parse(const json& j) { return parse_experiment_config(j, "/tmp"); }

}  // namespace

TEST(ExperimentConfig, ParsesDefaults) {
  const auto c = parse(base_config());
  EXPECT_EQ(c.attack, AttackKind::GAA);
  EXPECT_EQ(c.loss, LossKind::GACE);
  EXPECT_DOUBLE_EQ(c.attack_cfg.alpha, 8.0 / 255.0 / 10.0);
  EXPECT_EQ(c.attack_cfg.omega, 5);
  EXPECT_EQ(c.resolve("d.json"), std::filesystem::path("/tmp/d.json"));
}

TEST(ExperimentConfig, RejectsUnsupportedCombinations) {
  auto bad = [](auto edit) {
    json j = base_config();
    edit(j);
    return j;
  };
  EXPECT_THROW(parse(bad([](json& j) { j["loss"] = "ce"; })), ConfigError);
  EXPECT_THROW(parse(bad([](json& j) { j["omega"] = 11; })), ConfigError);
  EXPECT_THROW(parse(bad([](json& j) { j.erase("omega"); })), ConfigError);
  EXPECT_THROW(parse(bad([](json& j) { j["attack"] = "mifgsm"; })), ConfigError);
  EXPECT_THROW(parse(bad([](json& j) {
                 j["attack"] = "mifgsm";
                 j["loss"] = "gace";
                 j.erase("omega");
               })),
               ConfigError);
  EXPECT_THROW(parse(bad([](json& j) {
                 j["attack"] = "fgsm";
                 j["loss"] = "ce";
                 j["norm"] = "l2";
                 j.erase("omega");
               })),
               ConfigError);
  EXPECT_THROW(parse(bad([](json& j) { j["epsilon"] = -1.0; })), ConfigError);
  EXPECT_THROW(parse(bad([](json& j) { j["attack"] = "pgd"; })), ConfigError);
  EXPECT_THROW(parse(bad([](json& j) { j["norm"] = "l1"; })), ConfigError);
  EXPECT_THROW(parse(bad([](json& j) { j.erase("victim"); })), ConfigError);
  EXPECT_THROW(parse(bad([](json& j) { j["surrogates"] = json::array(); })), ConfigError);
  EXPECT_NO_THROW(parse(bad([](json& j) {
    j["attack"] = "mifgsm";
    j["loss"] = "margin";
    j.erase("omega");
  })));
}

TEST(Campaign, GaaSpendsOmegaAndTransferSpendsNothing) {
  const auto& p = default_pair();
  const std::vector<Model> surrogates{p.surrogate};
  const auto gaa_cfg = parse(base_config());
  const auto gaa_run = run_campaign(gaa_cfg, p.data, surrogates, p.victim, 2);
  EXPECT_EQ(average_queries(gaa_run.result.outcomes), 5.0);
  EXPECT_EQ(gaa_run.records.size(), 40u);
  ASSERT_TRUE(gaa_run.alignment);

  json j = base_config();
  j["attack"] = "mifgsm";
  j["loss"] = "ce";
  j.erase("omega");
  const auto mi_run = run_campaign(parse(j), p.data, surrogates, p.victim, 2);
  EXPECT_EQ(average_queries(mi_run.result.outcomes), 0.0);
}

TEST(Campaign, AttacksOnlyCorrectlyClassifiedExamplesInOrder) {
  const auto& p = default_pair();
  const std::vector<Model> surrogates{p.surrogate};
  const auto run = run_campaign(parse(base_config()), p.data, surrogates, p.victim, 3);
  for (std::size_t k = 0; k < run.records.size(); ++k) {
    const auto& r = run.records[k];
    EXPECT_EQ(predict(p.victim, p.data.examples[r.index].x), r.y);
    if (k) {
      EXPECT_GT(r.index, run.records[k - 1].index);
    }
    EXPECT_TRUE(within_constraints(p.data.examples[r.index].x, r.outcome.x_adv, 8.0 / 255.0, Norm::Linf));
  }
}

TEST(Campaign, ResultsIndependentOfThreadCount) {
  const auto& p = default_pair();
  const std::vector<Model> surrogates{p.surrogate};
  for (const char* attack : {"gaa", "vmifgsm", "simba", "nes"}) {
    json j = base_config();
    j["attack"] = attack;
    if (std::string(attack) != "gaa") {
      j["loss"] = "ce";
      if (std::string(attack) == "vmifgsm") j.erase("omega");
      else j["omega"] = 200;
    }
    j["max_examples"] = 12;
    const auto c = parse(j);
    const auto one = campaign_to_json(c, run_campaign(c, p.data, surrogates, p.victim, 1)).dump();
    const auto four = campaign_to_json(c, run_campaign(c, p.data, surrogates, p.victim, 4)).dump();
    EXPECT_EQ(one, four) << attack;
  }
}

TEST(Campaign, TargetedDrawsWrongLabels) {
  const auto& p = default_pair();
  const std::vector<Model> surrogates{p.surrogate};
  json j = base_config();
  j["targeted"] = true;
  const auto run = run_campaign(parse(j), p.data, surrogates, p.victim, 2);
  for (const auto& r : run.records) {
    ASSERT_TRUE(r.target);
    EXPECT_NE(*r.target, r.y);
    EXPECT_EQ(r.outcome.success, r.outcome.final_prediction == *r.target);
  }
}

TEST(Campaign, CsvRowMatchesHeader) {
  const auto& p = default_pair();
  const std::vector<Model> surrogates{p.surrogate};
  const auto c = parse(base_config());
  const std::string row = results_csv_row(c, run_campaign(c, p.data, surrogates, p.victim, 2));
  const std::string header = results_csv_header();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
  EXPECT_EQ(row.rfind("gaa,gace,1,linf,", 0), 0u);
}

TEST(RandomWrongLabel, NeverTheTrueLabel) {
  for (std::uint64_t s = 0; s < 200; ++s)
    for (std::size_t y = 0; y < 4; ++y) EXPECT_NE(random_wrong_label(y, 4, s), y);
}

TEST(Diagnose, ExhaustiveRowIsMisclassificationRateAndRowsAreMonotone) {
  const auto& p = default_pair();
  DiagnoseConfig c;
  c.max_examples = 60;
  const auto rep = run_diagnose(c, p.data, p.surrogate, p.victim, 2);
  ASSERT_EQ(rep.top_n.size(), 5u);
  EXPECT_EQ(rep.top_n.back().n_bar, 9u);
  EXPECT_EQ(rep.top_n.back().rates, rep.misclassification_rate);
  for (std::size_t k = 1; k < rep.top_n.size(); ++k)
    for (std::size_t t = 0; t < rep.misclassification_rate.size(); ++t)
      EXPECT_GE(rep.top_n[k].rates[t], rep.top_n[k - 1].rates[t]);
  ASSERT_EQ(rep.alignment.size(), 2u);
  for (const auto& [loss, nu] : rep.alignment) {
    const std::string name(to_string(loss));
    EXPECT_GT(nu.pairs, 0u) << name;
    EXPECT_NEAR(nu.mean_cos, nu.nu / static_cast<double>(nu.pairs), 1e-12) << name;
    EXPECT_GE(nu.mean_cos, -1.0) << name;
    EXPECT_LE(nu.mean_cos, 1.0) << name;
  }
}

TEST(Threads, ZeroFallsBackToEnvironment) {
  ::setenv("GRADALIGN_THREADS", "3", 1);
  EXPECT_EQ(resolve_threads(0), 3u);
  EXPECT_EQ(resolve_threads(2), 2u);
  ::setenv("GRADALIGN_THREADS", "junk", 1);
  EXPECT_GE(resolve_threads(0), 1u);
  ::unsetenv("GRADALIGN_THREADS");
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(50, 4,
                            [](std::size_t i) {
                              if (i == 17) throw InvariantError("boom");
                            }),
               InvariantError);
}
