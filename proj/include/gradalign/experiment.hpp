#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gradalign/attack_config.hpp"
#include "gradalign/dataset.hpp"
#include "gradalign/io.hpp"
#include "gradalign/metrics.hpp"
#include "gradalign/parallel.hpp"
#include "gradalign/query.hpp"
#include "gradalign/transfer.hpp"

namespace gradalign {

// Invalid experiment configuration, detected before any computation.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A result that violates a library invariant (e.g. an x_adv outside its ball).
struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

enum class AttackKind { FGSM, IFGSM, MIFGSM, NIFGSM, VMIFGSM, GAA, ZOO, NES, SimBA, ODS };
enum class LossKind { CE, Margin, GACE, GAM };

inline std::string to_string(AttackKind a) {
  switch (a) {
    case AttackKind::FGSM: return "fgsm";
    case AttackKind::IFGSM: return "ifgsm";
    case AttackKind::MIFGSM: return "mifgsm";
    case AttackKind::NIFGSM: return "nifgsm";
    case AttackKind::VMIFGSM: return "vmifgsm";
    case AttackKind::GAA: return "gaa";
    case AttackKind::ZOO: return "zoo";
    case AttackKind::NES: return "nes";
    case AttackKind::SimBA: return "simba";
    case AttackKind::ODS: return "ods";
  }
  return "?";
}

inline AttackKind attack_from_string(const std::string& s) {
  for (auto a : {AttackKind::FGSM, AttackKind::IFGSM, AttackKind::MIFGSM, AttackKind::NIFGSM, AttackKind::VMIFGSM,
                 AttackKind::GAA, AttackKind::ZOO, AttackKind::NES, AttackKind::SimBA, AttackKind::ODS})
    if (to_string(a) == s) return a;
  throw ConfigError("unknown attack: " + s);
}

inline std::string to_string(LossKind l) {
  switch (l) {
    case LossKind::CE: return "ce";
    case LossKind::Margin: return "margin";
    case LossKind::GACE: return "gace";
    case LossKind::GAM: return "gam";
  }
  return "?";
}

inline LossKind loss_from_string(const std::string& s) {
  for (auto l : {LossKind::CE, LossKind::Margin, LossKind::GACE, LossKind::GAM})
    if (to_string(l) == s) return l;
  throw ConfigError("unknown loss: " + s);
}

inline bool is_transfer(AttackKind a) {
  return a == AttackKind::FGSM || a == AttackKind::IFGSM || a == AttackKind::MIFGSM || a == AttackKind::NIFGSM ||
         a == AttackKind::VMIFGSM;
}

inline bool uses_surrogate(AttackKind a) { return is_transfer(a) || a == AttackKind::GAA || a == AttackKind::ODS; }

// splitmix64 finaliser; derives independent per-example seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct ExperimentConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  std::string dataset;
  std::vector<std::string> surrogates;
  std::string victim;
  AttackKind attack = AttackKind::GAA;
  LossKind loss = LossKind::GACE;
  AttackConfig attack_cfg;
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_examples;
  VarianceTuning variance;
  NesOptions nes;
  ZooOptions zoo;

  [[nodiscard]] std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

}  // namespace detail

// Checks attack/loss/budget combinations. Throws ConfigError.
inline void validate_experiment(const ExperimentConfig& c) {
  const auto& a = c.attack_cfg;
  if (c.dataset.empty() || c.victim.empty()) throw ConfigError("dataset and victim paths are required");
  if (uses_surrogate(c.attack) && c.surrogates.empty())
    throw ConfigError(to_string(c.attack) + " needs at least one surrogate model");
  if (is_transfer(c.attack) || c.attack == AttackKind::ODS)
    if (c.surrogates.size() > 1) throw ConfigError(to_string(c.attack) + " takes a single surrogate");
  if (is_transfer(c.attack)) {
    if (c.loss != LossKind::CE && c.loss != LossKind::Margin)
      throw ConfigError("transfer attacks support loss ce or margin; aligned losses need victim queries (use gaa)");
    if (a.omega) throw ConfigError("Omega applies to query attacks only");
  }
  if (c.attack == AttackKind::GAA) {
    if (c.loss != LossKind::GACE && c.loss != LossKind::GAM) throw ConfigError("gaa supports loss gace or gam");
    if (!a.omega) throw ConfigError("gaa needs Omega");
    if (*a.omega > a.iterations) throw ConfigError("gaa needs T >= Omega");
  } else if (!is_transfer(c.attack) && c.loss != LossKind::CE) {
    throw ConfigError(to_string(c.attack) + " does not take a surrogate loss");
  }
  if ((c.attack == AttackKind::FGSM || c.attack == AttackKind::IFGSM) && a.norm != Norm::Linf)
    throw ConfigError(to_string(c.attack) + " is an Linf attack");
  if (!(a.epsilon > 0.0) || !(a.alpha > 0.0) || a.iterations < 1 || !(a.mu >= 0.0))
    throw ConfigError("need epsilon > 0, alpha > 0, T >= 1, mu >= 0");
  if (a.omega && *a.omega < 0) throw ConfigError("Omega must be >= 0");
  if (a.targeted && a.target) throw ConfigError("targeted campaigns draw a random wrong label per example");
  if (c.variance.samples < 1 || !(c.variance.beta > 0.0)) throw ConfigError("vmifgsm needs M >= 1, beta > 0");
  if (c.nes.samples < 1 || !(c.nes.sigma > 0.0)) throw ConfigError("nes needs samples >= 1, sigma > 0");
  if (!(c.zoo.lambda > 0.0)) throw ConfigError("zoo needs lambda > 0");
}

// Reads and validates an experiment config. `alpha` defaults to epsilon / T.
inline ExperimentConfig parse_experiment_config(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  try {
    c.dataset = j.at("dataset").get<std::string>();
    c.victim = j.at("victim").get<std::string>();
    if (j.contains("surrogates")) c.surrogates = j.at("surrogates").get<std::vector<std::string>>();
    c.attack = attack_from_string(j.at("attack").get<std::string>());
    const std::string default_loss = c.attack == AttackKind::GAA ? "gace" : "ce";
    c.loss = loss_from_string(detail::get_or<std::string>(j, "loss", default_loss));
    auto& a = c.attack_cfg;
    a.norm = norm_from_string(detail::get_or<std::string>(j, "norm", "linf"));
    a.epsilon = j.at("epsilon").get<double>();
    a.iterations = detail::get_or<int>(j, "T", 10);
    a.alpha = detail::get_or<double>(j, "alpha", a.epsilon / static_cast<double>(std::max(a.iterations, 1)));
    a.mu = detail::get_or<double>(j, "mu", 1.0);
    if (j.contains("omega") && !j.at("omega").is_null()) a.omega = j.at("omega").get<int>();
    a.targeted = detail::get_or<bool>(j, "targeted", false);
    c.seed = detail::get_or<std::uint64_t>(j, "seed", 0);
    if (j.contains("max_examples") && !j.at("max_examples").is_null())
      c.max_examples = j.at("max_examples").get<std::size_t>();
    if (j.contains("vmi")) {
      c.variance.samples = detail::get_or<int>(j.at("vmi"), "samples", c.variance.samples);
      c.variance.beta = detail::get_or<double>(j.at("vmi"), "beta", c.variance.beta);
    }
    if (j.contains("nes")) {
      c.nes.samples = detail::get_or<int>(j.at("nes"), "samples", c.nes.samples);
      c.nes.sigma = detail::get_or<double>(j.at("nes"), "sigma", c.nes.sigma);
    }
    if (j.contains("zoo")) c.zoo.lambda = detail::get_or<double>(j.at("zoo"), "lambda", c.zoo.lambda);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate_experiment(c);
  return c;
}

// Paths are echoed exactly as written so results do not depend on where the
// config file lives.
inline json experiment_to_json(const ExperimentConfig& c) {
  const auto& a = c.attack_cfg;
  json j{{"dataset", c.dataset},
         {"surrogates", c.surrogates},
         {"victim", c.victim},
         {"attack", to_string(c.attack)},
         {"loss", to_string(c.loss)},
         {"norm", std::string(to_string(a.norm))},
         {"epsilon", a.epsilon},
         {"alpha", a.alpha},
         {"T", a.iterations},
         {"mu", a.mu},
         {"omega", a.omega ? json(*a.omega) : json(nullptr)},
         {"targeted", a.targeted},
         {"seed", c.seed},
         {"max_examples", c.max_examples ? json(*c.max_examples) : json(nullptr)}};
  if (c.attack == AttackKind::VMIFGSM) j["vmi"] = {{"samples", c.variance.samples}, {"beta", c.variance.beta}};
  if (c.attack == AttackKind::NES) j["nes"] = {{"samples", c.nes.samples}, {"sigma", c.nes.sigma}};
  if (c.attack == AttackKind::ZOO) j["zoo"] = {{"lambda", c.zoo.lambda}};
  return j;
}

struct ExampleRecord {
  std::size_t index = 0;
  std::size_t y = 0;
  std::optional<std::size_t> target;
  AttackOutcome outcome;
  double linf = 0.0;
  double l2 = 0.0;
};

struct CampaignRun {
  CampaignResult result;
  std::vector<ExampleRecord> records;
  std::optional<NuReport> alignment;  // for attacks that record surrogate gradients
  double wall_time = 0.0;
};

// Uniformly random wrong label, seeded per example.
inline std::size_t random_wrong_label(std::size_t y, std::size_t num_classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, num_classes - 2);
  const std::size_t k = pick(rng);
  return k >= y ? k + 1 : k;
}

inline AttackOutcome run_single_attack(const ExperimentConfig& c, std::span<const Model> surrogates,
                                       const Model& victim, const Example& ex, const AttackConfig& cfg,
                                       std::uint64_t example_seed) {
  const SurrogateLoss sloss = c.loss == LossKind::Margin ? SurrogateLoss::Margin : SurrogateLoss::CE;
  if (is_transfer(c.attack)) {
    QueryOracle no_queries(victim, 0);
    const Model& s = surrogates[0];
    IterateTrace trace;
    switch (c.attack) {
      case AttackKind::FGSM: trace = fgsm(s, ex, cfg, sloss); break;
      case AttackKind::IFGSM: trace = ifgsm(s, ex, cfg, sloss); break;
      case AttackKind::MIFGSM: trace = mifgsm(s, ex, cfg, sloss); break;
      case AttackKind::NIFGSM: trace = nifgsm(s, ex, cfg, sloss); break;
      default: {
        VarianceTuning vt = c.variance;
        vt.seed = example_seed;
        trace = vmifgsm(s, ex, cfg, vt, sloss);
      }
    }
    return finish_outcome(no_queries, ex, cfg, std::move(trace));
  }
  QueryOracle oracle(victim, cfg.omega);
  switch (c.attack) {
    case AttackKind::GAA:
      return gaa(surrogates, oracle, ex, cfg, c.loss == LossKind::GAM ? AlignedLoss::GAM : AlignedLoss::GACE);
    case AttackKind::ZOO: {
      ZooOptions o = c.zoo;
      o.seed = example_seed;
      return zoo_attack(oracle, ex, cfg, o);
    }
    case AttackKind::NES: {
      NesOptions o = c.nes;
      o.seed = example_seed;
      return nes_attack(oracle, ex, cfg, o);
    }
    case AttackKind::SimBA: return simba_attack(oracle, ex, cfg, {example_seed, 0});
    case AttackKind::ODS: return ods_attack(surrogates[0], oracle, ex, cfg, {example_seed});
    default: throw ConfigError("unsupported attack");
  }
}

// Attacks every example the victim classifies correctly (first `max_examples`
// of them, in dataset order). Records are ordered by dataset index whatever
// the thread count.
inline CampaignRun run_campaign(const ExperimentConfig& c, const Dataset& data, std::span<const Model> surrogates,
                                const Model& victim, unsigned threads = 1) {
  const auto t0 = std::chrono::steady_clock::now();
  if (victim.input_dim() != data.input_dim || victim.num_classes() != data.num_classes)
    throw ConfigError("victim model does not match the dataset");
  for (const auto& s : surrogates)
    if (s.input_dim() != data.input_dim || s.num_classes() != data.num_classes)
      throw ConfigError("surrogate model does not match the dataset");

  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (c.max_examples && selected.size() >= *c.max_examples) break;
    if (predict(victim, data.examples[i].x) == data.examples[i].y) selected.push_back(i);
  }
  if (selected.empty()) throw ConfigError("victim misclassifies every example; nothing to attack");

  std::vector<ExampleRecord> records(selected.size());
  parallel_for(selected.size(), threads, [&](std::size_t k) {
    const std::size_t idx = selected[k];
    const Example& ex = data.examples[idx];
    AttackConfig cfg = c.attack_cfg;
    const std::uint64_t es = mix_seed(c.seed, idx);
    if (cfg.targeted) cfg.target = random_wrong_label(ex.y, data.num_classes, mix_seed(es, 0x7A));
    ExampleRecord r;
    r.index = idx;
    r.y = ex.y;
    r.target = cfg.target;
    r.outcome = run_single_attack(c, surrogates, victim, ex, cfg, es);
    r.linf = perturbation_norm(ex.x, r.outcome.x_adv, Norm::Linf);
    r.l2 = perturbation_norm(ex.x, r.outcome.x_adv, Norm::L2);
    if (!within_constraints(ex.x, r.outcome.x_adv, cfg.epsilon, cfg.norm))
      throw InvariantError("x_adv for example " + std::to_string(idx) + " violates its constraints");
    if (cfg.omega && r.outcome.queries_used > *cfg.omega)
      throw InvariantError("example " + std::to_string(idx) + " exceeded its query budget");
    records[k] = std::move(r);
  });

  CampaignRun run;
  run.result.cfg = c.attack_cfg;
  run.result.attack_name = to_string(c.attack);
  run.result.loss_name = to_string(c.loss);
  run.result.num_surrogates = uses_surrogate(c.attack) ? surrogates.size() : 0;
  for (const auto& r : records) run.result.outcomes.push_back(r.outcome);

  if (is_transfer(c.attack) || c.attack == AttackKind::GAA) {
    std::vector<IterateTrace> traces;
    std::vector<std::size_t> labels;
    for (const auto& r : records) {
      traces.push_back(r.outcome.trace);
      labels.push_back(r.y);
    }
    run.alignment = nu_metric(traces, victim, labels);
  }
  run.records = std::move(records);
  run.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

inline json campaign_summary_json(const ExperimentConfig& c, const CampaignRun& run) {
  const auto& a = c.attack_cfg;
  return {{"attack", run.result.attack_name},
          {"loss", run.result.loss_name},
          {"num_surrogates", run.result.num_surrogates},
          {"norm", std::string(to_string(a.norm))},
          {"epsilon", a.epsilon},
          {"omega", a.omega ? json(*a.omega) : json(nullptr)},
          {"examples", run.records.size()},
          {"asr", asr(run.result)},
          {"avg_queries", average_queries(run.result.outcomes)},
          {"mean_cos", run.alignment ? json(run.alignment->mean_cos) : json(nullptr)}};
}

// Deterministic results document (no timings).
inline json campaign_to_json(const ExperimentConfig& c, const CampaignRun& run) {
  json records = json::array();
  for (const auto& r : run.records) {
    records.push_back({{"index", r.index},
                       {"y", r.y},
                       {"target", r.target ? json(*r.target) : json(nullptr)},
                       {"success", r.outcome.success},
                       {"queries", r.outcome.queries_used},
                       {"final_prediction", r.outcome.final_prediction},
                       {"linf", r.linf},
                       {"l2", r.l2},
                       {"x_adv", r.outcome.x_adv.values()}});
  }
  return {{"config", experiment_to_json(c)}, {"summary", campaign_summary_json(c, run)}, {"records", std::move(records)}};
}

inline std::string results_csv_header() {
  return "attack,loss,num_surrogates,norm,epsilon,omega,asr,avg_queries,mean_cos,wall_time";
}

inline std::string results_csv_row(const ExperimentConfig& c, const CampaignRun& run) {
  std::ostringstream os;
  os.precision(10);
  const auto& a = c.attack_cfg;
  os << run.result.attack_name << ',' << run.result.loss_name << ',' << run.result.num_surrogates << ','
     << to_string(a.norm) << ',' << a.epsilon << ',' << (a.omega ? std::to_string(*a.omega) : std::string()) << ','
     << asr(run.result) << ',' << average_queries(run.result.outcomes) << ','
     << (run.alignment ? std::to_string(run.alignment->mean_cos) : std::string()) << ',' << run.wall_time;
  return os.str();
}

// Recovers the (avg_queries, asr) point of a stored campaign.
struct StoredCampaign {
  std::string attack;
  std::string loss;
  CurvePoint point;
};

inline StoredCampaign stored_campaign_from_json(const json& j) {
  try {
    const auto& s = j.at("summary");
    return {s.at("attack").get<std::string>(), s.at("loss").get<std::string>(),
            {s.at("avg_queries").get<double>(), s.at("asr").get<double>()}};
  } catch (const json::exception& e) {
    throw FormatError(std::string("campaign results: ") + e.what());
  }
}

inline std::string curve_csv(std::span<const CurvePoint> curve) {
  std::ostringstream os;
  os.precision(10);
  os << "avg_queries,asr\n";
  for (const auto& p : curve) os << p.avg_queries << ',' << p.asr << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Diagnostics: top-n wrong-category rates and gradient alignment.

struct DiagnoseConfig {
  std::filesystem::path base_dir;
  std::string dataset;
  std::string surrogate;
  std::string victim;
  double epsilon = 8.0 / 255.0;            // alignment runs
  double whitebox_epsilon = 16.0 / 255.0;  // top-n protocol
  int iterations = 10;
  double mu = 1.0;
  std::vector<LossKind> losses{LossKind::CE, LossKind::GACE};
  std::optional<std::size_t> max_examples;

  [[nodiscard]] std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
};

inline DiagnoseConfig parse_diagnose_config(const json& j, const std::filesystem::path& base_dir) {
  DiagnoseConfig c;
  c.base_dir = base_dir;
  try {
    c.dataset = j.at("dataset").get<std::string>();
    c.surrogate = j.at("surrogate").get<std::string>();
    c.victim = j.at("victim").get<std::string>();
    c.epsilon = detail::get_or<double>(j, "epsilon", c.epsilon);
    c.whitebox_epsilon = detail::get_or<double>(j, "whitebox_epsilon", c.whitebox_epsilon);
    c.iterations = detail::get_or<int>(j, "T", c.iterations);
    c.mu = detail::get_or<double>(j, "mu", c.mu);
    if (j.contains("losses")) {
      c.losses.clear();
      for (const auto& l : j.at("losses")) c.losses.push_back(loss_from_string(l.get<std::string>()));
    }
    if (j.contains("max_examples") && !j.at("max_examples").is_null())
      c.max_examples = j.at("max_examples").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("diagnose config: ") + e.what());
  }
  if (!(c.epsilon > 0.0) || !(c.whitebox_epsilon > 0.0) || c.iterations < 1 || !(c.mu >= 0.0))
    throw ConfigError("diagnose needs epsilon > 0, whitebox_epsilon > 0, T >= 1, mu >= 0");
  return c;
}

// MIFGSM-style Linf iterates against the surrogate: CE/margin without queries,
// GACE/GAM with a fresh victim query at every iteration.
inline IterateTrace alignment_trace(const Model& surrogate, const Model& victim, const Example& ex, LossKind loss,
                                    double epsilon, int iterations, double mu) {
  AttackConfig cfg = AttackConfig::standard(Norm::Linf, epsilon, iterations, mu);
  switch (loss) {
    case LossKind::CE: return mifgsm(surrogate, ex, cfg, SurrogateLoss::CE);
    case LossKind::Margin: return mifgsm(surrogate, ex, cfg, SurrogateLoss::Margin);
    default: {
      cfg.omega = iterations;
      QueryOracle oracle(victim, iterations);
      return gaa(surrogate, oracle, ex, cfg, loss == LossKind::GAM ? AlignedLoss::GAM : AlignedLoss::GACE).trace;
    }
  }
}

struct DiagnoseReport {
  std::vector<std::size_t> example_indices;
  std::vector<double> misclassification_rate;  // per iteration t = 1..T
  std::vector<TopNAsr> top_n;
  std::vector<std::pair<LossKind, NuReport>> alignment;
};

inline DiagnoseReport run_diagnose(const DiagnoseConfig& c, const Dataset& data, const Model& surrogate,
                                   const Model& victim, unsigned threads = 1) {
  DiagnoseReport rep;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (c.max_examples && rep.example_indices.size() >= *c.max_examples) break;
    if (predict(victim, data.examples[i].x) == data.examples[i].y) rep.example_indices.push_back(i);
  }
  if (rep.example_indices.empty()) throw ConfigError("victim misclassifies every example");
  const std::size_t n = rep.example_indices.size();
  std::vector<std::size_t> labels;
  for (auto i : rep.example_indices) labels.push_back(data.examples[i].y);

  // White-box IFGSM on the victim.
  const AttackConfig wb = AttackConfig::standard(Norm::Linf, c.whitebox_epsilon, c.iterations, 0.0);
  std::vector<IterateTrace> wb_traces(n);
  parallel_for(n, threads, [&](std::size_t k) { wb_traces[k] = ifgsm(victim, data.examples[rep.example_indices[k]], wb); });
  for (int t = 1; t <= c.iterations; ++t) {
    std::size_t wrong = 0;
    for (std::size_t k = 0; k < n; ++k) wrong += predict(victim, wb_traces[k].iterates[t]) != labels[k] ? 1 : 0;
    rep.misclassification_rate.push_back(static_cast<double>(wrong) / static_cast<double>(n));
  }
  std::vector<std::size_t> n_bars;
  for (std::size_t nb : {std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{5}, data.num_classes - 1})
    if (nb < data.num_classes && std::find(n_bars.begin(), n_bars.end(), nb) == n_bars.end()) n_bars.push_back(nb);
  for (auto nb : n_bars) rep.top_n.push_back(top_n_asr_from_traces(victim, wb_traces, labels, nb));

  for (auto loss : c.losses) {
    std::vector<IterateTrace> traces(n);
    parallel_for(n, threads, [&](std::size_t k) {
      traces[k] = alignment_trace(surrogate, victim, data.examples[rep.example_indices[k]], loss, c.epsilon,
                                  c.iterations, c.mu);
    });
    rep.alignment.emplace_back(loss, nu_metric(traces, victim, labels));
  }
  return rep;
}

inline json diagnose_to_json(const DiagnoseConfig& c, const DiagnoseReport& rep) {
  json top = json::array();
  for (const auto& t : rep.top_n)
    top.push_back({{"n_bar", t.n_bar}, {"rates", t.rates}, {"success_conditioned", t.success_conditioned}});
  json align = json::array();
  for (const auto& [loss, nu] : rep.alignment)
    align.push_back({{"attack", "mifgsm"},
                     {"loss", to_string(loss)},
                     {"nu", nu.nu},
                     {"mean_cos", nu.mean_cos},
                     {"excluded", nu.excluded},
                     {"pairs", nu.pairs}});
  return {{"config",
           {{"dataset", c.dataset},
            {"surrogate", c.surrogate},
            {"victim", c.victim},
            {"epsilon", c.epsilon},
            {"whitebox_epsilon", c.whitebox_epsilon},
            {"T", c.iterations},
            {"mu", c.mu}}},
          {"examples", rep.example_indices.size()},
          {"misclassification_rate", rep.misclassification_rate},
          {"top_n", std::move(top)},
          {"alignment", std::move(align)}};
}

}  // namespace gradalign
