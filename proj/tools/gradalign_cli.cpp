// gradalign command-line front end: gen-data, train, attack, curves, diagnose.
//
// Exit codes: 0 success, 1 I/O failure, 2 usage, 3 missing input,
// 4 config validation, 5 internal invariant breach.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gradalign/experiment.hpp"
#include "gradalign/gradalign.hpp"
#include "gradalign/io.hpp"

namespace fs = std::filesystem;
using namespace gradalign;

namespace {

enum ExitCode : int { kOk = 0, kIo = 1, kUsage = 2, kMissing = 3, kConfig = 4, kInvariant = 5 };

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::vector<std::size_t> parse_widths(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      const long v = std::stol(tok, &pos);
      if (pos != tok.size() || v <= 0) throw UsageError("");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError("--widths must be a comma-separated list of positive integers");
    }
  }
  if (out.size() < 2) throw UsageError("--widths needs at least input and output widths");
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

double min_pairwise_mean_distance(const Dataset& data) {
  std::vector<Tensor> means(data.num_classes, Tensor(data.input_dim));
  std::vector<std::size_t> counts(data.num_classes, 0);
  for (const auto& e : data.examples) {
    for (std::size_t i = 0; i < data.input_dim; ++i) means[e.y][i] += e.x[i];
    ++counts[e.y];
  }
  for (std::size_t c = 0; c < data.num_classes; ++c)
    if (counts[c]) means[c] = (1.0 / static_cast<double>(counts[c])) * means[c];
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < data.num_classes; ++a)
    for (std::size_t b = a + 1; b < data.num_classes; ++b) best = std::min(best, norm_l2(means[a] - means[b]));
  return best;
}

struct GenDataArgs {
  std::size_t d = 64, classes = 10, n = 100;
  double sigma = 0.08, mean_low = 0.2, mean_high = 0.8;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::string name = "dataset";
};

int cmd_gen_data(const GenDataArgs& a) {
  if (!(a.sigma > 0.0)) throw UsageError("--sigma must be > 0");
  Dataset data;
  try {
    data = gen_dataset(a.d, a.classes, a.n, a.sigma, a.seed, {a.mean_low, a.mean_high});
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  ensure_dir(a.out);
  const fs::path path = fs::path(a.out) / (a.name + ".json");
  save_dataset(path, data);
  std::cout << "wrote " << path.string() << ": " << data.size() << " examples, d=" << data.input_dim
            << ", C=" << data.num_classes << ", min pairwise class-mean distance "
            << min_pairwise_mean_distance(data) << "\n";
  return kOk;
}

struct TrainArgs {
  std::string data;
  std::string widths = "64,128,128,10";
  int epochs = 30;
  double lr = 0.02;
  std::size_t batch = 32;
  std::uint64_t seed = 1;
  double holdout = 0.1;
  std::string out = ".";
  std::string name = "model";
};

int cmd_train(const TrainArgs& a) {
  const auto widths = parse_widths(a.widths);
  if (a.epochs < 1 || !(a.lr > 0.0) || a.batch == 0) throw UsageError("need --epochs >= 1, --lr > 0, --batch >= 1");
  const Dataset data = load_dataset(a.data);
  if (widths.front() != data.input_dim || widths.back() != data.num_classes)
    throw ConfigError("--widths must start at d=" + std::to_string(data.input_dim) + " and end at C=" +
                      std::to_string(data.num_classes));
  const auto [train_set, held_out] = split_dataset(data, a.holdout, a.seed);
  Model model = train_sgd(make_model(widths, a.seed), train_set, a.epochs, a.lr, a.batch, a.seed + 1);
  ensure_dir(a.out);
  const fs::path path = fs::path(a.out) / (a.name + ".json");
  save_model(path, model);
  std::cout << "wrote " << path.string() << ": train accuracy " << accuracy(model, train_set)
            << ", held-out accuracy " << accuracy(model, held_out) << " (" << held_out.size() << " examples)\n";
  return kOk;
}

struct AttackArgs {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

int cmd_attack(const AttackArgs& a) {
  const fs::path cfg_path(a.config);
  ExperimentConfig cfg = parse_experiment_config(read_json_file(cfg_path), cfg_path.parent_path());
  if (a.seed) cfg.seed = *a.seed;
  const Dataset data = load_dataset(cfg.resolve(cfg.dataset));
  const Model victim = load_model(cfg.resolve(cfg.victim));
  std::vector<Model> surrogates;
  for (const auto& s : cfg.surrogates) surrogates.push_back(load_model(cfg.resolve(s)));

  const CampaignRun run = run_campaign(cfg, data, surrogates, victim, resolve_threads(a.threads));
  ensure_dir(a.out);
  write_json_file(fs::path(a.out) / "results.json", campaign_to_json(cfg, run));
  const std::string row = results_csv_row(cfg, run);
  write_text_file(fs::path(a.out) / "results.csv", results_csv_header() + "\n" + row + "\n");
  std::cout << results_csv_header() << "\n" << row << "\n";
  return kOk;
}

struct CurvesArgs {
  std::vector<std::string> campaigns;
  std::string out = ".";
};

int cmd_curves(const CurvesArgs& a) {
  std::vector<std::string> missing;
  for (const auto& p : a.campaigns)
    if (!fs::exists(p)) missing.push_back(p);
  if (!missing.empty()) {
    std::string msg = "missing campaign files:";
    for (const auto& m : missing) msg += " " + m;
    throw MissingInputError(msg);
  }
  std::map<std::pair<std::string, std::string>, std::vector<CurvePoint>> groups;
  for (const auto& p : a.campaigns) {
    const auto c = stored_campaign_from_json(read_json_file(p));
    groups[{c.attack, c.loss}].push_back(c.point);
  }
  ensure_dir(a.out);
  for (const auto& [key, points] : groups) {
    if (points.size() < 2)
      throw ConfigError("curve for " + key.first + "/" + key.second + " needs at least two campaigns");
    const auto curve = avgq_asr_curve(std::span<const CurvePoint>(points));
    const fs::path path = fs::path(a.out) / (key.first + "_" + key.second + ".csv");
    write_text_file(path, curve_csv(curve));
    std::cout << "wrote " << path.string() << " (" << curve.size() << " points)\n";
  }
  return kOk;
}

struct DiagnoseArgs {
  std::string config;
  std::string out = ".";
  int threads = 0;
};

int cmd_diagnose(const DiagnoseArgs& a) {
  const fs::path cfg_path(a.config);
  const DiagnoseConfig cfg = parse_diagnose_config(read_json_file(cfg_path), cfg_path.parent_path());
  const Dataset data = load_dataset(cfg.resolve(cfg.dataset));
  const Model surrogate = load_model(cfg.resolve(cfg.surrogate));
  const Model victim = load_model(cfg.resolve(cfg.victim));
  const auto rep = run_diagnose(cfg, data, surrogate, victim, resolve_threads(a.threads));
  ensure_dir(a.out);
  write_json_file(fs::path(a.out) / "report.json", diagnose_to_json(cfg, rep));
  for (const auto& t : rep.top_n) std::cout << "top-" << t.n_bar << " ASR at t=T: " << t.rates.back() << "\n";
  for (const auto& [loss, nu] : rep.alignment)
    std::cout << "mifgsm/" << to_string(loss) << ": nu " << nu.nu << ", mean_cos " << nu.mean_cos << ", excluded "
              << nu.excluded << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient aligned adversarial attack toolkit"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic Gaussian-blob dataset");
  gen_cmd->add_option("--d", gen.d, "input dimension")->capture_default_str();
  gen_cmd->add_option("--classes", gen.classes, "number of classes C")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "examples per class")->capture_default_str();
  gen_cmd->add_option("--sigma", gen.sigma, "noise standard deviation")->capture_default_str();
  gen_cmd->add_option("--mean-low", gen.mean_low, "lower bound of class means")->capture_default_str();
  gen_cmd->add_option("--mean-high", gen.mean_high, "upper bound of class means")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output directory")->capture_default_str();
  gen_cmd->add_option("--name", gen.name, "file stem")->capture_default_str();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train a dense relu classifier with SGD");
  train_cmd->add_option("--data", train.data, "dataset JSON")->required();
  train_cmd->add_option("--widths", train.widths, "layer widths, input to classes")->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs)->capture_default_str();
  train_cmd->add_option("--lr", train.lr)->capture_default_str();
  train_cmd->add_option("--batch", train.batch)->capture_default_str();
  train_cmd->add_option("--seed", train.seed)->capture_default_str();
  train_cmd->add_option("--holdout", train.holdout, "held-out fraction")->capture_default_str();
  train_cmd->add_option("--out", train.out, "output directory")->capture_default_str();
  train_cmd->add_option("--name", train.name, "file stem")->capture_default_str();

  AttackArgs attack;
  auto* attack_cmd = app.add_subcommand("attack", "run an attack campaign from a JSON config");
  attack_cmd->add_option("--config", attack.config, "experiment config JSON")->required();
  attack_cmd->add_option("--out", attack.out, "output directory")->capture_default_str();
  attack_cmd->add_option("--seed", attack.seed, "override the config seed");
  attack_cmd->add_option("--threads", attack.threads, "worker threads (0 = auto)")->capture_default_str();

  CurvesArgs curves;
  auto* curves_cmd = app.add_subcommand("curves", "Avg.Q-ASR curves from campaign results");
  curves_cmd->add_option("--campaigns", curves.campaigns, "results.json files")->required();
  curves_cmd->add_option("--out", curves.out, "output directory")->capture_default_str();

  DiagnoseArgs diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "top-n wrong-category rates and gradient alignment");
  diag_cmd->add_option("--config", diag.config, "diagnose config JSON")->required();
  diag_cmd->add_option("--out", diag.out, "output directory")->capture_default_str();
  diag_cmd->add_option("--threads", diag.threads, "worker threads (0 = auto)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen);
    if (*train_cmd) return cmd_train(train);
    if (*attack_cmd) return cmd_attack(attack);
    if (*curves_cmd) return cmd_curves(curves);
    if (*diag_cmd) return cmd_diagnose(diag);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << "\n";
    return kMissing;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kConfig;
  } catch (const FormatError& e) {
    std::cerr << "invalid input file: " << e.what() << "\n";
    return kConfig;
  } catch (const InvariantError& e) {
    std::cerr << "internal invariant breach: " << e.what() << "\n";
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInvariant;
  }
  return kUsage;
}
