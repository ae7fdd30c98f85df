//
// Copyright 2026 The dpmargin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Command-line harness: dataset generation, private training, evaluation,
// privacy reporting and the margin-removal experiment.
//
// Exit codes: 0 success, 1 runtime failure, 2 argument or precondition failure.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dpmargin/dpmargin.hpp"
#include "dpmargin/model_io.hpp"

namespace {

using namespace dpmargin;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
// Above this size synth reports the planted gamma instead of running the
// margin oracle on the clean subset.
constexpr std::size_t kSynthOracleCap = 5000;

struct UsageError : Error {
  explicit UsageError(const std::string& message) : Error("usage_error", message) {}
};

std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t chosen =
      (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
  std::cerr << "seed=" << chosen << " (drawn from system entropy)\n";
  return chosen;
}

FileFormat ParseFormat(const std::string& name) {
  const auto format = FormatFromName(name);
  if (!format) throw UsageError("unknown format '" + name + "'");
  return *format;
}

std::optional<std::string> Timestamp() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return std::string(buf);
}

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::size_t n = 0;
  long d = 0;
  double gamma = 0.0;
  std::size_t outliers = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int RunSynth(const SynthArgs& args) {
  const std::uint64_t seed = ResolveSeed(args.seed);
  const SyntheticData synth = SynthMarginDataset(
      args.n, static_cast<Eigen::Index>(args.d), args.gamma, args.outliers, seed);
  auto out = OpenOutput(args.out);
  WriteCsv(synth.data, out);
  out.close();
  std::cout << "rows=" << synth.data.size() << '\n';
  std::cout << "planted_gamma=" << FormatDouble(args.gamma) << '\n';
  if (args.n <= kSynthOracleCap) {
    const auto clean = Complement(synth.data.size(), synth.outliers);
    const double margin = GeometricMarginOracle(synth.data.Subset(clean));
    std::cout << "clean_margin=" << FormatDouble(margin) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string dataset;
  std::string format = "csv";
  double epsilon = 1.0;
  double delta = 1e-5;
  std::string tuner = "iterate";
  std::string score = "empirical";
  std::string mode;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string out = "model.json";
  std::optional<double> jl_beta;
};

// Applies a RunConfig document to fields whose flags were not given.
void ApplyRunConfig(const std::string& path, TrainArgs& args,
                    const CLI::App& app,
                    std::optional<SynthArgs>& synth) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  Json doc;
  try {
    in >> doc;
  } catch (const Json::exception& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  static const std::vector<std::string> kKeys = {
      "dataset", "format", "epsilon", "delta", "tuner", "score", "mode",
      "seed", "threads", "out", "jl_failure_beta", "synth"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  auto given = [&](const std::string& flag) { return app.count(flag) > 0; };
  try {
    if (doc.contains("dataset") && !given("--dataset"))
      args.dataset = doc["dataset"].get<std::string>();
    if (doc.contains("format") && !given("--format"))
      args.format = doc["format"].get<std::string>();
    if (doc.contains("epsilon") && !given("--epsilon"))
      args.epsilon = doc["epsilon"].get<double>();
    if (doc.contains("delta") && !given("--delta"))
      args.delta = doc["delta"].get<double>();
    if (doc.contains("tuner") && !given("--tuner"))
      args.tuner = doc["tuner"].get<std::string>();
    if (doc.contains("score") && !given("--score"))
      args.score = doc["score"].get<std::string>();
    if (doc.contains("mode") && !given("--mode"))
      args.mode = doc["mode"].get<std::string>();
    if (doc.contains("seed") && !given("--seed"))
      args.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("threads") && !given("--threads"))
      args.threads = doc["threads"].get<unsigned>();
    if (doc.contains("out") && !given("--out"))
      args.out = doc["out"].get<std::string>();
    if (doc.contains("jl_failure_beta") && !given("--jl-beta"))
      args.jl_beta = doc["jl_failure_beta"].get<double>();
    if (doc.contains("synth")) {
      const auto& s = doc["synth"];
      if (!s.is_object()) throw UsageError("config 'synth' must be an object");
      for (const auto& [key, value] : s.items()) {
        if (key != "n" && key != "d" && key != "gamma" && key != "outliers" &&
            key != "seed") {
          throw UsageError("unknown config key 'synth." + key + "'");
        }
      }
      SynthArgs sa;
      sa.n = s.at("n").get<std::size_t>();
      sa.d = s.at("d").get<long>();
      sa.gamma = s.at("gamma").get<double>();
      sa.outliers = s.value("outliers", std::size_t{0});
      sa.seed = s.value("seed", std::uint64_t{0});
      synth = sa;
    }
  } catch (const Json::exception& e) {
    throw UsageError(std::string("config has a wrongly typed value: ") + e.what());
  }
}

MasterConfig MakeMasterConfig(const TrainArgs& args, std::uint64_t seed) {
  MasterConfig cfg;
  cfg.epsilon = args.epsilon;
  cfg.delta = args.delta;
  if (args.tuner == "iterate") {
    cfg.tuner = TunerKind::kIterate;
  } else if (args.tuner == "priv-tune") {
    cfg.tuner = TunerKind::kPrivTune;
  } else {
    throw UsageError("unknown tuner '" + args.tuner + "'");
  }
  if (args.score == "empirical") {
    cfg.score = ScoreKind::kEmpiricalZeroOne;
  } else if (args.score == "penalized") {
    cfg.score = ScoreKind::kPenalizedPopulation;
  } else {
    throw UsageError("unknown score '" + args.score + "'");
  }
  if (args.mode == "averaged") {
    cfg.output_mode = OutputMode::kAveraged;
  } else if (args.mode == "last") {
    cfg.output_mode = OutputMode::kLastIterate;
  } else if (!args.mode.empty()) {
    throw UsageError("unknown mode '" + args.mode + "'");
  }
  cfg.jl_failure_beta = args.jl_beta;
  cfg.seed = seed;
  cfg.threads = std::max(1u, args.threads);
  if (const char* cap = std::getenv("DPMARGIN_T_CAP")) {
    char* end = nullptr;
    const unsigned long long value = std::strtoull(cap, &end, 10);
    if (end == cap || *end != '\0' || value == 0) {
      throw UsageError("DPMARGIN_T_CAP must be a positive integer");
    }
    cfg.ngd.iteration_cap = value;
  }
  return cfg;
}

int RunTrain(TrainArgs args, const CLI::App& app) {
  std::optional<SynthArgs> synth;
  if (!args.config.empty()) ApplyRunConfig(args.config, args, app, synth);
  const std::uint64_t seed = ResolveSeed(args.seed);
  const MasterConfig cfg = MakeMasterConfig(args, seed);

  std::optional<Dataset> data;
  if (!args.dataset.empty()) {
    data = LoadDataset(args.dataset, ParseFormat(args.format));
  } else if (synth) {
    data = SynthMarginDataset(synth->n, static_cast<Eigen::Index>(synth->d),
                              synth->gamma, synth->outliers,
                              synth->seed.value_or(0))
               .data;
  } else {
    throw UsageError("train needs --dataset or a config with 'synth'");
  }

  const MasterResult result = DpAdaptiveMargin(*data, cfg);
  auto out = OpenOutput(args.out);
  out << ModelToJson(result, cfg, Timestamp()).dump(2) << '\n';
  out.close();

  const double risk = EmpiricalRisk(result.model.weights, *data,
                                    LossSpec::ZeroOne(), RiskMode::kAveraged);
  std::cout << "zero_one_risk=" << FormatDouble(risk) << '\n';
  std::cout << "gamma_out=" << FormatDouble(result.gamma_out) << '\n';
  std::cout << "k=" << result.k << '\n';
  std::cout << "privacy: " << result.ledger.statement << " via "
            << ToString(cfg.tuner) << " tuner (grid " << result.ledger.grid_size
            << ", mu " << FormatDouble(result.ledger.mu) << ")\n";
  return 0;
}

// ---------------------------------------------------------------- eval

int RunEval(const std::string& model_path, const std::string& dataset,
            const std::string& format) {
  const StoredModel model = LoadModel(model_path);
  const Dataset data = LoadDataset(dataset, ParseFormat(format));
  if (data.dim() != model.d) {
    throw DimensionError("model has dimension " + std::to_string(model.d) +
                         ", dataset has " + std::to_string(data.dim()));
  }
  const double zero_one = EmpiricalRisk(model.weights, data, LossSpec::ZeroOne(),
                                        RiskMode::kAveraged);
  const double hinge = EmpiricalRisk(model.weights, data,
                                     LossSpec::Hinge(model.hinge_c),
                                     RiskMode::kAveraged);
  std::cout << "zero_one_risk=" << FormatDouble(zero_one) << '\n';
  std::cout << "hinge_risk=" << FormatDouble(hinge) << '\n';
  std::cout << "hinge_c=" << FormatDouble(model.hinge_c) << '\n';
  return 0;
}

// ------------------------------------------------------- privacy-report

struct ReportArgs {
  double epsilon = 1.0;
  double delta = 1e-5;
  std::optional<std::size_t> grid;
  std::optional<std::size_t> n;
  std::string tuner = "iterate";
  bool json = false;
};

int RunPrivacyReport(const ReportArgs& args) {
  TunerKind tuner;
  if (args.tuner == "iterate") {
    tuner = TunerKind::kIterate;
  } else if (args.tuner == "priv-tune") {
    tuner = TunerKind::kPrivTune;
  } else {
    throw UsageError("unknown tuner '" + args.tuner + "'");
  }
  std::size_t grid = 0;
  if (args.grid) {
    grid = *args.grid;
  } else if (args.n) {
    grid = MarginGrid(*args.n, 1.0).size();
  } else {
    throw UsageError("privacy-report needs --grid or --n");
  }
  if (tuner == TunerKind::kPrivTune && !args.n) {
    throw UsageError("priv-tune accounting needs --n");
  }
  const PrivacyLedger ledger =
      BuildLedger(args.n.value_or(2), grid, args.epsilon, args.delta, tuner);
  if (args.json) {
    std::cout << LedgerToJson(ledger).dump(2) << '\n';
  } else {
    std::cout << "tuner=" << ToString(tuner) << '\n';
    std::cout << "grid_size=" << grid << '\n';
    std::cout << "mu=" << FormatDouble(ledger.mu) << '\n';
    std::cout << "base_mu=" << FormatDouble(ledger.base_mu) << '\n';
    std::cout << "score_sigma=" << FormatDouble(ledger.score_sigma) << '\n';
    if (ledger.r) std::cout << "r=" << FormatDouble(*ledger.r) << '\n';
    std::cout << "composed_mu=" << FormatDouble(ledger.composed_mu) << '\n';
    std::cout << "round_trip=" << (ledger.round_trip_ok ? "OK" : "MISMATCH")
              << '\n';
    std::cout << "guarantee=" << ledger.statement << '\n';
  }
  return 0;
}

// --------------------------------------------------------- margin-curve

int RunMarginCurve(const std::string& dataset, const std::string& format,
                   std::size_t max_removals, double svm_c,
                   const std::string& out_path) {
  const Dataset data = LoadDataset(dataset, ParseFormat(format));
  const auto curve = MarginRemovalCurve(data, max_removals, svm_c);
  std::ostringstream csv;
  csv << "removed_count,normalized_margin\n";
  for (const auto& p : curve) {
    csv << p.removed_count << ',' << FormatDouble(p.normalized_margin) << '\n';
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << csv.str();
  } else {
    auto out = OpenOutput(out_path);
    out << csv.str();
  }
  return 0;
}

int ExitCodeFor(const Error& e) {
  const std::string& kind = e.kind();
  if (kind == "usage_error" || kind == "domain_error" ||
      kind == "precondition_error") {
    return kExitUsage;
  }
  return kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpmargin: differentially private large-margin linear classification"};
  app.require_subcommand(1);
  bool json_errors = false;
  app.add_flag("--json-errors", json_errors,
               "Report failures as a JSON document on stderr");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a planted-margin dataset");
  synth_cmd->add_option("--n", synth.n, "Number of points")->required()
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
  synth_cmd->add_option("--d", synth.d, "Dimension")->required()
      ->check(CLI::Range(2L, 1L << 30));
  synth_cmd->add_option("--gamma", synth.gamma, "Planted margin in (0, 1]")
      ->required()->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--outliers", synth.outliers, "Label-flipped points");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth.out, "Output CSV path")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train with the adaptive-margin mechanism");
  train_cmd->add_option("--config", train.config, "RunConfig JSON");
  train_cmd->add_option("--dataset", train.dataset, "Dataset path");
  train_cmd->add_option("--format", train.format, "csv or libsvm")
      ->check(CLI::IsMember({"csv", "libsvm"}));
  train_cmd->add_option("--epsilon", train.epsilon, "Privacy epsilon");
  train_cmd->add_option("--delta", train.delta, "Privacy delta");
  train_cmd->add_option("--tuner", train.tuner, "iterate or priv-tune")
      ->check(CLI::IsMember({"iterate", "priv-tune"}));
  train_cmd->add_option("--score", train.score, "empirical or penalized")
      ->check(CLI::IsMember({"empirical", "penalized"}));
  train_cmd->add_option("--mode", train.mode, "averaged or last")
      ->check(CLI::IsMember({"averaged", "last"}));
  train_cmd->add_option("--seed", train.seed, "Random seed");
  train_cmd->add_option("--threads", train.threads, "Worker threads")
      ->check(CLI::Range(1u, 1024u));
  train_cmd->add_option("--jl-beta", train.jl_beta, "JL failure probability");
  train_cmd->add_option("--out", train.out, "Model JSON path");

  std::string model_path, eval_dataset, eval_format = "csv";
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained model");
  eval_cmd->add_option("--model", model_path, "Model JSON")->required();
  eval_cmd->add_option("--dataset", eval_dataset, "Dataset path")->required();
  eval_cmd->add_option("--format", eval_format, "csv or libsvm")
      ->check(CLI::IsMember({"csv", "libsvm"}));

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("privacy-report", "Print the privacy budget ledger");
  report_cmd->add_option("--epsilon", report.epsilon, "Privacy epsilon")->required();
  report_cmd->add_option("--delta", report.delta, "Privacy delta")->required();
  report_cmd->add_option("--grid", report.grid, "Candidate grid size");
  report_cmd->add_option("--n", report.n, "Dataset size");
  report_cmd->add_option("--tuner", report.tuner, "iterate or priv-tune")
      ->check(CLI::IsMember({"iterate", "priv-tune"}));
  report_cmd->add_flag("--json", report.json, "Emit JSON");

  std::string curve_dataset, curve_format = "csv", curve_out;
  std::size_t max_removals = 20;
  double svm_c = 1.0;
  auto* curve_cmd = app.add_subcommand("margin-curve", "Margin-removal curve");
  curve_cmd->add_option("--dataset", curve_dataset, "Dataset path")->required();
  curve_cmd->add_option("--format", curve_format, "csv or libsvm")
      ->check(CLI::IsMember({"csv", "libsvm"}));
  curve_cmd->add_option("--max-removals", max_removals, "Points to remove");
  curve_cmd->add_option("--svm-c", svm_c, "Soft-margin SVM cost")
      ->check(CLI::PositiveNumber);
  curve_cmd->add_option("--out", curve_out, "Output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (synth_cmd->parsed() && !(synth.gamma > 0.0)) {
    std::cerr << "--gamma: must lie in (0, 1]\n";
    return kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) return RunSynth(synth);
    if (train_cmd->parsed()) return RunTrain(train, *train_cmd);
    if (eval_cmd->parsed()) return RunEval(model_path, eval_dataset, eval_format);
    if (report_cmd->parsed()) return RunPrivacyReport(report);
    if (curve_cmd->parsed()) {
      return RunMarginCurve(curve_dataset, curve_format, max_removals, svm_c,
                            curve_out);
    }
  } catch (const Error& e) {
    if (json_errors) {
      Json doc = {{"error", {{"kind", e.kind()}, {"message", e.what()}}}};
      std::cerr << doc.dump() << '\n';
    } else {
      std::cerr << "error: " << e.what() << '\n';
    }
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    if (json_errors) {
      Json doc = {{"error", {{"kind", "internal_error"}, {"message", e.what()}}}};
      std::cerr << doc.dump() << '\n';
    } else {
      std::cerr << "error: " << e.what() << '\n';
    }
    return kExitRuntime;
  }
  return kExitRuntime;
}
