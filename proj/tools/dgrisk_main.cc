// Copyright 2026 The dgrisk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Every subcommand only parses arguments, calls the
// library and serializes the result.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dgrisk/accounting.h"
#include "dgrisk/discrete_gaussian.h"
#include "dgrisk/flat_risk.h"
#include "dgrisk/golden.h"
#include "dgrisk/histogram.h"
#include "dgrisk/parallel.h"
#include "dgrisk/random.h"
#include "dgrisk/result_set.h"
#include "dgrisk/runner.h"
#include "dgrisk/scenario_config.h"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

const char* const kReproduceTargets[] = {
    "table4", "table5", "table7", "table8", "fig1",  "fig2",  "fig3",
    "fig4",   "fig5",   "fig6",   "figS1",  "figS4", "figS5", "figS6"};

int Fail(int code, const absl::Status& status) {
  std::cerr << "dgrisk: " << status.message() << "\n";
  return code;
}

// Bad input data is a validation problem; anything else is a runtime one.
int ExitCodeFor(const absl::Status& status) {
  return absl::IsInvalidArgument(status) || absl::IsOutOfRange(status)
             ? kExitValidation
             : kExitRuntime;
}

fs::path DataDir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("DGRISK_DATA_DIR"); env && *env) {
    return env;
  }
  return DGRISK_DEFAULT_DATA_DIR;
}

int WriteResults(const dgrisk::ResultSet& results, const std::string& format,
                 const std::string& out) {
  const std::string text =
      format == "json" ? dgrisk::ToJson(results) : dgrisk::ToCsv(results);
  if (out.empty()) {
    std::cout << text;
    return kExitOk;
  }
  std::ofstream file(out);
  if (!file || !(file << text)) {
    return Fail(kExitRuntime,
                absl::UnavailableError(absl::StrCat("cannot write '", out, "'")));
  }
  return kExitOk;
}

struct SampleArgs {
  double rho = 0;
  std::int64_t center = 0;
  std::int64_t n = 1;
  std::uint64_t seed = 1;
};

int RunSample(const SampleArgs& args) {
  auto dg = dgrisk::DiscreteGaussian::FromRho(args.center, args.rho);
  if (!dg.ok()) return Fail(kExitValidation, dg.status());
  dgrisk::BitGen gen = dgrisk::MakeBitGen(args.seed, 0);
  for (std::int64_t i = 0; i < args.n; ++i) std::cout << dg->Sample(gen) << "\n";
  return kExitOk;
}

int RunConvert(double rho, double delta) {
  auto eps = dgrisk::ZcdpToApproxDp(rho, delta);
  if (!eps.ok()) return Fail(kExitValidation, eps.status());
  std::cout << absl::StrFormat("%.4f\n", *eps);
  return kExitOk;
}

struct RiskArgs {
  std::string kind;
  std::string config;
  std::string out;
  std::string format = "csv";
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  int workers = 0;
};

int RunRisk(const RiskArgs& args) {
  const std::string kind = args.kind == "compose" ? "composition" : args.kind;
  auto config = dgrisk::LoadScenario(args.config);
  if (!config.ok()) return Fail(kExitRuntime, config.status());
  if (dgrisk::ScenarioKindName(config->kind) != kind) {
    return Fail(kExitValidation,
                absl::InvalidArgumentError(absl::StrCat(
                    "config '", args.config, "' has kind '",
                    std::string(dgrisk::ScenarioKindName(config->kind)),
                    "', expected '", kind, "'")));
  }
  dgrisk::RunOptions options;
  options.workers = args.workers > 0 ? args.workers : dgrisk::DefaultWorkers();
  options.seed = args.seed;
  options.n_trials = args.trials;
  options.base_dir = fs::path(args.config).parent_path();
  if (!args.checkpoint.empty()) options.checkpoint = args.checkpoint;
  if (isatty(STDERR_FILENO)) options.progress = [](std::int64_t done,
                                                   std::int64_t total) {
    if (total > 1) std::cerr << "\rpoint " << done << "/" << total << std::flush;
    if (total > 1 && done == total) std::cerr << "\n";
  };
  auto results = dgrisk::Run(*config, options);
  if (!results.ok()) return Fail(kExitRuntime, results.status());
  return WriteResults(*results, args.format, args.out);
}

struct ScanArgs {
  std::string histogram;
  std::vector<std::string> siblings;
  double prior_p = 0;
};

int RunScan(const ScanArgs& args) {
  const dgrisk::Codebook& codebook = dgrisk::Census1940Codebook();
  auto table = dgrisk::ReadHistogramCsv(args.histogram, codebook);
  if (!table.ok()) return Fail(kExitRuntime, table.status());
  std::vector<dgrisk::HistogramTable> siblings;
  for (const std::string& path : args.siblings) {
    auto sibling = dgrisk::ReadHistogramCsv(path, codebook);
    if (!sibling.ok()) return Fail(kExitRuntime, sibling.status());
    siblings.push_back(*std::move(sibling));
  }
  auto candidates = dgrisk::TargetScan(*table, siblings, codebook,
                                       {.prior_p = args.prior_p});
  if (!candidates.ok()) return Fail(ExitCodeFor(candidates.status()),
                                    candidates.status());
  dgrisk::ResultSet out;
  out.metadata.version = dgrisk::ToolVersion();
  out.metadata.timestamp = dgrisk::UtcTimestamp();
  out.metadata.kind = "scan";
  out.metadata.name = table->district;
  out.columns = {"label", "unique_in_table", "unique_with_siblings",
                 "prior_p", "marginal_posterior", "marginal_risk",
                 "correct_decision_prob"};
  for (const dgrisk::TargetCandidate& c : *candidates) {
    std::vector<dgrisk::Cell> row;
    row.push_back(c.row.Label());
    row.push_back(std::int64_t{c.unique_at_level[0] ? 1 : 0});
    if (c.unique_at_level.size() > 1) {
      row.push_back(std::int64_t{c.unique_at_level[1] ? 1 : 0});
    } else {
      row.push_back(dgrisk::Cell{});
    }
    row.push_back(c.flat.prior_p);
    row.push_back(dgrisk::MarginalPosterior(c.flat));
    row.push_back(dgrisk::MarginalRisk(c.flat));
    row.push_back(dgrisk::CorrectDecisionProb(c.flat));
    out.rows.push_back(std::move(row));
  }
  return WriteResults(out, "csv", "");
}

struct ReproduceArgs {
  std::string target;
  bool fast = false;
  bool full = false;
  std::string out_dir;
  std::string data_dir;
  std::optional<std::uint64_t> seed;
  int workers = 0;
};

int RunReproduce(const ReproduceArgs& args) {
  const fs::path data = DataDir(args.data_dir);
  const fs::path config_path = data / "configs" / (args.target + ".json");
  auto config = dgrisk::LoadScenario(config_path);
  if (!config.ok()) return Fail(kExitRuntime, config.status());
  auto golden = dgrisk::LoadGolden(data / "golden" / (args.target + ".csv"));
  if (!golden.ok()) return Fail(kExitRuntime, golden.status());

  dgrisk::RunOptions options;
  options.workers = args.workers > 0 ? args.workers : dgrisk::DefaultWorkers();
  options.seed = args.seed;
  options.fast = args.fast;
  options.base_dir = config_path.parent_path();
  if (args.full && config->trials.n_trials.has_value()) {
    options.n_trials = *config->trials.n_trials * 10;
  }
  auto results = dgrisk::Run(*config, options);
  if (!results.ok()) return Fail(kExitRuntime, results.status());

  // Fewer trials: every Monte Carlo cell also admits 3 standard errors.
  dgrisk::GoldenOptions compare;
  compare.mc_min_se_mult = args.fast ? 3.0 : 0.0;
  const std::vector<dgrisk::GoldenOutcome> outcomes =
      dgrisk::CompareGolden(*results, *golden, compare);
  std::cerr << args.target << (args.fast ? " (fast)" : "") << "\n"
            << dgrisk::FormatGoldenReport(outcomes);

  int code = kExitOk;
  if (args.out_dir.empty()) {
    code = WriteResults(*results, "csv", "");
  } else {
    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    code = WriteResults(*results, "csv",
                        (fs::path(args.out_dir) / (args.target + ".csv")).string());
  }
  if (code != kExitOk) return code;
  for (const dgrisk::GoldenOutcome& o : outcomes) {
    if (!o.pass) return kExitValidation;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian disclosure risk for discrete Gaussian count releases"};
  app.set_version_flag("--version", dgrisk::ToolVersion());
  app.require_subcommand(1);

  SampleArgs sample;
  CLI::App* sample_cmd = app.add_subcommand("sample", "Draw discrete Gaussian noise");
  sample_cmd->add_option("--rho", sample.rho, "zCDP parameter")->required();
  sample_cmd->add_option("--center", sample.center, "Location");
  sample_cmd->add_option("--n", sample.n, "Number of draws")
      ->check(CLI::NonNegativeNumber);
  sample_cmd->add_option("--seed", sample.seed, "Generator seed");

  double convert_rho = 0, convert_delta = 0;
  CLI::App* convert_cmd =
      app.add_subcommand("convert", "Convert rho-zCDP to (epsilon, delta)-DP");
  convert_cmd->add_option("--rho", convert_rho)->required();
  convert_cmd->add_option("--delta", convert_delta)->required();

  RiskArgs risk;
  CLI::App* risk_cmd = app.add_subcommand("risk", "Evaluate a scenario config");
  risk_cmd->add_option("kind", risk.kind, "Scenario kind")
      ->required()
      ->check(CLI::IsMember(
          {"flat", "hier", "multilevel", "compose", "postprocess"}));
  risk_cmd->add_option("--config", risk.config, "Scenario file")->required();
  risk_cmd->add_option("--out", risk.out, "Output file (default stdout)");
  risk_cmd->add_option("--seed", risk.seed, "Override the config seed");
  risk_cmd->add_option("--trials", risk.trials, "Override Monte Carlo trials")
      ->check(CLI::PositiveNumber);
  risk_cmd->add_option("--format", risk.format)
      ->check(CLI::IsMember({"csv", "json"}));
  risk_cmd->add_option("--workers", risk.workers, "Worker threads")
      ->check(CLI::NonNegativeNumber);
  risk_cmd->add_option("--checkpoint", risk.checkpoint,
                       "Resume file for finished sweep points");

  ScanArgs scan;
  CLI::App* scan_cmd = app.add_subcommand("scan", "Flag vulnerable targets");
  scan_cmd->add_option("--histogram", scan.histogram)->required();
  scan_cmd->add_option("--sibling", scan.siblings,
                       "Other tables of the same second-level unit");
  scan_cmd->add_option("--prior-p", scan.prior_p,
                       "Prior for a flagged target (default 1/codebook size)")
      ->check(CLI::Range(0.0, 1.0));

  ReproduceArgs reproduce;
  CLI::App* reproduce_cmd =
      app.add_subcommand("reproduce", "Regenerate a bundled experiment");
  std::vector<std::string> targets(std::begin(kReproduceTargets),
                                   std::end(kReproduceTargets));
  reproduce_cmd->add_option("target", reproduce.target)
      ->required()
      ->check(CLI::IsMember(targets));
  CLI::Option* fast = reproduce_cmd->add_flag(
      "--fast", reproduce.fast, "Ten times fewer Monte Carlo trials");
  reproduce_cmd->add_flag("--full", reproduce.full,
                          "Ten times more Monte Carlo trials")
      ->excludes(fast);
  reproduce_cmd->add_option("--out-dir", reproduce.out_dir);
  reproduce_cmd->add_option("--data-dir", reproduce.data_dir,
                            "Bundled data (also DGRISK_DATA_DIR)");
  reproduce_cmd->add_option("--seed", reproduce.seed);
  reproduce_cmd->add_option("--workers", reproduce.workers)
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*sample_cmd) return RunSample(sample);
    if (*convert_cmd) return RunConvert(convert_rho, convert_delta);
    if (*risk_cmd) return RunRisk(risk);
    if (*scan_cmd) return RunScan(scan);
    if (*reproduce_cmd) return RunReproduce(reproduce);
  } catch (const std::exception& e) {
    std::cerr << "dgrisk: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
