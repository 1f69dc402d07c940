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

#include "dgrisk/runner.h"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "dgrisk/composition.h"
#include "dgrisk/flat_risk.h"
#include "dgrisk/hier_risk.h"
#include "dgrisk/multilevel_attack.h"
#include "dgrisk/parallel.h"
#include "dgrisk/postprocess.h"
#include "dgrisk/random.h"
#include "dgrisk/result_set.h"
#include "dgrisk/scenario_config.h"
#include "dgrisk/status_macros.h"
#include "json.hpp"

namespace dgrisk {
namespace {

using nlohmann::json;
using NamedRow = std::vector<std::pair<std::string, Cell>>;

struct Settings {
  std::uint64_t seed = 1;
  std::optional<std::int64_t> n_trials;
  std::optional<std::int64_t> n_draws;
  std::optional<std::int64_t> burn_in;
  bool fast = false;
  int inner_workers = 1;
  std::filesystem::path base_dir;

  std::int64_t Trials(std::int64_t fallback) const {
    const std::int64_t n = n_trials.value_or(fallback);
    return fast ? std::max<std::int64_t>(1, n / 10) : n;
  }
};

struct PointResult {
  std::vector<NamedRow> rows;
  std::vector<std::string> mc_columns;
};

Cell JsonToCell(const json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) {
    return v.get<std::int64_t>();
  }
  if (v.is_number_float()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return std::int64_t{v.get<bool>() ? 1 : 0};
  return v.dump();
}

json CellToTagged(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return {{"i", *i}};
  if (const auto* d = std::get_if<double>(&c)) return {{"d", *d}};
  if (const auto* s = std::get_if<std::string>(&c)) return {{"s", *s}};
  return nullptr;
}

Cell TaggedToCell(const json& j) {
  if (j.is_null()) return Cell{};
  if (j.contains("i")) return j["i"].get<std::int64_t>();
  if (j.contains("d")) return j["d"].get<double>();
  return j["s"].get<std::string>();
}

std::string GetString(const json& p, const char* key, const char* fallback) {
  return p.contains(key) ? p[key].get<std::string>() : fallback;
}

absl::StatusOr<PointResult> EvalFlat(const json& p) {
  ASSIGN_OR_RETURN(const FlatScenario s, FlatScenarioFromParams(p));
  NamedRow row;
  if (p.contains("x1_star")) {
    const std::int64_t x = p["x1_star"].get<std::int64_t>();
    row.emplace_back("x1_star", x);
    row.emplace_back("release_mass", ReleaseMass(s, s.true_count, x));
    row.emplace_back("null_release_mass", ReleaseMass(s, s.known_count, x));
    row.emplace_back("posterior", PosteriorGivenRelease(s, x));
    row.emplace_back("risk_ratio", RiskRatioGivenRelease(s, x));
  }
  row.emplace_back("marginal_posterior", MarginalPosterior(s));
  row.emplace_back("marginal_risk", MarginalRisk(s));
  row.emplace_back("decision_threshold", DecisionThreshold(s));
  row.emplace_back("correct_decision_prob", CorrectDecisionProb(s));
  return PointResult{{row}, {}};
}

absl::StatusOr<PointResult> EvalHier(const json& p, const Settings& set) {
  ASSIGN_OR_RETURN(const HierScenario s, HierScenarioFromParams(p));
  const std::string analysis = GetString(p, "analysis", "correct_decision");
  const bool gibbs = GetString(p, "inference", "exact") == "gibbs";
  PointResult out;
  if (analysis == "posterior") {
    if (!p.contains("data")) {
      return absl::InvalidArgumentError(
          "data: required for analysis posterior");
    }
    const NoisyData data{p["data"]["x1_star"].get<std::int64_t>(),
                         p["data"]["x2_star"].get<std::int64_t>(),
                         p["data"]["y1_star"].get<std::int64_t>()};
    double p_x1, p_x1_se = 0;
    std::map<std::int64_t, double> x2, x2_se;
    if (gibbs) {
      const std::int64_t n = set.n_draws.value_or(kDefaultPosteriorDraws);
      const std::int64_t burn = set.burn_in.value_or(DefaultBurnIn(n));
      ASSIGN_OR_RETURN(const PosteriorSamples samples,
                       GibbsPosterior(s, data, n, burn, set.seed));
      p_x1 = samples.X1Marginal();
      p_x1_se = samples.X1MarginalStandardError();
      x2 = samples.X2Marginal();
      for (const auto& [k, v] : x2) {
        x2_se[k] = samples.X2MarginalStandardError(k);
      }
    } else {
      ASSIGN_OR_RETURN(const ExactPosterior post,
                       ComputeExactPosterior(s, data));
      p_x1 = post.p_x1;
      x2 = post.x2_marginal;
    }
    const std::string method = gibbs ? "gibbs" : "exact";
    out.rows.push_back({{"quantity", std::string("x1")},
                        {"value", s.flat.known_count + 1},
                        {"probability", p_x1},
                        {"probability_se", p_x1_se},
                        {"method", method}});
    std::int64_t lo, hi;
    if (p.contains("x2_range")) {
      lo = p["x2_range"][0].get<std::int64_t>();
      hi = p["x2_range"][1].get<std::int64_t>();
    } else {
      lo = x2.empty() ? 0 : x2.begin()->first;
      hi = x2.empty() ? -1 : x2.rbegin()->first;
    }
    for (std::int64_t k = lo; k <= hi; ++k) {
      const double prob = x2.count(k) ? x2.at(k) : 0.0;
      if (!p.contains("x2_range") && prob < 1e-6) continue;
      out.rows.push_back({{"quantity", std::string("x2")},
                          {"value", k},
                          {"probability", prob},
                          {"probability_se", x2_se.count(k) ? x2_se.at(k) : 0.0},
                          {"method", method}});
    }
    if (gibbs) out.mc_columns.push_back("probability");
    return out;
  }
  if (analysis == "decision_map") {
    if (!p.contains("grid")) {
      return absl::InvalidArgumentError(
          "grid: required for analysis decision_map");
    }
    const json& g = p["grid"];
    auto range = [&](const char* k) {
      return IntRange{g[k][0].get<std::int64_t>(), g[k][1].get<std::int64_t>()};
    };
    const bool cells = p.contains("emit_cells") && p["emit_cells"].get<bool>();
    ASSIGN_OR_RETURN(
        const DecisionMap map,
        ComputeDecisionMap(s, range("x1_star"), range("x2_star"),
                           range("y1_star"), cells, set.inner_workers));
    if (cells) {
      for (const DecisionCell& c : map.cells) {
        out.rows.push_back(
            {{"x1_star", c.data.x1_star},
             {"x2_star", c.data.x2_star},
             {"y1_star", c.data.y1_star},
             {"hier_decision",
              s.flat.known_count + (c.hier_decides_present ? 1 : 0)},
             {"flat_decision",
              s.flat.known_count + (c.flat_decides_present ? 1 : 0)},
             {"release_prob", c.release_prob}});
      }
      return out;
    }
    out.rows.push_back({{"hierarchy_corrects_mass", map.hierarchy_corrects_mass},
                        {"hierarchy_harms_mass", map.hierarchy_harms_mass},
                        {"net_gain", map.net_gain()},
                        {"grid_mass", map.grid_mass},
                        {"hier_correct_mass", map.hier_correct_mass},
                        {"flat_correct_mass", map.flat_correct_mass}});
    return out;
  }
  McOptions mc;
  mc.n_trials = set.Trials(kDefaultHierTrials);
  mc.seed = set.seed;
  mc.workers = set.inner_workers;
  mc.sibling_noise = GetString(p, "sibling_noise", "approximate") == "exact"
                         ? SiblingNoise::kExact
                         : SiblingNoise::kApproximate;
  if (gibbs) {
    mc.inference.method = InferenceMethod::kGibbs;
    mc.inference.n_draws = set.n_draws.value_or(kDefaultDecisionDraws);
    mc.inference.burn_in = set.burn_in;
  }
  ASSIGN_OR_RETURN(const McEstimate est, McCorrectDecisionProb(s, mc));
  out.rows.push_back({{"correct_decision_prob", est.estimate},
                      {"correct_decision_prob_se", est.standard_error},
                      {"trials", est.trials},
                      {"flat_correct_decision_prob",
                       CorrectDecisionProb(s.flat)}});
  out.mc_columns.push_back("correct_decision_prob");
  return out;
}

absl::StatusOr<PointResult> EvalMultilevel(const json& p, const Settings& set) {
  ASSIGN_OR_RETURN(const MultiLevelScenario s,
                   MultiLevelScenarioFromParams(p));
  const int ell_max = p.contains("ell_max")
                          ? p["ell_max"].get<int>()
                          : static_cast<int>(s.level_rhos.size());
  MultilevelOptions opts;
  opts.mc_draws = set.Trials(kDefaultMultilevelDraws);
  opts.seed = set.seed;
  opts.workers = set.inner_workers;
  ASSIGN_OR_RETURN(const std::vector<MultilevelPoint> curve,
                   MultilevelMarginalCurve(s.flat, s.level_rhos, ell_max, opts));
  PointResult out;
  for (const MultilevelPoint& pt : curve) {
    out.rows.push_back({{"levels", std::int64_t{pt.levels}},
                        {"marginal_posterior", pt.marginal_posterior},
                        {"marginal_posterior_se", pt.marginal_posterior_se},
                        {"risk", pt.risk},
                        {"risk_se", pt.risk_se},
                        {"exact", std::int64_t{pt.exact ? 1 : 0}}});
  }
  out.mc_columns = {"marginal_posterior", "risk"};
  return out;
}

absl::StatusOr<PointResult> EvalComposition(const json& p,
                                            const Settings& set) {
  ASSIGN_OR_RETURN(const ReleaseTrace trace,
                   ReleaseTraceFromParams(p, set.base_dir));
  const std::vector<double> posteriors = SequentialPosterior(trace);
  const ComposedRisk risk = ComposeRisk(trace);
  PointResult out;
  double prior = trace.scenario.prior_p;
  double cumulative = 1;
  for (std::size_t i = 0; i < trace.releases.size(); ++i) {
    cumulative *= risk.per_step_risks[i];
    out.rows.push_back({{"step", static_cast<std::int64_t>(i + 1)},
                        {"x1_star", trace.releases[i].x1_star},
                        {"rho", trace.releases[i].rho},
                        {"prior", prior},
                        {"posterior", posteriors[i]},
                        {"step_risk", risk.per_step_risks[i]},
                        {"cumulative_risk", cumulative}});
    prior = posteriors[i];
  }
  return out;
}

absl::StatusOr<PointResult> EvalPostprocess(const json& p) {
  ASSIGN_OR_RETURN(const PostProcessScenario s,
                   PostProcessScenarioFromParams(p));
  PointResult out;
  if (GetString(p, "analysis", "risk") == "likelihood") {
    ASSIGN_OR_RETURN(const std::vector<double> absent,
                     PostprocessedLikelihoodTable(s, s.flat.known_count));
    ASSIGN_OR_RETURN(const std::vector<double> present,
                     PostprocessedLikelihoodTable(s, s.flat.known_count + 1));
    for (std::size_t v = 0; v < absent.size(); ++v) {
      out.rows.push_back({{"x1_tilde", static_cast<std::int64_t>(v)},
                          {"likelihood_absent", absent[v]},
                          {"likelihood_present", present[v]}});
    }
    return out;
  }
  ASSIGN_OR_RETURN(const double post, PostprocessedMarginalPosterior(s));
  ASSIGN_OR_RETURN(const double risk, PostprocessedMarginalRisk(s));
  out.rows.push_back({{"postprocessed_marginal_posterior", post},
                      {"postprocessed_marginal_risk", risk},
                      {"flat_marginal_posterior", MarginalPosterior(s.flat)},
                      {"flat_marginal_risk", MarginalRisk(s.flat)}});
  return out;
}

absl::StatusOr<PointResult> EvalPoint(ScenarioKind kind, const json& p,
                                      const Settings& set) {
  switch (kind) {
    case ScenarioKind::kFlat:
      return EvalFlat(p);
    case ScenarioKind::kHier:
      return EvalHier(p, set);
    case ScenarioKind::kMultilevel:
      return EvalMultilevel(p, set);
    case ScenarioKind::kComposition:
      return EvalComposition(p, set);
    case ScenarioKind::kPostprocess:
      return EvalPostprocess(p);
  }
  return absl::InternalError("unhandled scenario kind");
}

std::string PointContext(const SweepPoint& point) {
  std::string out = absl::StrCat("sweep point ", point.index);
  for (const auto& [name, value] : point.swept) {
    absl::StrAppend(&out, " ", name, "=", value.dump());
  }
  return out;
}

}  // namespace

absl::StatusOr<ResultSet> Run(const ScenarioConfig& config,
                              const RunOptions& options) {
  const std::vector<std::string> problems = ValidateScenarioConfig(config);
  if (!problems.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid scenario config: ", problems.front()));
  }
  const std::vector<SweepPoint> points = ExpandSweep(config);
  const std::uint64_t seed = options.seed.value_or(config.trials.seed);
  Settings base;
  base.n_trials = options.n_trials ? options.n_trials : config.trials.n_trials;
  base.n_draws = config.trials.n_draws;
  base.burn_in = config.trials.burn_in;
  base.fast = options.fast;
  base.base_dir = options.base_dir;
  const int workers = std::max(1, options.workers);
  base.inner_workers = points.size() == 1 ? workers : 1;

  // Finished points from an earlier run of the same config and settings.
  const json fingerprint_base = {
      {"config", ScenarioConfigToJson(config)},
      {"seed", seed},
      {"n_trials", base.n_trials ? json(*base.n_trials) : json(nullptr)},
      {"fast", base.fast}};
  auto fingerprint = [&](std::int64_t index) {
    json f = fingerprint_base;
    f["point"] = index;
    return f.dump();
  };
  std::map<std::int64_t, PointResult> resumed;
  if (options.checkpoint.has_value()) {
    std::ifstream in(*options.checkpoint);
    std::string line;
    while (in && std::getline(in, line)) {
      json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (j.is_discarded() || !j.contains("fingerprint")) continue;
      const std::int64_t index = j["index"].get<std::int64_t>();
      if (j["fingerprint"].get<std::string>() != fingerprint(index)) continue;
      PointResult r;
      for (const json& row : j["rows"]) {
        NamedRow named;
        for (const json& cell : row) {
          named.emplace_back(cell[0].get<std::string>(), TaggedToCell(cell[1]));
        }
        r.rows.push_back(std::move(named));
      }
      r.mc_columns = j["mc_columns"].get<std::vector<std::string>>();
      resumed[index] = std::move(r);
    }
  }

  std::vector<absl::StatusOr<PointResult>> results(
      points.size(), absl::UnknownError("not run"));
  std::mutex mu;
  std::int64_t done = 0;
  std::ofstream checkpoint_out;
  if (options.checkpoint.has_value()) {
    checkpoint_out.open(*options.checkpoint, std::ios::app);
    if (!checkpoint_out) {
      return absl::NotFoundError(absl::StrCat(
          "cannot open checkpoint '", options.checkpoint->string(), "'"));
    }
  }
  ParallelFor(static_cast<std::int64_t>(points.size()), workers,
              [&](std::int64_t i) {
                const SweepPoint& point = points[i];
                auto it = resumed.find(point.index);
                if (it != resumed.end()) {
                  results[i] = it->second;
                } else {
                  Settings set = base;
                  set.seed = DeriveSeed(seed, point.index);
                  results[i] =
                      EvalPoint(config.kind, point.parameters, set);
                  if (results[i].ok() && checkpoint_out.is_open()) {
                    json rows = json::array();
                    for (const NamedRow& row : results[i]->rows) {
                      json r = json::array();
                      for (const auto& [name, cell] : row) {
                        r.push_back(json::array({name, CellToTagged(cell)}));
                      }
                      rows.push_back(r);
                    }
                    const json entry = {
                        {"fingerprint", fingerprint(point.index)},
                        {"index", point.index},
                        {"rows", rows},
                        {"mc_columns", results[i]->mc_columns}};
                    std::lock_guard<std::mutex> lock(mu);
                    checkpoint_out << entry.dump() << "\n";
                    checkpoint_out.flush();
                  }
                }
                std::lock_guard<std::mutex> lock(mu);
                ++done;
                if (options.progress) {
                  options.progress(done, static_cast<std::int64_t>(points.size()));
                }
              });

  ResultSet out;
  out.metadata.version = ToolVersion();
  out.metadata.seed = seed;
  out.metadata.timestamp = UtcTimestamp();
  out.metadata.kind = std::string(ScenarioKindName(config.kind));
  out.metadata.name = config.name;
  // Column union in order of first appearance: swept parameters, then
  // outputs.
  std::vector<std::vector<std::pair<std::string, Cell>>> flat_rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!results[i].ok()) {
      return absl::Status(results[i].status().code(),
                          absl::StrCat(PointContext(points[i]), ": ",
                                       results[i].status().message()));
    }
    for (const std::string& mc : results[i]->mc_columns) {
      if (std::find(out.mc_columns.begin(), out.mc_columns.end(), mc) ==
          out.mc_columns.end()) {
        out.mc_columns.push_back(mc);
      }
    }
    for (const NamedRow& row : results[i]->rows) {
      NamedRow full;
      for (const auto& [name, value] : points[i].swept) {
        bool shadowed = false;
        for (const auto& [out_name, cell] : row) shadowed |= out_name == name;
        if (!shadowed) full.emplace_back(name, JsonToCell(value));
      }
      full.insert(full.end(), row.begin(), row.end());
      flat_rows.push_back(std::move(full));
    }
  }
  for (const NamedRow& row : flat_rows) {
    for (const auto& [name, cell] : row) {
      if (out.ColumnIndex(name) < 0) out.columns.push_back(name);
    }
  }
  for (const NamedRow& row : flat_rows) {
    std::vector<Cell> cells(out.columns.size());
    for (const auto& [name, cell] : row) cells[out.ColumnIndex(name)] = cell;
    out.rows.push_back(std::move(cells));
  }
  RETURN_IF_ERROR(out.Validate());
  return out;
}

}  // namespace dgrisk
