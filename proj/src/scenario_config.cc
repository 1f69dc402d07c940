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

#include "dgrisk/scenario_config.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "dgrisk/accounting.h"
#include "dgrisk/status_macros.h"
#include "json.hpp"

namespace dgrisk {
namespace {

using nlohmann::json;

enum class ParamType {
  kInt,
  kNonNegInt,
  kPositiveInt,
  kProbability,
  kRho,
  kString,
  kBool,
  kEnum,
  kPrior,
  kData,
  kGrid,
  kIntPair,
  kRhoList,
  kReleases,
};

struct ParamSpec {
  std::string name;
  ParamType type;
  std::vector<std::string> choices;  // kEnum only
  bool sweepable = true;
};

std::vector<ParamSpec> CommonParams() {
  return {
      {"known_count", ParamType::kNonNegInt},
      {"prior_p", ParamType::kProbability},
      {"rho1", ParamType::kRho},
      {"true_count", ParamType::kInt},
      {"target_label", ParamType::kString},
      {"block_population", ParamType::kNonNegInt},
  };
}

std::vector<ParamSpec> ParamsFor(ScenarioKind kind) {
  std::vector<ParamSpec> specs = CommonParams();
  auto add = [&](std::vector<ParamSpec> more) {
    specs.insert(specs.end(), more.begin(), more.end());
  };
  switch (kind) {
    case ScenarioKind::kFlat:
      add({{"x1_star", ParamType::kInt}});
      break;
    case ScenarioKind::kHier:
      add({
          {"true_x2", ParamType::kNonNegInt},
          {"true_y1", ParamType::kNonNegInt},
          {"d", ParamType::kPositiveInt},
          {"rho2", ParamType::kRho},
          {"prior_x2", ParamType::kPrior},
          {"x1_update", ParamType::kEnum, {"kernel_only", "joint_density"}},
          {"analysis",
           ParamType::kEnum,
           {"posterior", "decision_map", "correct_decision"},
           false},
          {"data", ParamType::kData},
          {"grid", ParamType::kGrid},
          {"inference", ParamType::kEnum, {"exact", "gibbs"}},
          {"sibling_noise", ParamType::kEnum, {"approximate", "exact"}},
          {"emit_cells", ParamType::kBool, {}, false},
          {"x2_range", ParamType::kIntPair},
      });
      break;
    case ScenarioKind::kMultilevel:
      add({
          {"level_rhos", ParamType::kRhoList},
          {"levels_preset", ParamType::kString},
          {"ell_max", ParamType::kPositiveInt},
      });
      break;
    case ScenarioKind::kComposition:
      add({
          {"releases", ParamType::kReleases},
          {"trace_file", ParamType::kString},
      });
      break;
    case ScenarioKind::kPostprocess:
      add({
          {"d", ParamType::kPositiveInt},
          {"x2", ParamType::kNonNegInt},
          {"x2_tilde", ParamType::kNonNegInt},
          {"rounding", ParamType::kEnum, {"half_away_from_zero", "half_even"}},
          {"analysis", ParamType::kEnum, {"risk", "likelihood"}, false},
      });
      break;
  }
  return specs;
}

const ParamSpec* FindSpec(const std::vector<ParamSpec>& specs,
                          std::string_view name) {
  for (const ParamSpec& spec : specs) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

bool IsInt(const json& v) {
  return v.is_number_integer() || v.is_number_unsigned();
}

bool IsPair(const json& v) {
  return v.is_array() && v.size() == 2 && IsInt(v[0]) && IsInt(v[1]) &&
         v[0].get<std::int64_t>() <= v[1].get<std::int64_t>();
}

// Empty when `v` has the right shape for `spec`, else a description of what
// was expected.
std::string TypeProblem(const ParamSpec& spec, const json& v) {
  switch (spec.type) {
    case ParamType::kInt:
      return IsInt(v) ? "" : "expected an integer";
    case ParamType::kNonNegInt:
      return IsInt(v) && v.get<std::int64_t>() >= 0
                 ? ""
                 : "expected a non-negative integer";
    case ParamType::kPositiveInt:
      return IsInt(v) && v.get<std::int64_t>() >= 1
                 ? ""
                 : "expected a positive integer";
    case ParamType::kProbability:
      return v.is_number() && v.get<double>() > 0 && v.get<double>() < 1
                 ? ""
                 : "expected a number in (0, 1)";
    case ParamType::kRho: {
      absl::StatusOr<double> rho = ResolveRho(v);
      return rho.ok() ? "" : std::string(rho.status().message());
    }
    case ParamType::kString:
      return v.is_string() ? "" : "expected a string";
    case ParamType::kBool:
      return v.is_boolean() ? "" : "expected true or false";
    case ParamType::kEnum:
      if (v.is_string() &&
          std::find(spec.choices.begin(), spec.choices.end(),
                    v.get<std::string>()) != spec.choices.end()) {
        return "";
      }
      return absl::StrCat("expected one of: ",
                          absl::StrJoin(spec.choices, ", "));
    case ParamType::kPrior: {
      absl::StatusOr<PriorX2> prior = ParsePriorX2(v);
      return prior.ok() ? "" : std::string(prior.status().message());
    }
    case ParamType::kData:
      if (v.is_object() && v.size() == 3 && v.contains("x1_star") &&
          v.contains("x2_star") && v.contains("y1_star") &&
          IsInt(v["x1_star"]) && IsInt(v["x2_star"]) && IsInt(v["y1_star"])) {
        return "";
      }
      return "expected {\"x1_star\": int, \"x2_star\": int, \"y1_star\": int}";
    case ParamType::kGrid:
      if (v.is_object() && v.size() == 3 && v.contains("x1_star") &&
          v.contains("x2_star") && v.contains("y1_star") &&
          IsPair(v["x1_star"]) && IsPair(v["x2_star"]) &&
          IsPair(v["y1_star"])) {
        return "";
      }
      return "expected {\"x1_star\": [lo, hi], \"x2_star\": [lo, hi], "
             "\"y1_star\": [lo, hi]}";
    case ParamType::kIntPair:
      return IsPair(v) ? "" : "expected [lo, hi] with lo <= hi";
    case ParamType::kRhoList:
      if (!v.is_array() || v.empty()) return "expected a non-empty list";
      for (const json& e : v) {
        absl::StatusOr<double> rho = ResolveRho(e);
        if (!rho.ok()) return std::string(rho.status().message());
      }
      return "";
    case ParamType::kReleases:
      if (!v.is_array() || v.empty()) return "expected a non-empty list";
      for (const json& e : v) {
        if (!e.is_object() || !e.contains("x1_star") || !e.contains("rho") ||
            !IsInt(e["x1_star"]) || !ResolveRho(e["rho"]).ok()) {
          return "expected entries {\"x1_star\": int, \"rho\": positive}";
        }
      }
      return "";
  }
  return "unsupported parameter type";
}

std::string LineColumn(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return absl::StrFormat("line %d, column %d", line, col);
}

std::vector<double> LogGridValues(const LogGrid& g) {
  std::vector<double> out;
  if (g.points == 1) return {g.min};
  const double lo = std::log10(g.min), hi = std::log10(g.max);
  for (int i = 0; i < g.points; ++i) {
    out.push_back(std::pow(10.0, lo + (hi - lo) * i / (g.points - 1)));
  }
  return out;
}

absl::Status FieldError(absl::string_view field, absl::string_view problem) {
  return absl::InvalidArgumentError(absl::StrCat(field, ": ", problem));
}

template <typename T>
T Get(const json& p, const char* key, T fallback) {
  return p.contains(key) ? p[key].get<T>() : fallback;
}

absl::StatusOr<double> RhoParam(const json& p, const char* key,
                                std::string_view default_level) {
  if (!p.contains(key)) {
    return Census2020PlSafe().EffectiveRho(default_level);
  }
  absl::StatusOr<double> rho = ResolveRho(p[key]);
  if (!rho.ok()) return FieldError(key, rho.status().message());
  return rho;
}

absl::Status CheckTypes(ScenarioKind kind, const json& p) {
  const std::vector<ParamSpec> specs = ParamsFor(kind);
  for (const auto& [key, value] : p.items()) {
    const ParamSpec* spec = FindSpec(specs, key);
    if (spec == nullptr) {
      return FieldError(key, absl::StrCat("unknown parameter for kind ",
                                          std::string(ScenarioKindName(kind))));
    }
    const std::string problem = TypeProblem(*spec, value);
    if (!problem.empty()) return FieldError(key, problem);
  }
  return absl::OkStatus();
}

// Resolves nullptr-valued keys to "absent".
json Pruned(const json& p) {
  json out = json::object();
  for (const auto& [key, value] : p.items()) {
    if (!value.is_null()) out[key] = value;
  }
  return out;
}

absl::StatusOr<ScenarioConfig> ConfigFromJson(const json& j) {
  std::vector<std::string> errors;
  ScenarioConfig config;
  if (!j.is_object()) {
    return absl::InvalidArgumentError("config must be a JSON object");
  }
  static const std::vector<std::string> kTopLevel = {
      "kind", "name", "description", "parameters", "sweep", "trials"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kTopLevel.begin(), kTopLevel.end(), key) == kTopLevel.end()) {
      errors.push_back(absl::StrCat(key, ": unknown top-level field"));
    }
  }
  if (!j.contains("kind") || !j["kind"].is_string()) {
    errors.push_back("kind: missing or not a string");
  } else {
    absl::StatusOr<ScenarioKind> kind =
        ParseScenarioKind(j["kind"].get<std::string>());
    if (!kind.ok()) {
      return kind.status();
    }
    config.kind = *kind;
  }
  if (j.contains("name")) {
    if (j["name"].is_string()) {
      config.name = j["name"].get<std::string>();
    } else {
      errors.push_back("name: expected a string");
    }
  }
  if (j.contains("description")) {
    if (j["description"].is_string()) {
      config.description = j["description"].get<std::string>();
    } else {
      errors.push_back("description: expected a string");
    }
  }
  if (j.contains("parameters")) {
    if (j["parameters"].is_object()) {
      config.parameters = j["parameters"];
    } else {
      errors.push_back("parameters: expected an object");
    }
  }
  if (j.contains("trials")) {
    const json& t = j["trials"];
    if (!t.is_object()) {
      errors.push_back("trials: expected an object");
    } else {
      for (const auto& [key, value] : t.items()) {
        const bool known = key == "n_trials" || key == "n_draws" ||
                           key == "burn_in" || key == "seed";
        if (!known) {
          errors.push_back(absl::StrCat("trials.", key, ": unknown field"));
          continue;
        }
        if (!IsInt(value) || value.get<std::int64_t>() < 0) {
          errors.push_back(
              absl::StrCat("trials.", key, ": expected a non-negative integer"));
          continue;
        }
        if (key == "seed") {
          config.trials.seed = value.get<std::uint64_t>();
        } else if (key == "n_trials") {
          config.trials.n_trials = value.get<std::int64_t>();
        } else if (key == "n_draws") {
          config.trials.n_draws = value.get<std::int64_t>();
        } else {
          config.trials.burn_in = value.get<std::int64_t>();
        }
      }
    }
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    if (!s.is_array()) {
      errors.push_back("sweep: expected a list of axes");
    } else {
      for (std::size_t i = 0; i < s.size(); ++i) {
        const json& a = s[i];
        const std::string where = absl::StrCat("sweep[", i, "]");
        if (!a.is_object()) {
          errors.push_back(absl::StrCat(where, ": expected an object"));
          continue;
        }
        SweepAxis axis;
        for (const auto& [key, value] : a.items()) {
          if (key != "parameter" && key != "parameters" && key != "values" &&
              key != "log_grid") {
            errors.push_back(absl::StrCat(where, ".", key, ": unknown field"));
          }
        }
        if (a.contains("parameter") && a["parameter"].is_string()) {
          axis.parameters.push_back(a["parameter"].get<std::string>());
        } else if (a.contains("parameters") && a["parameters"].is_array()) {
          for (const json& n : a["parameters"]) {
            if (n.is_string()) axis.parameters.push_back(n.get<std::string>());
          }
          if (axis.parameters.size() != a["parameters"].size() ||
              axis.parameters.empty()) {
            errors.push_back(
                absl::StrCat(where, ".parameters: expected a list of names"));
          }
        } else {
          errors.push_back(
              absl::StrCat(where, ": needs \"parameter\" or \"parameters\""));
        }
        if (a.contains("values")) {
          if (a["values"].is_array()) {
            for (const json& v : a["values"]) axis.values.push_back(v);
          } else {
            errors.push_back(absl::StrCat(where, ".values: expected a list"));
          }
        }
        if (a.contains("log_grid")) {
          const json& g = a["log_grid"];
          if (g.is_object() && g.contains("min") && g.contains("max") &&
              g.contains("points") && g["min"].is_number() &&
              g["max"].is_number() && IsInt(g["points"])) {
            axis.log_grid = LogGrid{g["min"].get<double>(),
                                    g["max"].get<double>(),
                                    g["points"].get<int>()};
          } else {
            errors.push_back(absl::StrCat(
                where, ".log_grid: expected {\"min\", \"max\", \"points\"}"));
          }
        }
        config.sweep.push_back(std::move(axis));
      }
    }
  }
  if (errors.empty()) errors = ValidateScenarioConfig(config);
  if (!errors.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "invalid scenario config: ", absl::StrJoin(errors, "; ")));
  }
  return config;
}

absl::Status BuildForKind(ScenarioKind kind, const json& p) {
  switch (kind) {
    case ScenarioKind::kFlat:
      return FlatScenarioFromParams(p).status();
    case ScenarioKind::kHier:
      return HierScenarioFromParams(p).status();
    case ScenarioKind::kMultilevel:
      return MultiLevelScenarioFromParams(p).status();
    case ScenarioKind::kComposition: {
      // Trace files are checked when the config runs.
      if (p.contains("trace_file") && !p.contains("releases")) {
        return FlatScenarioFromParams(p).status();
      }
      return ReleaseTraceFromParams(p).status();
    }
    case ScenarioKind::kPostprocess:
      return PostProcessScenarioFromParams(p).status();
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<ScenarioKind> ParseScenarioKind(std::string_view name) {
  if (name == "flat") return ScenarioKind::kFlat;
  if (name == "hier") return ScenarioKind::kHier;
  if (name == "multilevel") return ScenarioKind::kMultilevel;
  if (name == "composition") return ScenarioKind::kComposition;
  if (name == "postprocess") return ScenarioKind::kPostprocess;
  return absl::InvalidArgumentError(absl::StrCat(
      "kind: unknown scenario kind '", std::string(name),
      "'; expected flat, hier, multilevel, composition or postprocess"));
}

std::string_view ScenarioKindName(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kFlat:
      return "flat";
    case ScenarioKind::kHier:
      return "hier";
    case ScenarioKind::kMultilevel:
      return "multilevel";
    case ScenarioKind::kComposition:
      return "composition";
    case ScenarioKind::kPostprocess:
      return "postprocess";
  }
  return "flat";
}

absl::StatusOr<ScenarioConfig> ParseScenarioConfig(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("parse error at ", LineColumn(text, e.byte), ": ",
                     e.what()));
  }
  return ConfigFromJson(j);
}

absl::StatusOr<ScenarioConfig> LoadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(
        absl::StrCat("cannot open scenario file '", path.string(), "'"));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  absl::StatusOr<ScenarioConfig> config = ParseScenarioConfig(buffer.str());
  if (!config.ok()) {
    return absl::Status(config.status().code(),
                        absl::StrCat(path.string(), ": ",
                                     config.status().message()));
  }
  return config;
}

std::vector<std::string> ValidateScenarioConfig(const ScenarioConfig& config) {
  std::vector<std::string> errors;
  const std::vector<ParamSpec> specs = ParamsFor(config.kind);
  if (!config.parameters.is_object()) {
    return {"parameters: expected an object"};
  }
  const std::string kind_name(ScenarioKindName(config.kind));
  for (const auto& [key, value] : config.parameters.items()) {
    const ParamSpec* spec = FindSpec(specs, key);
    if (spec == nullptr) {
      errors.push_back(absl::StrCat("parameters.", key,
                                    ": unknown parameter for kind ",
                                    kind_name));
      continue;
    }
    const std::string problem = TypeProblem(*spec, value);
    if (!problem.empty()) {
      errors.push_back(absl::StrCat("parameters.", key, ": ", problem));
    }
  }
  std::vector<std::string> swept;
  for (std::size_t i = 0; i < config.sweep.size(); ++i) {
    const SweepAxis& axis = config.sweep[i];
    const std::string where = absl::StrCat("sweep[", i, "]");
    for (const std::string& name : axis.parameters) {
      const ParamSpec* spec = FindSpec(specs, name);
      if (spec == nullptr) {
        errors.push_back(absl::StrCat(where, ": '", name,
                                      "' is not a parameter of kind ",
                                      kind_name));
        continue;
      }
      if (!spec->sweepable) {
        errors.push_back(
            absl::StrCat(where, ": '", name, "' cannot be swept"));
      }
      if (std::find(swept.begin(), swept.end(), name) != swept.end()) {
        errors.push_back(
            absl::StrCat(where, ": '", name, "' is swept more than once"));
      }
      swept.push_back(name);
    }
    if (axis.log_grid.has_value()) {
      const LogGrid& g = *axis.log_grid;
      if (axis.parameters.size() != 1) {
        errors.push_back(
            absl::StrCat(where, ".log_grid: needs a single parameter"));
      }
      if (!(g.min > 0 && g.max >= g.min && g.points >= 1)) {
        errors.push_back(absl::StrCat(
            where, ".log_grid: needs 0 < min <= max and points >= 1"));
      }
    }
    if (axis.values.empty() && !axis.log_grid.has_value()) {
      errors.push_back(absl::StrCat(where, ": no values"));
    }
    for (std::size_t k = 0; k < axis.values.size(); ++k) {
      const json& v = axis.values[k];
      const std::string at = absl::StrCat(where, ".values[", k, "]");
      if (axis.parameters.size() > 1) {
        if (!v.is_array() || v.size() != axis.parameters.size()) {
          errors.push_back(absl::StrCat(at, ": expected a list of ",
                                        axis.parameters.size(), " values"));
          continue;
        }
        for (std::size_t m = 0; m < axis.parameters.size(); ++m) {
          const ParamSpec* spec = FindSpec(specs, axis.parameters[m]);
          if (spec == nullptr) continue;
          const std::string problem = TypeProblem(*spec, v[m]);
          if (!problem.empty()) {
            errors.push_back(absl::StrCat(at, "[", m, "]: ", problem));
          }
        }
      } else if (axis.parameters.size() == 1) {
        const ParamSpec* spec = FindSpec(specs, axis.parameters[0]);
        if (spec == nullptr) continue;
        const std::string problem = TypeProblem(*spec, v);
        if (!problem.empty()) errors.push_back(absl::StrCat(at, ": ", problem));
      }
    }
  }
  if (!errors.empty()) return errors;
  // Every point must form a valid scenario.
  for (const SweepPoint& point : ExpandSweep(config)) {
    const absl::Status status = BuildForKind(config.kind, point.parameters);
    if (!status.ok()) {
      std::string context = point.swept.empty() ? "parameters" : "sweep point";
      for (const auto& [name, value] : point.swept) {
        absl::StrAppend(&context, " ", name, "=", value.dump());
      }
      errors.push_back(absl::StrCat(context, ": ", status.message()));
      break;
    }
  }
  return errors;
}

json ScenarioConfigToJson(const ScenarioConfig& config) {
  json j = json::object();
  j["kind"] = std::string(ScenarioKindName(config.kind));
  if (!config.name.empty()) j["name"] = config.name;
  if (!config.description.empty()) j["description"] = config.description;
  j["parameters"] = config.parameters;
  if (!config.sweep.empty()) {
    json axes = json::array();
    for (const SweepAxis& axis : config.sweep) {
      json a = json::object();
      if (axis.parameters.size() == 1) {
        a["parameter"] = axis.parameters[0];
      } else {
        a["parameters"] = axis.parameters;
      }
      if (!axis.values.empty()) a["values"] = axis.values;
      if (axis.log_grid.has_value()) {
        a["log_grid"] = {{"min", axis.log_grid->min},
                         {"max", axis.log_grid->max},
                         {"points", axis.log_grid->points}};
      }
      axes.push_back(a);
    }
    j["sweep"] = axes;
  }
  json t = json::object();
  t["seed"] = config.trials.seed;
  if (config.trials.n_trials) t["n_trials"] = *config.trials.n_trials;
  if (config.trials.n_draws) t["n_draws"] = *config.trials.n_draws;
  if (config.trials.burn_in) t["burn_in"] = *config.trials.burn_in;
  j["trials"] = t;
  return j;
}

std::string SerializeScenarioConfig(const ScenarioConfig& config) {
  return ScenarioConfigToJson(config).dump(2);
}

std::vector<json> AxisValues(const SweepAxis& axis) {
  if (!axis.log_grid.has_value()) return axis.values;
  std::vector<double> numbers = LogGridValues(*axis.log_grid);
  for (const json& v : axis.values) {
    if (v.is_number()) numbers.push_back(v.get<double>());
  }
  std::sort(numbers.begin(), numbers.end());
  numbers.erase(std::unique(numbers.begin(), numbers.end()), numbers.end());
  return std::vector<json>(numbers.begin(), numbers.end());
}

std::vector<SweepPoint> ExpandSweep(const ScenarioConfig& config) {
  std::vector<std::vector<json>> axis_values;
  for (const SweepAxis& axis : config.sweep) {
    axis_values.push_back(AxisValues(axis));
  }
  std::vector<SweepPoint> points;
  std::vector<std::size_t> index(axis_values.size(), 0);
  for (const auto& values : axis_values) {
    if (values.empty()) return points;
  }
  while (true) {
    SweepPoint point;
    point.index = static_cast<std::int64_t>(points.size());
    point.parameters = config.parameters;
    for (std::size_t a = 0; a < axis_values.size(); ++a) {
      const SweepAxis& axis = config.sweep[a];
      const json& value = axis_values[a][index[a]];
      if (axis.parameters.size() == 1) {
        point.parameters[axis.parameters[0]] = value;
        point.swept.emplace_back(axis.parameters[0], value);
      } else {
        for (std::size_t m = 0; m < axis.parameters.size(); ++m) {
          point.parameters[axis.parameters[m]] = value[m];
          point.swept.emplace_back(axis.parameters[m], value[m]);
        }
      }
    }
    point.parameters = Pruned(point.parameters);
    points.push_back(std::move(point));
    // Odometer increment, last axis fastest.
    int a = static_cast<int>(axis_values.size()) - 1;
    while (a >= 0) {
      if (++index[a] < axis_values[a].size()) break;
      index[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
  return points;
}

absl::StatusOr<double> ResolveRho(const json& value) {
  if (value.is_number()) {
    const double rho = value.get<double>();
    if (!std::isfinite(rho) || rho <= 0) {
      return absl::InvalidArgumentError(
          absl::StrFormat("rho must be positive, got %g", rho));
    }
    return rho;
  }
  if (value.is_object() && value.contains("preset") &&
      value.contains("level") && value["preset"].is_string() &&
      value["level"].is_string() && value.size() == 2) {
    ASSIGN_OR_RETURN(const BudgetAllocation alloc,
                     BudgetPresetByName(value["preset"].get<std::string>()));
    return alloc.EffectiveRho(value["level"].get<std::string>());
  }
  return absl::InvalidArgumentError(
      "expected a positive number or {\"preset\": name, \"level\": level}");
}

absl::StatusOr<PriorX2> ParsePriorX2(const json& value) {
  std::string type;
  if (value.is_string()) {
    type = value.get<std::string>();
  } else if (value.is_object() && value.contains("type") &&
             value["type"].is_string()) {
    type = value["type"].get<std::string>();
  } else {
    return absl::InvalidArgumentError(
        "expected a prior such as {\"type\": \"unbounded\"}, "
        "{\"type\": \"truncated\", \"max\": 10} or "
        "{\"type\": \"point\", \"value\": 1}");
  }
  if (type == "unbounded") {
    if (value.is_object() && value.size() != 1) {
      return absl::InvalidArgumentError("unbounded prior takes no fields");
    }
    return UnboundedUniform{};
  }
  if (type == "truncated" && value.is_object() && value.size() == 2 &&
      value.contains("max") && IsInt(value["max"])) {
    return TruncatedUniform{value["max"].get<std::int64_t>()};
  }
  if (type == "point" && value.is_object() && value.size() == 2 &&
      value.contains("value") && IsInt(value["value"])) {
    return PointMass{value["value"].get<std::int64_t>()};
  }
  return absl::InvalidArgumentError(absl::StrCat(
      "malformed prior '", value.dump(),
      "'; truncated needs an integer \"max\", point an integer \"value\""));
}

json PriorX2ToJson(const PriorX2& prior) {
  if (const auto* t = std::get_if<TruncatedUniform>(&prior)) {
    return {{"type", "truncated"}, {"max", t->max}};
  }
  if (const auto* pm = std::get_if<PointMass>(&prior)) {
    return {{"type", "point"}, {"value", pm->value}};
  }
  return {{"type", "unbounded"}};
}

absl::StatusOr<FlatScenario> FlatScenarioFromParams(const json& p) {
  // Type checks against the common schema; kinds pass extra keys through.
  for (const ParamSpec& spec : CommonParams()) {
    if (!p.contains(spec.name)) continue;
    const std::string problem = TypeProblem(spec, p[spec.name]);
    if (!problem.empty()) return FieldError(spec.name, problem);
  }
  FlatScenario s;
  s.known_count = Get<std::int64_t>(p, "known_count", 0);
  s.prior_p = Get<double>(p, "prior_p", 0.5);
  ASSIGN_OR_RETURN(s.rho1, RhoParam(p, "rho1", "Block"));
  s.true_count = Get<std::int64_t>(p, "true_count", s.known_count + 1);
  s.target_label = Get<std::string>(p, "target_label", "");
  if (p.contains("block_population")) {
    s.block_population = p["block_population"].get<std::int64_t>();
  }
  RETURN_IF_ERROR(ValidateFlatScenario(s));
  return s;
}

absl::StatusOr<HierScenario> HierScenarioFromParams(const json& p) {
  RETURN_IF_ERROR(CheckTypes(ScenarioKind::kHier, p));
  HierScenario s;
  ASSIGN_OR_RETURN(s.flat, FlatScenarioFromParams(p));
  s.d = Get<std::int64_t>(p, "d", 27);
  ASSIGN_OR_RETURN(s.rho2, RhoParam(p, "rho2", "Optimized Block Group"));
  if (p.contains("true_x2")) {
    s.true_x2 = p["true_x2"].get<std::int64_t>();
    s.true_y1 = Get<std::int64_t>(p, "true_y1", s.true_x2 - s.flat.true_count);
  } else {
    s.true_y1 = Get<std::int64_t>(p, "true_y1", 0);
    s.true_x2 = s.flat.true_count + s.true_y1;
  }
  if (p.contains("prior_x2")) {
    ASSIGN_OR_RETURN(s.prior_x2, ParsePriorX2(p["prior_x2"]));
  }
  s.x1_update = Get<std::string>(p, "x1_update", "kernel_only") ==
                        "joint_density"
                    ? X1Update::kJointDensity
                    : X1Update::kKernelOnly;
  RETURN_IF_ERROR(ValidateHierScenario(s));
  return s;
}

absl::StatusOr<MultiLevelScenario> MultiLevelScenarioFromParams(
    const json& p) {
  RETURN_IF_ERROR(CheckTypes(ScenarioKind::kMultilevel, p));
  MultiLevelScenario s;
  if (p.contains("level_rhos") && p.contains("levels_preset")) {
    return FieldError("levels_preset",
                      "give either level_rhos or levels_preset, not both");
  }
  if (p.contains("level_rhos")) {
    for (const json& v : p["level_rhos"]) {
      ASSIGN_OR_RETURN(const double rho, ResolveRho(v));
      s.level_rhos.push_back(rho);
    }
  } else {
    absl::StatusOr<BudgetAllocation> alloc = BudgetPresetByName(
        Get<std::string>(p, "levels_preset", std::string(kCensus2020PlSafe)));
    if (!alloc.ok()) return FieldError("levels_preset", alloc.status().message());
    for (const LevelAllocation& level : alloc->levels()) {
      s.level_rhos.push_back(alloc->EffectiveRho(level.level_name).value());
    }
  }
  json flat = p;
  if (!flat.contains("rho1")) flat["rho1"] = s.level_rhos.front();
  ASSIGN_OR_RETURN(s.flat, FlatScenarioFromParams(flat));
  if (p.contains("ell_max") &&
      p["ell_max"].get<std::size_t>() > s.level_rhos.size()) {
    return FieldError("ell_max", absl::StrFormat("exceeds the %d levels given",
                                                 s.level_rhos.size()));
  }
  RETURN_IF_ERROR(ValidateMultiLevelScenario(s));
  return s;
}

absl::StatusOr<PostProcessScenario> PostProcessScenarioFromParams(
    const json& p) {
  RETURN_IF_ERROR(CheckTypes(ScenarioKind::kPostprocess, p));
  PostProcessScenario s;
  ASSIGN_OR_RETURN(s.flat, FlatScenarioFromParams(p));
  s.d = Get<std::int64_t>(p, "d", 27);
  s.x2 = Get<std::int64_t>(p, "x2", s.flat.known_count + 1);
  s.x2_tilde = Get<std::int64_t>(p, "x2_tilde", s.x2);
  ASSIGN_OR_RETURN(s.rounding,
                   ParseRoundingRule(Get<std::string>(
                       p, "rounding", "half_away_from_zero")));
  RETURN_IF_ERROR(ValidatePostProcessScenario(s));
  return s;
}

absl::StatusOr<ReleaseTrace> ReleaseTraceFromParams(
    const json& p, const std::filesystem::path& base_dir) {
  RETURN_IF_ERROR(CheckTypes(ScenarioKind::kComposition, p));
  ReleaseTrace trace;
  if (p.contains("releases") && p.contains("trace_file")) {
    return FieldError("trace_file",
                      "give either releases or trace_file, not both");
  }
  if (p.contains("releases")) {
    for (const json& r : p["releases"]) {
      ASSIGN_OR_RETURN(const double rho, ResolveRho(r["rho"]));
      trace.releases.push_back({r["x1_star"].get<std::int64_t>(), rho});
    }
  } else if (p.contains("trace_file")) {
    std::filesystem::path path = p["trace_file"].get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    ASSIGN_OR_RETURN(trace.releases, ReadTraceCsv(path));
  } else {
    return FieldError("releases", "composition needs releases or trace_file");
  }
  json flat = p;
  if (!flat.contains("rho1")) flat["rho1"] = trace.releases.front().rho;
  ASSIGN_OR_RETURN(trace.scenario, FlatScenarioFromParams(flat));
  RETURN_IF_ERROR(ValidateReleaseTrace(trace));
  return trace;
}

absl::StatusOr<std::vector<Release>> ReadTraceCsv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(
        absl::StrCat("cannot open trace file '", path.string(), "'"));
  }
  std::string line;
  std::vector<Release> releases;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "x1_star,rho") {
        return absl::InvalidArgumentError(absl::StrCat(
            path.string(), ":", line_no, ": expected header x1_star,rho"));
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields = absl::StrSplit(line, ',');
    Release r;
    std::size_t used = 0;
    try {
      if (fields.size() != 2) throw std::invalid_argument("fields");
      r.x1_star = std::stoll(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("x1_star");
      r.rho = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("rho");
    } catch (const std::exception&) {
      return absl::InvalidArgumentError(absl::StrCat(
          path.string(), ":", line_no, ": expected <integer>,<rho>"));
    }
    releases.push_back(r);
  }
  if (releases.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path.string(), ": trace has no releases"));
  }
  return releases;
}

}  // namespace dgrisk
