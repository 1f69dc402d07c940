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

#include "dgrisk/hier_risk.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_format.h"
#include "dgrisk/discrete_gaussian.h"
#include "dgrisk/exact_sampling.h"
#include "dgrisk/flat_risk.h"
#include "dgrisk/internal/lattice.h"
#include "dgrisk/parallel.h"
#include "dgrisk/random.h"
#include "dgrisk/status_macros.h"

namespace dgrisk {
namespace {

using internal::Logistic;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max();
constexpr std::int64_t kTrialsPerChunk = 4096;
constexpr int kBatches = 20;

// Closed interval; empty when lo > hi.
struct Support {
  std::int64_t lo;
  std::int64_t hi;
  bool empty() const { return lo > hi; }
};

Support X2Support(const PriorX2& prior, std::int64_t k1) {
  if (const auto* t = std::get_if<TruncatedUniform>(&prior)) {
    return {k1, t->max};
  }
  if (const auto* pm = std::get_if<PointMass>(&prior)) {
    return pm->value >= k1 ? Support{pm->value, pm->value} : Support{1, 0};
  }
  return {k1, kUnbounded};
}

// log P[X2 = k2 | X1 = k1] up to a constant shared by both k1.
double LogPriorFactor(const PriorX2& prior, std::int64_t k1) {
  if (const auto* t = std::get_if<TruncatedUniform>(&prior)) {
    return -std::log(static_cast<double>(t->max - k1 + 1));
  }
  return 0;
}

bool Feasible(const HierScenario& s, std::int64_t k1) {
  return !X2Support(s.prior_x2, k1).empty();
}

double LogPriorX1(const HierScenario& s, std::int64_t k1) {
  return k1 == s.flat.known_count + 1 ? std::log(s.flat.prior_p)
                                      : std::log1p(-s.flat.prior_p);
}

// Normalized X2 | X1 = k1, D on a window holding all but ~1e-20 of the mass.
struct X2Grid {
  std::int64_t lo = 0;
  std::vector<double> prob;
  std::vector<double> cdf;

  std::int64_t Sample(BitGen& gen) const {
    const double u = UniformUnit(gen) * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto idx = std::min<std::ptrdiff_t>(it - cdf.begin(),
                                              cdf.size() - 1);
    return lo + idx;
  }
};

absl::StatusOr<X2Grid> BuildX2Grid(const HierScenario& s,
                                   const NoisyData& data, std::int64_t k1) {
  const Support support = X2Support(s.prior_x2, k1);
  if (support.empty()) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "inconsistent prior: %s puts no mass on X2 >= %d",
        DescribePrior(s.prior_x2), k1));
  }
  const double rho1 = s.flat.rho1;
  const double sib = rho1 / static_cast<double>(s.d);
  const double lambda = s.rho2 + sib;
  const double center =
      (s.rho2 * data.x2_star + sib * static_cast<double>(data.y1_star + k1)) /
      lambda;
  const auto width = static_cast<std::int64_t>(
      std::ceil(std::max(10 * std::sqrt(1 / (2 * lambda)), 30.0)));
  const double rounded =
      std::clamp(std::round(center), static_cast<double>(support.lo),
                 static_cast<double>(support.hi));
  const auto mode = static_cast<std::int64_t>(rounded);
  const std::int64_t lo = std::max(support.lo, mode - width);
  const std::int64_t hi =
      support.hi - mode < width ? support.hi : mode + width;
  X2Grid grid;
  grid.lo = lo;
  grid.prob.resize(hi - lo + 1);
  double max_log = kNegInf;
  for (std::int64_t k2 = lo; k2 <= hi; ++k2) {
    const double dev = static_cast<double>(k2) - center;
    grid.prob[k2 - lo] = -lambda * dev * dev;
    max_log = std::max(max_log, grid.prob[k2 - lo]);
  }
  double total = 0;
  for (double& v : grid.prob) {
    v = std::exp(v - max_log);
    total += v;
  }
  grid.cdf.resize(grid.prob.size());
  double acc = 0;
  for (size_t i = 0; i < grid.prob.size(); ++i) {
    grid.prob[i] /= total;
    acc += grid.prob[i];
    grid.cdf[i] = acc;
  }
  return grid;
}

// Log weight that the X1 step gives to k1, before normalization.
double X1LogWeight(const HierScenario& s, const NoisyData& data,
                   std::int64_t k1, std::int64_t k2) {
  const Support support = X2Support(s.prior_x2, k1);
  if (support.empty()) return kNegInf;
  double prior_term = LogPriorX1(s, k1);
  if (s.x1_update == X1Update::kJointDensity) {
    if (k2 < support.lo || k2 > support.hi) return kNegInf;
    prior_term += LogPriorFactor(s.prior_x2, k1);
  }
  const double d = static_cast<double>(s.d);
  const double center =
      (d * data.x1_star + static_cast<double>(k2 - data.y1_star)) / (d + 1);
  const double dev = static_cast<double>(k1) - center;
  return -((d + 1) / d) * s.flat.rho1 * dev * dev + prior_term;
}

double X1ConditionalImpl(const HierScenario& s, const NoisyData& data,
                         std::int64_t k2) {
  const std::int64_t k0 = s.flat.known_count;
  const double w1 = X1LogWeight(s, data, k0 + 1, k2);
  const double w0 = X1LogWeight(s, data, k0, k2);
  if (w1 == kNegInf) return 0;
  if (w0 == kNegInf) return 1;
  return Logistic(w1 - w0);
}

// Initial state of the chain.
std::pair<std::int64_t, std::int64_t> InitialState(const HierScenario& s,
                                                   const NoisyData& data) {
  const std::int64_t k0 = s.flat.known_count;
  std::int64_t k1 = data.x1_star > k0 ? k0 + 1 : k0;
  if (!Feasible(s, k1)) k1 = k1 == k0 ? k0 + 1 : k0;
  const Support support = X2Support(s.prior_x2, k1);
  const std::int64_t k2 =
      std::clamp(std::max(k1, data.x2_star), support.lo, support.hi);
  return {k1, k2};
}

// Gibbs chain with the two X2 conditionals tabulated once.
class GibbsChain {
 public:
  static absl::StatusOr<GibbsChain> Create(const HierScenario& s,
                                           const NoisyData& data) {
    GibbsChain chain(s, data);
    const std::int64_t k0 = s.flat.known_count;
    for (int i = 0; i < 2; ++i) {
      if (!Feasible(s, k0 + i)) continue;
      ASSIGN_OR_RETURN(chain.grids_[i], BuildX2Grid(s, data, k0 + i));
      chain.feasible_[i] = true;
    }
    return chain;
  }

  // Runs burn_in + n_draws sweeps; calls record(k1, k2) for kept draws.
  template <typename F>
  void Run(std::int64_t n_draws, std::int64_t burn_in, BitGen& gen,
           F&& record) {
    auto [k1, k2] = InitialState(s_, data_);
    const std::int64_t k0 = s_.flat.known_count;
    for (std::int64_t t = 0; t < burn_in + n_draws; ++t) {
      const double p1 = X1ConditionalImpl(s_, data_, k2);
      k1 = UniformUnit(gen) < p1 ? k0 + 1 : k0;
      k2 = grids_[k1 - k0].Sample(gen);
      if (t >= burn_in) record(k1, k2);
    }
  }

 private:
  GibbsChain(const HierScenario& s, const NoisyData& data)
      : s_(s), data_(data) {}

  HierScenario s_;
  NoisyData data_;
  X2Grid grids_[2];
  bool feasible_[2] = {false, false};
};

absl::StatusOr<ExactPosterior> JointEnumeration(const HierScenario& s,
                                                const NoisyData& data) {
  const std::int64_t k0 = s.flat.known_count;
  const double rho1 = s.flat.rho1;
  const double sib = rho1 / static_cast<double>(s.d);
  struct Cell {
    std::int64_t k1, k2;
    double log_w;
  };
  std::vector<Cell> cells;
  double max_log = kNegInf;
  for (std::int64_t k1 = k0; k1 <= k0 + 1; ++k1) {
    if (!Feasible(s, k1)) continue;
    ASSIGN_OR_RETURN(const X2Grid grid, BuildX2Grid(s, data, k1));
    const double dx1 = static_cast<double>(data.x1_star - k1);
    const double base = LogPriorX1(s, k1) + LogPriorFactor(s.prior_x2, k1) -
                        rho1 * dx1 * dx1;
    for (size_t i = 0; i < grid.prob.size(); ++i) {
      const std::int64_t k2 = grid.lo + static_cast<std::int64_t>(i);
      const double dx2 = static_cast<double>(data.x2_star - k2);
      const double dy = static_cast<double>(data.y1_star - (k2 - k1));
      const double log_w = base - s.rho2 * dx2 * dx2 - sib * dy * dy;
      cells.push_back({k1, k2, log_w});
      max_log = std::max(max_log, log_w);
    }
  }
  double total = 0, present = 0;
  std::map<std::int64_t, double> x2;
  for (const Cell& c : cells) {
    const double w = std::exp(c.log_w - max_log);
    total += w;
    if (c.k1 == k0 + 1) present += w;
    x2[c.k2] += w;
  }
  ExactPosterior out;
  out.p_x1 = present / total;
  for (auto& [k2, w] : x2) out.x2_marginal[k2] = w / total;
  return out;
}

absl::StatusOr<ExactPosterior> StationaryLaw(const HierScenario& s,
                                             const NoisyData& data) {
  const std::int64_t k0 = s.flat.known_count;
  X2Grid grids[2];
  bool feasible[2] = {false, false};
  for (int i = 0; i < 2; ++i) {
    if (!Feasible(s, k0 + i)) continue;
    ASSIGN_OR_RETURN(grids[i], BuildX2Grid(s, data, k0 + i));
    feasible[i] = true;
  }
  double p1;
  if (!feasible[0]) {
    p1 = 1;
  } else if (!feasible[1]) {
    p1 = 0;
  } else {
    // up = P[k0 -> k0 + 1], down = P[k0 + 1 -> k0] for one full sweep.
    double up = 0, down = 0;
    for (int i = 0; i < 2; ++i) {
      const X2Grid& g = grids[i];
      double acc = 0;
      for (size_t j = 0; j < g.prob.size(); ++j) {
        const double q1 = X1ConditionalImpl(
            s, data, g.lo + static_cast<std::int64_t>(j));
        acc += g.prob[j] * (i == 0 ? q1 : 1 - q1);
      }
      (i == 0 ? up : down) = acc;
    }
    if (up + down > 0) {
      p1 = up / (up + down);
    } else {
      // Reducible chain: it stays where it starts.
      p1 = InitialState(s, data).first == k0 + 1 ? 1 : 0;
    }
  }
  ExactPosterior out;
  out.p_x1 = p1;
  for (int i = 0; i < 2; ++i) {
    if (!feasible[i]) continue;
    const double w = i == 1 ? p1 : 1 - p1;
    for (size_t j = 0; j < grids[i].prob.size(); ++j) {
      out.x2_marginal[grids[i].lo + static_cast<std::int64_t>(j)] +=
          w * grids[i].prob[j];
    }
  }
  return out;
}

struct NoisyDataHash {
  size_t operator()(const NoisyData& d) const {
    std::uint64_t h = static_cast<std::uint64_t>(d.x1_star) * 0x9E3779B97F4A7C15u;
    h ^= static_cast<std::uint64_t>(d.x2_star) + 0x7F4A7C159E3779B9u + (h << 6) +
         (h >> 2);
    h ^= static_cast<std::uint64_t>(d.y1_star) + 0x94D049BB133111EBu + (h << 6) +
         (h >> 2);
    return static_cast<size_t>(h);
  }
};

// Standard error of the frequency of `pred` along a chain: batch means over
// kBatches batches, floored at the binomial error of independent draws with
// a half-count shift so that a constant run does not report zero.
template <typename Pred>
double IndicatorStandardError(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& draws,
    Pred pred) {
  const auto n = static_cast<std::int64_t>(draws.size());
  if (n < 2) return 0;
  std::int64_t hits = 0;
  for (const auto& d : draws) hits += pred(d);
  const double nd = static_cast<double>(n);
  const double shifted = (static_cast<double>(hits) + 0.5) / (nd + 1);
  double se = std::sqrt(shifted * (1 - shifted) / nd);
  if (n >= 2 * kBatches) {
    const std::int64_t size = n / kBatches;
    std::vector<double> means;
    for (int b = 0; b < kBatches; ++b) {
      std::int64_t batch_hits = 0;
      for (std::int64_t i = b * size; i < (b + 1) * size; ++i) {
        batch_hits += pred(draws[i]);
      }
      means.push_back(static_cast<double>(batch_hits) /
                      static_cast<double>(size));
    }
    double mean = 0;
    for (double m : means) mean += m;
    mean /= kBatches;
    double var = 0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= kBatches - 1;
    se = std::max(se, std::sqrt(var / kBatches));
  }
  return se;
}

}  // namespace

std::string DescribePrior(const PriorX2& prior) {
  if (const auto* t = std::get_if<TruncatedUniform>(&prior)) {
    return absl::StrFormat("TruncatedUniform(max=%d)", t->max);
  }
  if (const auto* pm = std::get_if<PointMass>(&prior)) {
    return absl::StrFormat("PointMass(%d)", pm->value);
  }
  return "UnboundedUniform";
}

absl::Status ValidateHierScenario(const HierScenario& s) {
  RETURN_IF_ERROR(ValidateFlatScenario(s.flat));
  if (s.d < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("d must be at least 1, got %d", s.d));
  }
  if (!std::isfinite(s.rho2) || s.rho2 <= 0 || 0.5 / s.rho2 > 1e18) {
    return absl::InvalidArgumentError(
        absl::StrFormat("rho2 must be positive, got %g", s.rho2));
  }
  if (s.true_y1 < 0) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "true_y1 must be non-negative, got %d", s.true_y1));
  }
  if (s.true_x2 != s.flat.true_count + s.true_y1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "true_x2 (%d) must equal true_count (%d) + true_y1 (%d)", s.true_x2,
        s.flat.true_count, s.true_y1));
  }
  if (const auto* pm = std::get_if<PointMass>(&s.prior_x2)) {
    if (pm->value < 0) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "PointMass value must be non-negative, got %d", pm->value));
    }
  }
  if (!Feasible(s, s.flat.known_count)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "inconsistent prior: %s excludes X2 >= known_count = %d",
        DescribePrior(s.prior_x2), s.flat.known_count));
  }
  return absl::OkStatus();
}

ReleaseGenerator::ReleaseGenerator(const HierScenario& s, SiblingNoise mode)
    : scenario_(s),
      mode_(mode),
      block_noise_(0.5 / s.flat.rho1),
      second_noise_(0.5 / s.rho2),
      sibling_total_noise_(static_cast<double>(s.d) * 0.5 / s.flat.rho1) {}

NoisyData ReleaseGenerator::operator()(BitGen& gen) const {
  NoisyData data;
  data.x1_star = scenario_.flat.true_count + block_noise_.Sample(gen);
  data.x2_star = scenario_.true_x2 + second_noise_.Sample(gen);
  std::int64_t y_noise = 0;
  if (mode_ == SiblingNoise::kApproximate) {
    y_noise = sibling_total_noise_.Sample(gen);
  } else {
    for (std::int64_t i = 0; i < scenario_.d; ++i) {
      y_noise += block_noise_.Sample(gen);
    }
  }
  data.y1_star = scenario_.true_y1 + y_noise;
  return data;
}

NoisyData GenerateRelease(const HierScenario& s, BitGen& gen,
                          SiblingNoise mode) {
  return ReleaseGenerator(s, mode)(gen);
}

double X1FullConditional(const HierScenario& s, const NoisyData& data,
                         std::int64_t k2) {
  return X1ConditionalImpl(s, data, k2);
}

absl::StatusOr<std::int64_t> SampleX2FullConditional(const HierScenario& s,
                                                     const NoisyData& data,
                                                     std::int64_t k1,
                                                     BitGen& gen) {
  const std::int64_t k0 = s.flat.known_count;
  if (k1 != k0 && k1 != k0 + 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "k1 must be %d or %d, got %d", k0, k0 + 1, k1));
  }
  ASSIGN_OR_RETURN(const X2Grid grid, BuildX2Grid(s, data, k1));
  return grid.Sample(gen);
}

double PosteriorSamples::X1Marginal() const {
  if (draws.empty()) return 0;
  std::int64_t hits = 0;
  for (const auto& [k1, k2] : draws) hits += k1 == known_count + 1;
  return static_cast<double>(hits) / static_cast<double>(draws.size());
}

double PosteriorSamples::X1MarginalStandardError() const {
  return IndicatorStandardError(draws, [this](const auto& d) {
    return d.first == known_count + 1;
  });
}

double PosteriorSamples::X2MarginalStandardError(std::int64_t value) const {
  return IndicatorStandardError(
      draws, [value](const auto& d) { return d.second == value; });
}

std::map<std::int64_t, double> PosteriorSamples::X2Marginal() const {
  std::map<std::int64_t, double> out;
  for (const auto& [k1, k2] : draws) out[k2] += 1;
  for (auto& [k2, c] : out) c /= static_cast<double>(draws.size());
  return out;
}

std::int64_t DefaultBurnIn(std::int64_t n_draws) { return n_draws / 10; }

absl::StatusOr<PosteriorSamples> GibbsPosterior(const HierScenario& s,
                                                const NoisyData& data,
                                                std::int64_t n_draws,
                                                std::int64_t burn_in,
                                                std::uint64_t seed) {
  RETURN_IF_ERROR(ValidateHierScenario(s));
  if (n_draws < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("n_draws must be at least 1, got %d", n_draws));
  }
  if (burn_in < 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("burn_in must be non-negative, got %d", burn_in));
  }
  ASSIGN_OR_RETURN(GibbsChain chain, GibbsChain::Create(s, data));
  PosteriorSamples out;
  out.seed = seed;
  out.n_draws = n_draws;
  out.burn_in = burn_in;
  out.known_count = s.flat.known_count;
  out.draws.reserve(n_draws);
  BitGen gen = MakeBitGen(seed);
  chain.Run(n_draws, burn_in, gen, [&](std::int64_t k1, std::int64_t k2) {
    out.draws.emplace_back(k1, k2);
  });
  return out;
}

absl::StatusOr<ExactPosterior> ComputeExactPosterior(const HierScenario& s,
                                                     const NoisyData& data) {
  RETURN_IF_ERROR(ValidateHierScenario(s));
  if (s.x1_update == X1Update::kJointDensity) {
    return JointEnumeration(s, data);
  }
  return StationaryLaw(s, data);
}

absl::StatusOr<bool> HierDecision(const HierScenario& s,
                                  const NoisyData& data) {
  ASSIGN_OR_RETURN(const ExactPosterior post, ComputeExactPosterior(s, data));
  return post.p_x1 > 0.5;
}

absl::StatusOr<DecisionMap> ComputeDecisionMap(const HierScenario& s,
                                               IntRange x1_range,
                                               IntRange x2_range,
                                               IntRange y1_range,
                                               bool keep_cells, int workers) {
  RETURN_IF_ERROR(ValidateHierScenario(s));
  if (x1_range.lo > x1_range.hi || x2_range.lo > x2_range.hi ||
      y1_range.lo > y1_range.hi) {
    return absl::InvalidArgumentError("decision map ranges must be non-empty");
  }
  ASSIGN_OR_RETURN(const DiscreteGaussian d1,
                   DiscreteGaussian::FromRho(s.flat.true_count, s.flat.rho1));
  ASSIGN_OR_RETURN(const DiscreteGaussian d2,
                   DiscreteGaussian::FromRho(s.true_x2, s.rho2));
  ASSIGN_OR_RETURN(const DiscreteGaussian dy,
                   DiscreteGaussian::FromScale(
                       s.true_y1, static_cast<double>(s.d) * d1.scale()));
  const bool truth_present = s.flat.true_count == s.flat.known_count + 1;
  const std::int64_t rows = x1_range.hi - x1_range.lo + 1;
  std::vector<DecisionMap> parts(rows);
  std::vector<absl::Status> errors(rows);
  ParallelFor(rows, workers, [&](std::int64_t r) {
    const std::int64_t x1 = x1_range.lo + r;
    DecisionMap& part = parts[r];
    const bool flat_present = PosteriorGivenRelease(s.flat, x1) > 0.5;
    for (std::int64_t x2 = x2_range.lo; x2 <= x2_range.hi; ++x2) {
      for (std::int64_t y1 = y1_range.lo; y1 <= y1_range.hi; ++y1) {
        const NoisyData data{x1, x2, y1};
        absl::StatusOr<bool> hier = HierDecision(s, data);
        if (!hier.ok()) {
          errors[r] = hier.status();
          return;
        }
        DecisionCell cell{data, *hier, flat_present,
                          d1.Pmf(x1) * d2.Pmf(x2) * dy.Pmf(y1)};
        part.grid_mass += cell.release_prob;
        if (cell.hier_decides_present == truth_present) {
          part.hier_correct_mass += cell.release_prob;
        }
        if (flat_present == truth_present) {
          part.flat_correct_mass += cell.release_prob;
        }
        if (cell.hier_decides_present != flat_present) {
          (cell.hier_decides_present == truth_present
               ? part.hierarchy_corrects_mass
               : part.hierarchy_harms_mass) += cell.release_prob;
        }
        if (keep_cells) part.cells.push_back(cell);
      }
    }
  });
  DecisionMap out;
  for (std::int64_t r = 0; r < rows; ++r) {
    RETURN_IF_ERROR(errors[r]);
    const DecisionMap& part = parts[r];
    out.hierarchy_corrects_mass += part.hierarchy_corrects_mass;
    out.hierarchy_harms_mass += part.hierarchy_harms_mass;
    out.grid_mass += part.grid_mass;
    out.hier_correct_mass += part.hier_correct_mass;
    out.flat_correct_mass += part.flat_correct_mass;
    out.cells.insert(out.cells.end(), part.cells.begin(), part.cells.end());
  }
  return out;
}

absl::StatusOr<McEstimate> McCorrectDecisionProb(const HierScenario& s,
                                                 const McOptions& options) {
  RETURN_IF_ERROR(ValidateHierScenario(s));
  if (options.n_trials < 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "n_trials must be at least 1, got %d", options.n_trials));
  }
  const InferenceSpec& inf = options.inference;
  if (inf.method == InferenceMethod::kGibbs && inf.n_draws < 1) {
    return absl::InvalidArgumentError("Gibbs inference needs n_draws >= 1");
  }
  const std::int64_t burn_in = inf.burn_in.value_or(DefaultBurnIn(inf.n_draws));
  const ReleaseGenerator generate(s, options.sibling_noise);
  const bool truth_present = s.flat.true_count == s.flat.known_count + 1;
  const std::int64_t k0 = s.flat.known_count;
  const std::int64_t chunks =
      (options.n_trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
  std::vector<std::int64_t> successes(chunks, 0);
  std::vector<absl::Status> errors(chunks);
  ParallelFor(chunks, options.workers, [&](std::int64_t c) {
    BitGen gen = MakeBitGen(options.seed, static_cast<std::uint64_t>(c));
    std::unordered_map<NoisyData, bool, NoisyDataHash> cache;
    const std::int64_t begin = c * kTrialsPerChunk;
    const std::int64_t end =
        std::min(options.n_trials, begin + kTrialsPerChunk);
    for (std::int64_t t = begin; t < end; ++t) {
      const NoisyData data = generate(gen);
      bool decides_present;
      if (inf.method == InferenceMethod::kExact) {
        auto it = cache.find(data);
        if (it == cache.end()) {
          absl::StatusOr<bool> d = HierDecision(s, data);
          if (!d.ok()) {
            errors[c] = d.status();
            return;
          }
          it = cache.emplace(data, *d).first;
        }
        decides_present = it->second;
      } else {
        absl::StatusOr<GibbsChain> chain = GibbsChain::Create(s, data);
        if (!chain.ok()) {
          errors[c] = chain.status();
          return;
        }
        std::int64_t hits = 0;
        chain->Run(inf.n_draws, burn_in, gen,
                   [&](std::int64_t k1, std::int64_t) { hits += k1 == k0 + 1; });
        decides_present = 2 * hits > inf.n_draws;
      }
      successes[c] += decides_present == truth_present;
    }
  });
  McEstimate out;
  for (std::int64_t c = 0; c < chunks; ++c) {
    RETURN_IF_ERROR(errors[c]);
    out.successes += successes[c];
  }
  out.trials = options.n_trials;
  out.estimate =
      static_cast<double>(out.successes) / static_cast<double>(out.trials);
  out.standard_error = std::sqrt(out.estimate * (1 - out.estimate) /
                                 static_cast<double>(out.trials));
  return out;
}

}  // namespace dgrisk
