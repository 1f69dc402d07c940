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

#ifndef DGRISK_HIER_RISK_H_
#define DGRISK_HIER_RISK_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dgrisk/exact_sampling.h"
#include "dgrisk/flat_risk.h"
#include "dgrisk/random.h"

namespace dgrisk {

// Adversary priors for the second-level count X2 given X1 = k1.
// Improper uniform on {k1, k1 + 1, ...}.
struct UnboundedUniform {};
// Uniform on {k1, ..., max}.
struct TruncatedUniform {
  std::int64_t max = 0;
};
// X2 = value with certainty (when value >= k1).
struct PointMass {
  std::int64_t value = 0;
};
using PriorX2 = std::variant<UnboundedUniform, TruncatedUniform, PointMass>;

std::string DescribePrior(const PriorX2& prior);

// How the Gibbs sampler updates X1 given X2 = k2.
enum class X1Update {
  // Normalizes the two-point kernel
  //   exp(-((d + 1) / d) rho1 [k1 - (d x1* + k2 - y1*) / (d + 1)]^2) P[X1 = k1]
  // over every k1 whose prior support for X2 is non-empty. This is the
  // sampler behind the reference tables.
  kKernelOnly,
  // The exact full conditional of the joint posterior: additionally requires
  // k1 <= k2 (and k2 inside the prior support) and includes the X2 | X1
  // prior factor.
  kJointDensity,
};

// Sibling noise in generated releases: one DG(0, d / (2 rho1)) draw, or the
// sum of d exact DG(0, 1 / (2 rho1)) draws.
enum class SiblingNoise { kApproximate, kExact };

// Two-level attack: block count X1, second-level count X2 = X1 + Y1 where
// Y1 is the total of the target's d sibling blocks.
struct HierScenario {
  FlatScenario flat;
  std::int64_t true_x2 = 1;
  std::int64_t true_y1 = 0;
  std::int64_t d = 27;
  double rho2 = 0.2465;
  PriorX2 prior_x2 = UnboundedUniform{};
  X1Update x1_update = X1Update::kKernelOnly;
};

absl::Status ValidateHierScenario(const HierScenario& s);

// Noisy releases seen by the adversary; any integers.
struct NoisyData {
  std::int64_t x1_star = 0;
  std::int64_t x2_star = 0;
  std::int64_t y1_star = 0;

  friend bool operator==(const NoisyData&, const NoisyData&) = default;
};

// Draws releases for a fixed scenario; holds the three noise samplers.
class ReleaseGenerator {
 public:
  ReleaseGenerator(const HierScenario& s, SiblingNoise mode);
  NoisyData operator()(BitGen& gen) const;

 private:
  HierScenario scenario_;
  SiblingNoise mode_;
  exact::DiscreteGaussianNoise block_noise_;
  exact::DiscreteGaussianNoise second_noise_;
  exact::DiscreteGaussianNoise sibling_total_noise_;
};

NoisyData GenerateRelease(const HierScenario& s, BitGen& gen,
                          SiblingNoise mode = SiblingNoise::kApproximate);

// P[X1 = known_count + 1 | X2 = k2, D] under s.x1_update. Requires
// k2 >= known_count.
double X1FullConditional(const HierScenario& s, const NoisyData& data,
                         std::int64_t k2);

// Draws X2 | X1 = k1, D. Fails when the prior puts no mass on {k1, ...}.
absl::StatusOr<std::int64_t> SampleX2FullConditional(const HierScenario& s,
                                                     const NoisyData& data,
                                                     std::int64_t k1,
                                                     BitGen& gen);

struct PosteriorSamples {
  std::vector<std::pair<std::int64_t, std::int64_t>> draws;
  std::uint64_t seed = 0;
  std::int64_t n_draws = 0;
  std::int64_t burn_in = 0;
  std::int64_t known_count = 0;

  // Fraction of draws with k1 = known_count + 1.
  double X1Marginal() const;
  // Batch-means standard error of X1Marginal, floored at the independent
  // draws binomial error.
  double X1MarginalStandardError() const;
  std::map<std::int64_t, double> X2Marginal() const;
  // Same error estimate for the frequency of k2 = value.
  double X2MarginalStandardError(std::int64_t value) const;
};

// Burn-in used when none is given: 10% of n_draws.
std::int64_t DefaultBurnIn(std::int64_t n_draws);

absl::StatusOr<PosteriorSamples> GibbsPosterior(const HierScenario& s,
                                                const NoisyData& data,
                                                std::int64_t n_draws,
                                                std::int64_t burn_in,
                                                std::uint64_t seed);

struct ExactPosterior {
  // P[X1 = known_count + 1 | D].
  double p_x1 = 0;
  std::map<std::int64_t, double> x2_marginal;
};

// Under kJointDensity: enumeration of the joint posterior. Under kKernelOnly:
// the stationary distribution of the Gibbs chain, obtained from the exact
// two-state transition matrix of its X1 component.
absl::StatusOr<ExactPosterior> ComputeExactPosterior(const HierScenario& s,
                                                     const NoisyData& data);

// 0-1 loss decision: true means "X1 = known_count + 1".
absl::StatusOr<bool> HierDecision(const HierScenario& s,
                                  const NoisyData& data);

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct DecisionCell {
  NoisyData data;
  bool hier_decides_present = false;
  bool flat_decides_present = false;
  // P[D = data] under the true counts.
  double release_prob = 0;
};

struct DecisionMap {
  std::vector<DecisionCell> cells;
  // Mass of cells where the decisions differ and the hierarchical one is
  // correct, resp. wrong.
  double hierarchy_corrects_mass = 0;
  double hierarchy_harms_mass = 0;
  double grid_mass = 0;
  double hier_correct_mass = 0;
  double flat_correct_mass = 0;

  double net_gain() const {
    return hierarchy_corrects_mass - hierarchy_harms_mass;
  }
};

absl::StatusOr<DecisionMap> ComputeDecisionMap(const HierScenario& s,
                                               IntRange x1_range,
                                               IntRange x2_range,
                                               IntRange y1_range,
                                               bool keep_cells = true,
                                               int workers = 1);

enum class InferenceMethod { kExact, kGibbs };

struct InferenceSpec {
  InferenceMethod method = InferenceMethod::kExact;
  std::int64_t n_draws = 1000;
  std::optional<std::int64_t> burn_in;
};

struct McOptions {
  std::int64_t n_trials = 100'000;
  std::uint64_t seed = 1;
  InferenceSpec inference;
  SiblingNoise sibling_noise = SiblingNoise::kApproximate;
  int workers = 1;
};

struct McEstimate {
  double estimate = 0;
  double standard_error = 0;
  std::int64_t trials = 0;
  std::int64_t successes = 0;
};

// Frequency with which the adversary's decision equals the true block count
// over repeated releases, with its binomial standard error. Results depend
// only on (seed, n_trials), not on the worker count.
absl::StatusOr<McEstimate> McCorrectDecisionProb(const HierScenario& s,
                                                 const McOptions& options);

}  // namespace dgrisk

#endif  // DGRISK_HIER_RISK_H_
