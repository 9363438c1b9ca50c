#pragma once

// Synthetic workloads and reference searches: random problems with
// guaranteed-feasible windows, an exhaustive optimum for small instances,
// planted-truth run records and the outlier robustness experiment.

#include <cstdint>
#include <optional>
#include <vector>

#include "costorch/core.hpp"
#include "costorch/predictor.hpp"

namespace costorch::bench {

struct Range {
  double lo;
  double hi;
};

struct GeneratorConfig {
  std::size_t workflow_count = 6;
  std::size_t device_count = 3;
  std::size_t configs_per_device = 3;
  double precedence_density = 0.3;
  // Deadline = e + slack * (finish under the fastest assignment - e).
  double window_slack_factor = 1.5;
  Range base_rate{1.0, 5.0};
  Range overflow_multiplier{1.2, 3.0};
  Range prepurchased_hours{0.0, 20.0};
  Range work_hours{1.0, 8.0};  // single-device duration before device speed
  Range device_speed{0.6, 1.4};
  Range scaling_exponent{0.5, 0.9};  // hours shrink as device_count^-gamma
  Range earliest_start{0.0, 4.0};
  double duration_noise = 0.1;  // relative, uniform
  std::uint64_t seed = 0;
};

// Throws Error for a config that breaks its invariants.
Problem generate_problem(const GeneratorConfig& cfg);

struct BruteForceResult {
  std::optional<Assignment> assignment;  // absent when infeasible
  double cost = 0.0;
  std::uint64_t enumerated = 0;
};

inline constexpr std::uint64_t kBruteForceLimit = 1'000'000;

// Minimum-cost assignment whose earliest schedule meets every deadline and
// cap; ties go to the lexicographically first assignment. Throws TooLarge
// when the product of choice counts exceeds `limit`.
BruteForceResult brute_force_optimum(const ValidatedProblem& vp,
                                     std::uint64_t limit = kBruteForceLimit);

struct RecordConfig {
  std::size_t count = 5000;
  double noise_sigma = 60.0;  // seconds
};

// Linear truth in the units of predictor::FeatureSchema::reference_coded().
struct PlantedTruth {
  predictor::FeatureSchema schema;
  std::vector<double> coefficients;
  double intercept = 0.0;
  double noise_sigma = 0.0;
};

struct GeneratedRecords {
  std::vector<predictor::RunRecord> records;
  PlantedTruth truth;
};

// Memory tracks cpu and disk tracks dataset volume, so the design is
// collinear the way production job logs are.
GeneratedRecords generate_records(const RecordConfig& cfg, std::uint64_t seed);

struct RobustnessConfig {
  RecordConfig data;
  std::size_t trials = 50;
  double outlier_fraction = 0.05;
  double outlier_multiplier = 10.0;
  double holdout_fraction = 0.2;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

struct RobustnessReport {
  std::size_t trials = 0;
  double outlier_fraction = 0.0;
  double ridge_mae_spread = 0.0;  // percent: (max - min) / median
  double lasso_mae_spread = 0.0;
  std::vector<double> ridge_mae;
  std::vector<double> lasso_mae;
  std::vector<double> ridge_alpha;
  std::vector<double> lasso_alpha;
};

// One fixed dataset; each trial corrupts a different seeded subset of the
// training targets, tunes alpha by cross-validation, refits and scores on
// the clean held-out split. Throws Error when trials < 10.
RobustnessReport robustness_trial(const RobustnessConfig& cfg);

// (max - min) / median * 100 of a non-empty sample.
double spread_percent(std::vector<double> values);

}  // namespace costorch::bench
