#pragma once

// Duration models for workflow runs: feature encoding, linear-family fits
// (OLS, ridge, lasso, elastic net), cross-validated alpha search, error
// metrics and the conversion of a fitted model into a duration table.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "costorch/core.hpp"

namespace costorch::predictor {

struct RunRecord {
  Id job_id;
  std::optional<double> cpu_cores;
  std::optional<double> memory_gb;
  WorkloadProfile profile;
  double observed_duration_s = 0.0;

  bool operator==(const RunRecord&) const = default;
};

// Ordered feature names. Numeric names match RunRecord fields; a name of
// the form "task_type:<value>" is a one-hot indicator.
class FeatureSchema {
 public:
  // Every numeric field plus both task-type indicators.
  static FeatureSchema standard();
  // As standard() but without the io_intensive indicator, so the design
  // stays full rank next to the intercept.
  static FeatureSchema reference_coded();
  // Throws SchemaError for an unknown name.
  static FeatureSchema from_names(std::vector<std::string> names);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<std::string> names_;
};

using FeatureVector = std::vector<double>;

// Throws MissingFeature naming the first absent field.
FeatureVector extract_features(const RunRecord& r, const FeatureSchema& schema);

struct Dataset {
  FeatureSchema schema;
  std::vector<FeatureVector> x;
  std::vector<double> y;  // seconds

  std::size_t size() const { return y.size(); }
};

Dataset make_dataset(const std::vector<RunRecord>& records, const FeatureSchema& schema);

enum class Family { ols, ridge, lasso, elastic_net };

const char* to_string(Family f);
std::optional<Family> parse_family(std::string_view s);

// Penalized loss, with z the standardized features and r the residual:
//   (1/2n) |r|^2 + alpha * (l1_ratio |beta|_1 + (1 - l1_ratio)/2 |beta|^2)
// ridge fixes l1_ratio = 0, lasso l1_ratio = 1, ols alpha = 0.
struct FitSpec {
  Family family = Family::ridge;
  double alpha = 1.0;
  double l1_ratio = 0.5;
};

struct LinearModel {
  Family family = Family::ridge;
  FeatureSchema schema;
  double alpha = 0.0;
  double l1_ratio = 0.0;
  std::vector<double> mean;
  std::vector<double> scale;         // population std; 0 marks a constant feature
  std::vector<double> coefficients;  // on standardized features
  double intercept = 0.0;            // mean of the targets

  // Coefficients and intercept in the units of the raw features.
  std::vector<double> raw_coefficients() const;
  double raw_intercept() const;

  bool operator==(const LinearModel&) const = default;
};

inline constexpr double kCoordinateTolerance = 1e-8;
inline constexpr int kCoordinateMaxSweeps = 10000;

// Throws TooFewSamples below 2 samples, DegenerateDesign for OLS on a rank
// deficient design, Error for invalid alpha or l1_ratio.
LinearModel fit(const Dataset& data, const FitSpec& spec);

inline constexpr double kDefaultFloorSeconds = 1.0;

// Throws ArityMismatch.
double predict(const LinearModel& m, const FeatureVector& x, double floor_s = kDefaultFloorSeconds);
double predict_raw(const LinearModel& m, const FeatureVector& x);

struct RegressionMetrics {
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  std::optional<double> mape;  // percent, over samples with y > 0; absent if none
  std::size_t n = 0;
};

// Throws TooFewSamples when empty, ArityMismatch on length mismatch.
RegressionMetrics regression_metrics(const std::vector<double>& y, const std::vector<double>& yhat);
RegressionMetrics evaluate(const LinearModel& m, const Dataset& data,
                           double floor_s = kDefaultFloorSeconds);

struct TuneConfig {
  Family family = Family::ridge;
  double l1_ratio = 0.5;
  std::size_t folds = 5;
  std::vector<double> coarse_grid{0.01, 0.1, 1.0, 10.0};
  double fine_step = 0.01;
  double min_alpha = 0.01;
  double max_alpha = 10.0;
  // Folds are sample index mod k unless a shuffle seed is given.
  std::optional<std::uint64_t> shuffle_seed;
};

struct TuneResult {
  double best_alpha = 0.0;
  std::map<double, double> cv_score_by_alpha;  // mean held-out MAE
  std::size_t folds = 0;
};

// Throws TooFewSamples when there are fewer samples than folds.
TuneResult tune_alpha(const Dataset& data, const TuneConfig& cfg = {});

struct Correlation {
  std::string feature;
  double r = 0.0;
  bool degenerate = false;
};

// Sorted by |r| descending, then by name. Throws TooFewSamples.
std::vector<Correlation> correlations(const Dataset& data);

// Expert-experience stand-in: each job's mean observed duration, falling
// back to the overall mean for unseen jobs.
class HistoricalMeanBaseline {
 public:
  static HistoricalMeanBaseline fit(const std::vector<RunRecord>& records);
  double predict(const Id& job_id) const;

 private:
  std::map<Id, double> per_job_;
  double overall_ = 0.0;
};

// Predicted hours for every (workflow, config) of `p`. Resource features
// are device_count times the config's per-device cpu and memory; the rest
// comes from each workflow's profile. Throws MissingFeature.
DurationTable build_duration_table(const LinearModel& m, const Problem& p,
                                   double floor_s = kDefaultFloorSeconds);

}  // namespace costorch::predictor
