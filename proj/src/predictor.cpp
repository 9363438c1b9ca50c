#include "costorch/predictor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace costorch::predictor {

namespace {

constexpr const char* kTaskPrefix = "task_type:";

const std::vector<std::string>& numeric_fields() {
  static const std::vector<std::string> names{
      "cpu_cores",  "memory_gb",   "parallelism",       "subtask_count",
      "table_count", "code_length", "dataset_volume_gb", "disk_volume_gb"};
  return names;
}

std::optional<double> numeric_value(const RunRecord& r, const std::string& name) {
  const auto& p = r.profile;
  if (name == "cpu_cores") return r.cpu_cores;
  if (name == "memory_gb") return r.memory_gb;
  if (name == "parallelism") return p.parallelism;
  if (name == "subtask_count") return p.subtask_count;
  if (name == "table_count") return p.table_count;
  if (name == "code_length") return p.code_length;
  if (name == "dataset_volume_gb") return p.dataset_volume_gb;
  if (name == "disk_volume_gb") return p.disk_volume_gb;
  return std::nullopt;
}

bool is_numeric(const std::string& name) {
  const auto& f = numeric_fields();
  return std::find(f.begin(), f.end(), name) != f.end();
}

std::optional<TaskType> indicator(const std::string& name) {
  if (name.rfind(kTaskPrefix, 0) != 0) return std::nullopt;
  return parse_task_type(std::string_view(name).substr(std::string_view(kTaskPrefix).size()));
}

// Standardized second moments of a subset of rows.
struct Moments {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  Eigen::MatrixXd gram;  // Z^T Z / n
  Eigen::VectorXd cov;   // Z^T (y - ybar) / n
  double ybar = 0.0;
  std::size_t n = 0;
};

bool constant_feature(double std, double mean) { return std <= 1e-12 * (1.0 + std::abs(mean)); }

Moments moments(const Dataset& d, const std::vector<std::size_t>& rows) {
  const auto p = static_cast<Eigen::Index>(d.schema.size());
  Moments m;
  m.n = rows.size();
  const double n = static_cast<double>(rows.size());
  m.mean = Eigen::VectorXd::Zero(p);
  for (std::size_t i : rows) {
    m.mean += Eigen::Map<const Eigen::VectorXd>(d.x[i].data(), p);
    m.ybar += d.y[i];
  }
  m.mean /= n;
  m.ybar /= n;

  Eigen::MatrixXd centered(static_cast<Eigen::Index>(rows.size()), p);
  Eigen::VectorXd yc(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    centered.row(static_cast<Eigen::Index>(r)) =
        Eigen::Map<const Eigen::VectorXd>(d.x[rows[r]].data(), p) - m.mean;
    yc(static_cast<Eigen::Index>(r)) = d.y[rows[r]] - m.ybar;
  }
  m.scale = (centered.colwise().squaredNorm() / n).cwiseSqrt().transpose();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (constant_feature(m.scale(j), m.mean(j))) {
      m.scale(j) = 0.0;
      centered.col(j).setZero();
    } else {
      centered.col(j) /= m.scale(j);
    }
  }
  m.gram = centered.transpose() * centered / n;
  m.cov = centered.transpose() * yc / n;
  return m;
}

std::vector<Eigen::Index> active_set(const Moments& m) {
  std::vector<Eigen::Index> a;
  for (Eigen::Index j = 0; j < m.scale.size(); ++j)
    if (m.scale(j) > 0.0) a.push_back(j);
  return a;
}

Eigen::VectorXd solve_closed_form(const Moments& m, double alpha) {
  const auto active = active_set(m);
  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m.scale.size());
  if (k == 0) return beta;
  Eigen::MatrixXd g(k, k);
  Eigen::VectorXd c(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    c(a) = m.cov(active[a]);
    for (Eigen::Index b = 0; b < k; ++b) g(a, b) = m.gram(active[a], active[b]);
  }
  Eigen::VectorXd sol;
  if (alpha == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g);
    qr.setThreshold(1e-10);
    if (qr.rank() < k)
      throw DegenerateDesign("design is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                             std::to_string(k) + "); use a penalized family or drop collinear features");
    sol = qr.solve(c);
  } else {
    g.diagonal().array() += alpha;
    sol = g.llt().solve(c);
  }
  for (Eigen::Index a = 0; a < k; ++a) beta(active[a]) = sol(a);
  return beta;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

Eigen::VectorXd solve_coordinate_descent(const Moments& m, double alpha, double l1_ratio) {
  const auto active = active_set(m);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m.scale.size());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(m.scale.size());  // gram * beta
  const double l1 = alpha * l1_ratio;
  const double l2 = alpha * (1.0 - l1_ratio);
  for (int sweep = 0; sweep < kCoordinateMaxSweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j : active) {
      const double gjj = m.gram(j, j);
      const double rho = m.cov(j) - q(j) + gjj * beta(j);
      const double next = gjj + l2 > 0.0 ? soft_threshold(rho, l1) / (gjj + l2) : 0.0;
      const double delta = next - beta(j);
      if (delta != 0.0) {
        q += m.gram.col(j) * delta;
        beta(j) = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < kCoordinateTolerance) break;
  }
  return beta;
}

double effective_l1_ratio(const FitSpec& s) {
  switch (s.family) {
    case Family::ols:
    case Family::ridge:
      return 0.0;
    case Family::lasso:
      return 1.0;
    case Family::elastic_net:
      return s.l1_ratio;
  }
  return 0.0;
}

void check_spec(const FitSpec& s) {
  if (!(s.alpha >= 0.0) || !std::isfinite(s.alpha)) throw Error("alpha must be finite and >= 0");
  if (s.family == Family::elastic_net && !(s.l1_ratio >= 0.0 && s.l1_ratio <= 1.0))
    throw Error("l1_ratio must lie in [0, 1]");
}

Eigen::VectorXd solve_moments(const Moments& m, const FitSpec& s) {
  const double alpha = s.family == Family::ols ? 0.0 : s.alpha;
  if (s.family == Family::ols || s.family == Family::ridge) return solve_closed_form(m, alpha);
  return solve_coordinate_descent(m, alpha, effective_l1_ratio(s));
}

LinearModel package(const Dataset& d, const FitSpec& s, const Moments& m, const Eigen::VectorXd& beta) {
  LinearModel out;
  out.family = s.family;
  out.schema = d.schema;
  out.alpha = s.family == Family::ols ? 0.0 : s.alpha;
  out.l1_ratio = effective_l1_ratio(s);
  out.mean.assign(m.mean.data(), m.mean.data() + m.mean.size());
  out.scale.assign(m.scale.data(), m.scale.data() + m.scale.size());
  out.coefficients.assign(beta.data(), beta.data() + beta.size());
  out.intercept = m.ybar;
  return out;
}

void check_dataset(const Dataset& d) {
  if (d.x.size() != d.y.size()) throw ArityMismatch("feature rows and targets differ in count");
  for (const auto& row : d.x)
    if (row.size() != d.schema.size())
      throw ArityMismatch("feature row has " + std::to_string(row.size()) + " values, schema has " +
                          std::to_string(d.schema.size()));
}

}  // namespace

FeatureSchema FeatureSchema::standard() {
  auto names = numeric_fields();
  names.push_back(std::string(kTaskPrefix) + "io_intensive");
  names.push_back(std::string(kTaskPrefix) + "compute_intensive");
  return from_names(std::move(names));
}

FeatureSchema FeatureSchema::reference_coded() {
  auto names = numeric_fields();
  names.push_back(std::string(kTaskPrefix) + "compute_intensive");
  return from_names(std::move(names));
}

FeatureSchema FeatureSchema::from_names(std::vector<std::string> names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!is_numeric(names[i]) && !indicator(names[i]))
      throw SchemaError("features[" + std::to_string(i) + "]", "unknown feature '" + names[i] + "'");
    for (std::size_t j = 0; j < i; ++j)
      if (names[j] == names[i])
        throw SchemaError("features[" + std::to_string(i) + "]", "duplicate feature '" + names[i] + "'");
  }
  FeatureSchema s;
  s.names_ = std::move(names);
  return s;
}

FeatureVector extract_features(const RunRecord& r, const FeatureSchema& schema) {
  FeatureVector v;
  v.reserve(schema.size());
  for (const auto& name : schema.names()) {
    if (auto t = indicator(name)) {
      if (!r.profile.task_type) throw MissingFeature("task_type");
      v.push_back(*r.profile.task_type == *t ? 1.0 : 0.0);
      continue;
    }
    auto value = numeric_value(r, name);
    if (!value) throw MissingFeature(name);
    v.push_back(*value);
  }
  return v;
}

Dataset make_dataset(const std::vector<RunRecord>& records, const FeatureSchema& schema) {
  Dataset d{schema, {}, {}};
  d.x.reserve(records.size());
  d.y.reserve(records.size());
  for (const auto& r : records) {
    d.x.push_back(extract_features(r, schema));
    d.y.push_back(r.observed_duration_s);
  }
  return d;
}

const char* to_string(Family f) {
  switch (f) {
    case Family::ols:
      return "ols";
    case Family::ridge:
      return "ridge";
    case Family::lasso:
      return "lasso";
    case Family::elastic_net:
      return "elastic_net";
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view s) {
  for (Family f : {Family::ols, Family::ridge, Family::lasso, Family::elastic_net})
    if (s == to_string(f)) return f;
  return std::nullopt;
}

std::vector<double> LinearModel::raw_coefficients() const {
  std::vector<double> out(coefficients.size(), 0.0);
  for (std::size_t j = 0; j < out.size(); ++j)
    if (scale[j] > 0.0) out[j] = coefficients[j] / scale[j];
  return out;
}

double LinearModel::raw_intercept() const {
  const auto raw = raw_coefficients();
  double b = intercept;
  for (std::size_t j = 0; j < raw.size(); ++j) b -= raw[j] * mean[j];
  return b;
}

LinearModel fit(const Dataset& data, const FitSpec& spec) {
  check_dataset(data);
  check_spec(spec);
  if (data.size() < 2) throw TooFewSamples("fitting needs at least 2 samples");
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const Moments m = moments(data, rows);
  return package(data, spec, m, solve_moments(m, spec));
}

double predict_raw(const LinearModel& m, const FeatureVector& x) {
  if (x.size() != m.coefficients.size())
    throw ArityMismatch("feature vector has " + std::to_string(x.size()) + " values, model expects " +
                        std::to_string(m.coefficients.size()));
  double y = m.intercept;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (m.scale[j] > 0.0) y += m.coefficients[j] * (x[j] - m.mean[j]) / m.scale[j];
  return y;
}

double predict(const LinearModel& m, const FeatureVector& x, double floor_s) {
  return std::max(predict_raw(m, x), floor_s);
}

RegressionMetrics regression_metrics(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.size() != yhat.size()) throw ArityMismatch("truth and prediction lengths differ");
  if (y.empty()) throw TooFewSamples("metrics need at least one sample");
  RegressionMetrics m;
  m.n = y.size();
  double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
  std::size_t pct_n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - yhat[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    if (y[i] > 0.0) {
      pct_sum += std::abs(e) / y[i];
      ++pct_n;
    }
  }
  const double n = static_cast<double>(m.n);
  m.mae = abs_sum / n;
  m.mse = sq_sum / n;
  m.rmse = std::sqrt(m.mse);
  if (pct_n > 0) m.mape = 100.0 * pct_sum / static_cast<double>(pct_n);
  return m;
}

RegressionMetrics evaluate(const LinearModel& m, const Dataset& data, double floor_s) {
  check_dataset(data);
  std::vector<double> yhat;
  yhat.reserve(data.size());
  for (const auto& x : data.x) yhat.push_back(predict(m, x, floor_s));
  return regression_metrics(data.y, yhat);
}

TuneResult tune_alpha(const Dataset& data, const TuneConfig& cfg) {
  check_dataset(data);
  if (cfg.folds < 2) throw Error("cross-validation needs at least 2 folds");
  if (data.size() < cfg.folds)
    throw TooFewSamples(std::to_string(data.size()) + " samples for " + std::to_string(cfg.folds) +
                        " folds");
  const double steps_per_unit = std::round(1.0 / cfg.fine_step);
  if (!(cfg.fine_step > 0.0) || std::abs(steps_per_unit * cfg.fine_step - 1.0) > 1e-9)
    throw Error("fine_step must be the reciprocal of an integer");

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (cfg.shuffle_seed) {
    std::mt19937_64 rng(*cfg.shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> train(cfg.folds), held(cfg.folds);
  for (std::size_t pos = 0; pos < n; ++pos)
    for (std::size_t f = 0; f < cfg.folds; ++f)
      (pos % cfg.folds == f ? held[f] : train[f]).push_back(order[pos]);

  struct Fold {
    Moments m;
    Eigen::MatrixXd z;  // held-out rows standardized with training moments
    Eigen::VectorXd y;
  };
  const auto p = static_cast<Eigen::Index>(data.schema.size());
  std::vector<Fold> folds;
  for (std::size_t f = 0; f < cfg.folds; ++f) {
    Fold fold{moments(data, train[f]), Eigen::MatrixXd(static_cast<Eigen::Index>(held[f].size()), p),
              Eigen::VectorXd(static_cast<Eigen::Index>(held[f].size()))};
    for (std::size_t r = 0; r < held[f].size(); ++r) {
      const auto i = held[f][r];
      const auto row = static_cast<Eigen::Index>(r);
      fold.y(row) = data.y[i];
      for (Eigen::Index j = 0; j < p; ++j)
        fold.z(row, j) = fold.m.scale(j) > 0.0 ? (data.x[i][j] - fold.m.mean(j)) / fold.m.scale(j) : 0.0;
    }
    folds.push_back(std::move(fold));
  }

  TuneResult out;
  out.folds = cfg.folds;
  FitSpec spec{cfg.family, 0.0, cfg.l1_ratio};
  check_spec(spec);
  auto score = [&](double alpha) {
    if (auto it = out.cv_score_by_alpha.find(alpha); it != out.cv_score_by_alpha.end()) return it->second;
    spec.alpha = alpha;
    double total = 0.0;
    for (const auto& fold : folds) {
      const Eigen::VectorXd beta = solve_moments(fold.m, spec);
      const Eigen::VectorXd yhat = ((fold.z * beta).array() + fold.m.ybar).cwiseMax(kDefaultFloorSeconds);
      total += (fold.y - yhat).cwiseAbs().mean();
    }
    const double s = total / static_cast<double>(folds.size());
    out.cv_score_by_alpha.emplace(alpha, s);
    return s;
  };
  auto best_of = [&](const std::vector<double>& grid) {
    double best = grid.front();
    double best_score = score(best);
    for (double a : grid) {
      const double s = score(a);
      if (s < best_score || (s == best_score && a < best)) {
        best = a;
        best_score = s;
      }
    }
    return best;
  };

  std::vector<double> coarse = cfg.coarse_grid;
  if (coarse.empty()) throw Error("coarse grid is empty");
  std::sort(coarse.begin(), coarse.end());
  const double coarse_best = best_of(coarse);

  const double lo = std::max(cfg.min_alpha, coarse_best / 10.0);
  const double hi = std::min(cfg.max_alpha, coarse_best * 10.0);
  std::vector<double> fine;
  for (auto i = static_cast<long long>(std::ceil(lo * steps_per_unit - 1e-9));
       static_cast<double>(i) <= hi * steps_per_unit + 1e-9; ++i)
    fine.push_back(static_cast<double>(i) / steps_per_unit);
  if (fine.empty()) fine.push_back(coarse_best);
  best_of(fine);

  // The overall minimum over everything scored, smaller alpha on ties.
  out.best_alpha = out.cv_score_by_alpha.begin()->first;
  double best_score = out.cv_score_by_alpha.begin()->second;
  for (const auto& [a, s] : out.cv_score_by_alpha)
    if (s < best_score) {
      best_score = s;
      out.best_alpha = a;
    }
  return out;
}

std::vector<Correlation> correlations(const Dataset& data) {
  check_dataset(data);
  if (data.size() < 2) throw TooFewSamples("correlation needs at least 2 samples");
  const std::size_t n = data.size();
  const double ybar = std::accumulate(data.y.begin(), data.y.end(), 0.0) / static_cast<double>(n);
  double syy = 0.0;
  for (double v : data.y) syy += (v - ybar) * (v - ybar);

  std::vector<Correlation> out;
  for (std::size_t j = 0; j < data.schema.size(); ++j) {
    double xbar = 0.0;
    for (const auto& row : data.x) xbar += row[j];
    xbar /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = data.x[i][j] - xbar;
      sxx += dx * dx;
      sxy += dx * (data.y[i] - ybar);
    }
    Correlation c{data.schema.names()[j], 0.0, false};
    const double sx = std::sqrt(sxx / static_cast<double>(n));
    const double sy = std::sqrt(syy / static_cast<double>(n));
    if (constant_feature(sx, xbar) || constant_feature(sy, ybar))
      c.degenerate = true;
    else
      c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const Correlation& a, const Correlation& b) {
    if (std::abs(a.r) != std::abs(b.r)) return std::abs(a.r) > std::abs(b.r);
    return a.feature < b.feature;
  });
  return out;
}

HistoricalMeanBaseline HistoricalMeanBaseline::fit(const std::vector<RunRecord>& records) {
  HistoricalMeanBaseline b;
  std::map<Id, std::pair<double, std::size_t>> acc;
  double total = 0.0;
  for (const auto& r : records) {
    auto& [sum, count] = acc[r.job_id];
    sum += r.observed_duration_s;
    ++count;
    total += r.observed_duration_s;
  }
  for (const auto& [job, sc] : acc) b.per_job_[job] = sc.first / static_cast<double>(sc.second);
  if (!records.empty()) b.overall_ = total / static_cast<double>(records.size());
  return b;
}

double HistoricalMeanBaseline::predict(const Id& job_id) const {
  auto it = per_job_.find(job_id);
  return it == per_job_.end() ? overall_ : it->second;
}

DurationTable build_duration_table(const LinearModel& m, const Problem& p, double floor_s) {
  DurationTable table;
  const double floor_h = std::max(floor_s, 1.0) / 3600.0;
  for (const auto& w : p.workflows) {
    RunRecord r;
    r.job_id = w.id;
    if (w.profile) r.profile = *w.profile;
    for (const auto& c : p.configs) {
      r.cpu_cores = c.device_count * c.cpu_cores;
      r.memory_gb = c.device_count * c.memory_gb;
      const double seconds = predict(m, extract_features(r, m.schema), floor_s);
      table.set(w.id, c.device_id, c.config_id, std::max(seconds / 3600.0, floor_h));
    }
  }
  return table;
}

}  // namespace costorch::predictor
