#include <Eigen/Dense>
#include <random>
#include <set>

#include "costorch/error.hpp"
#include "costorch/predictor.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace costorch;
using namespace costorch::predictor;

namespace {

RunRecord full_record(double cpu, TaskType t) {
  RunRecord r;
  r.job_id = "job";
  r.cpu_cores = cpu;
  r.memory_gb = 32;
  r.profile = {4.0, 12.0, 3.0, 800.0, 50.0, 20.0, t};
  r.observed_duration_s = 600;
  return r;
}

Dataset one_feature(const std::vector<double>& x, const std::vector<double>& y) {
  Dataset d{FeatureSchema::from_names({"cpu_cores"}), {}, y};
  for (double v : x) d.x.push_back({v});
  return d;
}

Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t p, double noise) {
  static const std::vector<std::string> names{"cpu_cores",     "memory_gb",   "parallelism",
                                              "subtask_count", "table_count", "code_length",
                                              "dataset_volume_gb", "disk_volume_gb"};
  Dataset d{FeatureSchema::from_names({names.begin(), names.begin() + static_cast<long>(p)}), {}, {}};
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-3.0, 3.0), shift(-5.0, 5.0), spread(0.5, 4.0);
  std::vector<double> beta(p), loc(p), sc(p);
  for (std::size_t j = 0; j < p; ++j) {
    beta[j] = coef(rng);
    loc[j] = shift(rng);
    sc[j] = spread(rng);
  }
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector x(p);
    double y = 10.0;
    for (std::size_t j = 0; j < p; ++j) {
      x[j] = loc[j] + sc[j] * g(rng);
      y += beta[j] * x[j];
    }
    // Mild collinearity between the first two columns.
    if (p >= 2) x[1] = 0.7 * x[0] + 0.3 * x[1];
    d.x.push_back(std::move(x));
    d.y.push_back(y + noise * g(rng));
  }
  return d;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("features are encoded in schema order") {
  const auto schema = FeatureSchema::standard();
  const auto v = extract_features(full_record(8, TaskType::io_intensive), schema);
  REQUIRE(v.size() == schema.size());
  CHECK(v[0] == 8.0);
  CHECK(schema.names()[8] == "task_type:io_intensive");
  CHECK(v[8] == 1.0);
  CHECK(v[9] == 0.0);

  const auto w = extract_features(full_record(8, TaskType::compute_intensive), schema);
  for (std::size_t j = 0; j < 8; ++j) CHECK(v[j] == w[j]);
  CHECK(w[8] == 0.0);
  CHECK(w[9] == 1.0);

  CHECK(FeatureSchema::reference_coded().size() == schema.size() - 1);
}

TEST_CASE("a missing field is named") {
  auto r = full_record(8, TaskType::io_intensive);
  r.profile.disk_volume_gb.reset();
  try {
    extract_features(r, FeatureSchema::standard());
    FAIL("expected MissingFeature");
  } catch (const MissingFeature& e) {
    CHECK(e.field() == "disk_volume_gb");
  }
  CHECK_THROWS_AS(FeatureSchema::from_names({"cpu_cores", "gpu_count"}), SchemaError);
}

TEST_CASE("ols recovers an exact line") {
  auto m = fit(one_feature({1, 2, 3, 4, 5}, {3, 5, 7, 9, 11}), {Family::ols, 0.0, 0.0});
  CHECK(std::abs(m.raw_coefficients()[0] - 2.0) <= 1e-9);
  CHECK(std::abs(m.raw_intercept() - 1.0) <= 1e-9);
  CHECK(predict(m, {3.0}) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("a huge ridge penalty leaves only the mean") {
  auto m = fit(one_feature({1, 2, 3, 4, 5}, {3, 5, 7, 9, 11}), {Family::ridge, 1e12, 0.0});
  CHECK(std::abs(m.coefficients[0]) < 1e-9);
  CHECK(m.intercept == doctest::Approx(7.0));
}

TEST_CASE("predictions: zero model and the floor") {
  LinearModel m;
  m.schema = FeatureSchema::from_names({"cpu_cores", "memory_gb"});
  m.mean = {1.0, 2.0};
  m.scale = {1.0, 1.0};
  m.coefficients = {0.0, 0.0};
  m.intercept = 50.0;
  CHECK(predict(m, {123.0, -4.0}) == 50.0);
  m.intercept = -10.0;
  CHECK(predict_raw(m, {0.0, 0.0}) == -10.0);
  CHECK(predict(m, {0.0, 0.0}) == 1.0);
  CHECK_THROWS_AS(predict(m, {1.0}), ArityMismatch);
}

TEST_CASE("rank deficient designs") {
  Dataset d{FeatureSchema::standard(), {}, {}};
  for (int i = 0; i < 12; ++i) {
    auto r = full_record(4 + i, i % 2 ? TaskType::io_intensive : TaskType::compute_intensive);
    r.memory_gb = 3.0 * i;
    r.profile.subtask_count = i * i;
    r.observed_duration_s = 100 + 7 * i;
    d.x.push_back(extract_features(r, d.schema));
    d.y.push_back(r.observed_duration_s);
  }
  // Both indicators are present, so the design is collinear with the intercept.
  CHECK_THROWS_AS(fit(d, {Family::ols, 0.0, 0.0}), DegenerateDesign);
  CHECK_NOTHROW(fit(d, {Family::ridge, 0.5, 0.0}));
  CHECK_THROWS_AS(fit(one_feature({1}, {2}), {}), TooFewSamples);
}

TEST_CASE("constant features get a zero coefficient") {
  Dataset d{FeatureSchema::from_names({"cpu_cores", "memory_gb"}), {{1, 5}, {2, 5}, {3, 5}}, {2, 4, 6}};
  for (Family f : {Family::ols, Family::ridge, Family::lasso, Family::elastic_net}) {
    auto m = fit(d, {f, f == Family::ols ? 0.0 : 0.1, 0.5});
    CHECK(m.scale[1] == 0.0);
    CHECK(m.coefficients[1] == 0.0);
  }
}

TEST_CASE("metric golden cases") {
  auto zero = regression_metrics({5, 6, 7}, {5, 6, 7});
  CHECK(zero.mae == 0.0);
  CHECK(zero.mse == 0.0);
  CHECK(zero.rmse == 0.0);
  CHECK(*zero.mape == 0.0);

  auto one = regression_metrics({100}, {110});
  CHECK(one.mae == 10.0);
  CHECK(one.mse == 100.0);
  CHECK(*one.mape == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(one.rmse == 10.0);

  auto two = regression_metrics({100, 200}, {90, 220});
  CHECK(two.mae == 15.0);
  CHECK(two.mse == 250.0);
  CHECK(*two.mape == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(two.rmse == std::sqrt(250.0));

  auto no_pct = regression_metrics({0, 0}, {1, 2});
  CHECK_FALSE(no_pct.mape);
  CHECK(no_pct.mae == 1.5);
  CHECK_THROWS_AS(regression_metrics({}, {}), TooFewSamples);
  CHECK_THROWS_AS(regression_metrics({1}, {1, 2}), ArityMismatch);
}

TEST_CASE("property: rmse squared equals mse") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(0.0, 1000.0);
  std::uniform_int_distribution<int> len(1, 200);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> y(len(rng)), yhat;
    for (double& e : y) {
      e = v(rng);
      yhat.push_back(v(rng));
    }
    auto m = regression_metrics(y, yhat);
    CHECK(fixtures::close_rel(m.rmse * m.rmse, m.mse, 1e-9));
  }
}

TEST_CASE("property: ridge matches an iterative minimizer of the penalized loss") {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> alpha(0.05, 5.0);
  for (int t = 0; t < 20; ++t) {
    auto d = random_dataset(rng, 20, 4, 2.0);
    const double a = t == 0 ? 1.0 : alpha(rng);
    auto m = fit(d, {Family::ridge, a, 0.0});
    auto w = oracles::ridge_by_cg(d.x, d.y, a);
    CHECK(std::abs(m.intercept - w[0]) <= 1e-6);
    for (std::size_t j = 0; j < m.coefficients.size(); ++j)
      CHECK(std::abs(m.coefficients[j] - w[j + 1]) <= 1e-6);
  }
}

TEST_CASE("property: ridge satisfies its normal equations") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 30; ++t) {
    auto d = random_dataset(rng, 50, 6, 3.0);
    const double a = 0.1 * (t + 1);
    auto m = fit(d, {Family::ridge, a, 0.0});
    const std::size_t n = d.size(), p = m.coefficients.size();
    Eigen::MatrixXd z(n, p);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y(i) = d.y[i] - m.intercept;
      for (std::size_t j = 0; j < p; ++j) z(i, j) = (d.x[i][j] - m.mean[j]) / m.scale[j];
    }
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(m.coefficients.data(), p);
    Eigen::VectorXd residual = (z.transpose() * z / n + a * Eigen::MatrixXd::Identity(p, p)) * b -
                               z.transpose() * y / n;
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("property: alpha zero ridge equals ols; shrinkage is monotone") {
  std::mt19937_64 rng(22);
  const std::vector<double> grid{0.0, 0.01, 0.05, 0.1, 0.3, 1, 2, 5, 10, 100};
  for (int t = 0; t < 20; ++t) {
    auto d = random_dataset(rng, 40, 5, 1.0);
    auto ols = fit(d, {Family::ols, 0.0, 0.0});
    auto r0 = fit(d, {Family::ridge, 0.0, 0.0});
    for (std::size_t j = 0; j < ols.coefficients.size(); ++j)
      CHECK(std::abs(ols.coefficients[j] - r0.coefficients[j]) <= 1e-8);
    double prev = norm2(r0.coefficients);
    for (double a : grid) {
      const double now = norm2(fit(d, {Family::ridge, a, 0.0}).coefficients);
      CHECK(now <= prev + 1e-12);
      prev = now;
    }
  }
}

TEST_CASE("property: exact-fit data round trips through predict") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    auto d = random_dataset(rng, 30, 6, 0.0);
    for (double& y : d.y) y += 1000.0;  // keep clear of the floor
    auto m = fit(d, {Family::ols, 0.0, 0.0});
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(predict(m, d.x[i]) - d.y[i]) <= 1e-8);
  }
}

TEST_CASE("property: elastic net meets ridge and lasso at its ends") {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 20; ++t) {
    auto d = random_dataset(rng, 60, 6, 2.0);
    const double a = 0.05 * (t + 1);
    auto ridge = fit(d, {Family::ridge, a, 0.0});
    auto en0 = fit(d, {Family::elastic_net, a, 0.0});
    auto lasso = fit(d, {Family::lasso, a, 0.0});
    auto en1 = fit(d, {Family::elastic_net, a, 1.0});
    for (std::size_t j = 0; j < ridge.coefficients.size(); ++j) {
      CHECK(std::abs(ridge.coefficients[j] - en0.coefficients[j]) <= 1e-6);
      CHECK(std::abs(lasso.coefficients[j] - en1.coefficients[j]) <= 1e-6);
    }
  }
}

TEST_CASE("property: lasso and elastic net satisfy their optimality conditions") {
  std::mt19937_64 rng(25);
  for (int t = 0; t < 30; ++t) {
    auto d = random_dataset(rng, 80, 7, 4.0);
    const double a = 0.02 * (t + 1), rho = (t % 3) / 2.0;
    auto m = fit(d, {Family::elastic_net, a, rho});
    const std::size_t n = d.size(), p = m.coefficients.size();
    for (std::size_t j = 0; j < p; ++j) {
      // Gradient of the smooth part in coordinate j.
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double r = d.y[i] - m.intercept;
        for (std::size_t k = 0; k < p; ++k) r -= m.coefficients[k] * (d.x[i][k] - m.mean[k]) / m.scale[k];
        g -= r * (d.x[i][j] - m.mean[j]) / m.scale[j] / static_cast<double>(n);
      }
      g += a * (1.0 - rho) * m.coefficients[j];
      const double l1 = a * rho;
      if (m.coefficients[j] != 0.0)
        CHECK(std::abs(g + l1 * (m.coefficients[j] > 0 ? 1.0 : -1.0)) <= 1e-6);
      else
        CHECK(std::abs(g) <= l1 + 1e-6);
    }
  }
}

TEST_CASE("tuning picks the grid minimum when penalties only hurt") {
  std::mt19937_64 rng(30);
  auto d = random_dataset(rng, 60, 3, 0.0);
  for (double& y : d.y) y += 1000.0;
  auto r = tune_alpha(d);
  CHECK(r.best_alpha == 0.01);
  CHECK(r.folds == 5);
  // Exact data: every larger alpha shrinks further and scores worse.
  double prev = -1.0;
  for (const auto& [a, s] : r.cv_score_by_alpha) {
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("tuning breaks ties toward the smaller alpha") {
  // A constant feature leaves every alpha with the same score.
  Dataset d = one_feature({1, 1, 1, 1, 1, 1}, {10, 20, 30, 40, 50, 60});
  auto r = tune_alpha(d);
  CHECK(r.best_alpha == 0.01);
  CHECK(r.cv_score_by_alpha.size() > 4);
  CHECK_THROWS_AS(tune_alpha(one_feature({1, 2, 3}, {1, 2, 3})), TooFewSamples);
}

TEST_CASE("tuning prefers a real penalty on noisy collinear data") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  Dataset d{FeatureSchema::from_names({"cpu_cores", "memory_gb", "parallelism", "subtask_count",
                                       "table_count", "code_length"}),
            {},
            {}};
  for (int i = 0; i < 40; ++i) {
    const double base = g(rng);
    FeatureVector x{base, base + 0.05 * g(rng), base + 0.05 * g(rng), g(rng), g(rng), g(rng)};
    d.x.push_back(x);
    d.y.push_back(500.0 + 5.0 * base + 40.0 * g(rng));
  }
  auto r = tune_alpha(d);
  CHECK(r.best_alpha > 0.01);
  for (const auto& [a, s] : r.cv_score_by_alpha) CHECK(s >= r.cv_score_by_alpha.at(r.best_alpha));
}

TEST_CASE("fine grid covers a decade either side of the coarse winner") {
  std::mt19937_64 rng(32);
  auto d = random_dataset(rng, 50, 4, 5.0);
  auto r = tune_alpha(d);
  for (double a : {0.01, 0.1, 1.0, 10.0}) CHECK(r.cv_score_by_alpha.count(a) == 1);
  for (const auto& [a, s] : r.cv_score_by_alpha) {
    CHECK(a >= 0.01);
    CHECK(a <= 10.0);
    CHECK(std::abs(a * 100 - std::round(a * 100)) < 1e-9);
  }
  auto again = tune_alpha(d);
  CHECK(again.best_alpha == r.best_alpha);
  CHECK(again.cv_score_by_alpha == r.cv_score_by_alpha);
}

TEST_CASE("correlations") {
  Dataset d{FeatureSchema::from_names({"subtask_count", "table_count", "code_length"}), {}, {}};
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 30; ++i) {
    const double s = 1 + i;
    d.x.push_back({s, u(rng), 100.0});
    d.y.push_back(5.0 * s);
  }
  auto c = correlations(d);
  CHECK(c[0].feature == "subtask_count");
  CHECK(c[0].r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.back().feature == "code_length");
  CHECK(c.back().degenerate);
  CHECK(c.back().r == 0.0);
  CHECK_THROWS_AS(correlations(one_feature({1}, {1})), TooFewSamples);
}

TEST_CASE("planted drivers rank first") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::normal_distribution<double> noise(0.0, 0.5);
  Dataset d{FeatureSchema::from_names({"cpu_cores", "subtask_count", "disk_volume_gb", "table_count"}), {}, {}};
  for (int i = 0; i < 200; ++i) {
    FeatureVector x{u(rng), u(rng), u(rng), u(rng)};
    d.y.push_back(3.0 * x[1] + 2.0 * x[2] + noise(rng));
    d.x.push_back(std::move(x));
  }
  auto c = correlations(d);
  std::set<std::string> top{c[0].feature, c[1].feature};
  CHECK(top == std::set<std::string>{"subtask_count", "disk_volume_gb"});
}

TEST_CASE("duration tables from a model") {
  Problem p = fixtures::ProblemBuilder()
                  .workflow("a", 0, 100)
                  .workflow("b", 0, 100)
                  .device("d", 1, 2, 0)
                  .build();
  p.configs = {{"d", "small", 1, 4, 16}, {"d", "large", 2, 8, 32}};
  for (auto& w : p.workflows) w.profile = WorkloadProfile{4.0, 12.0, 3.0, 800.0, 50.0, 20.0, TaskType::io_intensive};

  LinearModel constant;
  constant.schema = FeatureSchema::from_names({"cpu_cores"});
  constant.mean = {0.0};
  constant.scale = {1.0};
  constant.coefficients = {0.0};
  constant.intercept = 3600.0;
  auto t = build_duration_table(constant, p);
  CHECK(t.entries.size() == 4);
  for (const auto& [k, h] : t.entries) CHECK(h == 1.0);

  LinearModel negative = constant;
  negative.coefficients = {-1000.0};  // cpu 16 drives the raw output below zero
  auto n = build_duration_table(negative, p);
  CHECK(*n.find("a", "d", "large") == 1.0 / 3600.0);

  // A planted negative cpu effect makes the bigger config faster.
  Dataset d{FeatureSchema::reference_coded(), {}, {}};
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(1.0, 64.0);
  for (int i = 0; i < 100; ++i) {
    auto r = full_record(u(rng), i % 2 ? TaskType::io_intensive : TaskType::compute_intensive);
    r.profile.subtask_count = u(rng);
    r.observed_duration_s = 5000.0 - 40.0 * *r.cpu_cores + 10.0 * *r.profile.subtask_count;
    d.x.push_back(extract_features(r, d.schema));
    d.y.push_back(r.observed_duration_s);
  }
  auto m = fit(d, {Family::ridge, 0.01, 0.0});
  CHECK(m.raw_coefficients()[0] < 0.0);
  auto planted = build_duration_table(m, p);
  CHECK(*planted.find("a", "d", "large") < *planted.find("a", "d", "small"));

  p.workflows[1].profile->table_count.reset();
  CHECK_THROWS_AS(build_duration_table(m, p), MissingFeature);
}

TEST_CASE("historical mean baseline") {
  std::vector<RunRecord> rs(3, full_record(1, TaskType::io_intensive));
  rs[0].observed_duration_s = 10;
  rs[1].observed_duration_s = 20;
  rs[2].job_id = "other";
  rs[2].observed_duration_s = 90;
  auto b = HistoricalMeanBaseline::fit(rs);
  CHECK(b.predict("job") == 15.0);
  CHECK(b.predict("other") == 90.0);
  CHECK(b.predict("new") == 40.0);
}
