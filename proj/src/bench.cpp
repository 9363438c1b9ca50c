#include "costorch/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace costorch::bench {

namespace {

using Rng = std::mt19937_64;

double draw(Rng& rng, Range r) { return std::uniform_real_distribution<double>(r.lo, r.hi)(rng); }

double round_to(double v, double unit) { return std::round(v / unit) * unit; }

std::string padded(char prefix, std::size_t index, std::size_t width) {
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

std::size_t digits_for(std::size_t count) { return count <= 1 ? 1 : std::to_string(count - 1).size(); }

void check_range(const char* name, Range r) {
  if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
    throw Error(std::string("generator range ") + name + " is empty");
}

void check_config(const GeneratorConfig& c) {
  if (c.workflow_count < 1 || c.device_count < 1 || c.configs_per_device < 1)
    throw Error("generator counts must be >= 1");
  if (!(c.precedence_density >= 0.0 && c.precedence_density <= 1.0))
    throw Error("precedence_density must lie in [0, 1]");
  if (!(c.window_slack_factor >= 1.0)) throw Error("window_slack_factor must be >= 1");
  if (!(c.duration_noise >= 0.0 && c.duration_noise < 1.0)) throw Error("duration_noise must lie in [0, 1)");
  check_range("base_rate", c.base_rate);
  check_range("overflow_multiplier", c.overflow_multiplier);
  check_range("prepurchased_hours", c.prepurchased_hours);
  check_range("work_hours", c.work_hours);
  check_range("device_speed", c.device_speed);
  check_range("scaling_exponent", c.scaling_exponent);
  check_range("earliest_start", c.earliest_start);
  if (c.base_rate.lo <= 0.0 || c.overflow_multiplier.lo < 1.0 || c.prepurchased_hours.lo < 0.0 ||
      c.work_hours.lo <= 0.0 || c.device_speed.lo <= 0.0 || c.earliest_start.lo < 0.0)
    throw Error("generator ranges must be positive (overflow multiplier >= 1)");
}

WorkloadProfile random_profile(Rng& rng) {
  std::uniform_int_distribution<int> par(1, 16), sub(1, 200), tab(1, 30), code(200, 20000), coin(0, 1);
  WorkloadProfile p;
  p.parallelism = par(rng);
  p.subtask_count = sub(rng);
  p.table_count = tab(rng);
  p.code_length = code(rng);
  p.dataset_volume_gb = round_to(std::exp(draw(rng, {0.0, std::log(500.0)})), 0.01);
  p.disk_volume_gb = round_to(*p.dataset_volume_gb * draw(rng, {1.0, 1.4}), 0.01);
  p.task_type = coin(rng) ? TaskType::compute_intensive : TaskType::io_intensive;
  return p;
}

}  // namespace

Problem generate_problem(const GeneratorConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);
  Problem p;

  const std::size_t dw = digits_for(cfg.device_count), kw = digits_for(cfg.configs_per_device);
  std::vector<double> speed, gamma;
  static constexpr double kCores[] = {4.0, 8.0, 16.0};
  for (std::size_t d = 0; d < cfg.device_count; ++d) {
    DeviceCatalogEntry dev;
    dev.id = padded('d', d, dw);
    dev.base_rate = std::max(0.01, round_to(draw(rng, cfg.base_rate), 0.01));
    dev.overflow_rate = std::max(dev.base_rate, round_to(dev.base_rate * draw(rng, cfg.overflow_multiplier), 0.01));
    dev.prepurchased_hours = round_to(draw(rng, cfg.prepurchased_hours), 0.1);
    speed.push_back(draw(rng, cfg.device_speed));
    gamma.push_back(draw(rng, cfg.scaling_exponent));
    for (std::size_t k = 0; k < cfg.configs_per_device; ++k) {
      const double cores = kCores[d % 3];
      p.configs.push_back({dev.id, padded('k', k, kw), static_cast<int>(k + 1), cores, 4.0 * cores});
    }
    p.devices.push_back(std::move(dev));
  }

  const std::size_t ww = std::max<std::size_t>(2, digits_for(cfg.workflow_count));
  std::vector<double> fastest(cfg.workflow_count);
  std::vector<std::vector<std::size_t>> preds(cfg.workflow_count);
  for (std::size_t i = 0; i < cfg.workflow_count; ++i) {
    WorkflowSpec w;
    w.id = padded('w', i, ww);
    w.earliest_start = round_to(draw(rng, cfg.earliest_start), 0.1);
    for (std::size_t j = 0; j < i; ++j)
      if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.precedence_density) {
        w.predecessors.push_back(padded('w', j, ww));
        preds[i].push_back(j);
      }
    w.profile = random_profile(rng);

    const double work = draw(rng, cfg.work_hours);
    fastest[i] = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < p.configs.size(); ++c) {
      const auto& opt = p.configs[c];
      const std::size_t d = c / cfg.configs_per_device;
      const double noise = 1.0 + cfg.duration_noise * draw(rng, {-1.0, 1.0});
      const double h = std::max(0.01, round_to(work * speed[d] / std::pow(opt.device_count, gamma[d]) * noise, 0.001));
      p.durations.set(w.id, opt.device_id, opt.config_id, h);
      fastest[i] = std::min(fastest[i], h);
    }
    p.workflows.push_back(std::move(w));
  }

  // Index order is topological, so one pass gives the earliest finishes.
  std::vector<double> finish(cfg.workflow_count);
  for (std::size_t i = 0; i < cfg.workflow_count; ++i) {
    auto& w = p.workflows[i];
    double start = w.earliest_start;
    for (std::size_t j : preds[i]) start = std::max(start, finish[j]);
    finish[i] = start + fastest[i];
    const double span = cfg.window_slack_factor * (finish[i] - w.earliest_start);
    w.deadline = std::ceil((w.earliest_start + span) * 1000.0 - 1e-6) / 1000.0;
    w.deadline = std::max(w.deadline, finish[i]);
  }
  return p;
}

BruteForceResult brute_force_optimum(const ValidatedProblem& vp, std::uint64_t limit) {
  const std::size_t n = vp.workflow_count();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t k = vp.options(i).size();
    if (total > limit / k) {
      std::ostringstream os;
      os << "enumeration exceeds the limit of " << limit << " assignments";
      throw TooLarge(os.str());
    }
    total *= k;
  }

  const auto& wfs = vp.problem().workflows;
  const auto& devs = vp.problem().devices;
  const auto order = vp.id_order();
  const auto topo = vp.topological_order();
  std::vector<std::size_t> pick(n, 0), best_pick;
  std::vector<double> finish(n), usage(devs.size());
  double best = 0.0;
  BruteForceResult out;

  while (true) {
    ++out.enumerated;
    bool ok = true;
    for (std::size_t i : topo) {
      double start = wfs[i].earliest_start;
      for (std::size_t k : vp.predecessors(i)) start = std::max(start, finish[k]);
      finish[i] = start + vp.options(i)[pick[i]].hours;
      if (finish[i] > wfs[i].deadline + kScheduleTolerance) {
        ok = false;
        break;
      }
    }
    if (ok) {
      std::fill(usage.begin(), usage.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& o = vp.options(i)[pick[i]];
        usage[o.device] += o.hours * o.device_count;
      }
      double cost = 0.0;
      for (std::size_t d = 0; d < devs.size() && ok; ++d) {
        if (devs[d].usage_cap && usage[d] > *devs[d].usage_cap + kScheduleTolerance) ok = false;
        cost += tiered_cost(usage[d], devs[d].prepurchased_hours, devs[d].base_rate, devs[d].overflow_rate);
      }
      if (ok && (best_pick.empty() || cost < best)) {
        best = cost;
        best_pick = pick;
      }
    }
    // Odometer with the last workflow in id order turning fastest, so the
    // visit order is lexicographic and the first minimum wins ties.
    std::size_t pos = n;
    while (pos > 0) {
      const std::size_t w = order[pos - 1];
      if (++pick[w] < vp.options(w).size()) break;
      pick[w] = 0;
      --pos;
    }
    if (pos == 0) break;
  }

  if (!best_pick.empty() || n == 0) {
    if (n == 0) best_pick.clear();
    out.assignment = vp.to_assignment(best_pick);
    out.cost = evaluate_cost(vp, *out.assignment).total;
  }
  return out;
}

GeneratedRecords generate_records(const RecordConfig& cfg, std::uint64_t seed) {
  if (!(cfg.noise_sigma >= 0.0)) throw Error("noise_sigma must be >= 0");
  Rng rng(seed);
  GeneratedRecords out;
  auto& t = out.truth;
  t.schema = predictor::FeatureSchema::reference_coded();
  // cpu, memory, parallelism, subtasks, tables, code length, dataset, disk, compute-intensive
  t.coefficients = {-15.0, -1.0, -10.0, 6.0, 20.0, 0.01, 3.0, 2.0, 400.0};
  t.intercept = 1200.0;
  t.noise_sigma = cfg.noise_sigma;

  static constexpr double kCpu[] = {2, 4, 8, 16, 32};
  std::uniform_int_distribution<int> cpu(0, 4);
  std::normal_distribution<double> gauss(0.0, 1.0);
  out.records.reserve(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    predictor::RunRecord r;
    r.job_id = padded('j', i, digits_for(cfg.count));
    r.cpu_cores = kCpu[cpu(rng)];
    r.memory_gb = std::max(1.0, round_to(4.0 * *r.cpu_cores * (1.0 + 0.1 * gauss(rng)), 0.1));
    r.profile = random_profile(rng);
    const auto x = predictor::extract_features(r, t.schema);
    double y = t.intercept;
    for (std::size_t j = 0; j < x.size(); ++j) y += t.coefficients[j] * x[j];
    r.observed_duration_s = std::max(1.0, y + cfg.noise_sigma * gauss(rng));
    out.records.push_back(std::move(r));
  }
  return out;
}

double spread_percent(std::vector<double> v) {
  if (v.empty()) throw Error("spread of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  const double median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  const double range = v.back() - v.front();
  if (range == 0.0) return 0.0;
  return median > 0.0 ? 100.0 * range / median : std::numeric_limits<double>::infinity();
}

RobustnessReport robustness_trial(const RobustnessConfig& cfg) {
  if (cfg.trials < 10) throw Error("robustness needs at least 10 trials");
  if (!(cfg.outlier_fraction >= 0.0 && cfg.outlier_fraction < 1.0))
    throw Error("outlier_fraction must lie in [0, 1)");
  if (!(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction < 1.0))
    throw Error("holdout_fraction must lie in (0, 1)");

  const auto gen = generate_records(cfg.data, cfg.seed);
  const auto full = predictor::make_dataset(gen.records, gen.truth.schema);
  const std::size_t n = full.size();
  const auto n_hold = static_cast<std::size_t>(std::round(cfg.holdout_fraction * static_cast<double>(n)));
  const std::size_t n_train = n - n_hold;

  predictor::Dataset train{full.schema, {full.x.begin(), full.x.begin() + static_cast<long>(n_train)},
                           {full.y.begin(), full.y.begin() + static_cast<long>(n_train)}};
  const predictor::Dataset held{full.schema, {full.x.begin() + static_cast<long>(n_train), full.x.end()},
                                {full.y.begin() + static_cast<long>(n_train), full.y.end()}};
  const auto n_out =
      static_cast<std::size_t>(std::round(cfg.outlier_fraction * static_cast<double>(n_train)));

  RobustnessReport rep;
  rep.trials = cfg.trials;
  rep.outlier_fraction = cfg.outlier_fraction;
  std::vector<std::size_t> idx(n_train);
  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    Rng rng(cfg.seed ^ (0x9E3779B97F4A7C15ULL * (trial + 1)));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    predictor::Dataset corrupted = train;
    // Partial Fisher-Yates: the first n_out slots are a uniform sample.
    for (std::size_t k = 0; k < n_out; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n_train - 1);
      std::swap(idx[k], idx[pick(rng)]);
      corrupted.y[idx[k]] *= cfg.outlier_multiplier;
    }
    for (auto family : {predictor::Family::ridge, predictor::Family::lasso}) {
      predictor::TuneConfig tc;
      tc.family = family;
      tc.folds = cfg.folds;
      const double alpha = predictor::tune_alpha(corrupted, tc).best_alpha;
      const auto model = predictor::fit(corrupted, {family, alpha, 0.0});
      const double mae = predictor::evaluate(model, held).mae;
      (family == predictor::Family::ridge ? rep.ridge_mae : rep.lasso_mae).push_back(mae);
      (family == predictor::Family::ridge ? rep.ridge_alpha : rep.lasso_alpha).push_back(alpha);
    }
  }
  rep.ridge_mae_spread = spread_percent(rep.ridge_mae);
  rep.lasso_mae_spread = spread_percent(rep.lasso_mae);
  return rep;
}

}  // namespace costorch::bench
