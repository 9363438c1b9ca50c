#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <variant>

#include "costorch/bench.hpp"
#include "costorch/cli.hpp"
#include "costorch/io.hpp"
#include "costorch/predictor.hpp"
#include "costorch/solver.hpp"

namespace py = pybind11;
using namespace costorch;

namespace {

Assignment to_assignment(const std::map<std::string, std::pair<std::string, std::string>>& choice) {
  Assignment a;
  for (const auto& [w, dk] : choice) a.choice[w] = Choice{dk.first, dk.second};
  return a;
}

py::dict issues_to_dict(const std::vector<ValidationIssue>& issues) {
  py::list out;
  for (const auto& i : issues) {
    py::dict e;
    e["kind"] = to_string(i.kind);
    e["message"] = i.message;
    e["ids"] = i.ids;
    out.append(e);
  }
  py::dict d;
  d["valid"] = issues.empty();
  d["issues"] = out;
  return d;
}

std::optional<std::string> solve(const std::string& problem, double time_limit, std::uint64_t node_limit,
                                 double gap) {
  const auto vp = io::load_problem(problem);
  milp::SolverConfig cfg;
  cfg.time_limit_s = time_limit;
  cfg.node_limit = node_limit;
  cfg.absolute_gap = gap;
  milp::SolveOutcome s;
  {
    py::gil_scoped_release release;
    s = milp::solve(milp::build_milp(vp), cfg);
  }
  if (!s.solution) return std::nullopt;
  const io::SolveSummary summary{"branch_and_bound", milp::to_string(s.status), s.report.nodes_explored,
                                 s.report.nodes_pruned, s.report.best_bound};
  return io::save_schedule(io::make_schedule_document(s.solution->schedule, s.solution->cost, summary));
}

std::optional<std::string> brute_force(const std::string& problem) {
  const auto vp = io::load_problem(problem);
  const auto r = bench::brute_force_optimum(vp);
  if (!r.assignment) return std::nullopt;
  const auto schedule = std::get<Schedule>(earliest_schedule(vp, *r.assignment));
  const io::SolveSummary summary{"exhaustive", "optimal", r.enumerated, 0, r.cost};
  return io::save_schedule(io::make_schedule_document(schedule, evaluate_cost(vp, *r.assignment), summary));
}

py::dict cost(const std::string& problem,
              const std::map<std::string, std::pair<std::string, std::string>>& choice) {
  const auto vp = io::load_problem(problem);
  const auto c = evaluate_cost(vp, to_assignment(choice));
  py::list per_device;
  for (const auto& d : c.per_device) {
    py::dict e;
    e["device_id"] = d.device_id;
    e["usage"] = d.usage;
    e["tier_pivot"] = d.tier_pivot;
    e["base_cost"] = d.base_cost;
    e["overflow_cost"] = d.overflow_cost;
    e["cost"] = d.cost;
    per_device.append(e);
  }
  py::dict out;
  out["per_device"] = per_device;
  out["base_cost"] = c.base_cost;
  out["overflow_cost"] = c.overflow_cost;
  out["total"] = c.total;
  return out;
}

py::dict schedule(const std::string& problem,
                  const std::map<std::string, std::pair<std::string, std::string>>& choice) {
  const auto vp = io::load_problem(problem);
  const auto outcome = earliest_schedule(vp, to_assignment(choice));
  py::dict out;
  if (const auto* inf = std::get_if<Infeasible>(&outcome)) {
    std::map<std::string, double> deficits;
    for (const auto& c : inf->culprits) deficits[c.workflow_id] = c.deficit_hours;
    out["feasible"] = false;
    out["deficits"] = deficits;
    return out;
  }
  const auto& s = std::get<Schedule>(outcome);
  out["feasible"] = true;
  out["start"] = s.start;
  out["finish"] = s.finish;
  return out;
}

py::dict metrics(const std::vector<double>& y, const std::vector<double>& yhat) {
  const auto m = predictor::regression_metrics(y, yhat);
  py::dict out;
  out["mae"] = m.mae;
  out["mse"] = m.mse;
  out["rmse"] = m.rmse;
  out["mape"] = m.mape ? py::cast(*m.mape) : py::none();
  out["n"] = m.n;
  return out;
}

predictor::Family family(const std::string& name) {
  const auto f = predictor::parse_family(name);
  if (!f) throw py::value_error("unknown family: " + name);
  return *f;
}

predictor::FeatureSchema schema_for(predictor::Family f) {
  return f == predictor::Family::ols ? predictor::FeatureSchema::reference_coded()
                                     : predictor::FeatureSchema::standard();
}

std::string fit(const std::string& records, const std::string& name, double alpha, double l1_ratio) {
  const auto f = family(name);
  const auto data = predictor::make_dataset(io::load_records(records), schema_for(f));
  return io::save_model(predictor::fit(data, {f, alpha, l1_ratio}));
}

std::string tune(const std::string& records, const std::string& name, double l1_ratio, std::size_t folds,
                 std::optional<std::uint64_t> seed) {
  const auto f = family(name);
  const auto data = predictor::make_dataset(io::load_records(records), schema_for(f));
  predictor::TuneConfig cfg;
  cfg.family = f;
  cfg.l1_ratio = l1_ratio;
  cfg.folds = folds;
  cfg.shuffle_seed = seed;
  predictor::TuneResult r;
  {
    py::gil_scoped_release release;
    r = predictor::tune_alpha(data, cfg);
  }
  return io::save_tune_result(r, cfg);
}

std::string predict_durations(const std::string& model, const std::string& problem) {
  auto p = io::parse_problem(problem);
  p.durations = predictor::build_duration_table(io::load_model(model), p);
  return io::save_problem(p);
}

std::string generate_problem(std::uint64_t seed, std::size_t workflows, std::size_t devices, std::size_t configs,
                             double density, double slack) {
  bench::GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.workflow_count = workflows;
  cfg.device_count = devices;
  cfg.configs_per_device = configs;
  cfg.precedence_density = density;
  cfg.window_slack_factor = slack;
  return io::save_problem(bench::generate_problem(cfg));
}

std::string generate_records(std::size_t count, std::uint64_t seed, double noise) {
  return io::save_records(bench::generate_records({count, noise}, seed).records);
}

std::string report(const std::string& run_log) {
  const auto log = io::load_run_log(run_log);
  return io::save_report(io::orchestration_report(ValidatedProblem::from(log.problem), log));
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "costorch native core";

  static auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationFailed>(m, "ValidationFailed", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<SchemaError>(m, "SchemaError", base);
  py::register_exception<BadEnum>(m, "BadEnum", base);
  py::register_exception<MissingFeature>(m, "MissingFeature", base);
  py::register_exception<UnknownChoice>(m, "UnknownChoice", base);
  py::register_exception<TooLarge>(m, "TooLarge", base);
  py::register_exception<TooFewSamples>(m, "TooFewSamples", base);
  py::register_exception<DegenerateDesign>(m, "DegenerateDesign", base);
  py::register_exception<ZeroElapsed>(m, "ZeroElapsed", base);
  py::register_exception<ZeroTotal>(m, "ZeroTotal", base);
  py::register_exception<Overcount>(m, "Overcount", base);
  py::register_exception<ZeroInitialCost>(m, "ZeroInitialCost", base);

  m.def("validate", [](const std::string& problem) {
    return issues_to_dict(validate_problem(io::parse_problem(problem)).issues);
  });
  m.def("normalize_problem", [](const std::string& problem) { return io::save_problem(io::parse_problem(problem)); });
  m.def("solve", &solve, py::arg("problem"), py::arg("time_limit") = 60.0, py::arg("node_limit") = 1'000'000,
        py::arg("gap") = 1e-6);
  m.def("brute_force", &brute_force, py::arg("problem"));
  m.def("evaluate_cost", &cost, py::arg("problem"), py::arg("assignment"));
  m.def("earliest_schedule", &schedule, py::arg("problem"), py::arg("assignment"));
  m.def("tiered_cost", &tiered_cost, py::arg("usage"), py::arg("prepurchased"), py::arg("base"),
        py::arg("overflow"));
  m.def("compute_throughput", &io::compute_throughput, py::arg("jobs"), py::arg("elapsed_s"));
  m.def("compute_reliability", &io::compute_reliability, py::arg("successes"), py::arg("recovered"),
        py::arg("total"));
  m.def("compute_ccr", &io::compute_ccr, py::arg("initial_cost"), py::arg("final_cost"));
  m.def("regression_metrics", &metrics, py::arg("y"), py::arg("yhat"));
  m.def("fit", &fit, py::arg("records"), py::arg("family"), py::arg("alpha"), py::arg("l1_ratio"));
  m.def("tune", &tune, py::arg("records"), py::arg("family"), py::arg("l1_ratio"), py::arg("folds"),
        py::arg("seed"));
  m.def("predict_durations", &predict_durations, py::arg("model"), py::arg("problem"));
  m.def("generate_problem", &generate_problem, py::arg("seed"), py::arg("workflows"), py::arg("devices"),
        py::arg("configs"), py::arg("density"), py::arg("slack"));
  m.def("generate_records", &generate_records, py::arg("count"), py::arg("seed"), py::arg("noise"));
  m.def("report", &report, py::arg("run_log"));
  m.def("run_cli", &run_cli, py::arg("args"));
}
