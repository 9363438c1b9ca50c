#include "costorch/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <variant>

#include "CLI11.hpp"
#include "costorch/bench.hpp"
#include "costorch/io.hpp"
#include "costorch/predictor.hpp"
#include "costorch/solver.hpp"
#include "json.hpp"

namespace costorch::cli {
namespace {

using ojson = nlohmann::ordered_json;

// Bad input that is not a document parse failure: missing files, missing
// blocks, conflicting flags. Exit 2.
class InputError : public Error {
 public:
  using Error::Error;
};

// A well-formed request with no answer. Exit 1.
class DomainFailure : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string in;
  std::string out;
  std::string model;
  std::uint64_t seed = 0;
  double time_limit = 60.0;
  std::uint64_t node_limit = 1'000'000;
  double gap = 1e-6;
  std::size_t folds = 5;
  double alpha = 1.0;
  std::string family = "ridge";
  double l1_ratio = 0.5;
  bool no_model = false;

  bool seed_set = false;
  bool alpha_set = false;

  std::string kind;
  bench::GeneratorConfig gen;
  bench::RecordConfig records;
};

std::string read_input(const std::string& path) {
  try {
    return io::read_file(path);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

void write_output(const std::string& path, const std::string& doc) {
  try {
    io::write_file(path, doc);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

void emit(const Options& o, std::ostream& out, const std::string& doc) {
  if (o.out.empty())
    out << doc;
  else
    write_output(o.out, doc);
}

std::string fixed(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

predictor::Family family_of(const Options& o) {
  auto f = predictor::parse_family(o.family);
  if (!f) throw InputError("unknown family '" + o.family + "' (ols, ridge, lasso, elastic_net)");
  return *f;
}

milp::SolverConfig solver_config(const Options& o) {
  milp::SolverConfig c;
  c.time_limit_s = o.time_limit;
  c.node_limit = o.node_limit;
  c.absolute_gap = o.gap;
  return c;
}

// Reads the problem, filling durations from --model when given.
ValidatedProblem schedulable_problem(const Options& o) {
  if (!o.model.empty() && o.no_model) throw InputError("--model and --no-model are mutually exclusive");
  auto p = io::parse_problem(read_input(o.in));
  if (!o.model.empty()) {
    const auto m = io::load_model(read_input(o.model));
    p.durations = predictor::build_duration_table(m, p);
  } else if (p.durations.entries.empty() && !p.workflows.empty()) {
    throw InputError("problem has no durations block; add one or pass --model to predict durations");
  }
  return ValidatedProblem::from(std::move(p));
}

Assignment fastest_assignment(const ValidatedProblem& vp) {
  std::vector<std::size_t> pick(vp.workflow_count(), 0);
  for (std::size_t w = 0; w < vp.workflow_count(); ++w) {
    const auto opts = vp.options(w);
    for (std::size_t k = 1; k < opts.size(); ++k)
      if (opts[k].hours < opts[pick[w]].hours) pick[w] = k;
  }
  return vp.to_assignment(pick);
}

[[noreturn]] void explain_infeasible(const ValidatedProblem& vp) {
  const auto fast = fastest_assignment(vp);
  const auto outcome = earliest_schedule(vp, fast);
  if (const auto* inf = std::get_if<Infeasible>(&outcome)) {
    std::string msg = "infeasible: even on their fastest configurations these workflows miss their deadlines:";
    for (const auto& c : inf->culprits) msg += "\n  " + c.workflow_id + " (short by " + fixed(c.deficit_hours) + " h)";
    throw DomainFailure(msg);
  }
  if (!within_usage_caps(vp, fast))
    throw DomainFailure("infeasible: the fastest assignment already exceeds a device usage cap");
  throw DomainFailure("infeasible: no assignment meets every deadline and usage cap together");
}

std::string solve_line(const milp::SolveOutcome& s) {
  return std::string("status ") + milp::to_string(s.status) + ", " + std::to_string(s.report.nodes_explored) +
         " nodes, " + std::to_string(s.report.nodes_pruned) + " pruned, " + fixed(s.report.wall_time_s, 3) +
         " s\n";
}

milp::SolveOutcome solve_or_explain(const ValidatedProblem& vp, const Options& o, std::ostream& err) {
  auto s = milp::solve(milp::build_milp(vp), solver_config(o));
  err << solve_line(s);
  if (s.status == milp::SolveStatus::infeasible) explain_infeasible(vp);
  if (!s.solution)
    throw DomainFailure(std::string("no feasible assignment found before the ") +
                        (s.status == milp::SolveStatus::node_limit ? "node" : "time") + " limit");
  return s;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  auto outcome = validate_problem(io::parse_problem(read_input(o.in)));
  ojson doc;
  doc["format_version"] = io::kFormatVersion;
  doc["valid"] = outcome.ok();
  ojson issues = ojson::array();
  for (const auto& i : outcome.issues) {
    ojson e;
    e["kind"] = to_string(i.kind);
    e["message"] = i.message;
    e["ids"] = i.ids;
    issues.push_back(std::move(e));
    err << to_string(i.kind) << ": " << i.message << "\n";
  }
  doc["issues"] = std::move(issues);
  emit(o, out, doc.dump(2) + "\n");
  return outcome.ok() ? kExitOk : kExitDomain;
}

predictor::TuneConfig tune_config(const Options& o, predictor::Family f) {
  predictor::TuneConfig c;
  c.family = f;
  c.l1_ratio = o.l1_ratio;
  c.folds = o.folds;
  if (o.seed_set) c.shuffle_seed = o.seed;
  return c;
}

predictor::FeatureSchema schema_for(predictor::Family f) {
  // OLS has no penalty to absorb the indicator that duplicates the intercept.
  return f == predictor::Family::ols ? predictor::FeatureSchema::reference_coded()
                                     : predictor::FeatureSchema::standard();
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw InputError("train needs --out for the model file");
  const auto f = family_of(o);
  const auto data = predictor::make_dataset(io::load_records(read_input(o.in)), schema_for(f));
  double alpha = 0.0;
  if (f != predictor::Family::ols) {
    if (o.alpha_set) {
      alpha = o.alpha;
    } else {
      alpha = predictor::tune_alpha(data, tune_config(o, f)).best_alpha;
      err << "tuned alpha " << fixed(alpha, 2) << "\n";
    }
  }
  const auto m = predictor::fit(data, {f, alpha, o.l1_ratio});
  const auto metrics = predictor::evaluate(m, data);
  write_output(o.out, io::save_model(m));
  ojson doc;
  doc["format_version"] = io::kFormatVersion;
  doc["family"] = predictor::to_string(f);
  doc["alpha"] = alpha;
  doc["samples"] = metrics.n;
  doc["mae"] = metrics.mae;
  doc["mse"] = metrics.mse;
  doc["rmse"] = metrics.rmse;
  if (metrics.mape) doc["mape"] = *metrics.mape;
  out << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_tune(const Options& o, std::ostream& out, std::ostream&) {
  const auto f = family_of(o);
  if (f == predictor::Family::ols) throw InputError("ols has no alpha to tune");
  const auto data = predictor::make_dataset(io::load_records(read_input(o.in)), schema_for(f));
  const auto cfg = tune_config(o, f);
  emit(o, out, io::save_tune_result(predictor::tune_alpha(data, cfg), cfg));
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream&) {
  if (o.model.empty()) throw InputError("predict needs --model");
  const auto m = io::load_model(read_input(o.model));
  auto p = io::parse_problem(read_input(o.in));
  p.durations = predictor::build_duration_table(m, p);
  emit(o, out, io::save_problem(p));
  return kExitOk;
}

int cmd_schedule(const Options& o, std::ostream& out, std::ostream& err) {
  const auto vp = schedulable_problem(o);
  const auto s = solve_or_explain(vp, o, err);
  const io::SolveSummary summary{"branch_and_bound", milp::to_string(s.status), s.report.nodes_explored,
                                 s.report.nodes_pruned, s.report.best_bound};
  emit(o, out, io::save_schedule(io::make_schedule_document(s.solution->schedule, s.solution->cost, summary)));
  return kExitOk;
}

int cmd_oracle(const Options& o, std::ostream& out, std::ostream&) {
  const auto vp = schedulable_problem(o);
  bench::BruteForceResult r;
  try {
    r = bench::brute_force_optimum(vp);
  } catch (const TooLarge& e) {
    throw DomainFailure(e.what());
  }
  if (!r.assignment) explain_infeasible(vp);
  const auto schedule = std::get<Schedule>(earliest_schedule(vp, *r.assignment));
  const io::SolveSummary summary{"exhaustive", "optimal", r.enumerated, 0, r.cost};
  emit(o, out, io::save_schedule(io::make_schedule_document(schedule, evaluate_cost(vp, *r.assignment), summary)));
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
  auto log = io::load_run_log(read_input(o.in));
  const auto vp = ValidatedProblem::from(log.problem);
  if (!log.assignment) log.assignment = solve_or_explain(vp, o, err).solution->assignment;
  emit(o, out, io::save_report(io::orchestration_report(vp, log)));
  return kExitOk;
}

int cmd_gen(const Options& o, std::ostream& out, std::ostream&) {
  if (o.kind == "problem") {
    auto cfg = o.gen;
    cfg.seed = o.seed;
    Problem p;
    try {
      p = bench::generate_problem(cfg);
    } catch (const Error& e) {
      throw InputError(e.what());
    }
    emit(o, out, io::save_problem(p));
  } else {
    emit(o, out, io::save_records(bench::generate_records(o.records, o.seed).records));
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cost-aware workflow scheduling: duration models and optimal configuration choice", "costorch"};
  app.require_subcommand(1);
  Options o;

  auto add_in = [&](CLI::App* c, const std::string& what) {
    c->add_option("--in", o.in, what)->required();
  };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output path (default: standard output)"); };
  auto add_solver = [&](CLI::App* c) {
    c->add_option("--time-limit", o.time_limit, "Solver wall-clock limit in seconds")->check(CLI::PositiveNumber);
    c->add_option("--node-limit", o.node_limit, "Maximum branch-and-bound nodes")->check(CLI::PositiveNumber);
    c->add_option("--gap", o.gap, "Absolute optimality gap")->check(CLI::NonNegativeNumber);
  };
  auto add_model_flags = [&](CLI::App* c) {
    c->add_option("--model", o.model, "Predict durations with this model");
    c->add_flag("--no-model", o.no_model, "Require durations from the problem document");
  };
  auto add_fit = [&](CLI::App* c) {
    c->add_option("--family", o.family, "ols, ridge, lasso or elastic_net");
    c->add_option("--l1-ratio", o.l1_ratio, "Elastic-net mixing")->check(CLI::Range(0.0, 1.0));
    c->add_option("--folds", o.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
    c->add_option("--seed", o.seed, "Shuffle folds with this seed")->each([&](const std::string&) {
      o.seed_set = true;
    });
  };

  auto* validate = app.add_subcommand("validate", "Check a problem document");
  add_in(validate, "Problem document");
  add_out(validate);

  auto* train = app.add_subcommand("train", "Fit a duration model to run records");
  add_in(train, "Records CSV");
  add_out(train);
  add_fit(train);
  train->add_option("--alpha", o.alpha, "Regularization weight (tuned when omitted)")
      ->check(CLI::NonNegativeNumber)
      ->each([&](const std::string&) { o.alpha_set = true; });

  auto* tune = app.add_subcommand("tune", "Cross-validated alpha search");
  add_in(tune, "Records CSV");
  add_out(tune);
  add_fit(tune);

  auto* predict = app.add_subcommand("predict", "Fill a problem's durations from a model");
  add_in(predict, "Problem document");
  add_out(predict);
  predict->add_option("--model", o.model, "Model document")->required();

  auto* schedule = app.add_subcommand("schedule", "Choose the cheapest feasible configurations");
  add_in(schedule, "Problem document");
  add_out(schedule);
  add_model_flags(schedule);
  add_solver(schedule);

  auto* report = app.add_subcommand("report", "Summarize a run log");
  add_in(report, "Run log document");
  add_out(report);
  add_solver(report);

  auto* oracle = app.add_subcommand("oracle", "Exhaustive optimum for a small problem");
  add_in(oracle, "Problem document");
  add_out(oracle);
  add_model_flags(oracle);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic problem or record set");
  gen->add_option("kind", o.kind, "problem or records")->required()->check(CLI::IsMember({"problem", "records"}));
  add_out(gen);
  gen->add_option("--seed", o.seed, "Generator seed");
  gen->add_option("--workflows", o.gen.workflow_count)->check(CLI::PositiveNumber);
  gen->add_option("--devices", o.gen.device_count)->check(CLI::PositiveNumber);
  gen->add_option("--configs", o.gen.configs_per_device)->check(CLI::PositiveNumber);
  gen->add_option("--density", o.gen.precedence_density)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--slack", o.gen.window_slack_factor, "Deadline widening, at least 1");
  gen->add_option("--count", o.records.count, "Record count")->check(CLI::PositiveNumber);
  gen->add_option("--noise", o.records.noise_sigma, "Record noise in seconds")->check(CLI::NonNegativeNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out, err);
    if (train->parsed()) return cmd_train(o, out, err);
    if (tune->parsed()) return cmd_tune(o, out, err);
    if (predict->parsed()) return cmd_predict(o, out, err);
    if (schedule->parsed()) return cmd_schedule(o, out, err);
    if (report->parsed()) return cmd_report(o, out, err);
    if (oracle->parsed()) return cmd_oracle(o, out, err);
    if (gen->parsed()) return cmd_gen(o, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BadEnum& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MissingFeature& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace costorch::cli
