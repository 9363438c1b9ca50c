#include "costorch/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <sstream>

namespace costorch::milp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::node_limit:
      return "node_limit";
    case SolveStatus::time_limit:
      return "time_limit";
  }
  return "?";
}

std::size_t MilpModel::add(std::string name, VarKind kind, VarRef ref, double lower, double upper) {
  const std::size_t idx = variables_.size();
  by_ref_.emplace(ref, idx);
  by_name_.emplace(name, idx);
  variables_.push_back(Variable{std::move(name), kind, ref, lower, upper});
  objective_.push_back(0.0);
  return idx;
}

std::size_t MilpModel::binary_count() const {
  return static_cast<std::size_t>(std::count_if(variables_.begin(), variables_.end(),
                                                [](const Variable& v) { return v.kind == VarKind::binary; }));
}

std::size_t MilpModel::continuous_count() const { return variables_.size() - binary_count(); }

std::size_t MilpModel::row_count(int equation) const {
  return static_cast<std::size_t>(std::count_if(rows_.begin(), rows_.end(),
                                                [&](const ModelRow& r) { return r.equation == equation; }));
}

std::size_t MilpModel::bound_count(int equation) const {
  return static_cast<std::size_t>(std::count_if(
      bounds_.begin(), bounds_.end(), [&](const BoundConstraint& b) { return b.equation == equation; }));
}

std::optional<std::size_t> MilpModel::index_of(const VarRef& ref) const {
  auto it = by_ref_.find(ref);
  if (it == by_ref_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> MilpModel::index_of(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

lp::LpProblem MilpModel::relaxation() const {
  lp::LpProblem out;
  out.objective = objective_;
  out.rows.reserve(rows_.size());
  for (const auto& r : rows_) out.rows.push_back(r.row);
  out.bounds.reserve(variables_.size());
  for (const auto& v : variables_) out.bounds.push_back({v.lower, v.upper});
  return out;
}

double MilpModel::objective_value(const std::vector<double>& values) const {
  double z = objective_offset_;
  for (std::size_t j = 0; j < values.size(); ++j) z += objective_[j] * values[j];
  return z;
}

MilpModel build_milp(const ValidatedProblem& vp) {
  MilpModel m(vp);
  const auto& prob = vp.problem();
  const auto& wfs = prob.workflows;

  for (std::size_t w : vp.id_order()) {
    const auto opts = vp.options(w);
    for (std::size_t o = 0; o < opts.size(); ++o) {
      const auto& cfg = prob.configs[opts[o].config];
      m.add("x[" + wfs[w].id + "," + cfg.device_id + "," + cfg.config_id + "]", VarKind::binary,
            VarRef{Symbol::x, w, opts[o].device, o}, 0.0, 1.0);
    }
  }
  for (std::size_t w : vp.id_order()) {
    const auto& wf = wfs[w];
    const std::size_t s = m.add("s[" + wf.id + "]", VarKind::continuous, {Symbol::s, w}, wf.earliest_start,
                                lp::kInfinity);
    const std::size_t t =
        m.add("t[" + wf.id + "]", VarKind::continuous, {Symbol::t, w}, wf.earliest_start, wf.deadline);
    m.add("g[" + wf.id + "]", VarKind::continuous, {Symbol::g, w}, 0.0, lp::kInfinity);
    m.bounds_.push_back({9, s, false, wf.earliest_start});
    m.bounds_.push_back({10, t, true, wf.deadline});
  }
  for (std::size_t d = 0; d < prob.devices.size(); ++d) {
    const auto& dev = prob.devices[d];
    const std::size_t u = m.add("u[" + dev.id + "]", VarKind::continuous, {Symbol::u, kNone, d},
                                0.0, dev.usage_cap.value_or(lp::kInfinity));
    // A hard cap bounds u directly; u <= u1 stays in place so the overflow
    // tier is still priced.
    if (dev.usage_cap) m.bounds_.push_back({4, u, true, *dev.usage_cap});
    const std::size_t u1 = m.add("u1[" + dev.id + "]", VarKind::continuous,
                                 {Symbol::u1, kNone, d}, 0.0, lp::kInfinity);
    m.objective_[u] = dev.base_rate;
    m.objective_[u1] = dev.overflow_rate - dev.base_rate;
    m.objective_offset_ -= dev.prepurchased_hours * (dev.overflow_rate - dev.base_rate);
  }

  const std::size_t n = m.variables_.size();
  auto row = [&](int eq, std::string label, lp::Relation rel, double rhs) -> lp::Row& {
    m.rows_.push_back(ModelRow{eq, std::move(label), lp::Row{std::vector<double>(n, 0.0), rel, rhs}});
    return m.rows_.back().row;
  };
  auto x_of = [&](std::size_t w, std::size_t o) {
    return *m.index_of(VarRef{Symbol::x, w, vp.options(w)[o].device, o});
  };
  auto wvar = [&](Symbol s, std::size_t w) { return *m.index_of(VarRef{s, w}); };
  auto dvar = [&](Symbol s, std::size_t d) { return *m.index_of(VarRef{s, kNone, d}); };

  for (std::size_t w : vp.id_order()) {
    auto& r = row(2, "one_config[" + wfs[w].id + "]", lp::Relation::equal, 1.0);
    for (std::size_t o = 0; o < vp.options(w).size(); ++o) r.coefficients[x_of(w, o)] = 1.0;
  }
  for (std::size_t d = 0; d < prob.devices.size(); ++d) {
    const auto& dev = prob.devices[d];
    auto& usage = row(3, "usage[" + dev.id + "]", lp::Relation::equal, 0.0);
    for (std::size_t w : vp.id_order()) {
      const auto opts = vp.options(w);
      for (std::size_t o = 0; o < opts.size(); ++o)
        if (opts[o].device == d) usage.coefficients[x_of(w, o)] = opts[o].hours * opts[o].device_count;
    }
    usage.coefficients[dvar(Symbol::u, d)] = -1.0;

    auto& cap = row(4, "capacity[" + dev.id + "]", lp::Relation::less_equal, 0.0);
    cap.coefficients[dvar(Symbol::u, d)] = 1.0;
    cap.coefficients[dvar(Symbol::u1, d)] = -1.0;
    auto& pre = row(5, "prepurchased[" + dev.id + "]", lp::Relation::greater_equal, dev.prepurchased_hours);
    pre.coefficients[dvar(Symbol::u1, d)] = 1.0;
  }
  for (std::size_t w : vp.id_order()) {
    auto& link = row(6, "finish[" + wfs[w].id + "]", lp::Relation::equal, 0.0);
    link.coefficients[wvar(Symbol::s, w)] = 1.0;
    link.coefficients[wvar(Symbol::g, w)] = 1.0;
    link.coefficients[wvar(Symbol::t, w)] = -1.0;

    auto& dur = row(7, "duration[" + wfs[w].id + "]", lp::Relation::equal, 0.0);
    const auto opts = vp.options(w);
    for (std::size_t o = 0; o < opts.size(); ++o) dur.coefficients[x_of(w, o)] = opts[o].hours;
    dur.coefficients[wvar(Symbol::g, w)] = -1.0;
  }
  for (const auto& [before, after] : prob.precedence()) {
    const std::size_t i = *vp.workflow_index(before);
    const std::size_t j = *vp.workflow_index(after);
    auto& r = row(8, "precedes[" + before + "," + after + "]", lp::Relation::less_equal, 0.0);
    r.coefficients[wvar(Symbol::t, i)] = 1.0;
    r.coefficients[wvar(Symbol::s, j)] = -1.0;
  }
  return m;
}

namespace {

struct Node {
  double bound;
  std::size_t depth;
  std::uint64_t seq;
  std::vector<lp::Bound> bounds;
  std::vector<double> values;
};

// Lowest bound first; ties go to the deeper node, then the older one.
struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.seq > b.seq;
  }
};

std::optional<std::size_t> most_fractional(const MilpModel& m, const std::vector<double>& values,
                                           double tol) {
  std::optional<std::size_t> pick;
  double best = tol;
  const auto& vars = m.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].kind != VarKind::binary) continue;
    const double f = std::min(values[j] - std::floor(values[j]), std::ceil(values[j]) - values[j]);
    if (f > best) {
      best = f;
      pick = j;
    }
  }
  return pick;
}

}  // namespace

SolveOutcome solve(const MilpModel& model, const SolverConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  SolveOutcome out;
  auto& rep = out.report;
  const lp::LpProblem base = model.relaxation();
  double incumbent = lp::kInfinity;
  double min_pruned = lp::kInfinity;
  std::uint64_t seq = 0;

  auto evaluate = [&](std::vector<lp::Bound> bounds) -> std::optional<lp::LpOutcome> {
    lp::LpProblem lp = base;
    lp.bounds = std::move(bounds);
    ++rep.nodes_explored;
    auto r = lp::solve_lp(lp, config.lp_tolerance);
    if (r.status != lp::LpStatus::optimal) return std::nullopt;
    return r;
  };

  // Fix every binary at its rounded value and re-solve, so the incumbent
  // carries exact 0/1 values and a matching objective.
  auto accept_integral = [&](const std::vector<lp::Bound>& bounds, const std::vector<double>& values) {
    lp::LpProblem lp = base;
    lp.bounds = bounds;
    for (std::size_t j = 0; j < values.size(); ++j)
      if (model.variables()[j].kind == VarKind::binary) {
        const double r = std::round(values[j]);
        lp.bounds[j] = {r, r};
      }
    auto polished = lp::solve_lp(lp, config.lp_tolerance);
    const auto& v = polished.status == lp::LpStatus::optimal ? polished.values : values;
    const double z = model.objective_value(v);
    if (z < incumbent) {
      incumbent = z;
      out.incumbent = v;
      out.incumbent_objective = z;
    }
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  {
    auto root = evaluate(base.bounds);
    if (root) {
      const double z = model.objective_value(root->values);
      if (!most_fractional(model, root->values, config.integrality_tolerance))
        accept_integral(base.bounds, root->values);
      else
        open.push(Node{z, 0, seq++, base.bounds, std::move(root->values)});
    }
  }

  std::optional<SolveStatus> stopped;
  while (!open.empty()) {
    if (rep.nodes_explored >= config.node_limit) {
      stopped = SolveStatus::node_limit;
      break;
    }
    if (elapsed() > config.time_limit_s) {
      stopped = SolveStatus::time_limit;
      break;
    }
    Node node = open.top();
    open.pop();
    if (config.prune && node.bound >= incumbent - config.absolute_gap) {
      ++rep.nodes_pruned;
      min_pruned = std::min(min_pruned, node.bound);
      continue;
    }
    const auto branch = most_fractional(model, node.values, config.integrality_tolerance);
    for (double side : {0.0, 1.0}) {
      auto bounds = node.bounds;
      bounds[*branch] = {side, side};
      auto child = evaluate(bounds);
      if (!child) {
        ++rep.nodes_pruned;
        continue;
      }
      const double z = model.objective_value(child->values);
      rep.max_bound_decrease = std::max(rep.max_bound_decrease, node.bound - z);
      if (!most_fractional(model, child->values, config.integrality_tolerance)) {
        accept_integral(bounds, child->values);
      } else if (config.prune && z >= incumbent - config.absolute_gap) {
        ++rep.nodes_pruned;
        min_pruned = std::min(min_pruned, z);
      } else {
        open.push(Node{z, node.depth + 1, seq++, std::move(bounds), std::move(child->values)});
      }
    }
  }

  double bound = std::min(incumbent, min_pruned);
  if (stopped) {
    while (!open.empty()) {
      bound = std::min(bound, open.top().bound);
      open.pop();
    }
    out.status = *stopped;
  } else {
    out.status = out.incumbent ? SolveStatus::optimal : SolveStatus::infeasible;
  }
  rep.best_bound = out.incumbent || stopped ? bound : lp::kInfinity;
  if (out.incumbent) out.solution = extract_solution(model, out, config.integrality_tolerance);
  rep.wall_time_s = elapsed();
  return out;
}

Solution extract_solution(const MilpModel& model, const SolveOutcome& outcome,
                          double integrality_tolerance) {
  if (!outcome.incumbent) throw InconsistentIncumbent("outcome carries no incumbent");
  const auto& values = *outcome.incumbent;
  const auto& vp = model.problem();
  const auto& prob = vp.problem();
  if (values.size() != model.variables().size())
    throw InconsistentIncumbent("incumbent has the wrong number of values");

  std::vector<std::optional<std::size_t>> chosen(vp.workflow_count());
  for (std::size_t j = 0; j < values.size(); ++j) {
    const auto& var = model.variables()[j];
    if (var.kind != VarKind::binary || values[j] < 1.0 - integrality_tolerance) continue;
    auto& slot = chosen[var.ref.workflow];
    if (slot)
      throw InconsistentIncumbent("workflow '" + prob.workflows[var.ref.workflow].id +
                                  "' selects more than one configuration");
    slot = var.ref.option;
  }
  std::vector<std::size_t> opt(vp.workflow_count());
  for (std::size_t w = 0; w < opt.size(); ++w) {
    if (!chosen[w])
      throw InconsistentIncumbent("workflow '" + prob.workflows[w].id + "' selects no configuration");
    opt[w] = *chosen[w];
  }

  Solution sol;
  sol.assignment = vp.to_assignment(opt);
  sol.schedule.assignment = sol.assignment;
  for (std::size_t w = 0; w < vp.workflow_count(); ++w) {
    const auto& id = prob.workflows[w].id;
    sol.schedule.start[id] = values[*model.index_of(VarRef{Symbol::s, w})];
    sol.schedule.finish[id] = values[*model.index_of(VarRef{Symbol::t, w})];
    sol.schedule.duration[id] = values[*model.index_of(VarRef{Symbol::g, w})];
  }
  sol.cost = evaluate_cost(vp, sol.assignment);

  const double deviation = std::abs(sol.cost.total - outcome.incumbent_objective);
  if (deviation > 1e-6) {
    std::ostringstream os;
    os << "recomputed cost " << sol.cost.total << " differs from objective "
       << outcome.incumbent_objective << " by " << deviation;
    throw InconsistentIncumbent(os.str());
  }
  auto violations = check_schedule(vp, sol.schedule);
  if (!violations.empty())
    throw InconsistentIncumbent("incumbent schedule violates constraint " +
                                std::to_string(violations.front().equation) + ": " +
                                violations.front().message);
  return sol;
}

}  // namespace costorch::milp
