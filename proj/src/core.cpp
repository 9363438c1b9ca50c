#include "costorch/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

namespace costorch {

const char* to_string(TaskType t) {
  switch (t) {
    case TaskType::io_intensive:
      return "io_intensive";
    case TaskType::compute_intensive:
      return "compute_intensive";
  }
  return "?";
}

std::optional<TaskType> parse_task_type(std::string_view s) {
  if (s == "io_intensive") return TaskType::io_intensive;
  if (s == "compute_intensive") return TaskType::compute_intensive;
  return std::nullopt;
}

const char* to_string(IssueKind k) {
  switch (k) {
    case IssueKind::cycle_detected:
      return "CycleDetected";
    case IssueKind::dangling_reference:
      return "DanglingReference";
    case IssueKind::empty_config_set:
      return "EmptyConfigSet";
    case IssueKind::non_positive_duration:
      return "NonPositiveDuration";
    case IssueKind::window_inverted:
      return "WindowInverted";
    case IssueKind::duplicate_id:
      return "DuplicateId";
    case IssueKind::invalid_rate:
      return "InvalidRate";
    case IssueKind::invalid_device_count:
      return "InvalidDeviceCount";
  }
  return "?";
}

void DurationTable::set(Id workflow, Id device, Id config, double hours) {
  entries[DurationKey{std::move(workflow), std::move(device), std::move(config)}] = hours;
}

std::optional<double> DurationTable::find(const Id& workflow, const Id& device,
                                          const Id& config) const {
  auto it = entries.find(DurationKey{workflow, device, config});
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<Id, Id>> Problem::precedence() const {
  std::set<std::pair<Id, Id>> pairs;
  for (const auto& w : workflows)
    for (const auto& pred : w.predecessors) pairs.emplace(pred, w.id);
  return {pairs.begin(), pairs.end()};
}

double CostBreakdown::usage(const Id& device) const {
  for (const auto& d : per_device)
    if (d.device_id == device) return d.usage;
  return 0.0;
}

double CostBreakdown::tier_pivot(const Id& device) const {
  for (const auto& d : per_device)
    if (d.device_id == device) return d.tier_pivot;
  return 0.0;
}

namespace {

std::string summarize(const std::vector<ValidationIssue>& issues) {
  std::ostringstream os;
  os << issues.size() << " validation issue(s)";
  for (const auto& i : issues) os << "\n  " << to_string(i.kind) << ": " << i.message;
  return os.str();
}

bool finite(double v) { return std::isfinite(v); }

// Returns one cycle as a closed walk a -> b -> ... -> a, or empty.
std::vector<Id> find_cycle(const std::vector<WorkflowSpec>& workflows,
                           const std::map<Id, std::size_t>& index) {
  const std::size_t n = workflows.size();
  // successors in id order for a deterministic walk
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t j = 0; j < n; ++j)
    for (const auto& pred : workflows[j].predecessors) {
      auto it = index.find(pred);
      if (it != index.end() && it->second != j) succ[it->second].push_back(j);
    }
  for (auto& s : succ) {
    std::sort(s.begin(), s.end(),
              [&](std::size_t a, std::size_t b) { return workflows[a].id < workflows[b].id; });
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }

  enum class Mark { white, grey, black };
  std::vector<Mark> mark(n, Mark::white);
  std::vector<std::size_t> stack;
  std::vector<Id> cycle;

  std::function<bool(std::size_t)> visit = [&](std::size_t v) {
    mark[v] = Mark::grey;
    stack.push_back(v);
    for (std::size_t w : succ[v]) {
      if (mark[w] == Mark::grey) {
        auto from = std::find(stack.begin(), stack.end(), w);
        for (auto it = from; it != stack.end(); ++it) cycle.push_back(workflows[*it].id);
        cycle.push_back(workflows[w].id);
        return true;
      }
      if (mark[w] == Mark::white && visit(w)) return true;
    }
    stack.pop_back();
    mark[v] = Mark::black;
    return false;
  };

  for (const auto& [id, v] : index)
    if (mark[v] == Mark::white && visit(v)) return cycle;
  return {};
}

}  // namespace

ValidationFailed::ValidationFailed(std::vector<ValidationIssue> issues)
    : Error(summarize(issues)), issues_(std::move(issues)) {}

ValidationOutcome validate_problem(Problem raw) {
  std::vector<ValidationIssue> issues;
  auto add = [&](IssueKind kind, std::string message, std::vector<Id> ids) {
    issues.push_back(ValidationIssue{kind, std::move(message), std::move(ids)});
  };

  std::map<Id, std::size_t> wf_index;
  for (std::size_t i = 0; i < raw.workflows.size(); ++i) {
    const auto& w = raw.workflows[i];
    if (!wf_index.emplace(w.id, i).second)
      add(IssueKind::duplicate_id, "duplicate workflow id '" + w.id + "'", {w.id});
    if (!finite(w.earliest_start) || !finite(w.deadline) || !(w.earliest_start < w.deadline)) {
      std::ostringstream os;
      os << "workflow '" << w.id << "' window [" << w.earliest_start << ", " << w.deadline
         << "] is empty";
      add(IssueKind::window_inverted, os.str(), {w.id});
    }
  }
  for (const auto& w : raw.workflows)
    for (const auto& pred : w.predecessors) {
      if (pred == w.id)
        add(IssueKind::cycle_detected, "workflow '" + w.id + "' precedes itself", {w.id, w.id});
      else if (!wf_index.count(pred))
        add(IssueKind::dangling_reference,
            "workflow '" + w.id + "' names unknown predecessor '" + pred + "'", {w.id, pred});
    }

  std::map<Id, std::size_t> dev_index;
  for (std::size_t d = 0; d < raw.devices.size(); ++d) {
    const auto& dev = raw.devices[d];
    if (!dev_index.emplace(dev.id, d).second)
      add(IssueKind::duplicate_id, "duplicate device id '" + dev.id + "'", {dev.id});
    const bool rates_ok = finite(dev.base_rate) && finite(dev.overflow_rate) &&
                          dev.base_rate >= 0.0 && dev.base_rate <= dev.overflow_rate;
    if (!rates_ok)
      add(IssueKind::invalid_rate,
          "device '" + dev.id + "' requires 0 <= base_rate <= overflow_rate", {dev.id});
    if (!finite(dev.prepurchased_hours) || dev.prepurchased_hours < 0.0)
      add(IssueKind::invalid_rate, "device '" + dev.id + "' has negative prepurchased hours",
          {dev.id});
    if (dev.usage_cap && (!finite(*dev.usage_cap) || *dev.usage_cap < 0.0))
      add(IssueKind::invalid_rate, "device '" + dev.id + "' has a negative usage cap", {dev.id});
  }

  std::set<std::pair<Id, Id>> config_keys;
  std::set<std::pair<Id, Id>> usable_configs;
  for (const auto& c : raw.configs) {
    bool usable = true;
    if (!config_keys.emplace(c.device_id, c.config_id).second) {
      add(IssueKind::duplicate_id,
          "duplicate config '" + c.config_id + "' on device '" + c.device_id + "'",
          {c.device_id, c.config_id});
      usable = false;
    }
    if (!dev_index.count(c.device_id)) {
      add(IssueKind::dangling_reference,
          "config '" + c.config_id + "' names unknown device '" + c.device_id + "'",
          {c.device_id, c.config_id});
      usable = false;
    }
    if (c.device_count < 1) {
      add(IssueKind::invalid_device_count,
          "config '" + c.device_id + "/" + c.config_id + "' needs device_count >= 1",
          {c.device_id, c.config_id});
      usable = false;
    }
    if (usable) usable_configs.emplace(c.device_id, c.config_id);
  }

  for (const auto& [key, hours] : raw.durations.entries) {
    if (!wf_index.count(key.workflow_id) || !config_keys.count({key.device_id, key.config_id})) {
      add(IssueKind::dangling_reference,
          "duration entry (" + key.workflow_id + ", " + key.device_id + ", " + key.config_id +
              ") references an unknown workflow or configuration",
          {key.workflow_id, key.device_id, key.config_id});
      continue;
    }
    if (!finite(hours) || hours <= 0.0) {
      std::ostringstream os;
      os << "duration (" << key.workflow_id << ", " << key.device_id << ", " << key.config_id
         << ") = " << hours << " is not positive";
      add(IssueKind::non_positive_duration, os.str(),
          {key.workflow_id, key.device_id, key.config_id});
    }
  }

  // Configs sorted by (device id, config id) to order each workflow's options.
  std::vector<std::size_t> config_order(raw.configs.size());
  for (std::size_t c = 0; c < config_order.size(); ++c) config_order[c] = c;
  std::sort(config_order.begin(), config_order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(raw.configs[a].device_id, raw.configs[a].config_id) <
           std::tie(raw.configs[b].device_id, raw.configs[b].config_id);
  });

  std::vector<std::vector<ValidatedProblem::Option>> options(raw.workflows.size());
  for (std::size_t i = 0; i < raw.workflows.size(); ++i) {
    const auto& w = raw.workflows[i];
    for (std::size_t c : config_order) {
      const auto& cfg = raw.configs[c];
      if (!usable_configs.count({cfg.device_id, cfg.config_id})) continue;
      auto h = raw.durations.find(w.id, cfg.device_id, cfg.config_id);
      if (!h || !finite(*h) || *h <= 0.0) continue;
      if (!options[i].empty() && raw.configs[options[i].back().config].device_id == cfg.device_id &&
          raw.configs[options[i].back().config].config_id == cfg.config_id)
        continue;
      options[i].push_back({dev_index.at(cfg.device_id), c, *h, cfg.device_count});
    }
    if (options[i].empty())
      add(IssueKind::empty_config_set, "workflow '" + w.id + "' has no usable configuration",
          {w.id});
  }

  auto cycle = find_cycle(raw.workflows, wf_index);
  if (!cycle.empty()) {
    std::string walk;
    for (std::size_t k = 0; k < cycle.size(); ++k) walk += (k ? " -> " : "") + cycle[k];
    add(IssueKind::cycle_detected, "precedence cycle " + walk, cycle);
  }

  ValidationOutcome out;
  if (!issues.empty()) {
    out.issues = std::move(issues);
    return out;
  }

  ValidatedProblem vp;
  const std::size_t n = raw.workflows.size();
  vp.preds_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (const auto& pred : raw.workflows[j].predecessors) vp.preds_[j].push_back(wf_index.at(pred));
    std::sort(vp.preds_[j].begin(), vp.preds_[j].end());
    vp.preds_[j].erase(std::unique(vp.preds_[j].begin(), vp.preds_[j].end()), vp.preds_[j].end());
  }

  for (const auto& [id, idx] : wf_index) vp.id_order_.push_back(idx);

  // Kahn's algorithm, smallest id first among ready workflows.
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    indegree[j] = vp.preds_[j].size();
    for (std::size_t i : vp.preds_[j]) succ[i].push_back(j);
  }
  auto later = [&](std::size_t a, std::size_t b) { return raw.workflows[a].id > raw.workflows[b].id; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t j = 0; j < n; ++j)
    if (indegree[j] == 0) ready.push(j);
  while (!ready.empty()) {
    std::size_t v = ready.top();
    ready.pop();
    vp.topo_.push_back(v);
    for (std::size_t w : succ[v])
      if (--indegree[w] == 0) ready.push(w);
  }

  vp.workflow_index_ = std::move(wf_index);
  vp.device_index_ = std::move(dev_index);
  vp.options_ = std::move(options);
  vp.problem_ = std::move(raw);
  out.value = std::move(vp);
  return out;
}

ValidatedProblem ValidatedProblem::from(Problem raw) {
  auto outcome = validate_problem(std::move(raw));
  if (!outcome.ok()) throw ValidationFailed(std::move(outcome.issues));
  return std::move(*outcome.value);
}

std::optional<std::size_t> ValidatedProblem::workflow_index(const Id& id) const {
  auto it = workflow_index_.find(id);
  if (it == workflow_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ValidatedProblem::device_index(const Id& id) const {
  auto it = device_index_.find(id);
  if (it == device_index_.end()) return std::nullopt;
  return it->second;
}

Assignment ValidatedProblem::to_assignment(std::span<const std::size_t> option_index) const {
  Assignment a;
  for (std::size_t i = 0; i < option_index.size() && i < workflow_count(); ++i) {
    const auto& cfg = problem_.configs[options_[i].at(option_index[i]).config];
    a.choice[problem_.workflows[i].id] = Choice{cfg.device_id, cfg.config_id};
  }
  return a;
}

std::vector<std::size_t> ValidatedProblem::option_indices(const Assignment& a) const {
  std::vector<std::size_t> out(workflow_count());
  for (std::size_t i = 0; i < workflow_count(); ++i) {
    const auto& id = problem_.workflows[i].id;
    auto it = a.choice.find(id);
    if (it == a.choice.end()) throw UnknownChoice("assignment has no choice for workflow '" + id + "'");
    const auto& opts = options_[i];
    auto match = std::find_if(opts.begin(), opts.end(), [&](const Option& o) {
      const auto& cfg = problem_.configs[o.config];
      return cfg.device_id == it->second.device_id && cfg.config_id == it->second.config_id;
    });
    if (match == opts.end())
      throw UnknownChoice("workflow '" + id + "' has no duration entry for (" +
                          it->second.device_id + ", " + it->second.config_id + ")");
    out[i] = static_cast<std::size_t>(match - opts.begin());
  }
  for (const auto& [id, choice] : a.choice)
    if (!workflow_index(id)) throw UnknownChoice("assignment names unknown workflow '" + id + "'");
  return out;
}

Assignment ValidatedProblem::default_assignment() const {
  return to_assignment(std::vector<std::size_t>(workflow_count(), 0));
}

// ---------------------------------------------------------------------------

double tiered_cost(double usage, double prepurchased, double base, double overflow) {
  return std::min(usage, prepurchased) * base + std::max(usage - prepurchased, 0.0) * overflow;
}

double tiered_cost_pivot_form(double usage, double prepurchased, double base, double overflow) {
  const double pivot = std::max(usage, prepurchased);
  return (pivot - prepurchased) * (overflow - base) + usage * base;
}

namespace {

std::vector<double> usage_by_device(const ValidatedProblem& p, std::span<const std::size_t> opt) {
  std::vector<double> usage(p.device_count(), 0.0);
  for (std::size_t i = 0; i < opt.size(); ++i) {
    const auto& o = p.options(i)[opt[i]];
    usage[o.device] += o.hours * o.device_count;
  }
  return usage;
}

}  // namespace

std::map<Id, double> device_usage(const ValidatedProblem& p, const Assignment& a) {
  auto usage = usage_by_device(p, p.option_indices(a));
  std::map<Id, double> out;
  for (std::size_t d = 0; d < usage.size(); ++d) out[p.problem().devices[d].id] = usage[d];
  return out;
}

CostBreakdown evaluate_cost(const ValidatedProblem& p, const Assignment& a) {
  auto usage = usage_by_device(p, p.option_indices(a));
  CostBreakdown out;
  for (std::size_t d = 0; d < usage.size(); ++d) {
    const auto& dev = p.problem().devices[d];
    DeviceCost dc;
    dc.device_id = dev.id;
    dc.usage = usage[d];
    dc.tier_pivot = std::max(usage[d], dev.prepurchased_hours);
    dc.base_cost = std::min(usage[d], dev.prepurchased_hours) * dev.base_rate;
    dc.overflow_cost = std::max(usage[d] - dev.prepurchased_hours, 0.0) * dev.overflow_rate;
    dc.cost = dc.base_cost + dc.overflow_cost;
    out.base_cost += dc.base_cost;
    out.overflow_cost += dc.overflow_cost;
    out.per_device.push_back(std::move(dc));
  }
  out.total = out.base_cost + out.overflow_cost;
  return out;
}

bool within_usage_caps(const ValidatedProblem& p, const Assignment& a) {
  auto usage = usage_by_device(p, p.option_indices(a));
  for (std::size_t d = 0; d < usage.size(); ++d) {
    const auto& cap = p.problem().devices[d].usage_cap;
    if (cap && usage[d] > *cap + kScheduleTolerance) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

ScheduleOutcome earliest_schedule(const ValidatedProblem& p, const Assignment& a) {
  const auto opt = p.option_indices(a);
  const auto& wfs = p.problem().workflows;
  std::vector<double> finish(p.workflow_count(), 0.0);

  Schedule s;
  s.assignment = a;
  Infeasible bad;
  for (std::size_t i : p.topological_order()) {
    double start = wfs[i].earliest_start;
    for (std::size_t j : p.predecessors(i)) start = std::max(start, finish[j]);
    const double g = p.options(i)[opt[i]].hours;
    finish[i] = start + g;
    s.start[wfs[i].id] = start;
    s.finish[wfs[i].id] = finish[i];
    s.duration[wfs[i].id] = g;
    if (finish[i] > wfs[i].deadline + kScheduleTolerance)
      bad.culprits.push_back({wfs[i].id, finish[i] - wfs[i].deadline});
  }
  if (!bad.culprits.empty()) {
    std::sort(bad.culprits.begin(), bad.culprits.end(),
              [](const DeadlineMiss& x, const DeadlineMiss& y) { return x.workflow_id < y.workflow_id; });
    return bad;
  }
  return s;
}

std::vector<Violation> check_schedule(const ValidatedProblem& p, const Schedule& s,
                                      double tolerance) {
  std::vector<Violation> out;
  const auto& prob = p.problem();
  auto fmt = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };

  // Constraint 2: one choice per workflow, drawn from the catalog.
  for (const auto& [id, choice] : s.assignment.choice)
    if (!p.workflow_index(id))
      out.push_back({2, {id}, "assignment names unknown workflow '" + id + "'"});

  std::vector<std::optional<double>> hours(p.workflow_count());
  for (std::size_t i = 0; i < p.workflow_count(); ++i) {
    const auto& id = prob.workflows[i].id;
    auto it = s.assignment.choice.find(id);
    if (it == s.assignment.choice.end()) {
      out.push_back({2, {id}, "workflow '" + id + "' has no configuration"});
      continue;
    }
    hours[i] = prob.durations.find(id, it->second.device_id, it->second.config_id);
    bool listed = false;
    for (const auto& o : p.options(i)) {
      const auto& cfg = prob.configs[o.config];
      listed = listed || (cfg.device_id == it->second.device_id && cfg.config_id == it->second.config_id);
    }
    if (!listed) {
      out.push_back({2, {id, it->second.device_id, it->second.config_id},
                     "workflow '" + id + "' is assigned an unavailable configuration"});
      hours[i].reset();
    }
  }

  // Constraint 4 (usage cap) only binds when a cap is configured.
  bool all_assigned = std::all_of(hours.begin(), hours.end(), [](auto& h) { return h.has_value(); });
  if (all_assigned && s.assignment.choice.size() == p.workflow_count()) {
    auto usage = device_usage(p, s.assignment);
    for (const auto& dev : prob.devices)
      if (dev.usage_cap && usage[dev.id] > *dev.usage_cap + tolerance)
        out.push_back({4, {dev.id}, "device '" + dev.id + "' usage " + fmt(usage[dev.id]) +
                                        " exceeds cap " + fmt(*dev.usage_cap)});
  }

  auto lookup = [](const std::map<Id, double>& m, const Id& id) -> std::optional<double> {
    auto it = m.find(id);
    if (it == m.end()) return std::nullopt;
    return it->second;
  };

  for (std::size_t i = 0; i < p.workflow_count(); ++i) {
    const auto& w = prob.workflows[i];
    auto st = lookup(s.start, w.id);
    auto fi = lookup(s.finish, w.id);
    auto du = lookup(s.duration, w.id);
    if (!st || !fi || !du) {
      out.push_back({6, {w.id}, "workflow '" + w.id + "' lacks start, finish, or duration"});
      continue;
    }
    if (std::abs(*st + *du - *fi) > tolerance)
      out.push_back({6, {w.id}, "workflow '" + w.id + "' finish " + fmt(*fi) + " != start " +
                                    fmt(*st) + " + duration " + fmt(*du)});
    if (hours[i] && std::abs(*du - *hours[i]) > tolerance)
      out.push_back({7, {w.id}, "workflow '" + w.id + "' duration " + fmt(*du) +
                                    " differs from table entry " + fmt(*hours[i])});
    if (*st < w.earliest_start - tolerance)
      out.push_back({9, {w.id}, "workflow '" + w.id + "' starts at " + fmt(*st) +
                                    " before its earliest start " + fmt(w.earliest_start)});
    if (*fi > w.deadline + tolerance)
      out.push_back({10, {w.id}, "workflow '" + w.id + "' finishes at " + fmt(*fi) +
                                     " after its deadline " + fmt(w.deadline)});
  }

  for (const auto& [before, after] : prob.precedence()) {
    auto fi = lookup(s.finish, before);
    auto st = lookup(s.start, after);
    if (fi && st && *fi > *st + tolerance)
      out.push_back({8, {before, after}, "workflow '" + before + "' finishes at " + fmt(*fi) +
                                             " after successor '" + after + "' starts at " +
                                             fmt(*st)});
  }
  return out;
}

}  // namespace costorch
