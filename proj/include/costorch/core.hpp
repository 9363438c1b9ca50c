#pragma once

// Domain model for cost-orchestration instances: workflows with time
// windows and precedence, a device catalog with tiered pricing, sized
// configurations, and the predicted duration table.
//
// Units: durations, prepurchased capacity, and timeline values are hours.
// Rates are currency per device-hour.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "costorch/error.hpp"

namespace costorch {

using Id = std::string;

enum class TaskType { io_intensive, compute_intensive };

const char* to_string(TaskType t);
std::optional<TaskType> parse_task_type(std::string_view s);

// Static characteristics of a workload, used when durations are predicted
// from a model rather than supplied directly.
struct WorkloadProfile {
  std::optional<double> parallelism;
  std::optional<double> subtask_count;
  std::optional<double> table_count;
  std::optional<double> code_length;
  std::optional<double> dataset_volume_gb;
  std::optional<double> disk_volume_gb;
  std::optional<TaskType> task_type;

  bool operator==(const WorkloadProfile&) const = default;
};

struct WorkflowSpec {
  Id id;
  double earliest_start = 0.0;
  double deadline = 0.0;
  std::vector<Id> predecessors;
  std::optional<WorkloadProfile> profile;

  bool operator==(const WorkflowSpec&) const = default;
};

struct DeviceCatalogEntry {
  Id id;
  double base_rate = 0.0;
  double overflow_rate = 0.0;
  double prepurchased_hours = 0.0;
  // Off by default. When set, usage of this device may not exceed the cap.
  std::optional<double> usage_cap;

  bool operator==(const DeviceCatalogEntry&) const = default;
};

struct ConfigOption {
  Id device_id;
  Id config_id;
  int device_count = 1;
  // Per-device shape; only consulted when building durations from a model.
  double cpu_cores = 0.0;
  double memory_gb = 0.0;

  bool operator==(const ConfigOption&) const = default;
};

struct DurationKey {
  Id workflow_id;
  Id device_id;
  Id config_id;

  auto operator<=>(const DurationKey&) const = default;
};

struct DurationTable {
  std::map<DurationKey, double> entries;

  void set(Id workflow, Id device, Id config, double hours);
  std::optional<double> find(const Id& workflow, const Id& device, const Id& config) const;

  bool operator==(const DurationTable&) const = default;
};

// The raw instance. Precedence lives in WorkflowSpec::predecessors; the
// pair set P is derived from it.
struct Problem {
  std::vector<WorkflowSpec> workflows;
  std::vector<DeviceCatalogEntry> devices;
  std::vector<ConfigOption> configs;
  DurationTable durations;

  // (i, j) pairs meaning i must finish before j starts; sorted, deduplicated.
  std::vector<std::pair<Id, Id>> precedence() const;

  bool operator==(const Problem&) const = default;
};

struct Choice {
  Id device_id;
  Id config_id;

  auto operator<=>(const Choice&) const = default;
};

struct Assignment {
  std::map<Id, Choice> choice;

  bool operator==(const Assignment&) const = default;
};

struct Schedule {
  Assignment assignment;
  std::map<Id, double> start;
  std::map<Id, double> finish;
  std::map<Id, double> duration;
};

struct DeviceCost {
  Id device_id;
  double usage = 0.0;
  double tier_pivot = 0.0;
  double base_cost = 0.0;
  double overflow_cost = 0.0;
  double cost = 0.0;
};

struct CostBreakdown {
  std::vector<DeviceCost> per_device;  // catalog order
  double base_cost = 0.0;
  double overflow_cost = 0.0;
  double total = 0.0;

  double usage(const Id& device) const;
  double tier_pivot(const Id& device) const;
};

// ---------------------------------------------------------------------------
// Validation

enum class IssueKind {
  cycle_detected,
  dangling_reference,
  empty_config_set,
  non_positive_duration,
  window_inverted,
  duplicate_id,
  invalid_rate,
  invalid_device_count,
};

const char* to_string(IssueKind k);

struct ValidationIssue {
  IssueKind kind;
  std::string message;
  std::vector<Id> ids;  // for cycles: a -> b -> ... -> a
};

class ValidationFailed : public Error {
 public:
  explicit ValidationFailed(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

struct ValidationOutcome;

// An instance whose invariants have been checked, with index structures
// precomputed for the scheduling and cost paths. Immutable.
class ValidatedProblem {
 public:
  // One feasible (device, config) choice for a workflow. `config` indexes
  // Problem::configs.
  struct Option {
    std::size_t device;
    std::size_t config;
    double hours;
    int device_count;
  };

  // Throws ValidationFailed with every issue found.
  static ValidatedProblem from(Problem raw);

  const Problem& problem() const { return problem_; }
  std::size_t workflow_count() const { return problem_.workflows.size(); }
  std::size_t device_count() const { return problem_.devices.size(); }

  std::optional<std::size_t> workflow_index(const Id& id) const;
  std::optional<std::size_t> device_index(const Id& id) const;

  // Choices for workflow `w`, sorted by (device id, config id).
  std::span<const Option> options(std::size_t w) const { return options_[w]; }
  // Workflow indices in precedence order; ties broken by id.
  std::span<const std::size_t> topological_order() const { return topo_; }
  std::span<const std::size_t> predecessors(std::size_t w) const { return preds_[w]; }
  // Workflow indices sorted by id.
  std::span<const std::size_t> id_order() const { return id_order_; }

  // Option index per workflow -> Assignment, and back. The reverse throws
  // UnknownChoice for choices absent from the configs or duration table.
  Assignment to_assignment(std::span<const std::size_t> option_index) const;
  std::vector<std::size_t> option_indices(const Assignment& a) const;

  // Each workflow's lexicographically first choice.
  Assignment default_assignment() const;

 private:
  friend ValidationOutcome validate_problem(Problem raw);
  ValidatedProblem() = default;

  Problem problem_;
  std::map<Id, std::size_t> workflow_index_;
  std::map<Id, std::size_t> device_index_;
  std::vector<std::vector<Option>> options_;
  std::vector<std::vector<std::size_t>> preds_;
  std::vector<std::size_t> topo_;
  std::vector<std::size_t> id_order_;
};

struct ValidationOutcome {
  std::vector<ValidationIssue> issues;
  std::optional<ValidatedProblem> value;  // present iff issues is empty

  bool ok() const { return value.has_value(); }
};

// Collects every violated invariant; returns a validated wrapper iff none.
ValidationOutcome validate_problem(Problem raw);

// ---------------------------------------------------------------------------
// Cost

// First `prepurchased` device-hours at `base`, the remainder at `overflow`.
double tiered_cost(double usage, double prepurchased, double base, double overflow);
// The same tariff written through the tier pivot max(usage, prepurchased):
// (pivot - A)(c1 - c0) + usage * c0.
double tiered_cost_pivot_form(double usage, double prepurchased, double base, double overflow);

std::map<Id, double> device_usage(const ValidatedProblem& p, const Assignment& a);
CostBreakdown evaluate_cost(const ValidatedProblem& p, const Assignment& a);

// Whether usage respects every configured hard cap.
bool within_usage_caps(const ValidatedProblem& p, const Assignment& a);

// ---------------------------------------------------------------------------
// Scheduling

struct DeadlineMiss {
  Id workflow_id;
  double deficit_hours;
};

struct Infeasible {
  std::vector<DeadlineMiss> culprits;  // sorted by workflow id
};

using ScheduleOutcome = std::variant<Schedule, Infeasible>;

// Absolute slack allowed on deadline comparisons.
inline constexpr double kScheduleTolerance = 1e-9;

// Starts every workflow as early as its window and predecessors allow.
ScheduleOutcome earliest_schedule(const ValidatedProblem& p, const Assignment& a);

struct Violation {
  int equation;  // constraint id, numbered as in solver.hpp (2, 4, 6..10)
  std::vector<Id> ids;
  std::string message;
};

std::vector<Violation> check_schedule(const ValidatedProblem& p, const Schedule& s,
                                      double tolerance = 1e-6);

}  // namespace costorch
