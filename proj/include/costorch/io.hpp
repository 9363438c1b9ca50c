#pragma once

// Documents on disk: problems, schedules, run records, fitted models, tune
// results, run logs and orchestration reports. Also the orchestration
// metrics (throughput, reliability, cost-change rate).
//
// JSON documents carry "format_version": 1 and reject unknown fields.
// Records are CSV with a fixed header.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "costorch/core.hpp"
#include "costorch/predictor.hpp"

namespace costorch::io {

inline constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Problems

// Schema check only; the durations block may be absent. Throws ParseError
// or SchemaError.
Problem parse_problem(std::string_view text);
// parse_problem followed by validation; throws ValidationFailed.
ValidatedProblem load_problem(std::string_view text);
std::string save_problem(const Problem& p);

// ---------------------------------------------------------------------------
// Schedules

struct SolveSummary {
  std::string method;  // "branch_and_bound" or "exhaustive"
  std::string status;
  std::uint64_t nodes_explored = 0;
  std::uint64_t nodes_pruned = 0;
  double best_bound = 0.0;

  bool operator==(const SolveSummary&) const = default;
};

struct DeviceCostLine {
  Id device_id;
  double usage = 0.0;
  double tier_pivot = 0.0;
  double cost = 0.0;

  bool operator==(const DeviceCostLine&) const = default;
};

struct ScheduleDocument {
  Assignment assignment;
  std::map<Id, double> start;
  std::map<Id, double> finish;
  std::vector<DeviceCostLine> per_device;
  double total = 0.0;
  std::optional<SolveSummary> solve;

  bool operator==(const ScheduleDocument&) const = default;
};

ScheduleDocument make_schedule_document(const Schedule& s, const CostBreakdown& cost,
                                        std::optional<SolveSummary> solve = std::nullopt);
// Rebuilds a Schedule, taking durations from the problem's table. Throws
// UnknownChoice.
Schedule to_schedule(const ValidatedProblem& p, const ScheduleDocument& doc);

ScheduleDocument load_schedule(std::string_view text);
std::string save_schedule(const ScheduleDocument& doc);

// ---------------------------------------------------------------------------
// Run records

inline constexpr std::string_view kRecordsHeader =
    "job_id,cpu_cores,memory_gb,parallelism,subtask_count,table_count,code_length,"
    "dataset_volume_gb,disk_volume_gb,task_type,observed_duration_s";

// Empty cells mean absent. Line numbers count the header as line 1. Throws
// ParseError, BadEnum.
std::vector<predictor::RunRecord> load_records(std::string_view text);
std::string save_records(const std::vector<predictor::RunRecord>& records);

// ---------------------------------------------------------------------------
// Models and tuning

predictor::LinearModel load_model(std::string_view text);
std::string save_model(const predictor::LinearModel& m);

std::string save_tune_result(const predictor::TuneResult& r, const predictor::TuneConfig& cfg);

// ---------------------------------------------------------------------------
// Orchestration

enum class JobStatus { success, recovered, failed };

const char* to_string(JobStatus s);
std::optional<JobStatus> parse_job_status(std::string_view s);

struct JobOutcome {
  Id workflow_id;
  JobStatus status = JobStatus::success;

  bool operator==(const JobOutcome&) const = default;
};

struct RunLog {
  Problem problem;
  std::optional<Assignment> assignment;  // the scheduled choices
  double elapsed_s = 0.0;
  std::vector<JobOutcome> outcomes;

  bool operator==(const RunLog&) const = default;
};

RunLog load_run_log(std::string_view text);
std::string save_run_log(const RunLog& log);

struct OrchestrationReport {
  std::uint64_t jobs_completed = 0;
  double elapsed_s = 0.0;
  double throughput_jobs_per_s = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t fault_recovered = 0;
  std::uint64_t total_requests = 0;
  double reliability = 0.0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double cost_change_rate = 0.0;

  bool operator==(const OrchestrationReport&) const = default;
};

// Throws ZeroElapsed when t <= 0.
double compute_throughput(std::uint64_t jobs, double elapsed_s);
// Throws ZeroTotal, Overcount.
double compute_reliability(std::uint64_t successes, std::uint64_t recovered, std::uint64_t total);
// Savings fraction (IC - FC) / IC. Throws ZeroInitialCost when IC <= 0.
double compute_ccr(double initial_cost, double final_cost);

// IC prices the default assignment, FC the log's assignment. Throws Error
// when the log has no assignment.
OrchestrationReport orchestration_report(const ValidatedProblem& p, const RunLog& log);

// Reals with six fractional digits, fixed field order.
std::string save_report(const OrchestrationReport& r);
OrchestrationReport load_report(std::string_view text);

// ---------------------------------------------------------------------------
// Files

// Throws Error when the file cannot be read or written.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace costorch::io
