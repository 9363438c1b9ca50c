#pragma once

// Mixed-integer model of the cost-minimal assignment problem and an
// LP-relaxation branch-and-bound solver for it.
//
// Variables: one binary x per (workflow, device, config); continuous start
// s, finish t and duration g per workflow; usage u and tier pivot u1 per
// device. The objective is
//   sum_d (u1_d - A_d)(c1_d - c0_d) + sum_d u_d c0_d
// and the rows are numbered after the constraints they realize:
//   2  sum x = 1 per workflow          6  s + g = t
//   3  sum h b x = u per device        7  sum h x = g
//   4  u <= u1 (a cap also bounds u)  8  t_i <= s_j for each precedence pair
//   5  A <= u1                         9, 10 are bounds e <= s and t <= l.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "costorch/core.hpp"
#include "costorch/simplex.hpp"

namespace costorch::milp {

enum class VarKind { binary, continuous };
enum class Symbol { x, s, t, g, u, u1 };

inline constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Which entity a variable belongs to. `option` indexes
// ValidatedProblem::options(workflow) and is only set for x.
struct VarRef {
  Symbol symbol;
  std::size_t workflow = kNone;
  std::size_t device = kNone;
  std::size_t option = kNone;

  auto operator<=>(const VarRef&) const = default;
};

struct Variable {
  std::string name;
  VarKind kind;
  VarRef ref;
  double lower;
  double upper;
};

struct ModelRow {
  int equation;
  std::string label;
  lp::Row row;
};

struct BoundConstraint {
  int equation;
  std::size_t variable;
  bool upper;  // false: lower bound
  double value;
};

class MilpModel {
 public:
  const ValidatedProblem& problem() const { return problem_; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<ModelRow>& rows() const { return rows_; }
  const std::vector<BoundConstraint>& bound_constraints() const { return bounds_; }
  const std::vector<double>& objective() const { return objective_; }
  // Constant part of the objective: -sum_d A_d (c1_d - c0_d).
  double objective_offset() const { return objective_offset_; }

  std::size_t binary_count() const;
  std::size_t continuous_count() const;
  std::size_t row_count(int equation) const;
  std::size_t bound_count(int equation) const;

  std::optional<std::size_t> index_of(const VarRef& ref) const;
  std::optional<std::size_t> index_of(const std::string& name) const;

  // The LP relaxation with binaries in [0, 1].
  lp::LpProblem relaxation() const;

  double objective_value(const std::vector<double>& values) const;

 private:
  friend MilpModel build_milp(const ValidatedProblem& vp);
  explicit MilpModel(ValidatedProblem vp) : problem_(std::move(vp)) {}

  std::size_t add(std::string name, VarKind kind, VarRef ref, double lower, double upper);

  ValidatedProblem problem_;
  std::vector<Variable> variables_;
  std::vector<ModelRow> rows_;
  std::vector<BoundConstraint> bounds_;
  std::vector<double> objective_;
  double objective_offset_ = 0.0;
  std::map<VarRef, std::size_t> by_ref_;
  std::map<std::string, std::size_t> by_name_;
};

MilpModel build_milp(const ValidatedProblem& vp);

struct SolverConfig {
  double integrality_tolerance = 1e-6;
  double absolute_gap = 1e-6;
  std::uint64_t node_limit = 1'000'000;
  double time_limit_s = 60.0;
  double lp_tolerance = lp::kDefaultFeasibilityTolerance;
  // Disabling pruning explores the whole tree; only node counts change.
  bool prune = true;
};

enum class SolveStatus { optimal, infeasible, node_limit, time_limit };

const char* to_string(SolveStatus s);

struct SolveReport {
  std::uint64_t nodes_explored = 0;
  std::uint64_t nodes_pruned = 0;
  double best_bound = 0.0;
  double wall_time_s = 0.0;
  // Largest amount by which a child's LP bound fell below its parent's.
  double max_bound_decrease = 0.0;
};

struct Solution {
  Assignment assignment;
  Schedule schedule;
  CostBreakdown cost;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::infeasible;
  std::optional<std::vector<double>> incumbent;
  double incumbent_objective = 0.0;
  std::optional<Solution> solution;
  SolveReport report;
};

SolveOutcome solve(const MilpModel& model, const SolverConfig& config = {});

// Maps the incumbent back to domain values. Throws InconsistentIncumbent
// if the binaries do not select exactly one choice per workflow, the
// recomputed cost deviates from the objective by more than 1e-6, or the
// timing violates a constraint.
Solution extract_solution(const MilpModel& model, const SolveOutcome& outcome,
                          double integrality_tolerance = 1e-6);

}  // namespace costorch::milp
