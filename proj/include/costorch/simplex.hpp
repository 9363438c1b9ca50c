#pragma once

// Dense two-phase primal simplex for small linear programs. Used as the
// relaxation engine of the branch-and-bound solver.

#include <cstddef>
#include <limits>
#include <vector>

namespace costorch::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { less_equal, equal, greater_equal };

struct Row {
  std::vector<double> coefficients;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
};

struct Bound {
  double lower = 0.0;
  double upper = kInfinity;
};

// Minimize objective . x subject to rows and per-variable bounds. An empty
// `bounds` means every variable is in [0, inf).
struct LpProblem {
  std::vector<double> objective;
  std::vector<Row> rows;
  std::vector<Bound> bounds;
};

enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus s);

struct LpOutcome {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> values;  // populated on optimal
  double objective = 0.0;
  std::size_t pivots = 0;
};

inline constexpr double kDefaultFeasibilityTolerance = 1e-7;

// Throws MalformedLp on dimension mismatch, NaN data, lower > upper, or a
// lower bound of +inf / upper bound of -inf. Pivoting follows the
// lowest-index rule for both entering and leaving variables, so the result
// is a deterministic function of the input.
LpOutcome solve_lp(const LpProblem& lp, double tolerance = kDefaultFeasibilityTolerance);

}  // namespace costorch::lp
