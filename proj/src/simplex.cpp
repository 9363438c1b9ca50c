#include "costorch/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "costorch/error.hpp"

namespace costorch::lp {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::unbounded:
      return "unbounded";
  }
  return "?";
}

namespace {

constexpr double kPivotTolerance = 1e-9;
constexpr double kRatioTie = 1e-12;
constexpr std::size_t kIterationCap = 200000;

// x_j = offset + sum(sign * y_col) over at most two nonnegative columns.
struct VarMap {
  double offset = 0.0;
  int first = -1;
  double first_sign = 1.0;
  int second = -1;  // negative part of a free variable
};

struct StdRow {
  std::vector<double> a;
  Relation rel;
  double rhs;
};

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_(rows * (cols + 1), 0.0) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * (n_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * (n_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n_); }
  double rhs(std::size_t i) const { return at(i, n_); }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  void pivot(std::size_t r, std::size_t c, std::vector<double>& cost_row, double& cost_rhs) {
    const std::size_t w = n_ + 1;
    double* pr = &t_[r * w];
    const double inv = 1.0 / pr[c];
    for (std::size_t j = 0; j < w; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* pi = &t_[i * w];
      const double f = pi[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) pi[j] -= f * pr[j];
      pi[c] = 0.0;
    }
    const double f = cost_row[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j < n_; ++j) cost_row[j] -= f * pr[j];
      cost_rhs -= f * pr[n_];
      cost_row[c] = 0.0;
    }
  }

  void erase_row(std::size_t r) {
    const std::size_t w = n_ + 1;
    t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(r * w),
             t_.begin() + static_cast<std::ptrdiff_t>((r + 1) * w));
    --m_;
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> t_;
};

enum class PhaseResult { optimal, unbounded };

// Reduced costs d_j = c_j - c_B B^-1 A_j for the current basis.
void price(const Tableau& t, const std::vector<std::size_t>& basis, const std::vector<double>& c,
           std::vector<double>& d, double& d_rhs) {
  d = c;
  d_rhs = 0.0;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const double cb = c[basis[i]];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j < t.cols(); ++j) d[j] -= cb * t.at(i, j);
    d_rhs -= cb * t.rhs(i);
  }
}

PhaseResult iterate(Tableau& t, std::vector<std::size_t>& basis, const std::vector<double>& c,
                    std::size_t allowed_cols, double tol, std::size_t& pivots) {
  std::vector<double> d;
  double d_rhs = 0.0;
  price(t, basis, c, d, d_rhs);
  for (std::size_t iter = 0;; ++iter) {
    if (iter > kIterationCap) throw Error("simplex iteration cap exceeded");
    std::size_t enter = allowed_cols;
    for (std::size_t j = 0; j < allowed_cols; ++j)
      if (d[j] < -tol) {
        enter = j;
        break;
      }
    if (enter == allowed_cols) return PhaseResult::optimal;

    std::size_t leave = t.rows();
    double best = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, enter);
      if (a <= kPivotTolerance) continue;
      const double ratio = std::max(t.rhs(i), 0.0) / a;
      if (leave == t.rows() || ratio < best - kRatioTie) {
        leave = i;
        best = ratio;
      } else if (ratio <= best + kRatioTie && basis[i] < basis[leave]) {
        leave = i;
      }
    }
    if (leave == t.rows()) return PhaseResult::unbounded;
    t.pivot(leave, enter, d, d_rhs);
    basis[leave] = enter;
    ++pivots;
  }
}

void check_finite(double v, const char* what) {
  if (std::isnan(v)) throw MalformedLp(std::string("NaN in ") + what);
}

}  // namespace

LpOutcome solve_lp(const LpProblem& lp, double tolerance) {
  const std::size_t n = lp.objective.size();
  if (!lp.bounds.empty() && lp.bounds.size() != n)
    throw MalformedLp("bounds size " + std::to_string(lp.bounds.size()) + " != " + std::to_string(n));
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    if (lp.rows[r].coefficients.size() != n)
      throw MalformedLp("row " + std::to_string(r) + " has " +
                        std::to_string(lp.rows[r].coefficients.size()) + " coefficients, expected " +
                        std::to_string(n));
    for (double a : lp.rows[r].coefficients) {
      check_finite(a, "row coefficients");
      if (std::isinf(a)) throw MalformedLp("infinite row coefficient");
    }
    check_finite(lp.rows[r].rhs, "row rhs");
    if (std::isinf(lp.rows[r].rhs)) throw MalformedLp("infinite row rhs");
  }
  for (double c : lp.objective) {
    check_finite(c, "objective");
    if (std::isinf(c)) throw MalformedLp("infinite objective coefficient");
  }
  if (!(tolerance > 0.0)) throw MalformedLp("tolerance must be positive");

  // Shift, reflect, or split each variable onto nonnegative columns.
  std::vector<VarMap> map(n);
  std::size_t ny = 0;
  std::vector<StdRow> rows;
  std::vector<std::pair<std::size_t, double>> bound_rows;  // (column, width)
  for (std::size_t j = 0; j < n; ++j) {
    const Bound b = lp.bounds.empty() ? Bound{} : lp.bounds[j];
    check_finite(b.lower, "bounds");
    check_finite(b.upper, "bounds");
    if (b.lower > b.upper || b.lower == kInfinity || b.upper == -kInfinity)
      throw MalformedLp("variable " + std::to_string(j) + " has empty bound interval");
    if (b.lower == b.upper) {
      map[j].offset = b.lower;
    } else if (std::isfinite(b.lower)) {
      map[j] = {b.lower, static_cast<int>(ny++), 1.0, -1};
      if (std::isfinite(b.upper)) bound_rows.emplace_back(ny - 1, b.upper - b.lower);
    } else if (std::isfinite(b.upper)) {
      map[j] = {b.upper, static_cast<int>(ny++), -1.0, -1};
    } else {
      map[j].first = static_cast<int>(ny++);
      map[j].second = static_cast<int>(ny++);
    }
  }

  for (const auto& r : lp.rows) {
    StdRow s{std::vector<double>(ny, 0.0), r.relation, r.rhs};
    for (std::size_t j = 0; j < n; ++j) {
      const double a = r.coefficients[j];
      if (a == 0.0) continue;
      s.rhs -= a * map[j].offset;
      if (map[j].first >= 0) s.a[map[j].first] += a * map[j].first_sign;
      if (map[j].second >= 0) s.a[map[j].second] -= a;
    }
    rows.push_back(std::move(s));
  }
  for (auto [col, width] : bound_rows) {
    StdRow s{std::vector<double>(ny, 0.0), Relation::less_equal, width};
    s.a[col] = 1.0;
    rows.push_back(std::move(s));
  }

  std::vector<double> cost(ny, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double c = lp.objective[j];
    if (map[j].first >= 0) cost[map[j].first] += c * map[j].first_sign;
    if (map[j].second >= 0) cost[map[j].second] -= c;
  }

  // Nonnegative right-hand sides, then slack / surplus / artificial columns.
  std::size_t n_slack = 0, n_art = 0;
  double rhs_scale = 1.0;
  for (auto& r : rows) {
    if (r.rhs < 0.0) {
      r.rhs = -r.rhs;
      for (double& a : r.a) a = -a;
      if (r.rel == Relation::less_equal)
        r.rel = Relation::greater_equal;
      else if (r.rel == Relation::greater_equal)
        r.rel = Relation::less_equal;
    }
    rhs_scale = std::max(rhs_scale, r.rhs);
    if (r.rel != Relation::equal) ++n_slack;
    if (r.rel != Relation::less_equal) ++n_art;
  }

  const std::size_t m = rows.size();
  const std::size_t art_begin = ny + n_slack;
  const std::size_t total_cols = art_begin + n_art;
  Tableau t(m, total_cols);
  std::vector<std::size_t> basis(m);
  std::size_t slack = ny, art = art_begin;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < ny; ++k) t.at(i, k) = rows[i].a[k];
    t.rhs(i) = rows[i].rhs;
    switch (rows[i].rel) {
      case Relation::less_equal:
        t.at(i, slack) = 1.0;
        basis[i] = slack++;
        break;
      case Relation::greater_equal:
        t.at(i, slack++) = -1.0;
        t.at(i, art) = 1.0;
        basis[i] = art++;
        break;
      case Relation::equal:
        t.at(i, art) = 1.0;
        basis[i] = art++;
        break;
    }
  }

  LpOutcome out;
  if (n_art > 0) {
    std::vector<double> phase1(total_cols, 0.0);
    for (std::size_t j = art_begin; j < total_cols; ++j) phase1[j] = 1.0;
    iterate(t, basis, phase1, total_cols, tolerance, out.pivots);
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i)
      if (basis[i] >= art_begin) infeasibility += std::max(t.rhs(i), 0.0);
    if (infeasibility > tolerance * rhs_scale) {
      out.status = LpStatus::infeasible;
      return out;
    }
    // Pivot zero-level artificials out; rows with no other support are redundant.
    std::vector<double> unused(total_cols, 0.0);
    double unused_rhs = 0.0;
    for (std::size_t i = 0; i < t.rows();) {
      if (basis[i] < art_begin) {
        ++i;
        continue;
      }
      std::size_t col = art_begin;
      for (std::size_t j = 0; j < art_begin; ++j)
        if (std::abs(t.at(i, j)) > kPivotTolerance) {
          col = j;
          break;
        }
      if (col == art_begin) {
        t.erase_row(i);
        basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
      t.pivot(i, col, unused, unused_rhs);
      basis[i] = col;
      ++out.pivots;
      ++i;
    }
  }

  std::vector<double> phase2(total_cols, 0.0);
  std::copy(cost.begin(), cost.end(), phase2.begin());
  if (iterate(t, basis, phase2, art_begin, tolerance, out.pivots) == PhaseResult::unbounded) {
    out.status = LpStatus::unbounded;
    return out;
  }

  std::vector<double> y(ny, 0.0);
  for (std::size_t i = 0; i < t.rows(); ++i)
    if (basis[i] < ny) y[basis[i]] = std::max(t.rhs(i), 0.0);

  out.status = LpStatus::optimal;
  out.values.resize(n);
  out.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double v = map[j].offset;
    if (map[j].first >= 0) v += map[j].first_sign * y[map[j].first];
    if (map[j].second >= 0) v -= y[map[j].second];
    out.values[j] = v;
    out.objective += lp.objective[j] * v;
  }
  return out;
}

}  // namespace costorch::lp
