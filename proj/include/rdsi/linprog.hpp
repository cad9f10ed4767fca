#pragma once

// Dense two-phase tableau simplex for the small linear programs that appear
// in feasibility checks and hull-membership tests. Bland's rule throughout,
// so the method terminates on degenerate problems; sizes here are tens of
// variables at most.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace rdsi::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

/// minimize c'x  subject to  a_eq x = b_eq,  a_le x <= b_le,  x >= 0.
struct Problem {
  Eigen::VectorXd c;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_le;
  Eigen::VectorXd b_le;
};

struct Result {
  Status status = Status::infeasible;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  /// Lagrange multipliers y with c - A'y >= 0 on the optimal basis
  /// (equality rows first, then inequality rows; inequality duals are <= 0).
  Eigen::VectorXd dual;
};

namespace detail {

class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)) {}

  double& at(int i, int j) { return t_(i, j); }
  double at(int i, int j) const { return t_(i, j); }
  double& rhs(int i) { return t_(i, n_); }
  double& obj(int j) { return t_(m_, j); }

  void pivot(int r, int c) {
    const double p = t_(r, c);
    t_.row(r) /= p;
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
  }

  int rows() const { return m_; }
  int cols() const { return n_; }

 private:
  int m_, n_;
  Eigen::MatrixXd t_;
};

constexpr double kReducedCostTol = 1e-11;
constexpr double kPivotTol = 1e-10;

/// Runs simplex iterations minimizing the objective row. Columns with
/// allowed[j] == false never enter. Returns false if unbounded.
inline Status iterate(Tableau& t, std::vector<int>& basis, const std::vector<bool>& allowed,
                      int max_iters) {
  for (int it = 0; it < max_iters; ++it) {
    int enter = -1;
    for (int j = 0; j < t.cols(); ++j) {
      if (allowed[j] && t.obj(j) < -kReducedCostTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return Status::optimal;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, enter);
      if (a > kPivotTol) {
        const double ratio = t.rhs(i) / a;
        if (ratio < best - 1e-15 || (std::abs(ratio - best) <= 1e-15 && leave >= 0 &&
                                     basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return Status::unbounded;
    t.pivot(leave, enter);
    basis[leave] = enter;
  }
  return Status::iteration_limit;
}

}  // namespace detail

inline Result solve(const Problem& prob, int max_iters = 10000) {
  const int n = static_cast<int>(prob.c.size());
  const int m_eq = static_cast<int>(prob.a_eq.rows());
  const int m_le = static_cast<int>(prob.a_le.rows());
  const int m = m_eq + m_le;
  // Columns: [x (n) | slacks (m_le) | artificials (m)]
  const int n_slack = m_le;
  const int art0 = n + n_slack;
  const int cols = art0 + m;

  detail::Tableau t(m, cols);
  std::vector<double> sign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    const bool is_eq = i < m_eq;
    const double b = is_eq ? prob.b_eq(i) : prob.b_le(i - m_eq);
    sign[i] = b < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j)
      t.at(i, j) = sign[i] * (is_eq ? prob.a_eq(i, j) : prob.a_le(i - m_eq, j));
    if (!is_eq) t.at(i, n + (i - m_eq)) = sign[i];
    t.at(i, art0 + i) = 1.0;
    t.rhs(i) = sign[i] * b;
  }
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = art0 + i;

  // Phase 1: minimize the sum of artificials.
  for (int j = 0; j < cols; ++j) t.obj(j) = 0.0;
  t.rhs(m) = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < art0; ++j) t.obj(j) -= t.at(i, j);
    t.rhs(m) -= t.rhs(i);
  }
  std::vector<bool> allowed(cols, true);
  Result res;
  Status st = detail::iterate(t, basis, allowed, max_iters);
  if (st == Status::iteration_limit) {
    res.status = st;
    return res;
  }
  double scale = 1.0;
  for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(sign[i] * t.rhs(i)));
  if (-t.rhs(m) > 1e-9 * scale) {
    res.status = Status::infeasible;
    return res;
  }

  // Drive artificials out of the basis where possible.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < art0) continue;
    for (int j = 0; j < art0; ++j) {
      if (std::abs(t.at(i, j)) > 1e-9) {
        t.pivot(i, j);
        basis[i] = j;
        break;
      }
    }
  }

  // Phase 2.
  for (int j = art0; j < cols; ++j) allowed[j] = false;
  for (int j = 0; j < cols; ++j) t.obj(j) = j < n ? prob.c(j) : 0.0;
  t.rhs(m) = 0.0;
  for (int i = 0; i < m; ++i) {
    const int b = basis[i];
    const double cb = b < n ? prob.c(b) : 0.0;
    if (cb == 0.0) continue;
    for (int j = 0; j < cols; ++j) t.obj(j) -= cb * t.at(i, j);
    t.rhs(m) -= cb * t.rhs(i);
  }
  st = detail::iterate(t, basis, allowed, max_iters);
  res.status = st;
  if (st != Status::optimal) return res;

  res.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) res.x(basis[i]) = std::max(0.0, t.rhs(i));
  res.objective = prob.c.dot(res.x);
  // Reduced cost of artificial column i equals -y_i (standard-form rows).
  res.dual.resize(m);
  for (int i = 0; i < m; ++i) res.dual(i) = -t.obj(art0 + i) * sign[i];
  return res;
}

}  // namespace rdsi::lp
