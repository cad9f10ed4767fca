#pragma once

// Minimizes a smooth convex function over
//
//   { v >= 0 : sum of v over each group = 1,  A v <= b }
//
// with a log-barrier interior-point method (Newton centering in the null
// space of the active equalities). Before the barrier phase a few small LPs
// decide feasibility, find a relative-interior starting point, and detect
// variables forced to zero and inequalities forced to equality, so that
// problems whose feasible set has empty interior (for example D_e = 0) are
// handled on the correct face. On exit the duality gap of the returned point
// is bounded by (number of barrier terms) / t.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rdsi/linprog.hpp"

namespace rdsi::barrier {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Problem {
  std::vector<int> group_of;  // variable index -> group index
  int num_groups = 0;
  Matrix a;                   // inequality rows: a v <= b
  Vector b;
  /// Optional linear equalities (rows of zero_set_eq, right-hand side 0)
  /// that characterize where the objective vanishes. When the feasible set
  /// meets them, that point is returned with value exactly 0.
  Matrix zero_set_eq;

  int size() const { return static_cast<int>(group_of.size()); }
};

struct Options {
  double tolerance = 1e-8;   // target duality gap, objective units
  int max_newton = 2000;
  double feasibility_tol = 1e-10;
};

enum class Status { optimal, zero, infeasible, not_converged };

struct Result {
  Status status = Status::infeasible;
  Vector v;
  double value = std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  int newton_iterations = 0;
};

namespace detail {

/// Builds the LP  max tau  s.t. groups sum to 1, v_i >= tau on `active`
/// variables, a v + tau <= b on `strict` rows, a v = b on `tight` rows,
/// tau <= 1. v is nonnegative; tau = tp - tm.
inline lp::Result max_margin_lp(const Problem& p, const std::vector<bool>& fixed,
                                const std::vector<int>& strict, const std::vector<int>& tight) {
  const int n = p.size();
  const int nv = n + 2;
  const int tp = n, tm = n + 1;
  lp::Problem q;
  q.c = Vector::Zero(nv);
  q.c(tp) = -1.0;
  q.c(tm) = 1.0;
  int n_fixed = 0;
  for (bool f : fixed) n_fixed += f;
  q.a_eq = Matrix::Zero(p.num_groups + n_fixed + static_cast<int>(tight.size()), nv);
  q.b_eq = Vector::Zero(q.a_eq.rows());
  for (int i = 0; i < n; ++i) q.a_eq(p.group_of[i], i) = 1.0;
  for (int g = 0; g < p.num_groups; ++g) q.b_eq(g) = 1.0;
  int r = p.num_groups;
  for (int i = 0; i < n; ++i) {
    if (fixed[i]) q.a_eq(r++, i) = 1.0;
  }
  for (int c : tight) {
    q.a_eq.row(r).head(n) = p.a.row(c);
    q.b_eq(r++) = p.b(c);
  }
  const int n_active = n - n_fixed;
  q.a_le = Matrix::Zero(n_active + static_cast<int>(strict.size()) + 1, nv);
  q.b_le = Vector::Zero(q.a_le.rows());
  r = 0;
  for (int i = 0; i < n; ++i) {
    if (fixed[i]) continue;
    q.a_le(r, i) = -1.0;
    q.a_le(r, tp) = 1.0;
    q.a_le(r, tm) = -1.0;
    ++r;
  }
  for (int c : strict) {
    q.a_le.row(r).head(n) = p.a.row(c);
    q.a_le(r, tp) = 1.0;
    q.a_le(r, tm) = -1.0;
    q.b_le(r) = p.b(c);
    ++r;
  }
  q.a_le(r, tp) = 1.0;
  q.a_le(r, tm) = -1.0;
  q.b_le(r) = 1.0;
  return lp::solve(q);
}

/// Feasible-set LP with a linear objective (minimize obj . v).
inline lp::Result face_lp(const Problem& p, const std::vector<bool>& fixed,
                          const std::vector<int>& rows, const Vector& obj) {
  const int n = p.size();
  lp::Problem q;
  q.c = obj;
  int n_fixed = 0;
  for (bool f : fixed) n_fixed += f;
  q.a_eq = Matrix::Zero(p.num_groups + n_fixed, n);
  q.b_eq = Vector::Zero(q.a_eq.rows());
  for (int i = 0; i < n; ++i) q.a_eq(p.group_of[i], i) = 1.0;
  for (int g = 0; g < p.num_groups; ++g) q.b_eq(g) = 1.0;
  int r = p.num_groups;
  for (int i = 0; i < n; ++i)
    if (fixed[i]) q.a_eq(r++, i) = 1.0;
  q.a_le = Matrix(static_cast<int>(rows.size()), n);
  q.b_le = Vector(static_cast<int>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    q.a_le.row(static_cast<Eigen::Index>(k)) = p.a.row(rows[k]);
    q.b_le(static_cast<Eigen::Index>(k)) = p.b(rows[k]);
  }
  return lp::solve(q);
}

inline Matrix null_space(const Matrix& e) {
  if (e.rows() == 0) return Matrix::Identity(e.cols(), e.cols());
  Eigen::JacobiSVD<Matrix> svd(e, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double thresh = 1e-10 * std::max(1.0, s.size() > 0 ? s(0) : 1.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > thresh) ++rank;
  return svd.matrixV().rightCols(e.cols() - rank);
}

}  // namespace detail

/// Objective concept:
///   double value(const Vector& v) const;
///   void derivatives(const Vector& v, Vector& grad, Matrix& hess) const;
/// Entries of v equal to exactly 0 are held at 0; their derivative entries
/// are ignored.
template <typename Objective>
Result minimize(const Problem& p, const Objective& f, const Options& opt = {}) {
  const int n = p.size();
  const int m = static_cast<int>(p.a.rows());
  const double tol = opt.feasibility_tol;
  Result res;

  // --- presolve -----------------------------------------------------------
  std::vector<bool> fixed(n, false);
  std::vector<bool> dropped(m, false);
  for (int c = 0; c < m; ++c) {
    bool nonneg = true;
    for (int i = 0; i < n; ++i) nonneg = nonneg && p.a(c, i) >= 0.0;
    if (!nonneg) continue;
    // separable lower bound of the row over the simplex product
    std::vector<double> gmin(p.num_groups, std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i) gmin[p.group_of[i]] = std::min(gmin[p.group_of[i]], p.a(c, i));
    double lb = 0.0;
    for (double g : gmin) lb += g;
    if (lb > p.b(c) + tol) return res;  // infeasible
    if (p.b(c) <= tol) {
      for (int i = 0; i < n; ++i)
        if (p.a(c, i) > 0.0) fixed[i] = true;
      dropped[c] = true;
    }
  }
  {
    std::vector<int> free_in_group(p.num_groups, 0);
    for (int i = 0; i < n; ++i)
      if (!fixed[i]) ++free_in_group[p.group_of[i]];
    for (int g = 0; g < p.num_groups; ++g)
      if (free_in_group[g] == 0) return res;  // infeasible
  }
  std::vector<int> rows;
  for (int c = 0; c < m; ++c)
    if (!dropped[c]) rows.push_back(c);

  // --- objective-zero shortcut ------------------------------------------
  if (p.zero_set_eq.rows() > 0) {
    lp::Problem q;
    q.c = Vector::Zero(n);
    int n_fixed = 0;
    for (bool b : fixed) n_fixed += b;
    q.a_eq = Matrix::Zero(p.num_groups + n_fixed + p.zero_set_eq.rows(), n);
    q.b_eq = Vector::Zero(q.a_eq.rows());
    for (int i = 0; i < n; ++i) q.a_eq(p.group_of[i], i) = 1.0;
    for (int g = 0; g < p.num_groups; ++g) q.b_eq(g) = 1.0;
    int r = p.num_groups;
    for (int i = 0; i < n; ++i)
      if (fixed[i]) q.a_eq(r++, i) = 1.0;
    q.a_eq.bottomRows(p.zero_set_eq.rows()) = p.zero_set_eq;
    q.a_le = Matrix(static_cast<int>(rows.size()), n);
    q.b_le = Vector(static_cast<int>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      q.a_le.row(static_cast<Eigen::Index>(k)) = p.a.row(rows[k]);
      q.b_le(static_cast<Eigen::Index>(k)) = p.b(rows[k]);
    }
    const lp::Result z = lp::solve(q);
    if (z.status == lp::Status::optimal) {
      res.status = Status::zero;
      res.v = z.x;
      for (int i = 0; i < n; ++i)
        if (fixed[i]) res.v(i) = 0.0;
      res.value = 0.0;
      res.gap = 0.0;
      return res;
    }
  }

  // --- relative interior ------------------------------------------------
  std::vector<int> strict = rows, tight;
  Vector v0;
  {
    const lp::Result mm = detail::max_margin_lp(p, fixed, strict, tight);
    if (mm.status != lp::Status::optimal) return res;
    const double margin = -mm.objective;
    if (margin < -tol) return res;  // infeasible
    if (margin > 1e-9) {
      v0 = mm.x.head(n);
    } else {
      // Empty interior: find forced zeros and forced equalities.
      std::vector<Vector> pts;
      for (int i = 0; i < n; ++i) {
        if (fixed[i]) continue;
        Vector obj = Vector::Zero(n);
        obj(i) = -1.0;
        const lp::Result r = detail::face_lp(p, fixed, rows, obj);
        if (r.status != lp::Status::optimal) return res;
        if (-r.objective <= 1e-10) {
          fixed[i] = true;
        } else {
          pts.push_back(r.x);
        }
      }
      strict.clear();
      for (int c : rows) {
        const lp::Result r = detail::face_lp(p, fixed, rows, p.a.row(c).transpose());
        if (r.status != lp::Status::optimal) return res;
        if (p.b(c) - r.objective <= 1e-10) {
          tight.push_back(c);
        } else {
          strict.push_back(c);
          pts.push_back(r.x);
        }
      }
      if (pts.empty()) {
        const lp::Result r = detail::face_lp(p, fixed, rows, Vector::Zero(n));
        if (r.status != lp::Status::optimal) return res;
        pts.push_back(r.x);
      }
      v0 = Vector::Zero(n);
      for (const Vector& x : pts) v0 += x;
      v0 /= static_cast<double>(pts.size());
    }
  }
  for (int i = 0; i < n; ++i)
    if (fixed[i]) v0(i) = 0.0;

  std::vector<int> free_idx;
  for (int i = 0; i < n; ++i)
    if (!fixed[i]) free_idx.push_back(i);
  const int nf = static_cast<int>(free_idx.size());
  for (int k = 0; k < nf; ++k) {
    if (v0(free_idx[k]) <= 0.0) v0(free_idx[k]) = 1e-300;  // never after a clean LP
  }

  // Equalities restricted to free coordinates.
  Matrix e = Matrix::Zero(p.num_groups + static_cast<int>(tight.size()), nf);
  for (int k = 0; k < nf; ++k) e(p.group_of[free_idx[k]], k) = 1.0;
  for (std::size_t t = 0; t < tight.size(); ++t)
    for (int k = 0; k < nf; ++k)
      e(p.num_groups + static_cast<Eigen::Index>(t), k) = p.a(tight[t], free_idx[k]);
  const Matrix nsp = detail::null_space(e);

  res.v = v0;
  if (nsp.cols() == 0) {
    res.status = Status::optimal;
    res.value = f.value(v0);
    res.gap = 0.0;
    return res;
  }

  const int ms = static_cast<int>(strict.size());
  Matrix as(ms, nf);
  Vector bs(ms);
  for (int s = 0; s < ms; ++s) {
    for (int k = 0; k < nf; ++k) as(s, k) = p.a(strict[s], free_idx[k]);
    bs(s) = p.b(strict[s]);
  }
  const double barrier_terms = static_cast<double>(nf + ms);

  auto strictly_feasible = [&](const Vector& v) {
    for (int k = 0; k < nf; ++k)
      if (!(v(free_idx[k]) > 0.0)) return false;
    for (int s = 0; s < ms; ++s) {
      double lhs = 0.0;
      for (int k = 0; k < nf; ++k) lhs += as(s, k) * v(free_idx[k]);
      if (!(bs(s) - lhs > 0.0)) return false;
    }
    return true;
  };
  auto barrier_value = [&](const Vector& v, double t) {
    double val = t * f.value(v);
    for (int k = 0; k < nf; ++k) val -= std::log(v(free_idx[k]));
    for (int s = 0; s < ms; ++s) {
      double lhs = 0.0;
      for (int k = 0; k < nf; ++k) lhs += as(s, k) * v(free_idx[k]);
      val -= std::log(bs(s) - lhs);
    }
    return val;
  };

  Vector v = v0;
  Vector g_full(n);
  Matrix h_full(n, n);
  double t = 1.0;
  int newton = 0;
  bool converged = false;
  while (newton < opt.max_newton) {
    // centering
    for (; newton < opt.max_newton; ++newton) {
      g_full.setZero();
      h_full.setZero();
      f.derivatives(v, g_full, h_full);
      Vector g(nf);
      Matrix h(nf, nf);
      for (int k = 0; k < nf; ++k) {
        const int i = free_idx[k];
        g(k) = t * g_full(i) - 1.0 / v(i);
        for (int l = 0; l < nf; ++l) h(k, l) = t * h_full(i, free_idx[l]);
        h(k, k) += 1.0 / (v(i) * v(i));
      }
      for (int s = 0; s < ms; ++s) {
        double lhs = 0.0;
        for (int k = 0; k < nf; ++k) lhs += as(s, k) * v(free_idx[k]);
        const double slack = bs(s) - lhs;
        g += as.row(s).transpose() / slack;
        h += as.row(s).transpose() * as.row(s) / (slack * slack);
      }
      const Vector gr = nsp.transpose() * g;
      const Matrix hr = nsp.transpose() * h * nsp;
      Eigen::LDLT<Matrix> ldlt(hr);
      Vector dz = ldlt.solve(-gr);
      if (ldlt.info() != Eigen::Success || !dz.allFinite()) {
        dz = hr.completeOrthogonalDecomposition().solve(-gr);
      }
      const double lambda2 = -gr.dot(dz);
      if (!(lambda2 > 1e-10)) break;
      Vector dv = Vector::Zero(n);
      const Vector step = nsp * dz;
      for (int k = 0; k < nf; ++k) dv(free_idx[k]) = step(k);
      double s = 1.0;
      Vector trial = v + s * dv;
      int guard = 0;
      while (!strictly_feasible(trial) && guard++ < 200) {
        s *= 0.5;
        trial = v + s * dv;
      }
      const double f0 = barrier_value(v, t);
      guard = 0;
      while (barrier_value(trial, t) > f0 - 0.25 * s * lambda2 && guard++ < 60) {
        s *= 0.5;
        trial = v + s * dv;
      }
      if (guard > 60) break;
      v = trial;
      if (s < 1e-3 && lambda2 < 1e-6) break;  // roundoff-limited
    }
    if (barrier_terms / t <= opt.tolerance) {
      converged = true;
      break;
    }
    t *= 10.0;
  }

  res.v = v;
  res.value = f.value(v);
  res.gap = barrier_terms / t;
  res.newton_iterations = newton;
  res.status = converged ? Status::optimal : Status::not_converged;
  return res;
}

}  // namespace rdsi::barrier
