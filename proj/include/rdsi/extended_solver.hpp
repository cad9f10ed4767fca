#pragma once

// K-constraint extension: the encoder's estimate may use a private auxiliary
// U in addition to (X, Z), and each constraint is a three-argument function
// d_k(x, xhat_d, xhat_e). Same outer/inner structure as the base solver; a
// per-z type is now a phi column plus a set of at most |U| psi columns (one
// per value of U; equal columns can be merged since the objective only sees Z).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rdsi/caratheodory.hpp"
#include "rdsi/discrete_model.hpp"
#include "rdsi/discrete_solver.hpp"
#include "rdsi/error.hpp"

namespace rdsi {

struct ExtSolveConfig {
  std::optional<int> u_size;  // default: number of constraints that depend on xhat_e
  std::optional<int> z_size;  // default: |X| u_size + K + 1
  SolveConfig inner;
};

struct ExtRatePoint {
  std::vector<double> targets;
  double rate = 0.0;
  ExtWitness witness;
  std::vector<double> achieved;
  SolveStatus status = SolveStatus::optimal;
  bool upper_bound = false;
  int u_size = 0;
  int z_size = 0;
  double gap = 0.0;
  int iterations = 0;
  long candidates = 0;
  long feasible_candidates = 0;
};

/// Number of constraints whose table varies with xhat_e.
inline int encoder_dependent_constraints(const ExtendedInstance& ext) {
  int count = 0;
  for (const Tensor3& d : ext.dk) {
    bool depends = false;
    for (int x = 0; x < d.dim0() && !depends; ++x)
      for (int a = 0; a < d.dim1() && !depends; ++a)
        for (int b = 1; b < d.dim2() && !depends; ++b) depends = d(x, a, b) != d(x, a, 0);
    count += depends;
  }
  return count;
}

/// I(X;Z) - I(Y;Z) for a joint conditional table p(u, z | x) laid out X x U x Z.
inline double ext_rate_objective(const JointSource& src, const Tensor3& p_uz_given_x) {
  require(p_uz_given_x.dim0() == src.x_size(), ErrorKind::dimension,
          "p_uz_given_x must be X x U x Z");
  TestChannel ch;
  ch.pz_given_x = Matrix::Zero(src.x_size(), p_uz_given_x.dim2());
  for (int x = 0; x < src.x_size(); ++x)
    for (int u = 0; u < p_uz_given_x.dim1(); ++u)
      for (int z = 0; z < p_uz_given_x.dim2(); ++z) ch.pz_given_x(x, z) += p_uz_given_x(x, u, z);
  ch.phi = IndexTable::Zero(src.y_size(), ch.z_size());
  ch.psi = IndexTable::Zero(src.x_size(), ch.z_size());
  return rate_objective(src, ch);
}

/// E d_k(X, phi(Y, Z), psi3(X, Z, U)) under p(x, y) p(u, z | x).
inline double ext_expected_distortion_k(const JointSource& src, const ExtendedInstance& ext,
                                        const Tensor3& p_uz_given_x, const IndexTable& phi,
                                        const IndexTensor3& psi3, int k) {
  validate_extended(ext, src.x_size());
  require(k >= 0 && k < ext.k(), ErrorKind::domain, "constraint index out of range");
  const int xs = src.x_size(), ys = src.y_size();
  const int us = p_uz_given_x.dim1(), zs = p_uz_given_x.dim2();
  require(p_uz_given_x.dim0() == xs, ErrorKind::dimension, "p_uz_given_x must be X x U x Z");
  require(phi.rows() == ys && phi.cols() == zs, ErrorKind::dimension, "phi must be Y x Z");
  require(psi3.dim0() == xs && psi3.dim1() == zs && psi3.dim2() == us, ErrorKind::dimension,
          "psi3 must be X x Z x U");
  double e = 0.0;
  for (int x = 0; x < xs; ++x)
    for (int y = 0; y < ys; ++y) {
      const double pxy = src.pxy(x, y);
      if (pxy == 0.0) continue;
      for (int u = 0; u < us; ++u)
        for (int z = 0; z < zs; ++z) {
          const double m = pxy * p_uz_given_x(x, u, z);
          if (m != 0.0) e += m * ext.dk[k](x, phi(y, z), psi3(x, z, u));
        }
    }
  return e;
}

/// p(u, z | x) = p(z | x) p(u | x, z), laid out X x U x Z.
inline Tensor3 joint_uz(const ExtWitness& w) {
  const int xs = static_cast<int>(w.pz_given_x.rows());
  Tensor3 t(xs, w.u_size(), w.z_size());
  for (int x = 0; x < xs; ++x)
    for (int z = 0; z < w.z_size(); ++z)
      for (int u = 0; u < w.u_size(); ++u) t(x, u, z) = w.pz_given_x(x, z) * w.pu_given_xz(x, z, u);
  return t;
}

inline std::vector<double> witness_distortions(const JointSource& src, const ExtendedInstance& ext,
                                               const ExtWitness& w) {
  const Tensor3 j = joint_uz(w);
  std::vector<double> out;
  for (int k = 0; k < ext.k(); ++k)
    out.push_back(ext_expected_distortion_k(src, ext, j, w.phi, w.psi, k));
  return out;
}

inline double witness_rate(const JointSource& src, const ExtWitness& w) {
  TestChannel ch{w.pz_given_x, IndexTable::Zero(src.y_size(), w.z_size()),
                 IndexTable::Zero(src.x_size(), w.z_size())};
  return rate_objective(src, ch);
}

struct UReductionCheck {
  bool ok = false;
  UReduction reduction;
  std::vector<double> before;  // overall distortions
  std::vector<double> after;
  double rate_before = 0.0;
  double rate_after = 0.0;
};

/// Reduces U to at most K symbols and checks that the reduced witness meets
/// every target (within 1e-9) with an identical rate objective.
inline UReductionCheck verify_u_reduction(const JointSource& src, const ExtendedInstance& ext,
                                          const ExtWitness& w) {
  UReductionCheck c;
  c.reduction = reduce_aux_u(src, ext, w);
  c.before = witness_distortions(src, ext, w);
  c.after = witness_distortions(src, ext, c.reduction.witness);
  c.rate_before = witness_rate(src, w);
  c.rate_after = witness_rate(src, c.reduction.witness);
  c.ok = c.rate_before == c.rate_after && c.reduction.witness.u_size() <= ext.k();
  for (int k = 0; k < ext.k(); ++k) c.ok = c.ok && c.after[k] <= ext.targets[k] + 1e-9;
  return c;
}

namespace detail {

struct ExtType {
  int phi = 0;              // phi column index
  std::vector<int> psi;     // psi column indices, one per U value
};

}  // namespace detail

inline ExtRatePoint solve_rate_ext(const JointSource& src, const ExtendedInstance& ext,
                                   const ExtSolveConfig& cfg = {}) {
  cfg.inner.validate();
  validate_extended(ext, src.x_size());
  require(check_extended_assumption(ext, src.x_size()), ErrorKind::assumption,
          "zero-distortion assumption violated: some x has no (xd, xe) with all d_k = 0");
  const int xs = src.x_size(), ys = src.y_size(), kk = ext.k();
  const int dep = encoder_dependent_constraints(ext);
  const int u_bound = std::max(1, dep);
  const int u_size = cfg.u_size.value_or(u_bound);
  require(u_size >= 1, ErrorKind::domain, "u_size must be >= 1");
  const int z_bound = xs * u_bound + kk + 1;
  const int z_size = cfg.z_size.value_or(xs * u_size + kk + 1);
  require(z_size >= 1, ErrorKind::domain, "z_size must be >= 1");

  const long long n_phi = detail::ipow(ext.xhat_d_size, ys);
  // When no constraint looks at xhat_e, a single encoder rule is enough.
  const long long n_psi = dep == 0 ? 1 : detail::ipow(ext.xhat_e_size, xs);
  require(n_phi > 0 && n_psi > 0 && n_phi * n_psi <= (1LL << 20), ErrorKind::resource_cap,
          "reconstruction rule space too large; reduce the alphabets");
  const int per_z = static_cast<int>(std::min<long long>(u_size, n_psi));

  std::vector<detail::ExtType> types;
  for (long long a = 0; a < n_phi; ++a)
    for (const auto& s : detail::subsets(static_cast<int>(n_psi), per_z))
      types.push_back({static_cast<int>(a), s});
  const auto cand =
      detail::candidate_sets(static_cast<long long>(types.size()), z_size, cfg.inner.enumeration_cap);

  // Coefficient of v(x, (z, u)) in constraint k, per type and u slot.
  std::vector<std::vector<int>> phi_cols(static_cast<std::size_t>(n_phi));
  for (long long a = 0; a < n_phi; ++a) phi_cols[a] = detail::column_digits(a, ext.xhat_d_size, ys);
  std::vector<std::vector<int>> psi_cols(static_cast<std::size_t>(n_psi));
  for (long long b = 0; b < n_psi; ++b) psi_cols[b] = detail::column_digits(b, ext.xhat_e_size, xs);
  auto coeff = [&](const detail::ExtType& t, int slot, int k, int x) {
    double c = 0.0;
    for (int y = 0; y < ys; ++y)
      c += src.pxy(x, y) * ext.dk[k](x, phi_cols[t.phi][y], psi_cols[t.psi[slot]][x]);
    return c;
  };

  auto solve_one = [&](std::size_t i) {
    const std::vector<int>& s = cand[i];
    const int zc = static_cast<int>(s.size());
    std::vector<int> col_to_z(static_cast<std::size_t>(zc) * per_z);
    for (int z = 0; z < zc; ++z)
      for (int u = 0; u < per_z; ++u) col_to_z[z * per_z + u] = z;
    const detail::ConditionalMI obj(src, col_to_z, zc);
    std::vector<Matrix> cm(kk, Matrix(xs, zc * per_z));
    for (int k = 0; k < kk; ++k)
      for (int x = 0; x < xs; ++x)
        for (int z = 0; z < zc; ++z)
          for (int u = 0; u < per_z; ++u) cm[k](x, z * per_z + u) = coeff(types[s[z]], u, k, x);
    return detail::minimize_channel(obj, cm, ext.targets, xs, cfg.inner);
  };

  std::vector<double> values(cand.size(), std::numeric_limits<double>::infinity());
  parallel_for(cand.size(), cfg.inner.threads, [&](std::size_t i) {
    const detail::InnerOutcome o = solve_one(i);
    if (o.status != SolveStatus::infeasible) values[i] = o.value;
  });
  int best = -1;
  long feasible = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    ++feasible;
    if (values[i] < best_val - 1e-12) {
      best_val = values[i];
      best = static_cast<int>(i);
    }
  }
  if (best < 0) fail(ErrorKind::infeasible, "no reconstruction rules meet the distortion targets");
  const detail::InnerOutcome o = solve_one(static_cast<std::size_t>(best));

  const std::vector<int>& s = cand[best];
  const int zc = static_cast<int>(s.size());
  ExtRatePoint rp;
  rp.targets = ext.targets;
  rp.rate = o.value;
  ExtWitness& w = rp.witness;
  w.pz_given_x = Matrix::Zero(xs, zc);
  w.pu_given_xz = Tensor3(xs, zc, per_z);
  w.phi = IndexTable(ys, zc);
  w.psi = IndexTensor3(xs, zc, per_z);
  const int cols = zc * per_z;
  for (int z = 0; z < zc; ++z) {
    const detail::ExtType& t = types[s[z]];
    for (int y = 0; y < ys; ++y) w.phi(y, z) = phi_cols[t.phi][y];
    for (int x = 0; x < xs; ++x) {
      double pz = 0.0;
      for (int u = 0; u < per_z; ++u) pz += o.v(x * cols + z * per_z + u);
      w.pz_given_x(x, z) = pz;
      for (int u = 0; u < per_z; ++u) {
        w.psi(x, z, u) = psi_cols[t.psi[u]][x];
        w.pu_given_xz(x, z, u) = pz > 0.0 ? o.v(x * cols + z * per_z + u) / pz : (u == 0 ? 1.0 : 0.0);
      }
    }
  }
  rp.achieved = witness_distortions(src, ext, w);
  rp.status = o.status;
  rp.u_size = per_z;
  rp.z_size = zc;
  rp.upper_bound = u_size < u_bound || z_size < z_bound;
  rp.gap = o.gap;
  rp.iterations = o.iterations;
  rp.candidates = static_cast<long>(cand.size());
  rp.feasible_candidates = feasible;
  return rp;
}

}  // namespace rdsi
