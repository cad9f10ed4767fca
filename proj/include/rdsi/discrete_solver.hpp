#pragma once

// Rate-distortions function for finite alphabets:
//
//   min I(X;Z|Y)  over P_{Z|X}, phi(y,z), psi(x,z)
//   s.t. E dd(X, phi(Y,Z)) <= Dd,  E de(phi(Y,Z), psi(X,Z)) <= De.
//
// The outer loop enumerates reconstruction rules, the inner loop is a convex
// program in P_{Z|X} (see barrier.hpp).
//
// Rules are enumerated per Z symbol: a "type" is the pair of columns
// (phi(., z), psi(., z)). Two symbols with the same type can be merged
// without increasing I(X;Z|Y) or either distortion, and symbols can be
// relabeled freely, so it suffices to scan subsets of min(z_size, #types)
// distinct types. That is a much smaller candidate set than all table pairs
// modulo permutations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rdsi/barrier.hpp"
#include "rdsi/discrete_model.hpp"
#include "rdsi/error.hpp"
#include "rdsi/info.hpp"
#include "rdsi/parallel.hpp"

namespace rdsi {

struct SolveConfig {
  std::optional<int> z_size;         // default |X| + 3 (|X| + 1 for r_wz)
  int inner_max_iters = 2000;        // Newton steps per inner problem
  double inner_tolerance = 1e-8;     // duality-gap target, bits
  long enumeration_cap = 200000;     // max candidates per solve
  int grid_resolution = 20;          // brute_force_oracle only
  int threads = 1;                   // 0 = hardware concurrency

  void validate() const {
    require(!z_size || *z_size >= 1, ErrorKind::domain, "z_size must be >= 1");
    require(inner_max_iters > 0, ErrorKind::domain, "inner_max_iters must be positive");
    require(inner_tolerance > 0.0, ErrorKind::domain, "inner_tolerance must be positive");
    require(enumeration_cap > 0, ErrorKind::domain, "enumeration_cap must be positive");
    require(grid_resolution >= 1, ErrorKind::domain, "grid_resolution must be >= 1");
  }
};

enum class SolveStatus { optimal, not_converged, infeasible };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::not_converged: return "not_converged";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

struct RatePoint {
  double dd_target = 0.0;
  double de_target = 0.0;
  double rate = 0.0;  // bits
  TestChannel witness;
  double achieved_dd = 0.0;
  double achieved_de = 0.0;  // NaN when the problem has no encoder constraint
  SolveStatus status = SolveStatus::optimal;
  bool upper_bound = false;  // z_size below the cardinality bound
  int z_size = 0;
  double gap = 0.0;          // certified bound on rate - optimum for the winning rules
  int iterations = 0;        // Newton steps of the winning inner problem
  long candidates = 0;
  long feasible_candidates = 0;
};

// ---------------------------------------------------------------------------
// Objective and distortions of an explicit channel

/// I(X;Z) - I(Y;Z) from the induced law; equals I(X;Z|Y) since Z - X - Y.
inline double rate_objective(const JointSource& src, const TestChannel& ch) {
  require(ch.pz_given_x.rows() == src.x_size(), ErrorKind::dimension,
          "channel input alphabet does not match source");
  const InducedLaw law = induced_distribution(src, ch);
  const double v = mutual_information_bits(law.marginal_xz()) -
                   mutual_information_bits(law.marginal_yz());
  return std::max(0.0, v);
}

inline std::pair<double, double> expected_distortions(const JointSource& src,
                                                      const DistortionSpec& spec,
                                                      const TestChannel& ch) {
  require(spec.x_size() == src.x_size(), ErrorKind::dimension, "dd rows must match |X|");
  validate_channel(ch, src.x_size(), src.y_size(), spec.xhat_size());
  double ed = 0.0, ee = 0.0;
  for (const InducedAtom& a : induced_distribution(src, ch).atoms) {
    if (a.mass == 0.0) continue;
    ed += a.mass * spec.dd()(a.x, a.xd);
    ee += a.mass * spec.de()(a.xd, a.xe);
  }
  return {ed, ee};
}

namespace detail {

/// I(X;Z|Y) as a function of a table v(x, j), where column j feeds Z symbol
/// col_to_z[j] (several columns may feed one symbol: q(z|x) = sum of v).
/// Variables are laid out x-major: index x * cols + j.
class ConditionalMI {
 public:
  ConditionalMI(const JointSource& src, std::vector<int> col_to_z, int z_count)
      : p_(src.pxy()), px_(src.px()), py_(src.py()),
        xs_(src.x_size()), ys_(src.y_size()), zs_(z_count), col_to_z_(std::move(col_to_z)) {}

  int cols() const { return static_cast<int>(col_to_z_.size()); }

  Matrix marginal(const Vector& v) const {
    Matrix q = Matrix::Zero(xs_, zs_);
    const int c = cols();
    for (int x = 0; x < xs_; ++x)
      for (int j = 0; j < c; ++j) q(x, col_to_z_[j]) += v(x * c + j);
    return q;
  }

  double value_q(const Matrix& q) const {
    double val = 0.0;
    for (int z = 0; z < zs_; ++z) {
      for (int y = 0; y < ys_; ++y) {
        double w = 0.0;
        for (int x = 0; x < xs_; ++x) w += p_(x, y) * q(x, z);
        if (w <= 0.0) continue;
        for (int x = 0; x < xs_; ++x) {
          const double m = p_(x, y) * q(x, z);
          if (m > 0.0) val += m * std::log2(q(x, z) * py_(y) / w);
        }
      }
    }
    return val;
  }

  double value(const Vector& v) const { return value_q(marginal(v)); }

  void derivatives(const Vector& v, Vector& g, Matrix& h) const {
    const Matrix q = marginal(v);
    const double inv_ln2 = 1.0 / std::log(2.0);
    Matrix gq = Matrix::Zero(xs_, zs_);
    std::vector<Matrix> hq(zs_, Matrix::Zero(xs_, xs_));
    for (int z = 0; z < zs_; ++z) {
      for (int y = 0; y < ys_; ++y) {
        double w = 0.0;
        for (int x = 0; x < xs_; ++x) w += p_(x, y) * q(x, z);
        if (w <= 0.0) continue;
        for (int x = 0; x < xs_; ++x) {
          if (p_(x, y) <= 0.0 || q(x, z) <= 0.0) continue;
          gq(x, z) += p_(x, y) * std::log2(q(x, z) * py_(y) / w);
          for (int x2 = 0; x2 < xs_; ++x2)
            hq[z](x, x2) -= inv_ln2 * p_(x, y) * p_(x2, y) / w;
        }
      }
      for (int x = 0; x < xs_; ++x)
        if (q(x, z) > 0.0) hq[z](x, x) += inv_ln2 * px_(x) / q(x, z);
    }
    const int c = cols();
    for (int x = 0; x < xs_; ++x) {
      for (int j = 0; j < c; ++j) {
        const int z = col_to_z_[j];
        g(x * c + j) = gq(x, z);
        for (int x2 = 0; x2 < xs_; ++x2)
          for (int j2 = 0; j2 < c; ++j2)
            if (col_to_z_[j2] == z) h(x * c + j, x2 * c + j2) = hq[z](x, x2);
      }
    }
  }

  /// Linear equalities (on v) that hold exactly when I(X;Z|Y) = 0: q(.|x)
  /// constant on each connected component of the support graph of P_XY.
  Matrix zero_set_rows() const {
    std::vector<int> parent(xs_);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    std::vector<std::pair<int, int>> links;
    for (int y = 0; y < ys_; ++y) {
      int first = -1;
      for (int x = 0; x < xs_; ++x) {
        if (p_(x, y) <= 0.0) continue;
        if (first < 0) {
          first = x;
        } else if (find(x) != find(first)) {
          parent[find(x)] = find(first);
          links.emplace_back(first, x);
        }
      }
    }
    const int c = cols();
    Matrix rows = Matrix::Zero(static_cast<Eigen::Index>(links.size()) * zs_, xs_ * c);
    int r = 0;
    for (const auto& [a, b] : links) {
      for (int z = 0; z < zs_; ++z, ++r) {
        for (int j = 0; j < c; ++j) {
          if (col_to_z_[j] != z) continue;
          rows(r, a * c + j) += 1.0;
          rows(r, b * c + j) -= 1.0;
        }
      }
    }
    return rows;
  }

  /// Exact test of the same condition on an explicit table q (X x Z).
  bool in_zero_set(const Matrix& q) const {
    for (int y = 0; y < ys_; ++y) {
      int first = -1;
      for (int x = 0; x < xs_; ++x) {
        if (p_(x, y) <= 0.0) continue;
        if (first < 0) {
          first = x;
        } else if (q.row(x) != q.row(first)) {
          return false;
        }
      }
    }
    return true;
  }

 private:
  Matrix p_;
  Vector px_, py_;
  int xs_, ys_, zs_;
  std::vector<int> col_to_z_;
};

struct InnerOutcome {
  SolveStatus status = SolveStatus::infeasible;
  Vector v;
  double value = std::numeric_limits<double>::infinity();
  double gap = 0.0;
  int iterations = 0;
};

/// Minimizes the conditional mutual information over v (x-major, `cols`
/// columns per x) subject to sum_{x,j} coeff[c](x, j) v(x, j) <= targets[c].
inline InnerOutcome minimize_channel(const ConditionalMI& obj, const std::vector<Matrix>& coeff,
                                     const std::vector<double>& targets, int x_size,
                                     const SolveConfig& cfg) {
  const int c = obj.cols();
  barrier::Problem p;
  p.num_groups = x_size;
  p.group_of.resize(static_cast<std::size_t>(x_size) * c);
  for (int x = 0; x < x_size; ++x)
    for (int j = 0; j < c; ++j) p.group_of[x * c + j] = x;
  p.a = Matrix(static_cast<Eigen::Index>(coeff.size()), x_size * c);
  p.b = Vector(static_cast<Eigen::Index>(coeff.size()));
  for (std::size_t k = 0; k < coeff.size(); ++k) {
    for (int x = 0; x < x_size; ++x)
      for (int j = 0; j < c; ++j) p.a(static_cast<Eigen::Index>(k), x * c + j) = coeff[k](x, j);
    p.b(static_cast<Eigen::Index>(k)) = targets[k];
  }
  p.zero_set_eq = obj.zero_set_rows();
  barrier::Options opt;
  opt.tolerance = cfg.inner_tolerance;
  opt.max_newton = cfg.inner_max_iters;
  const barrier::Result r = barrier::minimize(p, obj, opt);

  InnerOutcome out;
  switch (r.status) {
    case barrier::Status::infeasible: return out;
    case barrier::Status::not_converged: out.status = SolveStatus::not_converged; break;
    default: out.status = SolveStatus::optimal; break;
  }
  out.v = r.v;
  out.value = std::max(0.0, r.value);
  out.gap = r.gap;
  out.iterations = r.newton_iterations;
  return out;
}

inline long long ipow(long long base, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > std::numeric_limits<long long>::max() / std::max<long long>(base, 1)) return -1;
    r *= base;
  }
  return r;
}

/// Column of an |A| x 1 table from its index; most significant digit first.
inline std::vector<int> column_digits(long long index, int base, int len) {
  std::vector<int> d(len);
  for (int i = len - 1; i >= 0; --i) {
    d[i] = static_cast<int>(index % base);
    index /= base;
  }
  return d;
}

/// C(n, k) saturating at `cap + 1`.
inline long binomial_capped(long long n, int k, long cap) {
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<long double>(n - k + i) / i;
    if (r > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<long>(std::llround(r));
}

/// All k-subsets of {0..n-1}, lexicographic order.
inline std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k > n || k <= 0) return out;
  std::vector<int> s(k);
  std::iota(s.begin(), s.end(), 0);
  for (;;) {
    out.push_back(s);
    int i = k - 1;
    while (i >= 0 && s[i] == n - k + i) --i;
    if (i < 0) break;
    ++s[i];
    for (int j = i + 1; j < k; ++j) s[j] = s[j - 1] + 1;
  }
  return out;
}

/// Per-type expected-distortion coefficients: coefficient of P(z|x) for a
/// symbol z of this type.
struct TypeTable {
  std::vector<std::vector<int>> phi_cols;  // per type, length |Y|
  std::vector<std::vector<int>> psi_cols;  // per type, length |X| (empty if unused)
  std::vector<Vector> a_dd;                // per type, length |X|
  std::vector<Vector> a_de;
};

inline TypeTable build_types(const JointSource& src, const Matrix& dd, const Matrix* de) {
  const int xs = src.x_size(), ys = src.y_size(), xh = static_cast<int>(dd.cols());
  const long long n_phi = ipow(xh, ys);
  const long long n_psi = de ? ipow(xh, xs) : 1;
  require(n_phi > 0 && n_psi > 0 && n_phi * n_psi <= (1LL << 24), ErrorKind::resource_cap,
          "reconstruction rule space too large; reduce the alphabets");
  TypeTable t;
  for (long long a = 0; a < n_phi; ++a) {
    const std::vector<int> phi = column_digits(a, xh, ys);
    Vector add = Vector::Zero(xs);
    for (int x = 0; x < xs; ++x)
      for (int y = 0; y < ys; ++y) add(x) += src.pxy(x, y) * dd(x, phi[y]);
    for (long long b = 0; b < n_psi; ++b) {
      t.phi_cols.push_back(phi);
      t.a_dd.push_back(add);
      if (!de) {
        t.psi_cols.emplace_back();
        t.a_de.push_back(Vector::Zero(xs));
        continue;
      }
      const std::vector<int> psi = column_digits(b, xh, xs);
      Vector ade = Vector::Zero(xs);
      for (int x = 0; x < xs; ++x)
        for (int y = 0; y < ys; ++y) ade(x) += src.pxy(x, y) * (*de)(phi[y], psi[x]);
      t.psi_cols.push_back(psi);
      t.a_de.push_back(ade);
    }
  }
  return t;
}

struct EnumerationResult {
  int best = -1;
  InnerOutcome outcome;
  long feasible = 0;
};

/// Scans candidate type subsets; returns the best candidate index (lowest
/// index among values within 1e-12 of the minimum) and its re-solved outcome.
inline EnumerationResult scan_candidates(const JointSource& src, const TypeTable& types,
                                         const std::vector<std::vector<int>>& cand,
                                         double dd_target, std::optional<double> de_target,
                                         const SolveConfig& cfg) {
  const int xs = src.x_size();
  auto solve_one = [&](std::size_t i) {
    const std::vector<int>& s = cand[i];
    const int k = static_cast<int>(s.size());
    std::vector<int> col_to_z(k);
    std::iota(col_to_z.begin(), col_to_z.end(), 0);
    const ConditionalMI obj(src, col_to_z, k);
    std::vector<Matrix> coeff(de_target ? 2 : 1, Matrix(xs, k));
    for (int z = 0; z < k; ++z) {
      coeff[0].col(z) = types.a_dd[s[z]];
      if (de_target) coeff[1].col(z) = types.a_de[s[z]];
    }
    std::vector<double> tg{dd_target};
    if (de_target) tg.push_back(*de_target);
    return minimize_channel(obj, coeff, tg, xs, cfg);
  };

  std::vector<double> values(cand.size(), std::numeric_limits<double>::infinity());
  parallel_for(cand.size(), cfg.threads, [&](std::size_t i) {
    const InnerOutcome o = solve_one(i);
    if (o.status != SolveStatus::infeasible) values[i] = o.value;
  });

  EnumerationResult res;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    ++res.feasible;
    if (values[i] < best - 1e-12) {
      best = values[i];
      res.best = static_cast<int>(i);
    }
  }
  if (res.best >= 0) res.outcome = solve_one(static_cast<std::size_t>(res.best));
  return res;
}

inline TestChannel channel_from(const JointSource& src, const TypeTable& types,
                                const std::vector<int>& s, const Vector& v) {
  const int xs = src.x_size(), ys = src.y_size(), k = static_cast<int>(s.size());
  TestChannel ch;
  ch.pz_given_x = Matrix(xs, k);
  ch.phi = IndexTable(ys, k);
  ch.psi = IndexTable::Zero(xs, k);
  for (int x = 0; x < xs; ++x)
    for (int z = 0; z < k; ++z) ch.pz_given_x(x, z) = v(x * k + z);
  for (int z = 0; z < k; ++z) {
    for (int y = 0; y < ys; ++y) ch.phi(y, z) = types.phi_cols[s[z]][y];
    if (!types.psi_cols[s[z]].empty())
      for (int x = 0; x < xs; ++x) ch.psi(x, z) = types.psi_cols[s[z]][x];
  }
  return ch;
}

inline void check_targets(double dd_target, double de_target) {
  require(std::isfinite(dd_target) && dd_target >= 0.0, ErrorKind::domain,
          "dd_target must be a finite nonnegative number");
  require(!std::isnan(de_target) && de_target >= 0.0, ErrorKind::domain,
          "de_target must be nonnegative");
}

inline std::vector<std::vector<int>> candidate_sets(long long n_types, int z_size, long cap) {
  const int k = static_cast<int>(std::min<long long>(z_size, n_types));
  const long count = binomial_capped(n_types, k, cap);
  if (count > cap) {
    fail(ErrorKind::resource_cap,
         "enumeration of reconstruction rules exceeds enumeration_cap (" + std::to_string(cap) +
             "); use a smaller z_size or raise the cap");
  }
  return subsets(static_cast<int>(n_types), k);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Inner problem for fixed rules

struct InnerResult {
  SolveStatus status = SolveStatus::infeasible;
  Matrix pz_given_x;
  double rate = std::numeric_limits<double>::quiet_NaN();
  double gap = 0.0;
  int iterations = 0;
};

/// Minimizes I(X;Z|Y) over P_{Z|X} for fixed phi (Y x Z) and psi (X x Z).
inline InnerResult inner_minimize(const JointSource& src, const DistortionSpec& spec,
                                  double dd_target, double de_target, const IndexTable& phi,
                                  const IndexTable& psi, const SolveConfig& cfg = {}) {
  cfg.validate();
  detail::check_targets(dd_target, de_target);
  const int xs = src.x_size(), ys = src.y_size(), k = static_cast<int>(phi.cols());
  require(spec.x_size() == xs, ErrorKind::dimension, "dd rows must match |X|");
  require(phi.rows() == ys && psi.rows() == xs && psi.cols() == k && k >= 1,
          ErrorKind::dimension, "phi must be |Y| x |Z| and psi |X| x |Z|");
  TestChannel probe{Matrix::Constant(xs, k, 1.0 / k), phi, psi};
  validate_channel(probe, xs, ys, spec.xhat_size());

  std::vector<Matrix> coeff(2, Matrix::Zero(xs, k));
  for (int x = 0; x < xs; ++x)
    for (int z = 0; z < k; ++z)
      for (int y = 0; y < ys; ++y) {
        coeff[0](x, z) += src.pxy(x, y) * spec.dd()(x, phi(y, z));
        coeff[1](x, z) += src.pxy(x, y) * spec.de()(phi(y, z), psi(x, z));
      }
  std::vector<int> col_to_z(k);
  std::iota(col_to_z.begin(), col_to_z.end(), 0);
  const detail::ConditionalMI obj(src, col_to_z, k);
  const detail::InnerOutcome o =
      detail::minimize_channel(obj, coeff, {dd_target, de_target}, xs, cfg);
  InnerResult r;
  r.status = o.status;
  if (o.status == SolveStatus::infeasible) return r;
  r.pz_given_x = Matrix(xs, k);
  for (int x = 0; x < xs; ++x)
    for (int z = 0; z < k; ++z) r.pz_given_x(x, z) = o.v(x * k + z);
  r.rate = o.value;
  r.gap = o.gap;
  r.iterations = o.iterations;
  return r;
}

// ---------------------------------------------------------------------------
// Full problem

inline RatePoint solve_rate(const JointSource& src, const DistortionSpec& spec, double dd_target,
                            double de_target, const SolveConfig& cfg = {}) {
  cfg.validate();
  detail::check_targets(dd_target, de_target);
  require(spec.x_size() == src.x_size(), ErrorKind::dimension, "dd rows must match |X|");
  require(check_zero_distortion_assumption(spec), ErrorKind::assumption,
          "zero-distortion assumption violated: some x has no (xd, xe) with zero distortions");
  const int bound = src.x_size() + 3;
  const int z_size = cfg.z_size.value_or(bound);

  const detail::TypeTable types = detail::build_types(src, spec.dd(), &spec.de());
  const auto cand = detail::candidate_sets(static_cast<long long>(types.a_dd.size()), z_size,
                                           cfg.enumeration_cap);
  const std::optional<double> de_opt =
      std::isinf(de_target) ? std::nullopt : std::optional<double>(de_target);
  const detail::EnumerationResult er =
      detail::scan_candidates(src, types, cand, dd_target, de_opt, cfg);
  if (er.best < 0)
    fail(ErrorKind::infeasible, "no reconstruction rules meet the distortion targets");

  RatePoint rp;
  rp.dd_target = dd_target;
  rp.de_target = de_target;
  rp.rate = er.outcome.value;
  rp.witness = detail::channel_from(src, types, cand[er.best], er.outcome.v);
  std::tie(rp.achieved_dd, rp.achieved_de) = expected_distortions(src, spec, rp.witness);
  rp.status = er.outcome.status;
  rp.upper_bound = z_size < bound;
  rp.z_size = static_cast<int>(cand[er.best].size());
  rp.gap = er.outcome.gap;
  rp.iterations = er.outcome.iterations;
  rp.candidates = static_cast<long>(cand.size());
  rp.feasible_candidates = er.feasible;
  return rp;
}

namespace detail {

inline void check_decoder_table(const JointSource& src, const Matrix& dd) {
  require(dd.rows() == src.x_size() && dd.cols() > 0, ErrorKind::dimension,
          "dd must be |X| x |Xhat|");
  check_distortion_table(dd, "dd");
  for (int x = 0; x < src.x_size(); ++x)
    require((dd.row(x).array() == 0.0).any(), ErrorKind::assumption,
            "zero-distortion assumption violated: dd row " + std::to_string(x) +
                " has no zero entry");
}

inline double decoder_distortion(const JointSource& src, const Matrix& dd, const TestChannel& ch) {
  double e = 0.0;
  for (int x = 0; x < src.x_size(); ++x)
    for (int y = 0; y < src.y_size(); ++y)
      for (int z = 0; z < ch.z_size(); ++z)
        e += src.pxy(x, y) * ch.pz_given_x(x, z) * dd(x, ch.phi(y, z));
  return e;
}

}  // namespace detail

/// Wyner-Ziv rate: decoder constraint only, z_size default |X| + 1.
inline RatePoint r_wz(const JointSource& src, const Matrix& dd, double dd_target,
                      const SolveConfig& cfg = {}) {
  cfg.validate();
  detail::check_targets(dd_target, 0.0);
  detail::check_decoder_table(src, dd);
  const int bound = src.x_size() + 1;
  const int z_size = cfg.z_size.value_or(bound);
  const detail::TypeTable types = detail::build_types(src, dd, nullptr);
  const auto cand = detail::candidate_sets(static_cast<long long>(types.a_dd.size()), z_size,
                                           cfg.enumeration_cap);
  const detail::EnumerationResult er =
      detail::scan_candidates(src, types, cand, dd_target, std::nullopt, cfg);
  if (er.best < 0) fail(ErrorKind::infeasible, "no decoder rule meets the distortion target");

  RatePoint rp;
  rp.dd_target = dd_target;
  rp.de_target = std::numeric_limits<double>::quiet_NaN();
  rp.rate = er.outcome.value;
  rp.witness = detail::channel_from(src, types, cand[er.best], er.outcome.v);
  rp.achieved_dd = detail::decoder_distortion(src, dd, rp.witness);
  rp.achieved_de = std::numeric_limits<double>::quiet_NaN();
  rp.status = er.outcome.status;
  rp.upper_bound = z_size < bound;
  rp.z_size = static_cast<int>(cand[er.best].size());
  rp.gap = er.outcome.gap;
  rp.iterations = er.outcome.iterations;
  rp.candidates = static_cast<long>(cand.size());
  rp.feasible_candidates = er.feasible;
  return rp;
}

/// Common-reconstruction rate: the auxiliary is the reconstruction itself,
/// Z = Xhat with phi(y, z) = z and psi(x, z) = z.
inline RatePoint r_cr(const JointSource& src, const Matrix& dd, double dd_target,
                      const SolveConfig& cfg = {}) {
  cfg.validate();
  detail::check_targets(dd_target, 0.0);
  detail::check_decoder_table(src, dd);
  const int xs = src.x_size(), ys = src.y_size(), xh = static_cast<int>(dd.cols());
  std::vector<int> col_to_z(xh);
  std::iota(col_to_z.begin(), col_to_z.end(), 0);
  const detail::ConditionalMI obj(src, col_to_z, xh);
  std::vector<Matrix> coeff{Matrix(xs, xh)};
  for (int x = 0; x < xs; ++x)
    for (int z = 0; z < xh; ++z) coeff[0](x, z) = src.px(x) * dd(x, z);
  const detail::InnerOutcome o = detail::minimize_channel(obj, coeff, {dd_target}, xs, cfg);
  if (o.status == SolveStatus::infeasible)
    fail(ErrorKind::infeasible, "no reconstruction channel meets the distortion target");

  RatePoint rp;
  rp.dd_target = dd_target;
  rp.de_target = 0.0;
  rp.rate = o.value;
  rp.witness.pz_given_x = Matrix(xs, xh);
  rp.witness.phi = IndexTable(ys, xh);
  rp.witness.psi = IndexTable(xs, xh);
  for (int z = 0; z < xh; ++z) {
    for (int x = 0; x < xs; ++x) {
      rp.witness.pz_given_x(x, z) = o.v(x * xh + z);
      rp.witness.psi(x, z) = z;
    }
    for (int y = 0; y < ys; ++y) rp.witness.phi(y, z) = z;
  }
  rp.achieved_dd = detail::decoder_distortion(src, dd, rp.witness);
  rp.achieved_de = 0.0;
  rp.status = o.status;
  rp.z_size = xh;
  rp.gap = o.gap;
  rp.iterations = o.iterations;
  rp.candidates = 1;
  rp.feasible_candidates = 1;
  return rp;
}

// ---------------------------------------------------------------------------
// Grid oracle

/// Exhaustive scan of P_{Z|X} rows on the simplex grid with step
/// 1/grid_resolution and of all rule tables. Returns the least objective over
/// grid channels for which some (phi, psi) meets both targets, or +inf.
inline double brute_force_oracle(const JointSource& src, const DistortionSpec& spec,
                                 double dd_target, double de_target, int z_size,
                                 int grid_resolution, long cap = 20'000'000) {
  detail::check_targets(dd_target, de_target);
  require(z_size >= 1 && grid_resolution >= 1, ErrorKind::domain,
          "z_size and grid_resolution must be positive");
  require(spec.x_size() == src.x_size(), ErrorKind::dimension, "dd rows must match |X|");
  const int xs = src.x_size();
  const detail::TypeTable types = detail::build_types(src, spec.dd(), &spec.de());
  const int n_types = static_cast<int>(types.a_dd.size());

  // Compositions of grid_resolution into z_size parts.
  std::vector<std::vector<int>> comps;
  {
    std::vector<int> c(z_size, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
      if (pos == z_size - 1) {
        c[pos] = left;
        comps.push_back(c);
        return;
      }
      for (int v = left; v >= 0; --v) {
        c[pos] = v;
        self(self, pos + 1, left - v);
      }
    };
    rec(rec, 0, grid_resolution);
  }
  std::vector<int> active;
  for (int x = 0; x < xs; ++x)
    if (src.px(x) > 0.0) active.push_back(x);
  long double total = 1.0L;
  for (std::size_t i = 0; i < active.size(); ++i) total *= comps.size();
  const long double work = total * std::pow(static_cast<long double>(n_types), z_size > 3 ? 3 : z_size);
  require(work <= static_cast<long double>(cap) * 1000.0L && total <= cap, ErrorKind::resource_cap,
          "oracle grid too large; lower z_size or grid_resolution");
  const long n_grid = static_cast<long>(total);

  std::vector<int> col_to_z(z_size);
  std::iota(col_to_z.begin(), col_to_z.end(), 0);
  const detail::ConditionalMI obj(src, col_to_z, z_size);
  auto channel = [&](long index) {
    Matrix q = Matrix::Zero(xs, z_size);
    for (int x = 0; x < xs; ++x) q(x, 0) = 1.0;  // zero-mass rows: arbitrary
    for (int x : active) {
      const auto& c = comps[static_cast<std::size_t>(index % static_cast<long>(comps.size()))];
      index /= static_cast<long>(comps.size());
      for (int z = 0; z < z_size; ++z) q(x, z) = static_cast<double>(c[z]) / grid_resolution;
    }
    return q;
  };

  std::vector<std::pair<double, long>> order(static_cast<std::size_t>(n_grid));
  for (long i = 0; i < n_grid; ++i) {
    const Matrix q = channel(i);
    order[static_cast<std::size_t>(i)] = {obj.in_zero_set(q) ? 0.0 : std::max(0.0, obj.value_q(q)), i};
  }
  std::sort(order.begin(), order.end());

  constexpr double tol = 1e-12;
  for (const auto& [val, idx] : order) {
    const Matrix q = channel(idx);
    // Pareto set of achievable (E dd, E de) sums over the first z symbols.
    std::vector<std::pair<double, double>> front{{0.0, 0.0}};
    for (int z = 0; z < z_size && !front.empty(); ++z) {
      std::vector<std::pair<double, double>> opts;
      for (int t = 0; t < n_types; ++t)
        opts.emplace_back(q.col(z).dot(types.a_dd[t]), q.col(z).dot(types.a_de[t]));
      std::vector<std::pair<double, double>> next;
      for (const auto& f : front)
        for (const auto& o : opts) {
          const double a = f.first + o.first, b = f.second + o.second;
          if (a <= dd_target + tol && b <= de_target + tol) next.emplace_back(a, b);
        }
      std::sort(next.begin(), next.end());
      front.clear();
      double best_b = std::numeric_limits<double>::infinity();
      for (const auto& p : next) {
        if (p.second < best_b) {
          front.push_back(p);
          best_b = p.second;
        }
      }
    }
    if (!front.empty()) return val;
  }
  return std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepCell {
  std::optional<RatePoint> point;
  std::optional<ErrorKind> error_kind;
  std::string error;
};

using SweepGrid = std::vector<std::vector<SweepCell>>;  // [dd index][de index]

inline SweepGrid tradeoff_sweep(const JointSource& src, const DistortionSpec& spec,
                                const std::vector<double>& dd_grid,
                                const std::vector<double>& de_grid, const SolveConfig& cfg = {}) {
  require(!dd_grid.empty() && !de_grid.empty(), ErrorKind::domain, "grids must be nonempty");
  require(std::is_sorted(dd_grid.begin(), dd_grid.end()) &&
              std::is_sorted(de_grid.begin(), de_grid.end()),
          ErrorKind::domain, "grids must be sorted ascending");
  SweepGrid out(dd_grid.size(), std::vector<SweepCell>(de_grid.size()));
  SolveConfig inner = cfg;
  inner.threads = 1;  // parallelism goes over cells
  parallel_for(dd_grid.size() * de_grid.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t i = k / de_grid.size(), j = k % de_grid.size();
    SweepCell& cell = out[i][j];
    try {
      cell.point = solve_rate(src, spec, dd_grid[i], de_grid[j], inner);
    } catch (const Error& e) {
      cell.error_kind = e.kind();
      cell.error = e.what();
    }
  });
  return out;
}

}  // namespace rdsi
