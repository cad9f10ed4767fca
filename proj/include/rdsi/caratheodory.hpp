#pragma once

// Support reduction for convex combinations, and its use to shrink the
// encoder-side auxiliary alphabet of an extended witness to K symbols.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdsi/discrete_model.hpp"
#include "rdsi/error.hpp"
#include "rdsi/linprog.hpp"

namespace rdsi {

struct ConvexCombination {
  std::vector<Vector> points;
  std::vector<double> weights;

  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
  std::size_t support() const { return points.size(); }

  Vector evaluate() const {
    Vector s = Vector::Zero(dim());
    for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * points[i];
    return s;
  }
};

inline void validate(const ConvexCombination& c) {
  require(!c.points.empty(), ErrorKind::domain, "empty convex combination");
  require(c.points.size() == c.weights.size(), ErrorKind::dimension,
          "points and weights must have the same length");
  double total = 0.0;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    require(c.points[i].size() == c.points.front().size(), ErrorKind::dimension,
            "points must share one dimension");
    require(c.points[i].allFinite(), ErrorKind::domain, "points must be finite");
    require(std::isfinite(c.weights[i]) && c.weights[i] >= 0.0, ErrorKind::domain,
            "weights must be nonnegative");
    total += c.weights[i];
  }
  require(std::abs(total - 1.0) <= 1e-10, ErrorKind::domain, "weights must sum to 1");
}

namespace detail {

/// Null vector of the (dim + 1) x m matrix [points; 1], or an empty vector
/// when the points are affinely independent.
inline Vector affine_dependence(const std::vector<Vector>& pts) {
  const int m = static_cast<int>(pts.size());
  const int d = static_cast<int>(pts.front().size());
  Matrix a(d + 1, m);
  double scale = 1.0;
  for (int i = 0; i < m; ++i) {
    a.col(i).head(d) = pts[i];
    a(d, i) = 1.0;
    scale = std::max(scale, pts[i].cwiseAbs().maxCoeff());
  }
  if (m > d + 1) {
    // Wide: a null vector always exists; take it from the full SVD.
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    return svd.matrixV().col(m - 1);
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  if (s(m - 1) > 1e-11 * scale * std::sqrt(static_cast<double>(m))) return {};
  return svd.matrixV().col(m - 1);
}

}  // namespace detail

/// Removes points by affine-dependence elimination until the support is
/// affinely independent (hence at most dim + 1 points). Zero-weight points
/// are dropped first. The reconstructed point is unchanged up to roundoff.
inline ConvexCombination caratheodory_reduce(const ConvexCombination& comb) {
  validate(comb);
  ConvexCombination c;
  for (std::size_t i = 0; i < comb.points.size(); ++i) {
    if (comb.weights[i] > 0.0) {
      c.points.push_back(comb.points[i]);
      c.weights.push_back(comb.weights[i]);
    }
  }
  while (c.points.size() > 1) {
    Vector alpha = detail::affine_dependence(c.points);
    if (alpha.size() == 0) break;
    const int m = static_cast<int>(c.points.size());
    // Orient alpha so that it has a positive entry.
    if (alpha.maxCoeff() <= 0.0) alpha = -alpha;
    const double amax = alpha.cwiseAbs().maxCoeff();
    double t = std::numeric_limits<double>::infinity();
    int drop = -1;
    for (int i = 0; i < m; ++i) {
      if (alpha(i) <= 1e-14 * amax) continue;
      const double r = c.weights[i] / alpha(i);
      if (r <= t) {  // ties: the largest index is eliminated
        t = r;
        drop = i;
      }
    }
    for (int i = 0; i < m; ++i) c.weights[i] = std::max(0.0, c.weights[i] - t * alpha(i));
    c.weights[drop] = 0.0;
    ConvexCombination next;
    for (int i = 0; i < m; ++i) {
      if (c.weights[i] > 0.0) {
        next.points.push_back(c.points[i]);
        next.weights.push_back(c.weights[i]);
      }
    }
    c = std::move(next);
  }
  double total = 0.0;
  for (double w : c.weights) total += w;
  for (double& w : c.weights) w /= total;
  return c;
}

namespace detail {

/// Orthonormal basis (columns) of the complement of `normal`.
inline Matrix hyperplane_basis(const Vector& normal) {
  Eigen::JacobiSVD<Matrix> svd(normal.transpose(), Eigen::ComputeFullV);
  return svd.matrixV().rightCols(normal.size() - 1);
}

/// Some convex weights of `pts` reproducing `target`, or empty if none.
inline std::vector<double> hull_weights(const std::vector<Vector>& pts, const Vector& target) {
  const int m = static_cast<int>(pts.size()), d = static_cast<int>(target.size());
  lp::Problem p;
  p.c = Vector::Zero(m);
  p.a_eq = Matrix(d + 1, m);
  p.b_eq = Vector(d + 1);
  for (int i = 0; i < m; ++i) {
    p.a_eq.col(i).head(d) = pts[i];
    p.a_eq(d, i) = 1.0;
  }
  p.b_eq.head(d) = target;
  p.b_eq(d) = 1.0;
  const lp::Result r = lp::solve(p);
  if (r.status != lp::Status::optimal) return {};
  return std::vector<double>(r.x.data(), r.x.data() + m);
}

}  // namespace detail

/// Writes a point on the boundary of conv(points), supported by the
/// hyperplane with normal c (c . target = max_i c . p_i), as a convex
/// combination of at most dim points.
inline ConvexCombination boundary_reduce(const std::vector<Vector>& points, const Vector& target,
                                         const Vector& normal) {
  require(!points.empty(), ErrorKind::domain, "empty point set");
  const int d = static_cast<int>(target.size());
  require(d >= 1 && normal.size() == d, ErrorKind::dimension, "normal and target dimensions differ");
  const double nn = normal.norm();
  require(nn > 0.0 && std::isfinite(nn), ErrorKind::domain, "normal must be nonzero");
  const Vector c = normal / nn;
  double hmax = -std::numeric_limits<double>::infinity();
  for (const Vector& p : points) {
    require(p.size() == d, ErrorKind::dimension, "points must have the target's dimension");
    hmax = std::max(hmax, c.dot(p));
  }
  constexpr double tol = 1e-9;
  require(std::abs(c.dot(target) - hmax) <= tol, ErrorKind::domain,
          "target is not supported by the given normal");

  std::vector<Vector> face;
  for (const Vector& p : points)
    if (c.dot(p) >= hmax - tol) face.push_back(p);

  ConvexCombination out;
  if (d == 1) {
    out.points = {face.front()};
    out.weights = {1.0};
    return out;
  }
  // Coordinates within the supporting hyperplane.
  const Matrix basis = detail::hyperplane_basis(c);
  std::vector<Vector> proj;
  for (const Vector& p : face) proj.push_back(basis.transpose() * p);
  const std::vector<double> w = detail::hull_weights(proj, basis.transpose() * target);
  require(!w.empty(), ErrorKind::domain, "target is not in the convex hull of the supporting face");
  ConvexCombination in{proj, w};
  double total = 0.0;
  for (double& v : in.weights) {
    v = std::max(0.0, v);
    total += v;
  }
  for (double& v : in.weights) v /= total;
  const ConvexCombination red = caratheodory_reduce(in);
  // Map the surviving projected points back to their originals.
  for (std::size_t k = 0; k < red.points.size(); ++k) {
    for (std::size_t i = 0; i < proj.size(); ++i) {
      if (proj[i] == red.points[k]) {
        out.points.push_back(face[i]);
        break;
      }
    }
    out.weights.push_back(red.weights[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Auxiliary-alphabet reduction

/// Extended witness: Z depends on X through pz_given_x; U depends on (X, Z)
/// through pu_given_xz; the decoder applies phi(y, z), the encoder psi(x, z, u).
struct ExtWitness {
  Matrix pz_given_x;         // X x Z
  Tensor3 pu_given_xz;       // X x Z x U
  IndexTable phi;            // Y x Z -> Xhat_d
  IndexTensor3 psi;          // X x Z x U -> Xhat_e

  int z_size() const { return static_cast<int>(pz_given_x.cols()); }
  int u_size() const { return pu_given_xz.dim2(); }
};

inline void validate_witness(const ExtWitness& w, const JointSource& src,
                             const ExtendedInstance& ext) {
  const int xs = src.x_size(), ys = src.y_size(), zs = w.z_size(), us = w.u_size();
  require(w.pz_given_x.rows() == xs && zs >= 1, ErrorKind::dimension, "pz_given_x must be X x Z");
  require(w.pu_given_xz.dim0() == xs && w.pu_given_xz.dim1() == zs && us >= 1,
          ErrorKind::dimension, "pu_given_xz must be X x Z x U");
  require(w.phi.rows() == ys && w.phi.cols() == zs, ErrorKind::dimension, "phi must be Y x Z");
  require(w.psi.dim0() == xs && w.psi.dim1() == zs && w.psi.dim2() == us, ErrorKind::dimension,
          "psi must be X x Z x U");
  for (int x = 0; x < xs; ++x) {
    double s = 0.0;
    for (int z = 0; z < zs; ++z) {
      require(w.pz_given_x(x, z) >= 0.0, ErrorKind::domain, "negative channel entry");
      s += w.pz_given_x(x, z);
      double su = 0.0;
      for (int u = 0; u < us; ++u) {
        require(w.pu_given_xz(x, z, u) >= 0.0, ErrorKind::domain, "negative channel entry");
        su += w.pu_given_xz(x, z, u);
        require(w.psi(x, z, u) >= 0 && w.psi(x, z, u) < ext.xhat_e_size, ErrorKind::domain,
                "psi entry out of range");
      }
      require(std::abs(su - 1.0) <= 1e-9, ErrorKind::domain, "P(u|x,z) rows must sum to 1");
    }
    require(std::abs(s - 1.0) <= 1e-9, ErrorKind::domain, "P(z|x) rows must sum to 1");
  }
  for (Eigen::Index i = 0; i < w.phi.size(); ++i)
    require(w.phi.data()[i] >= 0 && w.phi.data()[i] < ext.xhat_d_size, ErrorKind::domain,
            "phi entry out of range");
}

/// Per-u distortion vectors h(u) at a cell (x, z): entry k is
/// E[d_k(x, phi(Y, z), psi(x, z, u)) | X = x].
inline std::vector<Vector> cell_profiles(const JointSource& src, const ExtendedInstance& ext,
                                         const ExtWitness& w, int x, int z) {
  std::vector<Vector> h(static_cast<std::size_t>(w.u_size()), Vector::Zero(ext.k()));
  for (int u = 0; u < w.u_size(); ++u)
    for (int k = 0; k < ext.k(); ++k)
      for (int y = 0; y < src.y_size(); ++y)
        h[u](k) += src.py_given_x(y, x) * ext.dk[k](x, w.phi(y, z), w.psi(x, z, u));
  return h;
}

/// D_k^{(x,z)}: conditional expected distortions at a cell.
inline Vector cell_distortions(const JointSource& src, const ExtendedInstance& ext,
                               const ExtWitness& w, int x, int z) {
  const std::vector<Vector> h = cell_profiles(src, ext, w, x, z);
  Vector d = Vector::Zero(ext.k());
  for (int u = 0; u < w.u_size(); ++u) d += w.pu_given_xz(x, z, u) * h[u];
  return d;
}

struct CellTrace {
  int x = 0, z = 0;
  Vector original;  // D^{(x,z)}
  Vector reduced;   // boundary point actually used
};

struct UReduction {
  ExtWitness witness;  // |U~| <= K
  std::vector<CellTrace> cells;
};

/// Replaces U by U~ in {0..K-1}: per cell, moves from D^{(x,z)} along
/// -(1, ..., 1) to the boundary of conv{h(u)}, writes that point with at most
/// K profiles, and takes those profiles' encoder outputs as psi~.
inline UReduction reduce_aux_u(const JointSource& src, const ExtendedInstance& ext,
                               const ExtWitness& w) {
  validate_extended(ext, src.x_size());
  validate_witness(w, src, ext);
  const int xs = src.x_size(), zs = w.z_size(), us = w.u_size(), kk = ext.k();
  UReduction out;
  out.witness = w;
  if (us <= kk) {
    for (int x = 0; x < xs; ++x)
      for (int z = 0; z < zs; ++z) {
        const Vector d = cell_distortions(src, ext, w, x, z);
        out.cells.push_back({x, z, d, d});
      }
    return out;
  }
  out.witness.pu_given_xz = Tensor3(xs, zs, kk);
  out.witness.psi = IndexTensor3(xs, zs, kk);
  for (int x = 0; x < xs; ++x) {
    for (int z = 0; z < zs; ++z) {
      const std::vector<Vector> h = cell_profiles(src, ext, w, x, z);
      Vector dvec = Vector::Zero(kk);
      for (int u = 0; u < us; ++u) dvec += w.pu_given_xz(x, z, u) * h[u];

      // max t  s.t.  sum_u lambda_u h(u) + t 1 = D,  sum lambda = 1,  lambda, t >= 0.
      lp::Problem p;
      p.c = Vector::Zero(us + 1);
      p.c(us) = -1.0;
      p.a_eq = Matrix::Zero(kk + 1, us + 1);
      p.b_eq = Vector(kk + 1);
      for (int u = 0; u < us; ++u) {
        p.a_eq.col(u).head(kk) = h[u];
        p.a_eq(kk, u) = 1.0;
      }
      p.a_eq.col(us).head(kk) = Vector::Ones(kk);
      p.b_eq.head(kk) = dvec;
      p.b_eq(kk) = 1.0;
      const lp::Result r = lp::solve(p);
      if (r.status != lp::Status::optimal) {
        fail(ErrorKind::numerical, "could not certify a dominating boundary point at (x=" +
                                       std::to_string(x) + ", z=" + std::to_string(z) + ")");
      }
      const double t = std::max(0.0, r.x(us));
      const Vector target = dvec - t * Vector::Ones(kk);
      Vector normal = r.dual.head(kk);

      ConvexCombination comb;
      std::vector<int> owner;
      try {
        comb = boundary_reduce(h, target, normal);
      } catch (const Error&) {
        fail(ErrorKind::numerical, "boundary decomposition failed at (x=" + std::to_string(x) +
                                       ", z=" + std::to_string(z) + ")");
      }
      require(static_cast<int>(comb.support()) <= kk, ErrorKind::numerical,
              "boundary decomposition exceeded K points");
      for (int j = 0; j < kk; ++j) {
        const bool used = j < static_cast<int>(comb.support());
        int u_star = 0;
        if (used) {
          for (int u = 0; u < us; ++u)
            if (h[u] == comb.points[j]) {
              u_star = u;
              break;
            }
        }
        out.witness.pu_given_xz(x, z, j) = used ? comb.weights[j] : 0.0;
        out.witness.psi(x, z, j) = w.psi(x, z, used ? u_star : 0);
      }
      out.cells.push_back({x, z, dvec, comb.evaluate()});
    }
  }
  return out;
}

}  // namespace rdsi
