#pragma once

// Finite-alphabet instances: joint sources, distortion tables, test channels
// with their reconstruction rules, and the K-constraint extended instance.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdsi/error.hpp"
#include "rdsi/info.hpp"

namespace rdsi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexTable = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Normalization tolerance for laws supplied by the user.
inline constexpr double kConstructionTol = 1e-12;
/// Normalization tolerance for laws produced by arithmetic.
inline constexpr double kArithmeticTol = 1e-10;

/// Dense row-major three-index array.
template <typename T>
class Array3 {
 public:
  Array3() = default;
  Array3(int d0, int d1, int d2, T fill = T{})
      : d0_(d0), d1_(d1), d2_(d2),
        data_(static_cast<std::size_t>(d0) * d1 * d2, fill) {}

  int dim0() const { return d0_; }
  int dim1() const { return d1_; }
  int dim2() const { return d2_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  const T& operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool operator==(const Array3&) const = default;

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * d1_ + j) * d2_ + k;
  }

  int d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<T> data_;
};

using Tensor3 = Array3<double>;
using IndexTensor3 = Array3<int>;

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string kind;  // "negative entry", "non-finite entry", "mass", "shape"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  /// Source symbols x with P_X(x) = 0. Permitted, but their distortion
  /// constraints are vacuous.
  std::vector<int> zero_mass_rows;

  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_source(const Matrix& pxy) {
  ValidationReport report;
  if (pxy.rows() == 0 || pxy.cols() == 0) {
    report.violations.push_back({"shape", "empty probability matrix"});
    return report;
  }
  double total = 0.0;
  for (Eigen::Index x = 0; x < pxy.rows(); ++x) {
    for (Eigen::Index y = 0; y < pxy.cols(); ++y) {
      const double p = pxy(x, y);
      if (!std::isfinite(p)) {
        std::ostringstream os;
        os << "non-finite entry at (" << x << ", " << y << ")";
        report.violations.push_back({"non-finite entry", os.str()});
      } else if (p < 0.0) {
        std::ostringstream os;
        os << "negative entry " << p << " at (" << x << ", " << y << ")";
        report.violations.push_back({"negative entry", os.str()});
      }
      total += p;
    }
  }
  if (std::isfinite(total) && std::abs(total - 1.0) > kConstructionTol) {
    std::ostringstream os;
    os << "mass " << total << " != 1";
    report.violations.push_back({"mass", os.str()});
  }
  for (Eigen::Index x = 0; x < pxy.rows(); ++x) {
    if (pxy.row(x).sum() == 0.0) report.zero_mass_rows.push_back(static_cast<int>(x));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Joint source

/// Joint law P_XY; rows index x, columns index y.
class JointSource {
 public:
  explicit JointSource(Matrix pxy) : pxy_(std::move(pxy)) {
    const ValidationReport report = validate_source(pxy_);
    if (!report.ok()) fail(ErrorKind::domain, "invalid joint source: " + report.violations.front().message);
    px_ = pxy_.rowwise().sum();
    py_ = pxy_.colwise().sum().transpose();
  }

  int x_size() const { return static_cast<int>(pxy_.rows()); }
  int y_size() const { return static_cast<int>(pxy_.cols()); }

  const Matrix& pxy() const { return pxy_; }
  const Vector& px() const { return px_; }
  const Vector& py() const { return py_; }

  double pxy(int x, int y) const { return pxy_(x, y); }
  double px(int x) const { return px_(x); }
  double py(int y) const { return py_(y); }

  /// P(y|x); zero rows of P_X give a zero row.
  double py_given_x(int y, int x) const {
    return px_(x) > 0.0 ? pxy_(x, y) / px_(x) : 0.0;
  }

  std::vector<int> zero_mass_symbols() const {
    std::vector<int> out;
    for (int x = 0; x < x_size(); ++x)
      if (px_(x) == 0.0) out.push_back(x);
    return out;
  }

 private:
  Matrix pxy_;
  Vector px_;
  Vector py_;
};

/// H(X|Y) in bits.
inline double conditional_entropy_x_given_y(const JointSource& src) {
  return conditional_entropy_bits(src.pxy());
}

/// Doubly symmetric binary pair: X uniform, Y = X through a BSC(crossover).
inline JointSource binary_symmetric_source(double crossover) {
  Matrix p(2, 2);
  p << 0.5 * (1.0 - crossover), 0.5 * crossover,
       0.5 * crossover, 0.5 * (1.0 - crossover);
  return JointSource(p);
}

// ---------------------------------------------------------------------------
// Distortions

inline void check_distortion_table(const Matrix& d, const char* name) {
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double v = d.data()[i];
    require(std::isfinite(v), ErrorKind::domain,
            std::string(name) + ": distortion entries must be finite");
    require(v >= 0.0, ErrorKind::domain,
            std::string(name) + ": distortion entries must be nonnegative");
  }
}

/// Decoder-side table d_d (X x Xhat) and encoder-side table d_e (Xhat x Xhat).
class DistortionSpec {
 public:
  DistortionSpec(Matrix dd, Matrix de) : dd_(std::move(dd)), de_(std::move(de)) {
    require(dd_.rows() > 0 && dd_.cols() > 0, ErrorKind::domain, "dd must be nonempty");
    require(de_.rows() == dd_.cols() && de_.cols() == dd_.cols(), ErrorKind::dimension,
            "de must be xhat_size x xhat_size");
    check_distortion_table(dd_, "dd");
    check_distortion_table(de_, "de");
  }

  int x_size() const { return static_cast<int>(dd_.rows()); }
  int xhat_size() const { return static_cast<int>(dd_.cols()); }
  const Matrix& dd() const { return dd_; }
  const Matrix& de() const { return de_; }

 private:
  Matrix dd_;
  Matrix de_;
};

inline Matrix hamming(int n) {
  return Matrix::Ones(n, n) - Matrix::Identity(n, n);
}

inline DistortionSpec hamming_spec(int n) { return DistortionSpec(hamming(n), hamming(n)); }

/// True iff every x has some xd with dd(x, xd) = 0 and some xe with de(xd, xe) = 0.
inline bool check_zero_distortion_assumption(const DistortionSpec& spec) {
  for (int x = 0; x < spec.x_size(); ++x) {
    bool found = false;
    for (int xd = 0; xd < spec.xhat_size() && !found; ++xd) {
      if (spec.dd()(x, xd) != 0.0) continue;
      for (int xe = 0; xe < spec.xhat_size(); ++xe) {
        if (spec.de()(xd, xe) == 0.0) {
          found = true;
          break;
        }
      }
    }
    if (!found) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Test channel

/// P_{Z|X} together with the decoder rule phi(y, z) and the encoder rule
/// psi(x, z). Z depends on X only, so Z - X - Y holds by construction.
struct TestChannel {
  Matrix pz_given_x;  // X x Z
  IndexTable phi;     // Y x Z -> Xhat
  IndexTable psi;     // X x Z -> Xhat

  int z_size() const { return static_cast<int>(pz_given_x.cols()); }
};

inline void validate_channel(const TestChannel& ch, int x_size, int y_size, int xhat_size) {
  require(ch.pz_given_x.rows() == x_size && ch.z_size() > 0, ErrorKind::dimension,
          "pz_given_x must be x_size x z_size");
  require(ch.phi.rows() == y_size && ch.phi.cols() == ch.z_size(), ErrorKind::dimension,
          "phi must be y_size x z_size");
  require(ch.psi.rows() == x_size && ch.psi.cols() == ch.z_size(), ErrorKind::dimension,
          "psi must be x_size x z_size");
  for (int x = 0; x < x_size; ++x) {
    double s = 0.0;
    for (int z = 0; z < ch.z_size(); ++z) {
      const double p = ch.pz_given_x(x, z);
      require(std::isfinite(p) && p >= 0.0, ErrorKind::domain, "channel entries must be >= 0");
      s += p;
    }
    require(std::abs(s - 1.0) <= kConstructionTol * 100, ErrorKind::domain,
            "channel rows must sum to 1");
  }
  for (Eigen::Index i = 0; i < ch.phi.size(); ++i)
    require(ch.phi.data()[i] >= 0 && ch.phi.data()[i] < xhat_size, ErrorKind::domain,
            "phi entry is not a valid reconstruction index");
  for (Eigen::Index i = 0; i < ch.psi.size(); ++i)
    require(ch.psi.data()[i] >= 0 && ch.psi.data()[i] < xhat_size, ErrorKind::domain,
            "psi entry is not a valid reconstruction index");
}

/// One atom of the induced law over (X, Y, Z, Xhat_d, Xhat_e).
struct InducedAtom {
  int x, y, z, xd, xe;
  double mass;
};

struct InducedLaw {
  Tensor3 pxyz;  // p(x, y, z) = pxy(x, y) * P(z|x)
  std::vector<InducedAtom> atoms;

  Matrix marginal_xy() const {
    Matrix m = Matrix::Zero(pxyz.dim0(), pxyz.dim1());
    for (int x = 0; x < pxyz.dim0(); ++x)
      for (int y = 0; y < pxyz.dim1(); ++y)
        for (int z = 0; z < pxyz.dim2(); ++z) m(x, y) += pxyz(x, y, z);
    return m;
  }
  Matrix marginal_xz() const {
    Matrix m = Matrix::Zero(pxyz.dim0(), pxyz.dim2());
    for (int x = 0; x < pxyz.dim0(); ++x)
      for (int y = 0; y < pxyz.dim1(); ++y)
        for (int z = 0; z < pxyz.dim2(); ++z) m(x, z) += pxyz(x, y, z);
    return m;
  }
  Matrix marginal_yz() const {
    Matrix m = Matrix::Zero(pxyz.dim1(), pxyz.dim2());
    for (int x = 0; x < pxyz.dim0(); ++x)
      for (int y = 0; y < pxyz.dim1(); ++y)
        for (int z = 0; z < pxyz.dim2(); ++z) m(y, z) += pxyz(x, y, z);
    return m;
  }
};

inline InducedLaw induced_distribution(const JointSource& src, const TestChannel& ch) {
  require(ch.pz_given_x.rows() == src.x_size(), ErrorKind::dimension,
          "channel input alphabet does not match source");
  require(ch.phi.rows() == src.y_size() && ch.phi.cols() == ch.z_size(), ErrorKind::dimension,
          "phi must be y_size x z_size");
  require(ch.psi.rows() == src.x_size() && ch.psi.cols() == ch.z_size(), ErrorKind::dimension,
          "psi must be x_size x z_size");
  InducedLaw law;
  law.pxyz = Tensor3(src.x_size(), src.y_size(), ch.z_size());
  for (int x = 0; x < src.x_size(); ++x) {
    for (int y = 0; y < src.y_size(); ++y) {
      for (int z = 0; z < ch.z_size(); ++z) {
        const double m = src.pxy(x, y) * ch.pz_given_x(x, z);
        law.pxyz(x, y, z) = m;
        law.atoms.push_back({x, y, z, ch.phi(y, z), ch.psi(x, z), m});
      }
    }
  }
  return law;
}

// ---------------------------------------------------------------------------
// Encoder-side observation W absorbed into the source

struct AbsorbedInstance {
  JointSource source;  // over Xtilde = X x W (index x * |W| + w) versus Y
  Matrix dd;           // dd_tilde((x, w), xhat) = dd(x, xhat)
  int w_size;
};

/// Folds an observation W available only at the encoder into the source
/// alphabet. pxwy is indexed (x, w, y).
inline AbsorbedInstance absorb_encoder_observation(const Tensor3& pxwy, const Matrix& dd) {
  const int xs = pxwy.dim0(), ws = pxwy.dim1(), ys = pxwy.dim2();
  require(xs > 0 && ws > 0 && ys > 0, ErrorKind::domain, "empty joint law");
  require(dd.rows() == xs, ErrorKind::dimension, "dd rows must match |X|");
  Matrix p(xs * ws, ys);
  for (int x = 0; x < xs; ++x)
    for (int w = 0; w < ws; ++w)
      for (int y = 0; y < ys; ++y) p(x * ws + w, y) = pxwy(x, w, y);
  check_distortion_table(dd, "dd");
  Matrix dtilde(xs * ws, dd.cols());
  for (int x = 0; x < xs; ++x)
    for (int w = 0; w < ws; ++w) dtilde.row(x * ws + w) = dd.row(x);
  return {JointSource(std::move(p)), std::move(dtilde), ws};
}

// ---------------------------------------------------------------------------
// Extended instance with K three-argument distortion functions

struct ExtendedInstance {
  int xhat_d_size = 0;
  int xhat_e_size = 0;
  std::vector<Tensor3> dk;      // each X x Xhat_d x Xhat_e
  std::vector<double> targets;  // D_1 .. D_K

  int k() const { return static_cast<int>(dk.size()); }
};

inline void validate_extended(const ExtendedInstance& ext, int x_size) {
  require(ext.k() >= 1, ErrorKind::domain, "extended instance needs at least one constraint");
  require(static_cast<int>(ext.targets.size()) == ext.k(), ErrorKind::dimension,
          "one target per distortion function is required");
  require(ext.xhat_d_size > 0 && ext.xhat_e_size > 0, ErrorKind::domain,
          "reconstruction alphabets must be nonempty");
  for (const Tensor3& d : ext.dk) {
    require(d.dim0() == x_size && d.dim1() == ext.xhat_d_size && d.dim2() == ext.xhat_e_size,
            ErrorKind::dimension, "distortion table must be X x Xhat_d x Xhat_e");
    for (double v : d.data()) {
      require(std::isfinite(v), ErrorKind::domain, "distortion entries must be finite");
      require(v >= 0.0, ErrorKind::domain, "distortion entries must be nonnegative");
    }
  }
  for (double t : ext.targets)
    require(std::isfinite(t) && t >= 0.0, ErrorKind::domain, "targets must be nonnegative");
}

/// True iff every x has (xd, xe) with d_k(x, xd, xe) = 0 for all k.
inline bool check_extended_assumption(const ExtendedInstance& ext, int x_size) {
  for (int x = 0; x < x_size; ++x) {
    bool found = false;
    for (int xd = 0; xd < ext.xhat_d_size && !found; ++xd) {
      for (int xe = 0; xe < ext.xhat_e_size && !found; ++xe) {
        bool all_zero = true;
        for (const Tensor3& d : ext.dk) all_zero = all_zero && d(x, xd, xe) == 0.0;
        found = all_zero;
      }
    }
    if (!found) return false;
  }
  return true;
}

/// Embeds (d_d, d_e) as K = 2 three-argument functions with Xhat_d = Xhat_e.
inline ExtendedInstance embed_two_constraints(const DistortionSpec& spec, double dd_target,
                                              double de_target) {
  const int xs = spec.x_size(), xh = spec.xhat_size();
  ExtendedInstance ext;
  ext.xhat_d_size = xh;
  ext.xhat_e_size = xh;
  Tensor3 d1(xs, xh, xh), d2(xs, xh, xh);
  for (int x = 0; x < xs; ++x)
    for (int a = 0; a < xh; ++a)
      for (int b = 0; b < xh; ++b) {
        d1(x, a, b) = spec.dd()(x, a);
        d2(x, a, b) = spec.de()(a, b);
      }
  ext.dk = {std::move(d1), std::move(d2)};
  ext.targets = {dd_target, de_target};
  return ext;
}

}  // namespace rdsi
