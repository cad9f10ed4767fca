#pragma once

// Quadratic-Gaussian case: X ~ N(0, var_x), Y = X + U with U ~ N(0, var_u)
// independent of X, squared-error distortions. Rates in bits.

#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "rdsi/error.hpp"

namespace rdsi {

struct GaussianProblem {
  double var_x = 1.0;
  double var_u = 1.0;
  double dd = 1.0;
  double de = 0.0;

  void validate() const {
    require(std::isfinite(var_x) && var_x > 0.0, ErrorKind::domain, "var_x must be > 0");
    require(std::isfinite(var_u) && var_u > 0.0, ErrorKind::domain, "var_u must be > 0");
    require(std::isfinite(dd) && dd > 0.0, ErrorKind::domain, "dd must be > 0");
    require(std::isfinite(de) && de >= 0.0, ErrorKind::domain, "de must be >= 0");
  }

  /// Side information Y = xi X + U is equivalent to Y / xi = X + U / xi.
  static GaussianProblem with_gain(double var_x, double var_u, double xi, double dd, double de) {
    require(std::isfinite(xi) && xi != 0.0, ErrorKind::domain, "xi must be finite and nonzero");
    GaussianProblem p{var_x, var_u / (xi * xi), dd, de};
    p.validate();
    return p;
  }

  /// var_x var_u / (var_x + var_u): MMSE of X from Y.
  double mmse() const { return var_x * var_u / (var_x + var_u); }
};

namespace detail {

inline double half_log_plus(double ratio) { return 0.5 * std::max(std::log2(ratio), 0.0); }

inline void check_positive(double v, const char* name) {
  require(std::isfinite(v) && v > 0.0, ErrorKind::domain, std::string(name) + " must be > 0");
}

}  // namespace detail

/// True when sqrt(de var_u) >= min{dd, mmse}: the encoder-side constraint is
/// inactive and the rate equals the Wyner-Ziv rate.
inline bool encoder_constraint_inactive(const GaussianProblem& p) {
  return std::sqrt(p.de * p.var_u) >= std::min(p.dd, p.mmse());
}

inline double r_wz_gaussian(double var_x, double var_u, double dd) {
  detail::check_positive(var_x, "var_x");
  detail::check_positive(var_u, "var_u");
  detail::check_positive(dd, "dd");
  return detail::half_log_plus(var_x * var_u / ((var_x + var_u) * dd));
}

inline double r_cr_gaussian(double var_x, double var_u, double dd) {
  detail::check_positive(var_x, "var_x");
  detail::check_positive(var_u, "var_u");
  detail::check_positive(dd, "dd");
  return detail::half_log_plus(var_x * (var_u + dd) / ((var_x + var_u) * dd));
}

/// Formula of the constrained branch, without checking which branch applies.
/// Written so that de = 0 reproduces r_cr_gaussian bit for bit.
inline double r_gaussian_constrained_branch(const GaussianProblem& p) {
  p.validate();
  require(p.dd > p.de, ErrorKind::domain, "constrained branch needs dd > de");
  const double s = std::sqrt(p.var_u * p.de);
  return detail::half_log_plus(p.var_x * (p.var_u + p.dd - 2.0 * s) /
                               ((p.var_x + p.var_u) * (p.dd - p.de)));
}

inline double r_gaussian(const GaussianProblem& p) {
  p.validate();
  if (encoder_constraint_inactive(p)) return r_wz_gaussian(p.var_x, p.var_u, p.dd);
  // Here sqrt(de var_u) < dd and < mmse < var_u, so de < dd.
  return r_gaussian_constrained_branch(p);
}

// ---------------------------------------------------------------------------
// Direct-part classification

/// Encoding parameters: the encoder quantizes a X + W-type description, the
/// reconstructions are a * Z-component plus b times the observed sequence.
struct SchemeParams {
  double a = 0.0;
  double b = 0.0;
  double var_w = 0.0;
  int case_id = 0;
};

/// Cases 1 and 2: both sides scale their own observation; no bits are sent.
struct NoCoding {
  double scale = 0.0;
  int case_id = 0;
};

using Scheme = std::variant<NoCoding, SchemeParams>;

inline int classify_case(const GaussianProblem& p) {
  p.validate();
  const double mmse = p.mmse();
  const bool inactive = encoder_constraint_inactive(p);
  if (inactive && p.dd >= mmse) return 1;
  const double b = std::sqrt(p.de / p.var_u);
  if (!inactive && p.dd >= p.var_x * (1.0 - b) * (1.0 - b) + p.de) return 2;
  if (inactive) return 3;
  return 4;
}

inline Scheme scheme_params(const GaussianProblem& p) {
  const int c = classify_case(p);
  switch (c) {
    case 1: return NoCoding{p.var_x / (p.var_x + p.var_u), 1};
    case 2: return NoCoding{std::sqrt(p.de / p.var_u), 2};
    case 3: {
      SchemeParams s;
      s.case_id = 3;
      s.var_w = p.dd / (1.0 - (p.var_x + p.var_u) / (p.var_x * p.var_u) * p.dd);
      s.a = p.dd / s.var_w;
      s.b = p.dd / p.var_u;
      return s;
    }
    default: {
      SchemeParams s;
      s.case_id = 4;
      s.b = std::sqrt(p.de / p.var_u);
      s.var_w = p.var_x * (p.dd - p.de) /
                (p.var_x * (1.0 - s.b) * (1.0 - s.b) + p.de - p.dd);
      s.a = p.var_x * (1.0 - s.b) / (p.var_x + s.var_w);
      return s;
    }
  }
}

/// Coding parameters; cases 1 and 2 need none and are rejected.
inline SchemeParams coding_params(const GaussianProblem& p) {
  const Scheme s = scheme_params(p);
  if (const auto* c = std::get_if<SchemeParams>(&s)) return *c;
  fail(ErrorKind::domain, "no coding parameters: the instance needs no encoding (case " +
                              std::to_string(std::get<NoCoding>(s).case_id) + ")");
}

inline double scheme_rate(const SchemeParams& s, double var_x, double var_u) {
  detail::check_positive(var_x, "var_x");
  detail::check_positive(var_u, "var_u");
  require(std::isfinite(s.var_w) && s.var_w > 0.0, ErrorKind::domain, "var_w must be > 0");
  return 0.5 * std::log2((var_x * var_u + var_x * s.var_w + var_u * s.var_w) /
                         ((var_x + var_u) * s.var_w));
}

/// Expected (decoder, encoder) distortions of the scheme in the large-n limit.
inline std::pair<double, double> scheme_distortions(const SchemeParams& s, double var_x,
                                                    double var_u) {
  const double r = 1.0 - s.a - s.b;
  return {r * r * var_x + s.a * s.a * s.var_w + s.b * s.b * var_u, s.b * s.b * var_u};
}

// ---------------------------------------------------------------------------
// Converse quantities

/// h(X|Y) in bits.
inline double gaussian_conditional_entropy(double var_x, double var_u) {
  detail::check_positive(var_x, "var_x");
  detail::check_positive(var_u, "var_u");
  return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * var_x * var_u /
                         (var_x + var_u));
}

/// The differential-entropy bound at the optimal correlation
/// kappa = -sqrt(de var_u). Defined where the encoder constraint is active;
/// points exactly on the branch boundary are accepted (relative slack 1e-12).
inline double converse_gamma(const GaussianProblem& p) {
  p.validate();
  const double lhs = std::sqrt(p.de * p.var_u);
  const double m = std::min(p.dd, p.mmse());
  require(lhs <= m * (1.0 + 1e-12), ErrorKind::domain,
          "converse bound requires sqrt(de var_u) < min{dd, var_x var_u/(var_x+var_u)}");
  const double kappa = -lhs;
  return 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e *
                         (p.dd * p.var_u - kappa * kappa) / (p.dd + p.var_u + 2.0 * kappa));
}

}  // namespace rdsi
