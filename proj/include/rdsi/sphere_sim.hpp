#pragma once

// Finite-blocklength Monte Carlo of the sphere-codebook scheme for the
// quadratic-Gaussian problem:
//
//   codebook  ceil(2^{nR'}) points uniform on the sphere of radius sqrt(n var_z),
//             cut into contiguous bins of ceil(2^{n(R'-R-delta)}) codewords;
//   encoder   picks the codeword whose angle with x is closest to
//             cos = sqrt(1 - 2^{-2R'}) and sends its bin, xe = z* + b x;
//   decoder   picks, inside that bin, the codeword whose angle with y is
//             closest to cos = sqrt(1 - 2^{-2(R'-R)}), xd = z + b y.
//
// Randomness: std::mt19937_64 per stream, seeded from (seed, stream) with a
// splitmix64 mix; normals from std::normal_distribution. Stream 0 draws the
// codebook (codeword by codeword, coordinates in order), stream t + 1 draws
// trial t (all of X first, then all of U).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "rdsi/error.hpp"
#include "rdsi/gaussian.hpp"
#include "rdsi/parallel.hpp"

namespace rdsi {

// ---------------------------------------------------------------------------
// Cap geometry

/// Pr[<Psi, mu> >= tau] for Psi uniform on the unit sphere in R^n and a
/// fixed unit vector mu: the normalized area of a cap of half-angle arccos(tau).
inline double cap_ratio(int n, double tau) {
  require(n >= 2, ErrorKind::domain, "cap_ratio needs n >= 2");
  require(tau >= 0.0 && tau <= 1.0, ErrorKind::domain, "cap_ratio needs 0 <= tau <= 1");
  if (tau == 1.0) return 0.0;
  return 0.5 * boost::math::ibeta(0.5 * (n - 1), 0.5, 1.0 - tau * tau);
}

/// Normalized cap area for any half-angle theta in [0, pi].
inline double cap_fraction(int n, double theta) {
  require(theta >= 0.0 && theta <= std::numbers::pi, ErrorKind::domain,
          "cap half-angle must lie in [0, pi]");
  if (theta <= 0.5 * std::numbers::pi) return cap_ratio(n, std::min(1.0, std::cos(theta)));
  return 1.0 - cap_ratio(n, std::min(1.0, std::cos(std::numbers::pi - theta)));
}

/// Exponential rate (bits per dimension) of cap_ratio(n, tau) as n grows.
inline double cap_exponent(double tau) {
  require(tau >= 0.0 && tau < 1.0, ErrorKind::domain, "cap_exponent needs 0 <= tau < 1");
  return 0.5 * std::log2(1.0 - tau * tau);
}

// ---------------------------------------------------------------------------
// Randomness

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(~stream)));
}

/// Uniform point on the centered sphere of the given radius.
template <typename Rng>
std::vector<double> sample_sphere(int n, double radius, Rng& rng) {
  require(n >= 2, ErrorKind::domain, "sample_sphere needs n >= 2");
  require(std::isfinite(radius) && radius > 0.0, ErrorKind::domain, "radius must be > 0");
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& c : v) {
      c = normal(rng);
      norm2 += c * c;
    }
  } while (norm2 == 0.0);
  const double s = radius / std::sqrt(norm2);
  for (double& c : v) c *= s;
  return v;
}

// ---------------------------------------------------------------------------
// Configuration

struct SimConfig {
  int n = 2;
  double var_x = 1.0;
  double var_u = 1.0;
  SchemeParams params;
  double delta = 0.1;
  double epsilon = 0.0;  // <= 0 selects half of the largest admissible value
  int trials = 1;
  std::uint64_t seed = 0;
  std::size_t codeword_cap = std::size_t{1} << 22;
  int threads = 1;
};

struct SchemeRates {
  double var_z = 0.0;
  double r_prime = 0.0;  // codebook rate
  double r = 0.0;        // transmitted rate (before the delta slack)
  double enc_cos = 0.0;  // sqrt(1 - 2^{-2R'})
  double dec_cos = 0.0;  // sqrt(1 - 2^{-2(R'-R)})
};

inline SchemeRates scheme_rates(const SchemeParams& p, double var_x, double var_u) {
  SchemeRates s;
  s.var_z = p.a * p.a * (p.var_w + var_x);
  s.r_prime = 0.5 * std::log2((var_x + p.var_w) / p.var_w);
  s.r = scheme_rate(p, var_x, var_u);
  s.enc_cos = std::sqrt(1.0 - std::exp2(-2.0 * s.r_prime));
  s.dec_cos = std::sqrt(1.0 - std::exp2(-2.0 * (s.r_prime - s.r)));
  return s;
}

/// Supremum of the typicality slacks epsilon for which the decoder's angle
/// window stays separated from that of a wrong codeword:
/// (1 - 4 eps) dec_cos > sqrt(1 - 2^{-2(R'-R-delta/2)}). Nonpositive if none.
inline double max_epsilon(const SchemeRates& s, double delta) {
  const double e = s.r_prime - s.r - 0.5 * delta;
  const double rhs = e > 0.0 ? std::sqrt(1.0 - std::exp2(-2.0 * e)) : 0.0;
  if (s.dec_cos <= 0.0) return 0.0;
  return 0.25 * (1.0 - rhs / s.dec_cos);
}

inline bool epsilon_admissible(const SchemeRates& s, double delta, double eps) {
  const double e = s.r_prime - s.r - 0.5 * delta;
  const double rhs = e > 0.0 ? std::sqrt(1.0 - std::exp2(-2.0 * e)) : 0.0;
  return eps > 0.0 && (1.0 - 4.0 * eps) * s.dec_cos > rhs;
}

inline double resolved_epsilon(const SimConfig& cfg) {
  if (cfg.epsilon > 0.0) return cfg.epsilon;
  return 0.5 * max_epsilon(scheme_rates(cfg.params, cfg.var_x, cfg.var_u), cfg.delta);
}

/// ceil(2^{n R'}) or cap + 1 if larger than the cap.
inline std::size_t codebook_size(int n, double r_prime, std::size_t cap) {
  const double lg = n * r_prime;
  if (lg >= 63.0) return cap + 1;
  const double v = std::ceil(std::exp2(lg));
  return v > static_cast<double>(cap) ? cap + 1 : static_cast<std::size_t>(v);
}

/// Largest n >= 2 whose codebook fits in `cap` codewords (0 if none).
inline int largest_feasible_n(double r_prime, std::size_t cap) {
  int n = 0;
  for (int k = 2; k < 100000; ++k) {
    if (codebook_size(k, r_prime, cap) > cap) break;
    n = k;
  }
  return n;
}

inline void validate(const SimConfig& cfg) {
  require(cfg.n >= 2, ErrorKind::domain, "blocklength n must be >= 2");
  require(cfg.var_x > 0.0 && cfg.var_u > 0.0, ErrorKind::domain, "variances must be > 0");
  require(cfg.params.a > 0.0 && cfg.params.b >= 0.0 && cfg.params.var_w > 0.0,
          ErrorKind::domain, "scheme needs a > 0, b >= 0, var_w > 0");
  require(cfg.delta > 0.0, ErrorKind::domain, "delta must be > 0");
  require(cfg.trials >= 1, ErrorKind::domain, "trials must be >= 1");
  const SchemeRates s = scheme_rates(cfg.params, cfg.var_x, cfg.var_u);
  const double eps = resolved_epsilon(cfg);
  if (!epsilon_admissible(s, cfg.delta, eps)) {
    fail(ErrorKind::infeasible,
         "epsilon " + std::to_string(eps) + " is too large for delta " + std::to_string(cfg.delta) +
             ": need (1-4 eps) sqrt(1-2^{-2(R'-R)}) > sqrt(1-2^{-2(R'-R-delta/2)}), i.e. eps < " +
             std::to_string(max_epsilon(s, cfg.delta)));
  }
}

// ---------------------------------------------------------------------------
// Codebook

struct Codebook {
  int n = 0;
  double radius = 0.0;
  std::size_t size = 0;
  std::size_t bin_size = 0;      // ceil(2^{n(R'-R-delta)})
  std::size_t nominal_bins = 0;  // floor(2^{n(R+delta)})
  std::vector<std::size_t> bin_start;  // bins + 1 offsets
  std::vector<double> data;            // size x n, row-major

  std::size_t bins() const { return bin_start.size() - 1; }
  const double* codeword(std::size_t i) const { return data.data() + i * static_cast<std::size_t>(n); }
  std::size_t bin_of(std::size_t i) const {
    return static_cast<std::size_t>(
        std::upper_bound(bin_start.begin(), bin_start.end(), i) - bin_start.begin() - 1);
  }
};

/// Contiguous bins of `bin_size`; the last bin takes whatever is left. When
/// floor(2^{n(R+delta)}) bins would leave trailing bins empty, only the
/// nonempty ones are kept.
inline std::vector<std::size_t> bin_offsets(std::size_t size, std::size_t bin_size,
                                            std::size_t nominal_bins) {
  require(size >= 1 && bin_size >= 1 && nominal_bins >= 1, ErrorKind::domain,
          "codebook, bin size and bin count must be positive");
  const std::size_t bins = std::min(nominal_bins, (size + bin_size - 1) / bin_size);
  std::vector<std::size_t> off(bins + 1);
  for (std::size_t m = 0; m < bins; ++m) off[m] = m * bin_size;
  off[bins] = size;
  return off;
}

inline Codebook build_codebook(const SimConfig& cfg) {
  validate(cfg);
  const SchemeRates s = scheme_rates(cfg.params, cfg.var_x, cfg.var_u);
  Codebook cb;
  cb.n = cfg.n;
  cb.radius = std::sqrt(cfg.n * s.var_z);
  cb.size = codebook_size(cfg.n, s.r_prime, cfg.codeword_cap);
  if (cb.size > cfg.codeword_cap) {
    fail(ErrorKind::resource_cap,
         "codebook of 2^(" + std::to_string(cfg.n * s.r_prime) + ") codewords exceeds the cap of " +
             std::to_string(cfg.codeword_cap) + "; largest feasible n is " +
             std::to_string(largest_feasible_n(s.r_prime, cfg.codeword_cap)) +
             " (or increase var_w to lower R')");
  }
  const double bin_lg = cfg.n * (s.r_prime - s.r - cfg.delta);
  cb.bin_size = static_cast<std::size_t>(std::max(1.0, std::ceil(std::exp2(bin_lg))));
  cb.nominal_bins = static_cast<std::size_t>(
      std::max(1.0, std::floor(std::exp2(cfg.n * (s.r + cfg.delta)))));
  cb.bin_start = bin_offsets(cb.size, cb.bin_size, cb.nominal_bins);

  cb.data.resize(cb.size * static_cast<std::size_t>(cfg.n));
  auto rng = stream_rng(cfg.seed, 0);
  for (std::size_t i = 0; i < cb.size; ++i) {
    const std::vector<double> z = sample_sphere(cfg.n, cb.radius, rng);
    std::copy(z.begin(), z.end(), cb.data.begin() + static_cast<std::ptrdiff_t>(i * cfg.n));
  }
  return cb;
}

// ---------------------------------------------------------------------------
// Encoding and decoding

namespace detail {

inline double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

/// argmin over [lo, hi) of |cos(v, z_i) - target|, lowest index on ties.
inline std::size_t best_angle(const Codebook& cb, const std::vector<double>& v, double target,
                              std::size_t lo, std::size_t hi) {
  const double nv = std::sqrt(dot(v.data(), v.data(), cb.n));
  require(nv > 0.0, ErrorKind::domain, "cannot match the angle of a zero vector");
  const double scale = 1.0 / (nv * cb.radius);
  std::size_t best = lo;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = lo; i < hi; ++i) {
    const double err = std::abs(dot(v.data(), cb.codeword(i), cb.n) * scale - target);
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  return best;
}

inline double cosine(const double* a, const double* b, int n) {
  return dot(a, b, n) / std::sqrt(dot(a, a, n) * dot(b, b, n));
}

}  // namespace detail

struct Encoded {
  std::size_t bin = 0;
  std::size_t index = 0;
  std::vector<double> xhat_e;
};

struct Decoded {
  std::size_t index = 0;
  std::vector<double> xhat_d;
};

inline Encoded encode(const std::vector<double>& x, const Codebook& cb, double b, double enc_cos) {
  require(static_cast<int>(x.size()) == cb.n, ErrorKind::dimension, "x has the wrong length");
  Encoded e;
  e.index = detail::best_angle(cb, x, enc_cos, 0, cb.size);
  e.bin = cb.bin_of(e.index);
  e.xhat_e.resize(x.size());
  const double* z = cb.codeword(e.index);
  for (std::size_t i = 0; i < x.size(); ++i) e.xhat_e[i] = z[i] + b * x[i];
  return e;
}

inline Decoded decode(std::size_t bin, const std::vector<double>& y, const Codebook& cb, double b,
                      double dec_cos) {
  require(static_cast<int>(y.size()) == cb.n, ErrorKind::dimension, "y has the wrong length");
  require(bin < cb.bins(), ErrorKind::domain, "bin index out of range");
  const std::size_t lo = cb.bin_start[bin], hi = cb.bin_start[bin + 1];
  require(hi > lo, ErrorKind::numerical, "empty bin");
  Decoded d;
  d.index = detail::best_angle(cb, y, dec_cos, lo, hi);
  d.xhat_d.resize(y.size());
  const double* z = cb.codeword(d.index);
  for (std::size_t i = 0; i < y.size(); ++i) d.xhat_d[i] = z[i] + b * y[i];
  return d;
}

// ---------------------------------------------------------------------------
// Simulation

struct SimResult {
  int n = 0;
  int trials_run = 0;
  double epsilon = 0.0;
  double rate_nominal = 0.0;  // R + delta, bits per symbol
  std::size_t codebook_size = 0;
  std::size_t bins = 0;
  std::size_t bin_size = 0;
  double empirical_dd = 0.0;  // averaged over all trials
  double empirical_de = 0.0;
  double conditional_dd = std::numeric_limits<double>::quiet_NaN();  // trials with no event
  double conditional_de = std::numeric_limits<double>::quiet_NaN();
  double freq_src = 0.0;
  double freq_enc = 0.0;
  double freq_dec1 = 0.0;
  double freq_dec2 = 0.0;
  double freq_any = 0.0;

  /// Monte Carlo standard error of freq_any.
  double freq_any_stderr() const {
    return trials_run > 0 ? std::sqrt(freq_any * (1.0 - freq_any) / trials_run) : 0.0;
  }
};

struct TrialOutcome {
  double dd = 0.0, de = 0.0;
  bool src = false, enc = false, dec1 = false, dec2 = false;
};

inline TrialOutcome run_trial(const SimConfig& cfg, const Codebook& cb, const SchemeRates& s,
                              double eps, int trial) {
  const int n = cfg.n;
  auto rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(trial) + 1);
  std::normal_distribution<double> normal;
  std::vector<double> x(n), u(n), y(n);
  const double sx = std::sqrt(cfg.var_x), su = std::sqrt(cfg.var_u);
  for (double& v : x) v = sx * normal(rng);
  for (double& v : u) v = su * normal(rng);
  for (int i = 0; i < n; ++i) y[i] = x[i] + u[i];

  const double b = cfg.params.b;
  const Encoded e = encode(x, cb, b, s.enc_cos);
  const Decoded d = decode(e.bin, y, cb, b, s.dec_cos);

  TrialOutcome t;
  for (int i = 0; i < n; ++i) {
    t.dd += (x[i] - d.xhat_d[i]) * (x[i] - d.xhat_d[i]);
    t.de += (d.xhat_d[i] - e.xhat_e[i]) * (d.xhat_d[i] - e.xhat_e[i]);
  }
  t.dd /= n;
  t.de /= n;

  const double var_y = cfg.var_x + cfg.var_u;
  const double rho = std::sqrt(cfg.var_x / var_y);
  const double px = detail::dot(x.data(), x.data(), n) / n;
  const double py = detail::dot(y.data(), y.data(), n) / n;
  t.src = std::abs(px - cfg.var_x) > eps * cfg.var_x || std::abs(py - var_y) > eps * var_y ||
          std::abs(detail::cosine(x.data(), y.data(), n) - rho) > eps * rho;
  const double* zs = cb.codeword(e.index);
  t.enc = std::abs(detail::cosine(x.data(), zs, n) - s.enc_cos) > eps * s.enc_cos;
  t.dec1 = std::abs(detail::cosine(y.data(), zs, n) - s.dec_cos) > 4.0 * eps * s.dec_cos;
  t.dec2 = d.index != e.index;
  return t;
}

inline SimResult summarize(const SimConfig& cfg, const Codebook& cb, double eps,
                           const std::vector<TrialOutcome>& out) {
  const SchemeRates s = scheme_rates(cfg.params, cfg.var_x, cfg.var_u);
  SimResult r;
  r.n = cfg.n;
  r.trials_run = static_cast<int>(out.size());
  r.epsilon = eps;
  r.rate_nominal = s.r + cfg.delta;
  r.codebook_size = cb.size;
  r.bins = cb.bins();
  r.bin_size = cb.bin_size;
  double cdd = 0.0, cde = 0.0;
  int ok = 0;
  for (const TrialOutcome& t : out) {
    r.empirical_dd += t.dd;
    r.empirical_de += t.de;
    r.freq_src += t.src;
    r.freq_enc += t.enc;
    r.freq_dec1 += t.dec1;
    r.freq_dec2 += t.dec2;
    const bool any = t.src || t.enc || t.dec1 || t.dec2;
    r.freq_any += any;
    if (!any) {
      cdd += t.dd;
      cde += t.de;
      ++ok;
    }
  }
  const double k = static_cast<double>(out.size());
  r.empirical_dd /= k;
  r.empirical_de /= k;
  r.freq_src /= k;
  r.freq_enc /= k;
  r.freq_dec1 /= k;
  r.freq_dec2 /= k;
  r.freq_any /= k;
  if (ok > 0) {
    r.conditional_dd = cdd / ok;
    r.conditional_de = cde / ok;
  }
  return r;
}

inline SimResult run_simulation(const SimConfig& cfg) {
  const Codebook cb = build_codebook(cfg);
  const SchemeRates s = scheme_rates(cfg.params, cfg.var_x, cfg.var_u);
  const double eps = resolved_epsilon(cfg);
  std::vector<TrialOutcome> out(static_cast<std::size_t>(cfg.trials));
  parallel_for(out.size(), cfg.threads, [&](std::size_t t) {
    out[t] = run_trial(cfg, cb, s, eps, static_cast<int>(t));
  });
  return summarize(cfg, cb, eps, out);
}

}  // namespace rdsi
