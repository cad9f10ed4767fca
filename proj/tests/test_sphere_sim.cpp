#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rdsi/sphere_sim.hpp"

using namespace rdsi;

namespace {

// Case-4 parameters at (1, 1, 0.25, 0): b = 0 and R' = 1 bit exactly.
SchemeParams no_scaling() { return coding_params({1, 1, 0.25, 0.0}); }

SimConfig small_config(int n, int trials) {
  SimConfig c;
  c.n = n;
  c.params = coding_params({1, 1, 0.25, 0.0625});
  c.trials = trials;
  c.seed = 7;
  return c;
}

Codebook planar(const std::vector<double>& angles_deg) {
  Codebook cb;
  cb.n = 2;
  cb.radius = 1.0;
  cb.size = angles_deg.size();
  cb.bin_size = cb.size;
  cb.nominal_bins = 1;
  cb.bin_start = {0, cb.size};
  for (double a : angles_deg) {
    cb.data.push_back(std::cos(a * std::numbers::pi / 180));
    cb.data.push_back(std::sin(a * std::numbers::pi / 180));
  }
  return cb;
}

}  // namespace

TEST(CapRatio, Hemisphere) {
  for (int n : {2, 3, 10, 100}) EXPECT_NEAR(cap_ratio(n, 0.0), 0.5, 1e-15);
}

TEST(CapRatio, DegenerateCap) { EXPECT_EQ(cap_ratio(7, 1.0), 0.0); }

TEST(CapRatio, ThreeDimensionalClosedForm) {
  for (double tau : {0.0, 0.25, 0.5, 0.9}) EXPECT_NEAR(cap_ratio(3, tau), (1 - tau) / 2, 1e-12) << tau;
}

TEST(CapRatio, NonincreasingInTau) {
  for (int n : {2, 5, 40}) {
    double prev = 1.0;
    for (int i = 0; i <= 100; ++i) {
      const double r = cap_ratio(n, i / 100.0);
      EXPECT_LE(r, prev);
      prev = r;
    }
  }
}

TEST(CapRatio, MonteCarlo) {
  auto rng = stream_rng(1, 1);
  const int trials = 100000;
  int hits = 0;
  for (int t = 0; t < trials; ++t) hits += sample_sphere(5, 1.0, rng)[0] >= 0.3;
  const double p = cap_ratio(5, 0.3);
  EXPECT_NEAR(double(hits) / trials, p, 4 * std::sqrt(p * (1 - p) / trials));
}

TEST(CapRatio, ExponentAndConvergence) {
  EXPECT_EQ(cap_exponent(0.0), 0.0);
  EXPECT_NEAR(cap_exponent(0.6), 0.5 * std::log2(0.64), 1e-15);
  EXPECT_NEAR(cap_exponent(0.6), -0.32192809488736235, 1e-15);
  EXPECT_LE(std::abs(std::log2(cap_ratio(512, 0.6)) / 512 - cap_exponent(0.6)), 0.02);
}

TEST(CapRatio, NarrowAndWideCapTrends) {
  double narrow = 1.0, wide = 0.0;
  for (int n : {64, 256, 1024}) {
    const double a = cap_fraction(n, std::numbers::pi / 3), b = cap_fraction(n, 2 * std::numbers::pi / 3);
    EXPECT_LT(a, narrow);
    EXPECT_GE(b, wide);
    EXPECT_NEAR(a + b, 1.0, 1e-12);
    narrow = a;
    wide = b;
  }
  EXPECT_LT(narrow, 1e-50);
  EXPECT_GT(wide, 1 - 1e-12);
}

TEST(CapRatio, DomainErrors) {
  EXPECT_THROW(cap_ratio(1, 0.5), Error);
  EXPECT_THROW(cap_ratio(3, 1.5), Error);
  EXPECT_THROW(cap_exponent(1.0), Error);
}

TEST(SampleSphere, UnitCircle) {
  auto rng = stream_rng(0, 3);
  for (int i = 0; i < 100; ++i) {
    const auto v = sample_sphere(2, 1.0, rng);
    EXPECT_NEAR(std::hypot(v[0], v[1]), 1.0, 1e-15);
  }
}

TEST(SampleSphere, CentredAndSymmetric) {
  auto rng = stream_rng(0, 4);
  const int n = 4, samples = 100000;
  const double radius = 2.0;
  std::vector<double> mean(n, 0.0);
  int below = 0;
  for (int s = 0; s < samples; ++s) {
    const auto v = sample_sphere(n, radius, rng);
    for (int i = 0; i < n; ++i) mean[i] += v[i] / samples;
    below += v[0] <= 0.0;
  }
  const double sd = std::sqrt(radius * radius / n / samples);
  for (double m : mean) EXPECT_LE(std::abs(m), 4 * sd);
  EXPECT_NEAR(double(below) / samples, 0.5, 0.01);
}

TEST(Codebook, SixteenCodewordsOnTheSphere) {
  SimConfig c;
  c.n = 4;
  c.params = no_scaling();
  EXPECT_NEAR(scheme_rates(c.params, 1, 1).r_prime, 1.0, 1e-12);
  const Codebook cb = build_codebook(c);
  ASSERT_EQ(cb.size, 16u);
  for (std::size_t i = 0; i < cb.size; ++i) {
    const double norm = std::sqrt(detail::dot(cb.codeword(i), cb.codeword(i), cb.n));
    EXPECT_LE(std::abs(norm - cb.radius) / cb.radius, 1e-9);
  }
  EXPECT_EQ(cb.bin_start.front(), 0u);
  EXPECT_EQ(cb.bin_start.back(), cb.size);
}

TEST(Codebook, BinPartition) {
  EXPECT_EQ(bin_offsets(16, 4, 4), (std::vector<std::size_t>{0, 4, 8, 12, 16}));
  EXPECT_EQ(bin_offsets(17, 4, 4), (std::vector<std::size_t>{0, 4, 8, 12, 17}));
  EXPECT_EQ(bin_offsets(10, 4, 100), (std::vector<std::size_t>{0, 4, 8, 10}));
}

TEST(Codebook, SameSeedSameCodebook) {
  const SimConfig c = small_config(10, 1);
  const Codebook a = build_codebook(c), b = build_codebook(c);
  EXPECT_EQ(a.data, b.data);
  SimConfig d = c;
  d.seed = 8;
  EXPECT_NE(build_codebook(d).data, a.data);
}

TEST(Codebook, CapIsEnforced) {
  SimConfig c = small_config(40, 1);
  c.codeword_cap = 1000;
  try {
    build_codebook(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::resource_cap);
  }
  const double rp = scheme_rates(c.params, 1, 1).r_prime;
  const int n = largest_feasible_n(rp, 1000);
  EXPECT_LE(codebook_size(n, rp, 1000), 1000u);
  EXPECT_GT(codebook_size(n + 1, rp, 1000), 1000u);
}

TEST(EncodeDecode, SingleCodeword) {
  const Codebook cb = planar({123.0});
  EXPECT_EQ(encode({1.0, 0.0}, cb, 0.3, 0.5).index, 0u);
  EXPECT_EQ(decode(0, {0.0, 1.0}, cb, 0.3, 0.5).index, 0u);
}

TEST(EncodeDecode, ExactTargetAngleWins) {
  const Codebook cb = planar({0.0, 60.0, 90.0, 200.0});
  const std::vector<double> x = {1.0, 0.0};
  const Encoded e = encode(x, cb, 0.25, 0.5);
  EXPECT_EQ(e.index, 1u);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(e.xhat_e[i] - 0.25 * x[i], cb.codeword(1)[i], 1e-15);

  const std::vector<double> y = {0.0, 3.0};  // parallel to the 90 degree codeword
  const Decoded d = decode(0, y, cb, 0.5, 1.0);
  EXPECT_EQ(d.index, 2u);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(d.xhat_d[i] - 0.5 * y[i], cb.codeword(2)[i], 1e-15);
}

TEST(EncodeDecode, DecoderSearchesOnlyItsBin) {
  Codebook cb = planar({0.0, 10.0, 90.0});
  cb.bin_start = {0, 2, 3};
  EXPECT_EQ(decode(1, {1.0, 0.0}, cb, 0.0, 1.0).index, 2u);
  EXPECT_THROW(decode(2, {1.0, 0.0}, cb, 0.0, 1.0), Error);
}

TEST(Simulation, Deterministic) {
  const SimConfig c = small_config(10, 30);
  const SimResult a = run_simulation(c), b = run_simulation(c);
  EXPECT_EQ(a.empirical_dd, b.empirical_dd);
  EXPECT_EQ(a.empirical_de, b.empirical_de);
  EXPECT_EQ(a.freq_any, b.freq_any);
  SimConfig t = c;
  t.threads = 3;
  const SimResult p = run_simulation(t);
  EXPECT_EQ(p.empirical_dd, a.empirical_dd);
  EXPECT_EQ(p.freq_dec2, a.freq_dec2);
}

TEST(Simulation, UnionBound) {
  const SimResult r = run_simulation(small_config(10, 60));
  EXPECT_LE(r.freq_any, r.freq_src + r.freq_enc + r.freq_dec1 + r.freq_dec2 + 1e-15);
  EXPECT_GE(r.freq_any, std::max({r.freq_src, r.freq_enc, r.freq_dec1, r.freq_dec2}));
  EXPECT_EQ(r.trials_run, 60);
  EXPECT_NEAR(r.rate_nominal, 0.6, 1e-12);
}

TEST(Simulation, NoScalingMeansZeroEncoderDistortionWhenDecodingSucceeds) {
  SimConfig c;
  c.n = 8;
  c.params = no_scaling();
  c.trials = 60;
  const Codebook cb = build_codebook(c);
  const SchemeRates s = scheme_rates(c.params, c.var_x, c.var_u);
  const double eps = resolved_epsilon(c);
  int matched = 0;
  for (int t = 0; t < c.trials; ++t) {
    const TrialOutcome o = run_trial(c, cb, s, eps, t);
    if (!o.dec2) {
      EXPECT_EQ(o.de, 0.0);
      ++matched;
    }
  }
  EXPECT_GT(matched, 0);
}

TEST(Simulation, EpsilonAdmissibility) {
  SimConfig c = small_config(10, 1);
  const SchemeRates s = scheme_rates(c.params, 1, 1);
  const double emax = max_epsilon(s, c.delta);
  EXPECT_GT(emax, 0.0);
  EXPECT_NEAR(resolved_epsilon(c), emax / 2, 1e-15);
  c.epsilon = 1.01 * emax;
  try {
    validate(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::infeasible);
  }
  c.epsilon = 0.99 * emax;
  EXPECT_NO_THROW(validate(c));
}

TEST(Simulation, ConfigDomain) {
  SimConfig c = small_config(1, 1);
  EXPECT_THROW(validate(c), Error);
  c = small_config(10, 0);
  EXPECT_THROW(validate(c), Error);
}
