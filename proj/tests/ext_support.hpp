#pragma once

#include <random>

#include "rdsi/caratheodory.hpp"
#include "test_support.hpp"

namespace rdsi::testkit {

/// K random tables on binary alphabets; every x keeps a zero-distortion pair.
inline ExtendedInstance random_extended(std::mt19937_64& rng, int k, double target = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ExtendedInstance ext;
  ext.xhat_d_size = 2;
  ext.xhat_e_size = 2;
  for (int i = 0; i < k; ++i) {
    Tensor3 d(2, 2, 2);
    for (int x = 0; x < 2; ++x)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) d(x, a, b) = (a == x && b == x) ? 0.0 : u(rng);
    ext.dk.push_back(std::move(d));
    ext.targets.push_back(target);
  }
  return ext;
}

inline ExtWitness random_witness(std::mt19937_64& rng, int xs, int ys, int zs, int us) {
  ExtWitness w;
  w.pz_given_x = random_stochastic(rng, xs, zs);
  w.pu_given_xz = Tensor3(xs, zs, us);
  for (int x = 0; x < xs; ++x)
    for (int z = 0; z < zs; ++z) {
      const Matrix row = random_stochastic(rng, 1, us);
      for (int u = 0; u < us; ++u) w.pu_given_xz(x, z, u) = row(0, u);
    }
  w.phi = random_table(rng, ys, zs, 2);
  w.psi = IndexTensor3(xs, zs, us);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int& v : w.psi.data()) v = bit(rng);
  return w;
}

}  // namespace rdsi::testkit
