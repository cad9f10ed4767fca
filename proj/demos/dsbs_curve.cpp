// Rate curves for a doubly symmetric binary pair: the two baselines and the
// encoder-constrained rate at a few encoder distortions.
#include <cstdio>

#include "rdsi/discrete_solver.hpp"

int main() {
  using namespace rdsi;
  const JointSource src = binary_symmetric_source(0.25);
  SolveConfig cfg;
  cfg.z_size = 3;
  std::printf("%6s %10s %10s %10s %10s\n", "dd", "wz", "de=0.05", "de=0.15", "cr");
  for (double dd : {0.05, 0.1, 0.15, 0.2}) {
    std::printf("%6.3f %10.6f", dd, r_wz(src, hamming(2), dd).rate);
    for (double de : {0.05, 0.15}) std::printf(" %10.6f", solve_rate(src, hamming_spec(2), dd, de, cfg).rate);
    std::printf(" %10.6f\n", r_cr(src, hamming(2), dd).rate);
  }
}
