// Solve a two-constraint instance on a deliberately large U, then shrink U to K
// symbols without changing the rate or raising any distortion.
#include <cstdio>

#include "rdsi/caratheodory.hpp"
#include "rdsi/extended_solver.hpp"

int main() {
  using namespace rdsi;
  Matrix pxy(2, 2);
  pxy << 0.4, 0.1, 0.15, 0.35;
  const JointSource src(pxy);

  ExtendedInstance ext;
  ext.xhat_d_size = ext.xhat_e_size = 2;
  Tensor3 d1(2, 2, 2), d2(2, 2, 2);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        d1(x, a, b) = a != x;
        d2(x, a, b) = 0.5 * (b != x) + 0.5 * (b != a);
      }
  ext.dk = {d1, d2};
  ext.targets = {0.15, 0.2};

  ExtSolveConfig cfg;
  cfg.z_size = 2;
  cfg.u_size = 3;
  const ExtRatePoint r = solve_rate_ext(src, ext, cfg);
  std::printf("rate %.9f with |U|=%d |Z|=%d\n", r.rate, r.u_size, r.z_size);

  const UReductionCheck c = verify_u_reduction(src, ext, r.witness);
  std::printf("reduced to |U|=%d: rate %.9f -> %.9f, ok=%d\n", c.reduction.witness.u_size(), c.rate_before,
              c.rate_after, c.ok);
  for (int k = 0; k < ext.k(); ++k) std::printf("  d%d: %.6f -> %.6f\n", k + 1, c.before[k], c.after[k]);
}
