// Which regime a Gaussian target falls in, and what the scheme uses there.
#include <cstdio>
#include <variant>

#include "rdsi/gaussian.hpp"

int main() {
  using namespace rdsi;
  for (const GaussianProblem& p : {GaussianProblem{1, 1, 0.6, 0.36}, GaussianProblem{1, 1, 0.9, 0.01},
                                   GaussianProblem{1, 1, 0.25, 0.0625}, GaussianProblem{1, 1, 0.25, 0.01}}) {
    std::printf("dd=%.4g de=%.4g  case %d  rate %.6f  (wz %.6f, cr %.6f)\n", p.dd, p.de, classify_case(p),
                r_gaussian(p), r_wz_gaussian(p.var_x, p.var_u, p.dd), r_cr_gaussian(p.var_x, p.var_u, p.dd));
    const Scheme s = scheme_params(p);
    if (const auto* c = std::get_if<SchemeParams>(&s))
      std::printf("    a=%.6f b=%.6f var_w=%.6f\n", c->a, c->b, c->var_w);
  }
}
