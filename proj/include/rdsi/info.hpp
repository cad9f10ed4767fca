#pragma once

// Base-2 information measures on finite joint laws. Zero-probability terms
// contribute exactly 0.

#include <cmath>

#include <Eigen/Dense>

namespace rdsi {

inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

template <typename Vec>
double entropy_bits(const Vec& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) h -= xlog2x(p(i));
  return h;
}

/// I(A;B) in bits for a joint matrix with rows indexing A and columns B.
inline double mutual_information_bits(const Eigen::MatrixXd& pab) {
  const Eigen::VectorXd pa = pab.rowwise().sum();
  const Eigen::RowVectorXd pb = pab.colwise().sum();
  double mi = 0.0;
  for (Eigen::Index a = 0; a < pab.rows(); ++a) {
    for (Eigen::Index b = 0; b < pab.cols(); ++b) {
      const double p = pab(a, b);
      if (p > 0.0) mi += p * std::log2(p / (pa(a) * pb(b)));
    }
  }
  return mi;
}

/// H(A|B) in bits, rows index A and columns B.
inline double conditional_entropy_bits(const Eigen::MatrixXd& pab) {
  const Eigen::RowVectorXd pb = pab.colwise().sum();
  double h = 0.0;
  for (Eigen::Index a = 0; a < pab.rows(); ++a) {
    for (Eigen::Index b = 0; b < pab.cols(); ++b) {
      const double p = pab(a, b);
      if (p > 0.0) h += p * std::log2(pb(b) / p);
    }
  }
  return h;
}

}  // namespace rdsi
