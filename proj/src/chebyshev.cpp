#include "vwave/chebyshev.hpp"

#include "vwave/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace vw {

ChebyshevLobatto::ChebyshevLobatto(int order) : order_(order) {
  if (order < 2) throw std::invalid_argument("Chebyshev order must be at least 2");
  const int m = order;
  nodes_.resize(m + 1);
  for (int i = 0; i <= m; ++i) nodes_[i] = 0.5 * (1.0 - std::cos(pi * i / m));

  // Barycentric differentiation; the diagonal uses the negative row sum.
  Eigen::VectorXd w(m + 1);
  for (int i = 0; i <= m; ++i) w[i] = ((i % 2) ? -1.0 : 1.0) * ((i == 0 || i == m) ? 0.5 : 1.0);
  d1_ = Eigen::MatrixXd::Zero(m + 1, m + 1);
  for (int i = 0; i <= m; ++i) {
    double diag = 0.0;
    for (int j = 0; j <= m; ++j) {
      if (i == j) continue;
      d1_(i, j) = (w[j] / w[i]) / (nodes_[i] - nodes_[j]);
      diag -= d1_(i, j);
    }
    d1_(i, i) = diag;
  }
  d2_ = d1_ * d1_;

  // t_i = 1 - 2 s_i = cos(pi i / m); c_n = (2/m) sum'' f_i cos(n i pi / m), ends halved.
  analysis_.resize(m + 1, m + 1);
  for (int n = 0; n <= m; ++n)
    for (int i = 0; i <= m; ++i) {
      double v = 2.0 / m * std::cos(pi * n * i / m);
      if (i == 0 || i == m) v *= 0.5;
      if (n == 0 || n == m) v *= 0.5;
      analysis_(n, i) = v;
    }
}

Eigen::RowVectorXd ChebyshevLobatto::weights(double s, int derivative) const {
  const int m = order_;
  const double t = 1.0 - 2.0 * s;
  Eigen::RowVectorXd tn(m + 1), dtn(m + 1), d2tn(m + 1);
  tn[0] = 1.0;
  dtn[0] = 0.0;
  d2tn[0] = 0.0;
  tn[1] = t;
  dtn[1] = 1.0;
  d2tn[1] = 0.0;
  for (int n = 1; n < m; ++n) {
    tn[n + 1] = 2.0 * t * tn[n] - tn[n - 1];
    dtn[n + 1] = 2.0 * tn[n] + 2.0 * t * dtn[n] - dtn[n - 1];
    d2tn[n + 1] = 4.0 * dtn[n] + 2.0 * t * d2tn[n] - d2tn[n - 1];
  }
  // d/ds = -2 d/dt
  switch (derivative) {
    case 0: return tn * analysis_;
    case 1: return -2.0 * dtn * analysis_;
    case 2: return 4.0 * d2tn * analysis_;
    default: throw std::invalid_argument("derivative order must be 0, 1 or 2");
  }
}

}  // namespace vw
