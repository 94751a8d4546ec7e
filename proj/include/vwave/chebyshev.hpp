#pragma once

#include <Eigen/Dense>

namespace vw {

/// Chebyshev-Gauss-Lobatto collocation on s in [0, 1]:
/// s_m = (1 - cos(m pi / M)) / 2, m = 0..M, so s_0 = 0 and s_M = 1.
class ChebyshevLobatto {
 public:
  explicit ChebyshevLobatto(int order);

  int order() const noexcept { return order_; }
  const Eigen::VectorXd& nodes() const noexcept { return nodes_; }
  const Eigen::MatrixXd& d1() const noexcept { return d1_; }
  const Eigen::MatrixXd& d2() const noexcept { return d2_; }

  /// Row vector w with w * nodal_values = d^derivative/ds^derivative of the interpolant at s.
  Eigen::RowVectorXd weights(double s, int derivative = 0) const;

 private:
  int order_;
  Eigen::VectorXd nodes_;
  Eigen::MatrixXd d1_;
  Eigen::MatrixXd d2_;
  Eigen::MatrixXd analysis_;  // nodal values -> Chebyshev coefficients in t = 1 - 2s
};

}  // namespace vw
