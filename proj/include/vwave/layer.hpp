#pragma once

// Harmonic extension and Dirichlet-Neumann operators for the two fluid strips.
//
// Each layer is mapped onto the rectangle [-L, L] x [0, 1]:
//   lower:  y = -d + s h(x),  h = d + eta
//   upper:  y =  d - s h(x),  h = d - eta
// so s = 0 is the rigid wall and s = 1 the interface in both cases. In either
// layer the Laplacian becomes, after multiplying by h^2,
//
//   h^2 u_xx - 2 s h h_x u_xs + (1 + s^2 h_x^2) u_ss + s (2 h_x^2 - h h_xx) u_s = 0,
//
// discretized with cosine collocation in x (half grid) and Chebyshev-Lobatto in s.
// The wall carries the Dirichlet gauge u = 0, the interface the trace.
//
// The solution is split as u = l + w. The lift l = sum_k t_k cos(kappa_k x) S_k(s),
// S_k(s) = sinh(kappa_k d s) / sinh(kappa_k d), is the exact flat-strip extension of
// the trace and is differentiated analytically; the collocated correction w vanishes
// on both boundaries and only carries the response to the interface deformation.

#include "vwave/chebyshev.hpp"
#include "vwave/spectral.hpp"
#include "vwave/vortex.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>

namespace vw {

enum class Layer { lower, upper };

struct LayerGeometry {
  Layer which = Layer::lower;
  double depth = 1.0;
  EvenField interface;
};

enum class LinearSolver { iterative, direct };

struct LayerSolverOptions {
  int vertical = 32;  ///< Chebyshev order M
  // The next three are fractions of the layer depth d.
  double gap_floor = 0.02;
  double point_guard = 0.05;  ///< minimum vertical clearance for interior evaluation
  double shape_step = 1e-6;   ///< h0 for finite-difference shape derivatives
  LinearSolver solver = LinearSolver::iterative;
  double gmres_tolerance = 1e-13;
  int gmres_restart = 60;
  int gmres_max_iterations = 800;
};

namespace detail {
struct StripBasis;
}

/// The mapped harmonic function of one layer, stored as nodal values on the
/// (half grid) x (Chebyshev) tensor grid.
class LayerSolution {
 public:
  Layer which() const noexcept { return which_; }
  double depth() const noexcept { return depth_; }
  const EvenField& interface() const noexcept { return eta_; }
  /// (N+1) x (M+1) nodal values; column 0 is the wall, column M the interface.
  Eigen::MatrixXd nodal() const;
  /// The collocated correction w (zero on both boundaries).
  const Eigen::MatrixXd& correction() const noexcept { return w_; }

  /// Phi at a physical point inside the layer.
  double value(Point p) const;
  /// d Phi / dy at a physical point; throws PointOutsideLayer within `guard` of either boundary.
  double dy(Point p, double guard) const;
  double dx(Point p, double guard) const;

  /// Dirichlet-Neumann output on the half grid: phi_y - eta_x phi_x (lower),
  /// eta_x phi_x - phi_y (upper).
  Eigen::VectorXd dno_half_values() const;
  EvenField dno() const;

 private:
  friend class LayerSolver;
  struct Local {
    double s, h, hx;
    Eigen::RowVectorXd wx, wx1, ws, ws1, ws2;  // interpolation weights for w
    Eigen::RowVectorXd cx, cx1;                // cos(kappa x) and its x-derivative
    Eigen::RowVectorXd ls, ls1, ls2;           // S_k(s) and its s-derivatives
  };
  Local locate(Point p, double guard) const;

  std::shared_ptr<const detail::StripBasis> basis_;
  Layer which_ = Layer::lower;
  double depth_ = 1.0;
  EvenField eta_;
  Eigen::VectorXd h_, hx_;
  Eigen::VectorXd t_;  // trace coefficients
  Eigen::MatrixXd w_;
};

/// Everything the system Jacobian needs from one layer, computed with a single
/// factorization of the collocation matrix. Columns index cosine modes k = 0..N,
/// rows of the matrices index half-grid nodes.
struct LayerLinearization {
  LayerSolution solution;
  Eigen::VectorXd dno;         ///< G(eta) trace
  Eigen::MatrixXd dno_trace;   ///< G(eta) cos_k
  Eigen::MatrixXd dno_shape;   ///< G_eta(cos_k) trace
  double probe_dy = 0.0;       ///< (H(eta) trace)_y at the probe
  Eigen::RowVectorXd probe_trace;  ///< (H(eta) cos_k)_y at the probe
  Eigen::RowVectorXd probe_shape;  ///< (H_eta(cos_k) trace)_y at the probe
};

class LayerSolver {
 public:
  LayerSolver(const CollocationGrid& grid, LayerSolverOptions options);

  const CollocationGrid& grid() const noexcept;
  const LayerSolverOptions& options() const noexcept { return options_; }

  /// Throws DegenerateStrip when the layer is thinner than gap_floor anywhere, and
  /// LinearSolveFailure if the collocation system cannot be solved.
  LayerSolution solve(const LayerGeometry& geom, const EvenField& trace) const;
  EvenField dno(const LayerGeometry& geom, const EvenField& trace) const;
  double interior_dy(const LayerGeometry& geom, const EvenField& trace, Point p) const;

  /// Central finite difference in the interface direction eta*, step
  /// shape_step * depth / max(1, |eta*|_inf) unless `step` is given.
  EvenField shape_derivative_dno(const LayerGeometry& geom, const EvenField& trace,
                                 const EvenField& direction,
                                 std::optional<double> step = std::nullopt) const;
  double shape_derivative_interior_dy(const LayerGeometry& geom, const EvenField& trace,
                                      const EvenField& direction, Point p,
                                      std::optional<double> step = std::nullopt) const;

  /// Exact derivatives of the discrete operators (linearized collocation solves).
  LayerLinearization linearize(const LayerGeometry& geom, const EvenField& trace,
                               std::optional<Point> probe = std::nullopt) const;

 private:
  double shape_step_for(const LayerGeometry& geom, const EvenField& direction,
                        std::optional<double> step) const;

  std::shared_ptr<const detail::StripBasis> basis_;
  LayerSolverOptions options_;
};

}  // namespace vw
