#pragma once

// Point-vortex stream functions. The lower layer carries a vortex at z, the upper
// layer a phantom vortex of the same strength at z_bar. With the kernel K the
// interface stream functions are
//
//   phi     = K(. - z) - K(. - z_bar)       (lower layer)
//   phi_bar = K(. - z_bar) - K(. - z)       (upper layer)
//
// and the strength epsilon multiplies both from outside this module.

#include "vwave/spectral.hpp"

#include <Eigen/Dense>

#include <string>

namespace vw {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }

struct VortexPair {
  Point lower{0.0, -0.5};  ///< z, inside the lower layer
  Point upper{0.0, 0.5};   ///< z_bar, the phantom vortex in the upper layer

  /// Throws ValidationError unless -d < y0 < ybar0 < d and both centers sit on x = 0.
  void validate(double depth) const;
};

enum class KernelChoice { free_space, periodized };

const char* to_string(KernelChoice k);
KernelChoice kernel_from_string(const std::string& name);

/// Kernel value with first and second derivatives.
struct KernelJet {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dxx = 0.0;
  double dxy = 0.0;
  double dyy = 0.0;
};

inline constexpr double default_singular_radius = 1e-12;

/// (1/4pi) log(x^2 + y^2). Throws SingularEvaluation when |p| < tol_sing.
double gamma(Point p, double tol_sing = default_singular_radius);
/// (x, y) / (2 pi (x^2 + y^2))
Point gamma_grad(Point p, double tol_sing = default_singular_radius);

/// (1/4pi) log(cosh(pi y/L) - cos(pi x/L)), 2L-periodic in x. Throws SingularEvaluation
/// within tol_sing of the lattice {(2Lm, 0)}.
double periodic_gamma(Point p, double half_period, double tol_sing = default_singular_radius);
Point periodic_gamma_grad(Point p, double half_period, double tol_sing = default_singular_radius);

KernelJet kernel_jet(KernelChoice kernel, Point p, double half_period,
                     double tol_sing = default_singular_radius);

/// Vortex stream functions and derivatives sampled along the interface nodes.
/// Second derivatives feed the Jacobian (motion of the sampling point with eta).
struct VortexTraces {
  Eigen::VectorXd phi, phi_x, phi_y, phi_xy, phi_yy;
  Eigen::VectorXd phi_bar, phi_bar_x, phi_bar_y, phi_bar_xy, phi_bar_yy;
  double min_distance = 0.0;  ///< smallest node distance to either vortex center
};

struct VortexGuard {
  double min_distance = 0.05;  ///< delta_guard
  double singular_radius = default_singular_radius;
};

/// Traces at the points (xs[j], ys[j]). Throws VortexTooClose if any point is within
/// the guard distance of a center, or if the interface has passed to the wrong side
/// of a vortex.
VortexTraces vortex_traces_at(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                              const VortexPair& pair, KernelChoice kernel, double half_period,
                              const VortexGuard& guard);

/// Traces on the full 2N-node grid at (x_j, eta(x_j)).
VortexTraces vortex_traces(const EvenField& eta, const VortexPair& pair, KernelChoice kernel,
                           const CollocationGrid& grid, const VortexGuard& guard);

/// Smallest distance from the interface nodes to either vortex center (no guard).
double min_vortex_distance(const EvenField& eta, const VortexPair& pair);

/// K_y(z - z_bar)
double c1(const VortexPair& pair, KernelChoice kernel, double half_period,
          double tol_sing = default_singular_radius);

}  // namespace vw
