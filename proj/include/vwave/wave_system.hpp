#pragma once

// The steady two-layer system F(eta, xi_bar, xi, c; eps) = 0.
//
//   F1  Bernoulli jump across the interface (projected on cosine modes 0..N)
//   F2  xi_bar + eps phi_bar + c eta
//   F3  xi + eps phi + c eta
//   F4  c + (H(eta) xi)_y(z) - c1 eps
//
// Unknown vector layout: [eta_0..eta_N, xi_bar_0..xi_bar_N, xi_0..xi_N, c];
// residual rows follow the same block order (F1, F2, F3, F4).

#include "vwave/layer.hpp"
#include "vwave/spectral.hpp"
#include "vwave/vortex.hpp"

#include <Eigen/Dense>
#include <Eigen/LU>

namespace vw {

struct PhysicalParameters {
  double rho = 1.0;
  double rho_bar = 0.9;
  double gravity = 1.0;
  double surface_tension = 0.1;
  double depth = 1.0;
  double half_period = pi;
  double bernoulli = 0.0;  ///< Q; zero keeps the origin a solution
  VortexPair pair{};
  KernelChoice kernel = KernelChoice::periodized;

  /// Throws ValidationError on non-physical values.
  void validate() const;
};

struct Discretization {
  int n_modes = 64;   ///< N
  int vertical = 32;  ///< M
};

/// Absolute guard lengths (defaults scale with the depth).
struct Guards {
  double vortex_distance = 0.05;
  double gap_floor = 0.02;
  double singular_radius = 1e-12;

  static Guards for_depth(double depth) {
    return {0.05 * depth, 0.02 * depth, 1e-12 * depth};
  }
};

struct WaveState {
  EvenField eta, xi_bar, xi;
  double c = 0.0;

  static WaveState zero(const CollocationGrid& grid);
  Eigen::VectorXd pack() const;
  static WaveState unpack(const CollocationGrid& grid, const Eigen::VectorXd& x);
};

struct Residual {
  EvenField r1, r2, r3;
  double r4 = 0.0;

  Eigen::VectorXd pack() const;
  static Residual unpack(const CollocationGrid& grid, const Eigen::VectorXd& v);
  /// sqrt(|r1|^2 + |r2|^2 + |r3|^2 + r4^2) with L2 norms over one period.
  double norm() const;
  double max_block_norm() const;
};

enum class JacobianMode { analytic, finite_difference };

/// Residual, Jacobian and eps-derivative at one state, sharing the layer factorizations.
struct SystemLinearization {
  Residual residual;
  Eigen::MatrixXd jacobian;
  Eigen::VectorXd d_eps;
};

class WaveSystem {
 public:
  WaveSystem(PhysicalParameters params, Discretization disc, Guards guards);
  WaveSystem(PhysicalParameters params, Discretization disc)
      : WaveSystem(params, disc, Guards::for_depth(params.depth)) {}

  const PhysicalParameters& params() const noexcept { return params_; }
  const Discretization& discretization() const noexcept { return disc_; }
  const Guards& guards() const noexcept { return guards_; }
  const CollocationGrid& grid() const noexcept { return grid_; }
  const LayerSolver& layers() const noexcept { return layers_; }
  int dimension() const noexcept { return 3 * (grid_.n_modes() + 1) + 1; }
  /// K_y(z - z_bar)
  double c1() const noexcept { return c1_; }

  /// Throws VortexTooClose or DegenerateStrip if the state leaves the admissible set.
  void check_admissible(const WaveState& state) const;

  Residual residual(const WaveState& state, double eps) const;
  Eigen::MatrixXd jacobian(const WaveState& state, double eps,
                           JacobianMode mode = JacobianMode::analytic) const;
  Residual d_eps(const WaveState& state, double eps) const;
  SystemLinearization linearize(const WaveState& state, double eps) const;

  /// Closed-form Jacobian at the origin, assembled from Fourier multipliers.
  Eigen::MatrixXd flat_linearization() const;
  /// Sign of det flat_linearization() from its block-triangular structure: the
  /// product of the signs of the eta multipliers (rho_bar - rho) g - sigma kappa_k^2.
  int flat_determinant_sign() const;

  /// (H(eta) xi)_x(z) + eps (phi_H)_x(z); zero by symmetry for axis vortices.
  double vertical_equilibrium(const WaveState& state, double eps) const;

  double fd_step = 1e-6;

 private:
  PhysicalParameters params_;
  Discretization disc_;
  Guards guards_;
  CollocationGrid grid_;
  LayerSolver layers_;
  double c1_ = 0.0;
  Eigen::MatrixXd synthesis_, analysis_, dx_synthesis_, dxx_synthesis_;
};

}  // namespace vw
