#pragma once

// Newton correction and pseudo-arclength continuation.
//
// The stepping machinery works on any ContinuationProblem F(x, eps) = 0; the
// wave-specific driver continue_branch adds diagnostics, guard handling and the
// termination classification.

#include "vwave/wave_system.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace vw {

struct ContinuationSettings {
  double ds0 = 5e-4;
  double ds_min = 1e-6;
  double ds_max = 2e-3;
  double newton_tol = 1e-10;
  int newton_max = 8;
  int max_steps = 40;
  double norm_cap = 1e3;
  double grow = 1.3;       ///< step growth after fast convergence
  int fast_iterations = 3;  ///< corrections at or below this count as fast

  /// Throws ValidationError.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Generic problem interface

struct ProblemLinearization {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;  ///< dF/dx
  Eigen::VectorXd d_eps;     ///< dF/deps
};

class ContinuationProblem {
 public:
  virtual ~ContinuationProblem() = default;
  virtual int dimension() const = 0;
  virtual Eigen::VectorXd residual(const Eigen::VectorXd& x, double eps) const = 0;
  virtual ProblemLinearization linearize(const Eigen::VectorXd& x, double eps) const = 0;
  virtual double residual_norm(const Eigen::VectorXd& r) const { return r.norm(); }
  /// Diagonal weights of the arclength inner product over (x, eps).
  virtual Eigen::VectorXd arclength_weights() const {
    return Eigen::VectorXd::Ones(dimension() + 1);
  }
};

/// WaveSystem viewed as a continuation problem in packed coordinates.
class WaveProblem final : public ContinuationProblem {
 public:
  explicit WaveProblem(const WaveSystem& system) : system_(&system) {}
  const WaveSystem& system() const noexcept { return *system_; }

  int dimension() const override { return system_->dimension(); }
  Eigen::VectorXd residual(const Eigen::VectorXd& x, double eps) const override;
  ProblemLinearization linearize(const Eigen::VectorXd& x, double eps) const override;
  double residual_norm(const Eigen::VectorXd& r) const override;
  /// H^1 weights w_k (1 + kappa_k^2) for the fields, unit weights for c and eps.
  Eigen::VectorXd arclength_weights() const override;

 private:
  const WaveSystem* system_;
};

struct NewtonResult {
  Eigen::VectorXd x;
  double eps = 0.0;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Damped Newton at fixed eps (step halving on residual increase, at most 5 halvings).
/// Throws NewtonFailure; guard errors at the initial guess propagate.
NewtonResult newton_solve(const ContinuationProblem& problem, const Eigen::VectorXd& guess,
                          double eps, const ContinuationSettings& settings);

struct PathPoint {
  Eigen::VectorXd x;
  double eps = 0.0;
  Eigen::VectorXd tangent;  ///< unit in the arclength norm, size dimension() + 1
  ProblemLinearization lin;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Unit null vector of [dF/dx | dF/deps], oriented along `previous`.
/// Throws SingularBorderedSystem.
Eigen::VectorXd tangent(const ProblemLinearization& lin, const Eigen::VectorXd& previous,
                        const Eigen::VectorXd& weights);

/// Starting point of a path at a known solution. The first tangent has d eps of the
/// sign of `direction`.
PathPoint start_path(const ContinuationProblem& problem, const Eigen::VectorXd& x, double eps,
                     int direction);

/// Predictor along the tangent followed by the bordered Newton corrector.
/// Throws NewtonFailure or whatever the problem throws at the predicted point.
PathPoint arclength_step(const ContinuationProblem& problem, const PathPoint& from, double ds,
                         const ContinuationSettings& settings);

/// Newton iteration at fixed eps with one fixed, possibly approximate, Jacobian.
/// Converges linearly when the Jacobian is close. Throws NewtonFailure once the
/// residual stops decreasing or after `max_iterations`.
NewtonResult chord_solve(const ContinuationProblem& problem, const Eigen::VectorXd& guess,
                         double eps, const Eigen::MatrixXd& jacobian, double tol,
                         int max_iterations);

/// Fixed-step path: start_path then `steps` arclength steps of length ds.
std::vector<PathPoint> trace_path(const ContinuationProblem& problem, const Eigen::VectorXd& x,
                                  double eps, int direction, int steps, double ds,
                                  const ContinuationSettings& settings);

/// F(x, lambda) = (x0^2 - lambda, x1 - x0^3). The solution curve x0^2 = lambda
/// has one fold at the origin, where det dF/dx = 2 x0 changes sign.
class FoldProblem final : public ContinuationProblem {
 public:
  int dimension() const override { return 2; }
  Eigen::VectorXd residual(const Eigen::VectorXd& x, double lambda) const override;
  ProblemLinearization linearize(const Eigen::VectorXd& x, double lambda) const override;
};

/// Sign of det J from a pivoted LU; 0 when sigma_min < 1e-12 sigma_max.
struct DeterminantInfo {
  int sign = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};
DeterminantInfo determinant_info(const Eigen::MatrixXd& j);

/// Indices i with signs[i] != signs[i-1]. Zero entries are treated as flagged
/// points, not as sign changes: comparison skips over them.
std::vector<std::size_t> parity_monitor(const std::vector<int>& signs);

// ---------------------------------------------------------------------------
// Wave branches

enum class Alternative {
  unbounded,
  interface_touches_boundary,
  vortex_near_interface,
  max_steps_reached,
  newton_failure
};

const char* to_string(Alternative a);

struct PointDiagnostics {
  double residual_norm = 0.0;
  int newton_iterations = 0;
  double sigma_min = 0.0;
  int det_sign = 0;
  double eta_sobolev = 0.0;  ///< |eta|_{H^3}
  double eta_sup = 0.0;
  double eta_at_zero = 0.0;
  double min_vortex_distance = 0.0;
  double norm = 0.0;  ///< |(state, eps)| used against norm_cap
};

struct BranchPoint {
  int step = 0;
  WaveState state;
  double eps = 0.0;
  PointDiagnostics diagnostics;
};

struct Branch {
  int direction = 1;
  std::vector<BranchPoint> points;
  Alternative termination = Alternative::max_steps_reached;
  std::string reason;
};

/// What was observed when the continuation stopped.
struct StopEvidence {
  double min_vortex_distance = std::numeric_limits<double>::infinity();
  double eta_sup = 0.0;
  double norm = 0.0;
  bool vortex_guard = false;     ///< VortexTooClose / PointOutsideLayer / SingularEvaluation seen
  bool boundary_guard = false;   ///< DegenerateStrip seen
  bool newton_failed = false;
};

/// Precedence: VortexNearInterface > InterfaceTouchesBoundary > Unbounded >
/// NewtonFailure > MaxStepsReached.
Alternative classify_termination(const StopEvidence& evidence, const ContinuationSettings& settings,
                                 const Guards& guards, double depth);

/// Exit status for a finished branch: 0 max steps, 3 Newton failure, 4 guard-triggered.
int exit_code(Alternative a);

/// sqrt(|eta|_{H3}^2 + |xi_bar|_{H3}^2 + |xi|_{H3}^2 + c^2 + eps^2)
double state_norm(const WaveState& state, double eps);

PointDiagnostics diagnose(const WaveSystem& system, const WaveState& state, double eps,
                          const Eigen::MatrixXd& jacobian, double residual_norm, int iterations);

/// Solution of `fine` at fixed eps, started from `state` solved on `coarse`.
/// The coarse coefficients are zero-padded and the chord Jacobian is the coarse
/// Jacobian on the shared modes completed by the flat multipliers of `fine`.
NewtonResult refine_solution(const WaveSystem& coarse, const WaveState& state, double eps,
                             const Eigen::MatrixXd& coarse_jacobian, const WaveSystem& fine,
                             double tol, int max_iterations = 40);

using PointCallback = std::function<void(const BranchPoint&)>;

/// Pseudo-arclength continuation from the origin in the direction sign(direction) of eps.
/// Never throws for numerical trouble: failures end the branch with a classified Alternative.
Branch continue_branch(const WaveSystem& system, const ContinuationSettings& settings,
                       int direction, const PointCallback& on_point = {});

}  // namespace vw
