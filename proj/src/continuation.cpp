#include "vwave/continuation.hpp"

#include "vwave/errors.hpp"

#include <fmt/format.h>

#include <Eigen/SVD>

#include <cmath>

namespace vw {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void ContinuationSettings::validate() const {
  if (!(ds_min > 0.0 && ds_min <= ds0 && ds0 <= ds_max))
    throw ValidationError(fmt::format("0 < ds_min ≤ ds0 ≤ ds_max required (got {}, {}, {})", ds_min,
                                      ds0, ds_max));
  if (!(newton_tol > 0.0)) throw ValidationError("newton_tol must be positive");
  if (newton_max < 1) throw ValidationError("newton_max must be at least 1");
  if (max_steps < 0) throw ValidationError("max_steps must be non-negative");
  if (!(norm_cap > 0.0)) throw ValidationError("norm_cap must be positive");
  if (!(grow >= 1.0)) throw ValidationError("step growth factor must be ≥ 1");
}

// ---------------------------------------------------------------------------

VectorXd WaveProblem::residual(const VectorXd& x, double eps) const {
  return system_->residual(WaveState::unpack(system_->grid(), x), eps).pack();
}

ProblemLinearization WaveProblem::linearize(const VectorXd& x, double eps) const {
  SystemLinearization lin = system_->linearize(WaveState::unpack(system_->grid(), x), eps);
  return {lin.residual.pack(), std::move(lin.jacobian), std::move(lin.d_eps)};
}

double WaveProblem::residual_norm(const VectorXd& r) const {
  return Residual::unpack(system_->grid(), r).norm();
}

VectorXd WaveProblem::arclength_weights() const {
  const CollocationGrid& g = system_->grid();
  const int nx = g.n_modes() + 1;
  VectorXd w(3 * nx + 2);
  for (int k = 0; k < nx; ++k) {
    const double kappa = g.wavenumber(k);
    const double wk = (k == 0 ? 2.0 : 1.0) * g.half_period() * (1.0 + kappa * kappa);
    w[k] = w[nx + k] = w[2 * nx + k] = wk;
  }
  w[3 * nx] = 1.0;
  w[3 * nx + 1] = 1.0;
  return w;
}

// ---------------------------------------------------------------------------

namespace {

using Lu = Eigen::PartialPivLU<MatrixXd>;

Lu checked_lu(const MatrixXd& m, const char* what) {
  Lu lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14) || !std::isfinite(rcond))
    throw SingularBorderedSystem(fmt::format("{} is numerically singular (rcond {:.3e})", what, rcond));
  return lu;
}

MatrixXd bordered(const ProblemLinearization& lin, const VectorXd& row) {
  const Eigen::Index n = lin.jacobian.rows();
  MatrixXd b(n + 1, n + 1);
  b.topLeftCorner(n, n) = lin.jacobian;
  b.topRightCorner(n, 1) = lin.d_eps;
  b.bottomRows(1) = row.transpose();
  return b;
}

// Evaluation that maps any solver error to "no decrease" during damping.
struct Trial {
  VectorXd r;
  double norm = std::numeric_limits<double>::infinity();
};

constexpr double poor_contraction = 0.1;
constexpr int max_halvings = 5;

}  // namespace

NewtonResult newton_solve(const ContinuationProblem& problem, const VectorXd& guess, double eps,
                          const ContinuationSettings& settings) {
  VectorXd x = guess;
  VectorXd r = problem.residual(x, eps);
  double nr = problem.residual_norm(r);
  if (nr <= settings.newton_tol) return {x, eps, 0, nr};

  Lu lu = checked_lu(problem.linearize(x, eps).jacobian, "Jacobian");
  bool stale = false;
  int it = 0;
  while (nr > settings.newton_tol) {
    if (it >= settings.newton_max)
      throw NewtonFailure(fmt::format("no convergence in {} iterations (residual {:.3e})", it, nr));
    const VectorXd delta = -lu.solve(r);
    double lambda = 1.0;
    Trial best;
    VectorXd xt;
    for (int h = 0; h <= max_halvings; ++h, lambda *= 0.5) {
      xt = x + lambda * delta;
      try {
        best.r = problem.residual(xt, eps);
        best.norm = problem.residual_norm(best.r);
      } catch (const Error&) {
        best.norm = std::numeric_limits<double>::infinity();
      }
      if (best.norm < nr) break;
    }
    ++it;
    if (!(best.norm < nr)) {
      if (!stale)
        throw NewtonFailure(fmt::format("damped Newton step failed to reduce residual {:.3e}", nr));
      lu = checked_lu(problem.linearize(x, eps).jacobian, "Jacobian");
      stale = false;
      continue;
    }
    const double previous = nr;
    x = std::move(xt);
    r = std::move(best.r);
    nr = best.norm;
    if (nr > settings.newton_tol && nr > poor_contraction * previous) {
      lu = checked_lu(problem.linearize(x, eps).jacobian, "Jacobian");
      stale = false;
    } else {
      stale = true;
    }
  }
  return {x, eps, it, nr};
}

VectorXd tangent(const ProblemLinearization& lin, const VectorXd& previous, const VectorXd& weights) {
  const Eigen::Index n = lin.jacobian.rows();
  const VectorXd row = previous.cwiseProduct(weights);
  const Lu lu = checked_lu(bordered(lin, row), "bordered tangent system");
  VectorXd rhs = VectorXd::Zero(n + 1);
  rhs[n] = 1.0;
  VectorXd t = lu.solve(rhs);
  if (!t.allFinite()) throw SingularBorderedSystem("tangent solve produced non-finite values");
  t /= std::sqrt(t.dot(t.cwiseProduct(weights)));
  if (t.dot(row) < 0.0) t = -t;
  return t;
}

PathPoint start_path(const ContinuationProblem& problem, const VectorXd& x, double eps,
                     int direction) {
  PathPoint p;
  p.x = x;
  p.eps = eps;
  p.lin = problem.linearize(x, eps);
  p.residual_norm = problem.residual_norm(problem.residual(x, eps));
  VectorXd seed = VectorXd::Zero(problem.dimension() + 1);
  seed[problem.dimension()] = direction >= 0 ? 1.0 : -1.0;
  p.tangent = tangent(p.lin, seed, problem.arclength_weights());
  return p;
}

PathPoint arclength_step(const ContinuationProblem& problem, const PathPoint& from, double ds,
                         const ContinuationSettings& settings) {
  const int n = problem.dimension();
  const VectorXd weights = problem.arclength_weights();
  const VectorXd row = from.tangent.cwiseProduct(weights);
  VectorXd y0(n + 1);
  y0 << from.x, from.eps;

  VectorXd y = y0 + ds * from.tangent;
  auto constraint = [&](const VectorXd& v) { return row.dot(v - y0) - ds; };
  auto merit = [](double fnorm, double g) { return std::hypot(fnorm, g); };

  // Guard errors at the predicted point propagate to the caller.
  VectorXd r = problem.residual(y.head(n), y[n]);
  double nr = problem.residual_norm(r);
  double g = constraint(y);
  double m = merit(nr, g);

  Lu lu = checked_lu(bordered(from.lin, row), "bordered Jacobian");
  bool stale = true;
  int it = 0;
  while (nr > settings.newton_tol || std::abs(g) > settings.newton_tol) {
    if (it >= settings.newton_max)
      throw NewtonFailure(fmt::format("corrector did not converge in {} iterations (residual {:.3e})", it, nr));
    VectorXd rhs(n + 1);
    rhs << r, g;
    const VectorXd delta = -lu.solve(rhs);
    double lambda = 1.0;
    Trial best;
    double best_g = 0.0;
    VectorXd yt;
    for (int h = 0; h <= max_halvings; ++h, lambda *= 0.5) {
      yt = y + lambda * delta;
      best_g = constraint(yt);
      try {
        best.r = problem.residual(yt.head(n), yt[n]);
        best.norm = problem.residual_norm(best.r);
      } catch (const Error&) {
        best.norm = std::numeric_limits<double>::infinity();
      }
      if (merit(best.norm, best_g) < m) break;
    }
    ++it;
    const double mt = merit(best.norm, best_g);
    if (!(mt < m)) {
      if (!stale)
        throw NewtonFailure(fmt::format("damped corrector failed to reduce residual {:.3e}", nr));
      lu = checked_lu(bordered(problem.linearize(y.head(n), y[n]), row), "bordered Jacobian");
      stale = false;
      continue;
    }
    y = std::move(yt);
    r = std::move(best.r);
    nr = best.norm;
    g = best_g;
    const double previous = m;
    m = mt;
    const bool done = nr <= settings.newton_tol && std::abs(g) <= settings.newton_tol;
    if (!done && m > poor_contraction * previous) {
      lu = checked_lu(bordered(problem.linearize(y.head(n), y[n]), row), "bordered Jacobian");
      stale = false;
    } else {
      stale = true;
    }
  }

  PathPoint out;
  out.x = y.head(n);
  out.eps = y[n];
  out.lin = problem.linearize(out.x, out.eps);
  out.tangent = tangent(out.lin, from.tangent, weights);
  out.iterations = it;
  out.residual_norm = nr;
  return out;
}

NewtonResult chord_solve(const ContinuationProblem& problem, const VectorXd& guess, double eps,
                         const MatrixXd& jacobian, double tol, int max_iterations) {
  const Lu lu = checked_lu(jacobian, "chord Jacobian");
  VectorXd x = guess;
  VectorXd r = problem.residual(x, eps);
  double nr = problem.residual_norm(r);
  int it = 0;
  while (nr > tol) {
    if (it >= max_iterations)
      throw NewtonFailure(fmt::format("chord iteration did not converge in {} steps (residual {:.3e})", it, nr));
    const VectorXd xt = x - lu.solve(r);
    VectorXd rt = problem.residual(xt, eps);
    const double nt = problem.residual_norm(rt);
    ++it;
    if (!(nt < nr))
      throw NewtonFailure(fmt::format("chord iteration stalled at residual {:.3e}", nr));
    x = xt;
    r = std::move(rt);
    nr = nt;
  }
  return {x, eps, it, nr};
}

std::vector<PathPoint> trace_path(const ContinuationProblem& problem, const VectorXd& x, double eps,
                                  int direction, int steps, double ds,
                                  const ContinuationSettings& settings) {
  std::vector<PathPoint> path{start_path(problem, x, eps, direction)};
  for (int i = 0; i < steps; ++i) path.push_back(arclength_step(problem, path.back(), ds, settings));
  return path;
}

VectorXd FoldProblem::residual(const VectorXd& x, double lambda) const {
  return VectorXd{{x[0] * x[0] - lambda, x[1] - x[0] * x[0] * x[0]}};
}

ProblemLinearization FoldProblem::linearize(const VectorXd& x, double lambda) const {
  ProblemLinearization lin;
  lin.residual = residual(x, lambda);
  lin.jacobian = MatrixXd{{2.0 * x[0], 0.0}, {-3.0 * x[0] * x[0], 1.0}};
  lin.d_eps = VectorXd{{-1.0, 0.0}};
  return lin;
}

DeterminantInfo determinant_info(const MatrixXd& j) {
  DeterminantInfo info;
  const Lu lu(j);
  int sign = lu.permutationP().determinant();
  const MatrixXd& u = lu.matrixLU();
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    if (u(i, i) < 0.0) sign = -sign;
    if (u(i, i) == 0.0) sign = 0;
  }
  const Eigen::BDCSVD<MatrixXd> svd(j);
  const VectorXd& s = svd.singularValues();
  info.sigma_max = s.size() > 0 ? s[0] : 0.0;
  info.sigma_min = s.size() > 0 ? s[s.size() - 1] : 0.0;
  info.sign = info.sigma_min < 1e-12 * info.sigma_max ? 0 : sign;
  return info;
}

std::vector<std::size_t> parity_monitor(const std::vector<int>& signs) {
  std::vector<std::size_t> changes;
  int last = 0;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] == 0) continue;
    if (last != 0 && signs[i] != last) changes.push_back(i);
    last = signs[i];
  }
  return changes;
}

// ---------------------------------------------------------------------------

const char* to_string(Alternative a) {
  switch (a) {
    case Alternative::unbounded: return "Unbounded";
    case Alternative::interface_touches_boundary: return "InterfaceTouchesBoundary";
    case Alternative::vortex_near_interface: return "VortexNearInterface";
    case Alternative::max_steps_reached: return "MaxStepsReached";
    case Alternative::newton_failure: return "NewtonFailure";
  }
  return "?";
}

Alternative classify_termination(const StopEvidence& e, const ContinuationSettings& settings,
                                 const Guards& guards, double depth) {
  if (e.vortex_guard || e.min_vortex_distance < guards.vortex_distance)
    return Alternative::vortex_near_interface;
  if (e.boundary_guard || depth - e.eta_sup < guards.gap_floor)
    return Alternative::interface_touches_boundary;
  if (e.norm > settings.norm_cap) return Alternative::unbounded;
  if (e.newton_failed) return Alternative::newton_failure;
  return Alternative::max_steps_reached;
}

int exit_code(Alternative a) {
  switch (a) {
    case Alternative::max_steps_reached: return 0;
    case Alternative::newton_failure: return 3;
    default: return 4;
  }
}

double state_norm(const WaveState& s, double eps) {
  const double a = sobolev_norm(s.eta, 3);
  const double b = sobolev_norm(s.xi_bar, 3);
  const double c = sobolev_norm(s.xi, 3);
  return std::sqrt(a * a + b * b + c * c + s.c * s.c + eps * eps);
}

PointDiagnostics diagnose(const WaveSystem& system, const WaveState& state, double eps,
                          const MatrixXd& jacobian, double residual_norm, int iterations) {
  PointDiagnostics d;
  d.residual_norm = residual_norm;
  d.newton_iterations = iterations;
  const DeterminantInfo det = determinant_info(jacobian);
  d.sigma_min = det.sigma_min;
  d.det_sign = det.sign;
  d.eta_sobolev = sobolev_norm(state.eta, 3);
  d.eta_sup = sup_norm(state.eta);
  d.eta_at_zero = state.eta(0.0);
  d.min_vortex_distance = min_vortex_distance(state.eta, system.params().pair);
  d.norm = state_norm(state, eps);
  return d;
}

NewtonResult refine_solution(const WaveSystem& coarse, const WaveState& state, double eps,
                             const MatrixXd& coarse_jacobian, const WaveSystem& fine, double tol,
                             int max_iterations) {
  const int nc = coarse.grid().n_modes() + 1;
  const int nf = fine.grid().n_modes() + 1;
  if (nf < nc) throw ValidationError("refine_solution needs a finer grid");

  // Coarse index -> fine index: three field blocks, then c.
  auto map = [&](int i) { return i == 3 * nc ? 3 * nf : (i / nc) * nf + i % nc; };
  MatrixXd j = fine.flat_linearization();
  for (int col = 0; col <= 3 * nc; ++col)
    for (int row = 0; row <= 3 * nc; ++row) j(map(row), map(col)) = coarse_jacobian(row, col);

  VectorXd guess = VectorXd::Zero(fine.dimension());
  const VectorXd xc = state.pack();
  for (int i = 0; i <= 3 * nc; ++i) guess[map(i)] = xc[i];
  const WaveProblem problem(fine);
  return chord_solve(problem, guess, eps, j, tol, max_iterations);
}

namespace {

void note_geometry(StopEvidence& ev, const WaveSystem& system, const VectorXd& y) {
  const WaveState s = WaveState::unpack(system.grid(), y.head(system.dimension()));
  ev.min_vortex_distance = std::min(ev.min_vortex_distance, min_vortex_distance(s.eta, system.params().pair));
  ev.eta_sup = std::max(ev.eta_sup, sup_norm(s.eta));
}

}  // namespace

Branch continue_branch(const WaveSystem& system, const ContinuationSettings& settings,
                       int direction, const PointCallback& on_point) {
  settings.validate();
  Branch branch;
  branch.direction = direction >= 0 ? 1 : -1;
  const WaveProblem problem(system);
  const Guards& guards = system.guards();
  const double depth = system.params().depth;

  auto record = [&](const PathPoint& p, int step) {
    BranchPoint bp;
    bp.step = step;
    bp.state = WaveState::unpack(system.grid(), p.x);
    bp.eps = p.eps;
    bp.diagnostics = diagnose(system, bp.state, p.eps, p.lin.jacobian, p.residual_norm, p.iterations);
    branch.points.push_back(bp);
    if (on_point) on_point(branch.points.back());
    return bp.diagnostics;
  };

  StopEvidence ev;
  PathPoint current;
  try {
    current = start_path(problem, VectorXd::Zero(system.dimension()), 0.0, branch.direction);
  } catch (const Error& e) {
    ev.newton_failed = true;
    ev.vortex_guard = dynamic_cast<const VortexTooClose*>(&e) || dynamic_cast<const PointOutsideLayer*>(&e) ||
                      dynamic_cast<const SingularEvaluation*>(&e);
    ev.boundary_guard = dynamic_cast<const DegenerateStrip*>(&e) != nullptr;
    branch.termination = classify_termination(ev, settings, guards, depth);
    branch.reason = fmt::format("origin rejected: {}", e.what());
    return branch;
  }
  record(current, 0);

  double ds = settings.ds0;
  int step = 0;
  while (step < settings.max_steps) {
    VectorXd predicted(system.dimension() + 1);
    predicted << current.x, current.eps;
    predicted += ds * current.tangent;
    try {
      PathPoint next = arclength_step(problem, current, ds, settings);
      ++step;
      const PointDiagnostics d = record(next, step);
      ev = StopEvidence{};
      if (next.iterations <= settings.fast_iterations) ds = std::min(ds * settings.grow, settings.ds_max);
      current = std::move(next);
      if (d.norm > settings.norm_cap) {
        ev.norm = d.norm;
        ev.eta_sup = d.eta_sup;
        ev.min_vortex_distance = d.min_vortex_distance;
        branch.termination = classify_termination(ev, settings, guards, depth);
        branch.reason = fmt::format("state norm {:.6e} exceeds norm_cap {:.6e}", d.norm, settings.norm_cap);
        return branch;
      }
      continue;
    } catch (const VortexTooClose& e) {
      ev.vortex_guard = true;
      branch.reason = e.what();
    } catch (const PointOutsideLayer& e) {
      ev.vortex_guard = true;
      branch.reason = e.what();
    } catch (const SingularEvaluation& e) {
      ev.vortex_guard = true;
      branch.reason = e.what();
    } catch (const DegenerateStrip& e) {
      ev.boundary_guard = true;
      branch.reason = e.what();
    } catch (const Error& e) {
      ev.newton_failed = true;
      branch.reason = e.what();
    }
    note_geometry(ev, system, predicted);
    ds *= 0.5;
    if (ds < settings.ds_min) {
      branch.termination = classify_termination(ev, settings, guards, depth);
      branch.reason = fmt::format("step size fell below ds_min after: {}", branch.reason);
      return branch;
    }
  }
  branch.termination = Alternative::max_steps_reached;
  branch.reason = fmt::format("{} steps taken", step);
  return branch;
}

}  // namespace vw
