#include "vwave/wave_system.hpp"

#include "vwave/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace vw {

namespace {

using Eigen::ArrayXd;
using Eigen::ArrayXXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Interface quantities sampled at a set of nodes.
struct Nodal {
  ArrayXd eta, etax, etaxx, xix, xibx, g, gb;
  VortexTraces v;
};

// Velocity combinations entering the Bernoulli jump.
struct Kinematics {
  ArrayXd metric;  // 1 + eta_x^2
  ArrayXd a, b, ab, bb;
  ArrayXd pl, ql, pu, qu;
  ArrayXd bracket;
};

Kinematics kinematics(const Nodal& n, double eps, const PhysicalParameters& p) {
  Kinematics k;
  k.metric = 1.0 + n.etax.square();
  k.a = (n.g + n.etax * n.xix) / k.metric;
  k.b = (n.xix - n.etax * n.g) / k.metric;
  k.ab = (n.gb + n.etax * n.xibx) / k.metric;
  k.bb = (n.xibx - n.etax * n.gb) / k.metric;
  k.pl = k.a + eps * n.v.phi_y.array();
  k.ql = k.b + eps * n.v.phi_x.array();
  k.pu = k.ab + eps * n.v.phi_bar_y.array();
  k.qu = k.bb + eps * n.v.phi_bar_x.array();
  k.bracket = p.rho_bar * k.pu - p.rho * k.pl;
  return k;
}

ArrayXd curvature(const Nodal& n, const Kinematics& k) {
  return n.etaxx / k.metric.pow(1.5);
}

ArrayXd bernoulli(const Nodal& n, const Kinematics& k, double c, const PhysicalParameters& p) {
  return c * k.bracket + 0.5 * p.rho_bar * (k.pu.square() + k.qu.square()) -
         0.5 * p.rho * (k.pl.square() + k.ql.square()) +
         (p.rho_bar - p.rho) * p.gravity * n.eta + p.surface_tension * curvature(n, k) - p.bernoulli;
}

// Size of the individual terms of the Bernoulli jump, for relative parity checks.
ArrayXd bernoulli_scale(const Nodal& n, const Kinematics& k, double c, const PhysicalParameters& p) {
  return std::abs(c) * (p.rho_bar * k.pu.abs() + p.rho * k.pl.abs()) +
         0.5 * p.rho_bar * (k.pu.square() + k.qu.square()) +
         0.5 * p.rho * (k.pl.square() + k.ql.square()) +
         std::abs((p.rho_bar - p.rho) * p.gravity) * n.eta.abs() +
         p.surface_tension * curvature(n, k).abs() + std::abs(p.bernoulli);
}

ArrayXd bernoulli_eps(const Nodal& n, const Kinematics& k, double c, const PhysicalParameters& p) {
  const ArrayXd vy = n.v.phi_y.array(), vx = n.v.phi_x.array();
  const ArrayXd vby = n.v.phi_bar_y.array(), vbx = n.v.phi_bar_x.array();
  return c * (p.rho_bar * vby - p.rho * vy) + p.rho_bar * (k.pu * vby + k.qu * vbx) -
         p.rho * (k.pl * vy + k.ql * vx);
}

// Even coefficients of full-grid samples. The odd part must be negligible against
// the size of the terms that produced the samples.
EvenField even_block(const CollocationGrid& grid, const VectorXd& v, double scale,
                     const char* name) {
  const int n = grid.n_modes();
  const int size = grid.size();
  double odd = 0.0;
  for (int j = 0; j < size; ++j) odd = std::max(odd, 0.5 * std::abs(v[j] - v[(size - j) % size]));
  if (odd > 1e-10 * (1.0 + scale))
    throw ParityViolation(fmt::format("residual block {} lost evenness (odd part {:.3e})", name, odd));
  VectorXd half(n + 1);
  half.head(n) = v.segment(n, n);
  half[n] = v[0];  // x = -L coincides with x = L
  return even_from_half_values(grid, half);
}

void require_finite(const VectorXd& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteEntry(fmt::format("non-finite entry in {}", what));
}

void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NonFiniteEntry(fmt::format("non-finite entry in {}", what));
}

}  // namespace

void PhysicalParameters::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ValidationError(fmt::format("{} must be positive and finite (got {})", name, v));
  };
  positive(rho, "rho");
  positive(rho_bar, "rho_bar");
  positive(gravity, "g");
  positive(depth, "d");
  positive(half_period, "L");
  if (!((rho_bar - rho) * gravity < 0.0))
    throw ValidationError(fmt::format(
        "(ρ̄−ρ)g < 0 required for stable stratification (got rho = {}, rho_bar = {}, g = {})", rho,
        rho_bar, gravity));
  if (!(surface_tension > 0.0) || !std::isfinite(surface_tension))
    throw ValidationError(fmt::format("σ > 0 required (got {})", surface_tension));
  if (!std::isfinite(bernoulli)) throw ValidationError("Q must be finite");
  pair.validate(depth);
}

// ---------------------------------------------------------------------------

WaveState WaveState::zero(const CollocationGrid& grid) {
  return {EvenField::zero(grid), EvenField::zero(grid), EvenField::zero(grid), 0.0};
}

VectorXd WaveState::pack() const {
  const Eigen::Index nx = eta.coeffs().size();
  VectorXd x(3 * nx + 1);
  x << eta.coeffs(), xi_bar.coeffs(), xi.coeffs(), c;
  return x;
}

WaveState WaveState::unpack(const CollocationGrid& grid, const VectorXd& x) {
  const int nx = grid.n_modes() + 1;
  if (x.size() != 3 * nx + 1)
    throw std::invalid_argument(fmt::format("state vector has {} entries, expected {}", x.size(), 3 * nx + 1));
  const double l = grid.half_period();
  return {EvenField(l, x.segment(0, nx)), EvenField(l, x.segment(nx, nx)),
          EvenField(l, x.segment(2 * nx, nx)), x[3 * nx]};
}

VectorXd Residual::pack() const {
  const Eigen::Index nx = r1.coeffs().size();
  VectorXd v(3 * nx + 1);
  v << r1.coeffs(), r2.coeffs(), r3.coeffs(), r4;
  return v;
}

Residual Residual::unpack(const CollocationGrid& grid, const VectorXd& v) {
  const WaveState s = WaveState::unpack(grid, v);
  return {s.eta, s.xi_bar, s.xi, s.c};
}

double Residual::norm() const {
  return std::sqrt(inner_product(r1, r1) + inner_product(r2, r2) + inner_product(r3, r3) + r4 * r4);
}

double Residual::max_block_norm() const {
  return std::max({std::sqrt(inner_product(r1, r1)), std::sqrt(inner_product(r2, r2)),
                   std::sqrt(inner_product(r3, r3)), std::abs(r4)});
}

// ---------------------------------------------------------------------------

namespace {

LayerSolverOptions layer_options(const PhysicalParameters& p, const Discretization& disc,
                                 const Guards& g) {
  LayerSolverOptions o;
  o.vertical = disc.vertical;
  o.gap_floor = g.gap_floor / p.depth;
  o.point_guard = g.vortex_distance / p.depth;
  return o;
}

CollocationGrid checked_grid(const PhysicalParameters& p, const Discretization& disc) {
  p.validate();
  if (disc.n_modes < 8 || disc.n_modes % 2 != 0)
    throw ValidationError(fmt::format("N must be even, ≥ 8 (got {})", disc.n_modes));
  if (disc.vertical < 8)
    throw ValidationError(fmt::format("M must be ≥ 8 (got {})", disc.vertical));
  return {p.half_period, disc.n_modes};
}

}  // namespace

WaveSystem::WaveSystem(PhysicalParameters params, Discretization disc, Guards guards)
    : params_(params),
      disc_(disc),
      guards_(guards),
      grid_(checked_grid(params, disc)),
      layers_(grid_, layer_options(params, disc, guards)),
      c1_(vw::c1(params.pair, params.kernel, params.half_period, guards.singular_radius)),
      synthesis_(collocation::cosine_synthesis(grid_)),
      analysis_(collocation::cosine_analysis(grid_)) {
  if (!(guards.vortex_distance > 0.0) || !(guards.gap_floor > 0.0) || !(guards.singular_radius > 0.0))
    throw ValidationError("guard lengths must be positive");
  dx_synthesis_ = collocation::first_derivative(grid_) * synthesis_;
  dxx_synthesis_ = collocation::second_derivative(grid_) * synthesis_;
}

void WaveSystem::check_admissible(const WaveState& state) const {
  const double gap = params_.depth - sup_norm(state.eta);
  if (gap <= guards_.gap_floor)
    throw DegenerateStrip(fmt::format("layer gap {:.3e} below floor {:.3e}", gap, guards_.gap_floor));
  vortex_traces(state.eta, params_.pair, params_.kernel, grid_,
                {guards_.vortex_distance, guards_.singular_radius});
}

namespace {

struct FullGrid {
  Nodal nodal;
  LayerSolution lower;
};

// Full-grid sampling through the iterative layer solves.
FullGrid sample_full(const WaveSystem& sys, const WaveState& s) {
  const PhysicalParameters& p = sys.params();
  const Guards& g = sys.guards();
  FullGrid out{{}, sys.layers().solve({Layer::lower, p.depth, s.eta}, s.xi)};
  const LayerSolution upper = sys.layers().solve({Layer::upper, p.depth, s.eta}, s.xi_bar);
  Nodal& n = out.nodal;
  n.eta = s.eta.values().array();
  const OddField etax = ddx(s.eta);
  n.etax = etax.values().array();
  n.etaxx = ddx(etax).values().array();
  n.xix = ddx(s.xi).values().array();
  n.xibx = ddx(s.xi_bar).values().array();
  n.g = out.lower.dno().values().array();
  n.gb = upper.dno().values().array();
  n.v = vortex_traces(s.eta, p.pair, p.kernel, sys.grid(), {g.vortex_distance, g.singular_radius});
  return out;
}

}  // namespace

Residual WaveSystem::residual(const WaveState& state, double eps) const {
  check_admissible(state);
  const FullGrid f = sample_full(*this, state);
  const Nodal& n = f.nodal;
  const Kinematics k = kinematics(n, eps, params_);

  const VectorXd r1 = bernoulli(n, k, state.c, params_).matrix();
  const double s1 = bernoulli_scale(n, k, state.c, params_).maxCoeff();
  const VectorXd xib = state.xi_bar.values();
  const VectorXd xi = state.xi.values();
  const VectorXd eta = n.eta.matrix();
  const VectorXd r2 = xib + eps * n.v.phi_bar + state.c * eta;
  const VectorXd r3 = xi + eps * n.v.phi + state.c * eta;
  require_finite(r1, "F1");
  require_finite(r2, "F2");
  require_finite(r3, "F3");

  const double scale2 = xib.cwiseAbs().maxCoeff() + std::abs(eps) * n.v.phi_bar.cwiseAbs().maxCoeff() +
                        std::abs(state.c) * eta.cwiseAbs().maxCoeff();
  const double scale3 = xi.cwiseAbs().maxCoeff() + std::abs(eps) * n.v.phi.cwiseAbs().maxCoeff() +
                        std::abs(state.c) * eta.cwiseAbs().maxCoeff();

  Residual r;
  r.r1 = even_block(grid_, r1, s1, "F1");
  r.r2 = even_block(grid_, r2, scale2, "F2");
  r.r3 = even_block(grid_, r3, scale3, "F3");
  r.r4 = state.c + f.lower.dy(params_.pair.lower, guards_.vortex_distance) - c1_ * eps;
  if (!std::isfinite(r.r4)) throw NonFiniteEntry("non-finite entry in F4");
  return r;
}

Residual WaveSystem::d_eps(const WaveState& state, double eps) const {
  check_admissible(state);
  const FullGrid f = sample_full(*this, state);
  const Nodal& n = f.nodal;
  const Kinematics k = kinematics(n, eps, params_);
  const VectorXd r1 = bernoulli_eps(n, k, state.c, params_).matrix();
  require_finite(r1, "dF1/deps");
  const double s1 = r1.cwiseAbs().maxCoeff();
  Residual r;
  r.r1 = even_block(grid_, r1, s1, "dF1/deps");
  r.r2 = even_block(grid_, n.v.phi_bar, n.v.phi_bar.cwiseAbs().maxCoeff(), "dF2/deps");
  r.r3 = even_block(grid_, n.v.phi, n.v.phi.cwiseAbs().maxCoeff(), "dF3/deps");
  r.r4 = -c1_;
  return r;
}

SystemLinearization WaveSystem::linearize(const WaveState& state, double eps) const {
  check_admissible(state);
  const PhysicalParameters& p = params_;
  const int nx = grid_.n_modes() + 1;
  const MatrixXd& e = synthesis_;
  const MatrixXd& c_op = analysis_;

  const LayerLinearization lo =
      layers_.linearize({Layer::lower, p.depth, state.eta}, state.xi, p.pair.lower);
  const LayerLinearization up = layers_.linearize({Layer::upper, p.depth, state.eta}, state.xi_bar);

  Nodal n;
  n.eta = (e * state.eta.coeffs()).array();
  n.etax = (dx_synthesis_ * state.eta.coeffs()).array();
  n.etaxx = (dxx_synthesis_ * state.eta.coeffs()).array();
  n.xix = (dx_synthesis_ * state.xi.coeffs()).array();
  n.xibx = (dx_synthesis_ * state.xi_bar.coeffs()).array();
  n.g = lo.dno.array();
  n.gb = up.dno.array();
  n.v = vortex_traces_at(grid_.half_nodes(), n.eta.matrix(), p.pair, p.kernel, p.half_period,
                         {guards_.vortex_distance, guards_.singular_radius});
  const Kinematics k = kinematics(n, eps, p);
  const double c = state.c;

  SystemLinearization out;
  const VectorXd xib = e * state.xi_bar.coeffs();
  const VectorXd xi = e * state.xi.coeffs();
  const double l = p.half_period;
  out.residual.r1 = EvenField(l, c_op * bernoulli(n, k, c, p).matrix());
  out.residual.r2 = EvenField(l, c_op * (xib + eps * n.v.phi_bar + c * n.eta.matrix()));
  out.residual.r3 = EvenField(l, c_op * (xi + eps * n.v.phi + c * n.eta.matrix()));
  out.residual.r4 = c + lo.probe_dy - c1_ * eps;

  out.d_eps.resize(3 * nx + 1);
  out.d_eps << c_op * bernoulli_eps(n, k, c, p).matrix(), c_op * n.v.phi_bar, c_op * n.v.phi, -c1_;

  // Column blocks. Arrays are (nodes x modes); node-wise factors broadcast over columns.
  const ArrayXXd de = e.array();
  const ArrayXXd dex = dx_synthesis_.array();
  const ArrayXXd dexx = dxx_synthesis_.array();
  const ArrayXd& m = k.metric;
  const ArrayXd two_etax = 2.0 * n.etax;

  MatrixXd& j = out.jacobian;
  j.setZero(3 * nx + 1, 3 * nx + 1);

  {  // eta columns
    const ArrayXXd dg = lo.dno_shape.array();
    const ArrayXXd dgb = up.dno_shape.array();
    const ArrayXXd da = (dg + dex.colwise() * n.xix - dex.colwise() * (two_etax * k.a)).colwise() / m;
    const ArrayXXd db =
        (-(dex.colwise() * n.g) - dg.colwise() * n.etax - dex.colwise() * (two_etax * k.b)).colwise() / m;
    const ArrayXXd dab =
        (dgb + dex.colwise() * n.xibx - dex.colwise() * (two_etax * k.ab)).colwise() / m;
    const ArrayXXd dbb =
        (-(dex.colwise() * n.gb) - dgb.colwise() * n.etax - dex.colwise() * (two_etax * k.bb)).colwise() / m;
    const ArrayXXd dpl = da + eps * (de.colwise() * n.v.phi_yy.array());
    const ArrayXXd dql = db + eps * (de.colwise() * n.v.phi_xy.array());
    const ArrayXXd dpu = dab + eps * (de.colwise() * n.v.phi_bar_yy.array());
    const ArrayXXd dqu = dbb + eps * (de.colwise() * n.v.phi_bar_xy.array());
    const ArrayXXd dcurv = dexx.colwise() / m.pow(1.5) -
                           dex.colwise() * (3.0 * n.etaxx * n.etax / m.pow(2.5));
    const ArrayXXd df1 = c * (p.rho_bar * dpu - p.rho * dpl) +
                         p.rho_bar * (dpu.colwise() * k.pu + dqu.colwise() * k.qu) -
                         p.rho * (dpl.colwise() * k.pl + dql.colwise() * k.ql) +
                         (p.rho_bar - p.rho) * p.gravity * de + p.surface_tension * dcurv;
    j.block(0, 0, nx, nx) = c_op * df1.matrix();
    j.block(nx, 0, nx, nx) = c_op * (de.colwise() * (c + eps * n.v.phi_bar_y.array())).matrix();
    j.block(2 * nx, 0, nx, nx) = c_op * (de.colwise() * (c + eps * n.v.phi_y.array())).matrix();
    j.block(3 * nx, 0, 1, nx) = lo.probe_shape;
  }
  {  // xi_bar columns
    const ArrayXXd dgb = up.dno_trace.array();
    const ArrayXXd dab = (dgb + dex.colwise() * n.etax).colwise() / m;
    const ArrayXXd dbb = (dex - dgb.colwise() * n.etax).colwise() / m;
    const ArrayXXd df1 = c * p.rho_bar * dab + p.rho_bar * (dab.colwise() * k.pu + dbb.colwise() * k.qu);
    j.block(0, nx, nx, nx) = c_op * df1.matrix();
    j.block(nx, nx, nx, nx).setIdentity();
  }
  {  // xi columns
    const ArrayXXd dg = lo.dno_trace.array();
    const ArrayXXd da = (dg + dex.colwise() * n.etax).colwise() / m;
    const ArrayXXd db = (dex - dg.colwise() * n.etax).colwise() / m;
    const ArrayXXd df1 = -c * p.rho * da - p.rho * (da.colwise() * k.pl + db.colwise() * k.ql);
    j.block(0, 2 * nx, nx, nx) = c_op * df1.matrix();
    j.block(2 * nx, 2 * nx, nx, nx).setIdentity();
    j.block(3 * nx, 2 * nx, 1, nx) = lo.probe_trace;
  }
  // c column
  j.block(0, 3 * nx, nx, 1) = c_op * k.bracket.matrix();
  j.block(nx, 3 * nx, nx, 1) = state.eta.coeffs();
  j.block(2 * nx, 3 * nx, nx, 1) = state.eta.coeffs();
  j(3 * nx, 3 * nx) = 1.0;

  require_finite(j, "Jacobian");
  require_finite(out.d_eps, "eps-derivative");
  require_finite(out.residual.pack(), "residual");
  return out;
}

Eigen::MatrixXd WaveSystem::jacobian(const WaveState& state, double eps, JacobianMode mode) const {
  if (mode == JacobianMode::analytic) return linearize(state, eps).jacobian;

  const VectorXd x = state.pack();
  MatrixXd j(dimension(), dimension());
  for (int col = 0; col < dimension(); ++col) {
    const double h = fd_step * std::max(1.0, std::abs(x[col]));
    VectorXd xp = x, xm = x;
    xp[col] += h;
    xm[col] -= h;
    j.col(col) = (residual(WaveState::unpack(grid_, xp), eps).pack() -
                  residual(WaveState::unpack(grid_, xm), eps).pack()) /
                 (2.0 * h);
  }
  require_finite(j, "finite-difference Jacobian");
  return j;
}

Eigen::MatrixXd WaveSystem::flat_linearization() const {
  const PhysicalParameters& p = params_;
  const int nx = grid_.n_modes() + 1;
  MatrixXd j = MatrixXd::Zero(3 * nx + 1, 3 * nx + 1);
  const double y0 = p.pair.lower.y;
  const double x0 = p.pair.lower.x;
  for (int k = 0; k < nx; ++k) {
    const double kappa = grid_.wavenumber(k);
    j(k, k) = (p.rho_bar - p.rho) * p.gravity - p.surface_tension * kappa * kappa;
    j(nx + k, nx + k) = 1.0;
    j(2 * nx + k, 2 * nx + k) = 1.0;
    // d/dy of cos(kappa x) sinh(kappa (y + d)) / sinh(kappa d) at z, in overflow-free form
    const double probe =
        k == 0 ? 1.0 / p.depth
               : kappa * (std::exp(kappa * y0) + std::exp(-kappa * (y0 + 2.0 * p.depth))) /
                     (1.0 - std::exp(-2.0 * kappa * p.depth));
    j(3 * nx, 2 * nx + k) = probe * std::cos(kappa * x0);
  }
  j(3 * nx, 3 * nx) = 1.0;
  return j;
}

int WaveSystem::flat_determinant_sign() const {
  const PhysicalParameters& p = params_;
  int sign = 1;
  for (int k = 0; k <= grid_.n_modes(); ++k) {
    const double kappa = grid_.wavenumber(k);
    const double m = (p.rho_bar - p.rho) * p.gravity - p.surface_tension * kappa * kappa;
    if (m == 0.0) return 0;
    if (m < 0.0) sign = -sign;
  }
  return sign;
}

double WaveSystem::vertical_equilibrium(const WaveState& state, double eps) const {
  check_admissible(state);
  const LayerSolution lower = layers_.solve({Layer::lower, params_.depth, state.eta}, state.xi);
  const Point z = params_.pair.lower;
  const KernelJet phantom =
      kernel_jet(params_.kernel, z - params_.pair.upper, params_.half_period, guards_.singular_radius);
  return lower.dx(z, guards_.vortex_distance) - eps * phantom.dx;
}

}  // namespace vw
