#include "vwave/layer.hpp"

#include "vwave/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace vw {

namespace detail {

struct StripBasis {
  StripBasis(const CollocationGrid& g, int vertical)
      : grid(g),
        cheb(vertical),
        dx(collocation::first_derivative(g)),
        dxx(collocation::second_derivative(g)),
        synthesis(collocation::cosine_synthesis(g)),
        analysis(collocation::cosine_analysis(g)),
        d1t(cheb.d1().transpose()),
        d2t(cheb.d2().transpose()) {}

  int nx() const { return grid.n_modes() + 1; }
  int order() const { return cheb.order(); }
  int interior_size() const { return nx() * (order() - 1); }

  CollocationGrid grid;
  ChebyshevLobatto cheb;
  Eigen::MatrixXd dx, dxx, synthesis, analysis;
  Eigen::MatrixXd d1t, d2t;
};

}  // namespace detail

namespace {

using detail::StripBasis;

double layer_sign(Layer which) { return which == Layer::lower ? 1.0 : -1.0; }

// Flat-strip extension profiles S_k(s) = sinh(a s)/sinh(a), a = kappa_k d, and their
// s-derivatives, in overflow-free form.
struct LiftProfile {
  double value, d1, d2;
};

LiftProfile lift_profile(double kappa, double depth, double s) {
  if (kappa == 0.0) return {s, 1.0, 0.0};
  const double a = kappa * depth;
  const double denom = 1.0 - std::exp(-2.0 * a);
  const double ep = std::exp(a * (s - 1.0));
  const double em = std::exp(-a * (s + 1.0));
  const double v = (ep - em) / denom;
  return {v, a * (ep + em) / denom, a * a * v};
}

// Derivative fields of a function on the tensor grid.
struct Fields {
  Eigen::MatrixXd us, uss, uxx, uxs;
};

Fields operator+(const Fields& a, const Fields& b) {
  return {a.us + b.us, a.uss + b.uss, a.uxx + b.uxx, a.uxs + b.uxs};
}

Fields collocated_fields(const StripBasis& basis, const Eigen::MatrixXd& u) {
  Fields f;
  f.us = u * basis.d1t;
  f.uss = u * basis.d2t;
  f.uxx = basis.dxx * u;
  f.uxs = basis.dx * f.us;
  return f;
}

// Lift tables on the tensor grid for one depth.
struct LiftTable {
  Eigen::MatrixXd cos_x, cos_xx, cos_dx;  // (nodes x modes)
  Eigen::MatrixXd s0, s1, s2;             // (modes x vertical nodes)

  LiftTable(const StripBasis& basis, double depth) {
    const int nx = basis.nx();
    const int m = basis.order();
    cos_x = basis.synthesis;
    cos_dx.resize(nx, nx);
    cos_xx.resize(nx, nx);
    const int n = nx - 1;
    for (int k = 0; k < nx; ++k) {
      const double kappa = basis.grid.wavenumber(k);
      // reduced angle keeps sin exactly zero at multiples of pi
      for (int i = 0; i < nx; ++i) cos_dx(i, k) = -kappa * std::sin(pi * ((k * i) % (2 * n)) / n);
      cos_xx.col(k) = -kappa * kappa * cos_x.col(k);
    }
    s0.resize(nx, m + 1);
    s1.resize(nx, m + 1);
    s2.resize(nx, m + 1);
    for (int k = 0; k < nx; ++k)
      for (int j = 0; j <= m; ++j) {
        const LiftProfile p = lift_profile(basis.grid.wavenumber(k), depth, basis.cheb.nodes()[j]);
        s0(k, j) = p.value;
        s1(k, j) = p.d1;
        s2(k, j) = p.d2;
      }
  }

  Fields fields(const Eigen::VectorXd& t) const {
    const Eigen::MatrixXd ts0 = t.asDiagonal() * s0;
    const Eigen::MatrixXd ts1 = t.asDiagonal() * s1;
    return {cos_x * ts1, cos_x * (t.asDiagonal() * s2), cos_xx * ts0, cos_dx * ts1};
  }

  // Fields of the lift of the single mode cos_k.
  Fields mode_fields(int k) const {
    return {cos_x.col(k) * s1.row(k), cos_x.col(k) * s2.row(k), cos_xx.col(k) * s0.row(k),
            cos_dx.col(k) * s1.row(k)};
  }

  Eigen::MatrixXd values(const Eigen::VectorXd& t) const { return cos_x * (t.asDiagonal() * s0); }
};

// Geometry-bound collocation operator L(h) on the full tensor grid.
struct StripOperator {
  const StripBasis* basis;
  Eigen::VectorXd h, hx, hxx;

  Eigen::MatrixXd apply(const Fields& f, bool scaled = false) const {
    const Eigen::VectorXd& s = basis->cheb.nodes();
    Eigen::MatrixXd out(f.us.rows(), f.us.cols());
    for (Eigen::Index m = 0; m < out.cols(); ++m)
      for (Eigen::Index j = 0; j < out.rows(); ++j) {
        const double sm = s[m];
        double v = h[j] * h[j] * f.uxx(j, m) - 2.0 * sm * h[j] * hx[j] * f.uxs(j, m) +
                   (1.0 + sm * sm * hx[j] * hx[j]) * f.uss(j, m) +
                   sm * (2.0 * hx[j] * hx[j] - h[j] * hxx[j]) * f.us(j, m);
        if (scaled) v /= h[j] * h[j];
        out(j, m) = v;
      }
    return out;
  }

  // First variation of L(h) u with respect to h in the direction (dh, dhx, dhxx).
  Eigen::MatrixXd apply_variation(const Fields& f, const Eigen::VectorXd& dh,
                                  const Eigen::VectorXd& dhx, const Eigen::VectorXd& dhxx) const {
    const Eigen::VectorXd& s = basis->cheb.nodes();
    Eigen::MatrixXd out(f.us.rows(), f.us.cols());
    for (Eigen::Index m = 0; m < out.cols(); ++m)
      for (Eigen::Index j = 0; j < out.rows(); ++j) {
        const double sm = s[m];
        out(j, m) = 2.0 * h[j] * dh[j] * f.uxx(j, m) -
                    2.0 * sm * (dh[j] * hx[j] + h[j] * dhx[j]) * f.uxs(j, m) +
                    2.0 * sm * sm * hx[j] * dhx[j] * f.uss(j, m) +
                    sm * (4.0 * hx[j] * dhx[j] - dh[j] * hxx[j] - h[j] * dhxx[j]) * f.us(j, m);
      }
    return out;
  }

  // Interior equations divided by h^2, acting on interior unknowns (zero boundary values).
  Eigen::VectorXd apply_scaled_interior(const Eigen::VectorXd& x) const {
    const int nx = basis->nx();
    const int m = basis->order();
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(nx, m + 1);
    u.middleCols(1, m - 1) = Eigen::Map<const Eigen::MatrixXd>(x.data(), nx, m - 1);
    Eigen::MatrixXd interior = apply(collocated_fields(*basis, u), true).middleCols(1, m - 1);
    return Eigen::Map<const Eigen::VectorXd>(interior.data(), interior.size());
  }

  // Dense interior collocation matrix of the unscaled operator;
  // unknown (j, m) sits at j + (N+1)(m-1).
  Eigen::MatrixXd assemble() const {
    const int nx = basis->nx();
    const int m = basis->order();
    const int n = basis->interior_size();
    const Eigen::MatrixXd& d1 = basis->cheb.d1();
    const Eigen::MatrixXd& d2 = basis->cheb.d2();
    const Eigen::VectorXd& s = basis->cheb.nodes();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int mp = 1; mp < m; ++mp)
      for (int jp = 0; jp < nx; ++jp) {
        const int col = jp + nx * (mp - 1);
        for (int mr = 1; mr < m; ++mr) {
          const double sm = s[mr];
          const double dsm = d1(mr, mp);
          for (int j = 0; j < nx; ++j) {
            const int row = j + nx * (mr - 1);
            double v = -2.0 * sm * h[j] * hx[j] * basis->dx(j, jp) * dsm;
            if (mp == mr) v += h[j] * h[j] * basis->dxx(j, jp);
            if (jp == j)
              v += (1.0 + sm * sm * hx[j] * hx[j]) * d2(mr, mp) +
                   sm * (2.0 * hx[j] * hx[j] - h[j] * hxx[j]) * dsm;
            a(row, col) = v;
          }
        }
      }
    return a;
  }
};

StripOperator make_operator(const StripBasis& basis, const LayerGeometry& geom, double gap_floor) {
  const EvenField& eta = geom.interface;
  if (eta.n_modes() != basis.grid.n_modes() || eta.half_period() != basis.grid.half_period())
    throw std::invalid_argument("interface does not live on the solver grid");
  const double sign = layer_sign(geom.which);
  StripOperator op{&basis, {}, {}, {}};
  op.h = (geom.depth + sign * eta.half_values().array()).matrix();
  const OddField eta_x = ddx(eta);
  op.hx = sign * eta_x.half_values();
  op.hxx = sign * ddx(eta_x).half_values();
  const double gap = op.h.minCoeff();
  if (!(gap > gap_floor))
    throw DegenerateStrip(fmt::format("{} layer thickness {:.4e} below gap floor {:.4e}",
                                      geom.which == Layer::lower ? "lower" : "upper", gap,
                                      gap_floor));
  return op;
}

// Fast-diagonalization preconditioner for the h^2-scaled operator: for each cosine
// mode solve (-kappa^2 + beta D_ss) v = r with beta = mean(1/h^2).
class ModePreconditioner {
 public:
  ModePreconditioner(const StripBasis& basis, const Eigen::VectorXd& h) : basis_(&basis) {
    const int m = basis.order();
    const double beta = h.array().square().inverse().mean();
    const Eigen::MatrixXd d2 = basis.cheb.d2().block(1, 1, m - 1, m - 1);
    for (int k = 0; k < basis.nx(); ++k) {
      const double kappa = basis.grid.wavenumber(k);
      Eigen::MatrixXd block = beta * d2;
      block.diagonal().array() -= kappa * kappa;
      lus_.emplace_back(block);
    }
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& r) const {
    const int nx = basis_->nx();
    const int mi = basis_->order() - 1;
    const Eigen::MatrixXd rh = basis_->analysis * Eigen::Map<const Eigen::MatrixXd>(r.data(), nx, mi);
    Eigen::MatrixXd vh(nx, mi);
    for (int k = 0; k < nx; ++k) vh.row(k) = lus_[k].solve(rh.row(k).transpose()).transpose();
    const Eigen::MatrixXd v = basis_->synthesis * vh;
    return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
  }

 private:
  const StripBasis* basis_;
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lus_;
};

struct GmresResult {
  Eigen::VectorXd x;
  bool converged = false;
};

// Right-preconditioned restarted GMRES with modified Gram-Schmidt.
template <class Op, class Prec>
GmresResult gmres(const Op& a, const Prec& prec, const Eigen::VectorXd& b, double tol, int restart,
                  int max_iterations) {
  const Eigen::Index n = b.size();
  GmresResult out{Eigen::VectorXd::Zero(n), false};
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  int total = 0;
  Eigen::MatrixXd v(n, restart + 1);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(restart + 1, restart);
  Eigen::VectorXd cs(restart), sn(restart), g(restart + 1);
  while (true) {
    const Eigen::VectorXd r = b - a(out.x);
    const double beta = r.norm();
    if (beta <= tol * bnorm) {
      out.converged = true;
      return out;
    }
    if (total >= max_iterations) return out;
    hess.setZero();
    g.setZero();
    g[0] = beta;
    v.col(0) = r / beta;
    int k = 0;
    while (k < restart && total < max_iterations) {
      Eigen::VectorXd w = a(prec(v.col(k)));
      for (int i = 0; i <= k; ++i) {
        hess(i, k) = w.dot(v.col(i));
        w -= hess(i, k) * v.col(i);
      }
      hess(k + 1, k) = w.norm();
      const bool breakdown = hess(k + 1, k) == 0.0;
      if (!breakdown) v.col(k + 1) = w / hess(k + 1, k);
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * hess(i, k) + sn[i] * hess(i + 1, k);
        hess(i + 1, k) = -sn[i] * hess(i, k) + cs[i] * hess(i + 1, k);
        hess(i, k) = t;
      }
      const double rho = std::hypot(hess(k, k), hess(k + 1, k));
      cs[k] = hess(k, k) / rho;
      sn[k] = hess(k + 1, k) / rho;
      hess(k, k) = rho;
      hess(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++k;
      ++total;
      if (breakdown || std::abs(g[k]) <= 0.5 * tol * bnorm) break;
    }
    const Eigen::VectorXd y =
        hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    out.x += prec(v.leftCols(k) * y);
  }
}

double bilinear(const Eigen::RowVectorXd& wx, const Eigen::MatrixXd& u, const Eigen::RowVectorXd& ws) {
  return (wx * u).dot(ws);
}

Eigen::MatrixXd interior_of(const Eigen::MatrixXd& full) {
  return full.middleCols(1, full.cols() - 2);
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

// Nodal field with the given interior values and zero boundary columns.
Eigen::MatrixXd from_interior(const StripBasis& basis, const Eigen::VectorXd& interior) {
  const int nx = basis.nx();
  const int mi = basis.order() - 1;
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(nx, mi + 2);
  full.middleCols(1, mi) = Eigen::Map<const Eigen::MatrixXd>(interior.data(), nx, mi);
  return full;
}

Eigen::PartialPivLU<Eigen::MatrixXd> factorize(const StripOperator& op) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(op.assemble());
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15) || !std::isfinite(rcond))
    throw LinearSolveFailure(fmt::format("layer collocation matrix is singular (rcond {:.3e})", rcond));
  return lu;
}

}  // namespace

// ---------------------------------------------------------------------------

LayerSolution::Local LayerSolution::locate(Point p, double guard) const {
  const double sign = layer_sign(which_);
  const double surface = eta_(p.x);
  const double bottom = which_ == Layer::lower ? -depth_ : surface;
  const double top = which_ == Layer::lower ? surface : depth_;
  if (!(p.y - bottom > guard && top - p.y > guard))
    throw PointOutsideLayer(fmt::format("point ({}, {}) is not inside the {} layer with clearance {}",
                                        p.x, p.y, which_ == Layer::lower ? "lower" : "upper",
                                        guard));
  const CollocationGrid& grid = basis_->grid;
  const int nx = basis_->nx();
  Local loc;
  loc.h = depth_ + sign * surface;
  loc.hx = sign * ddx(eta_)(p.x);
  loc.s = which_ == Layer::lower ? (p.y + depth_) / loc.h : (depth_ - p.y) / loc.h;
  loc.wx = collocation::point_weights(grid, p.x, 0);
  loc.wx1 = collocation::point_weights(grid, p.x, 1);
  loc.ws = basis_->cheb.weights(loc.s, 0);
  loc.ws1 = basis_->cheb.weights(loc.s, 1);
  loc.ws2 = basis_->cheb.weights(loc.s, 2);
  loc.cx.resize(nx);
  loc.cx1.resize(nx);
  loc.ls.resize(nx);
  loc.ls1.resize(nx);
  loc.ls2.resize(nx);
  for (int k = 0; k < nx; ++k) {
    const double kappa = grid.wavenumber(k);
    loc.cx[k] = std::cos(kappa * p.x);
    loc.cx1[k] = -kappa * std::sin(kappa * p.x);
    const LiftProfile lp = lift_profile(kappa, depth_, loc.s);
    loc.ls[k] = lp.value;
    loc.ls1[k] = lp.d1;
    loc.ls2[k] = lp.d2;
  }
  return loc;
}

Eigen::MatrixXd LayerSolution::nodal() const { return LiftTable(*basis_, depth_).values(t_) + w_; }

double LayerSolution::value(Point p) const {
  const Local loc = locate(p, -1e-12 * depth_);
  return (loc.cx.array() * loc.ls.array()).matrix().dot(t_) + bilinear(loc.wx, w_, loc.ws);
}

double LayerSolution::dy(Point p, double guard) const {
  const Local loc = locate(p, guard);
  const double us = (loc.cx.array() * loc.ls1.array()).matrix().dot(t_) + bilinear(loc.wx, w_, loc.ws1);
  return layer_sign(which_) * us / loc.h;
}

double LayerSolution::dx(Point p, double guard) const {
  const Local loc = locate(p, guard);
  const double us = (loc.cx.array() * loc.ls1.array()).matrix().dot(t_) + bilinear(loc.wx, w_, loc.ws1);
  const double ux = (loc.cx1.array() * loc.ls.array()).matrix().dot(t_) + bilinear(loc.wx1, w_, loc.ws);
  return ux - loc.s * loc.hx / loc.h * us;
}

Eigen::VectorXd LayerSolution::dno_half_values() const {
  const int m = basis_->order();
  const LiftTable lift(*basis_, depth_);
  const Eigen::VectorXd us =
      lift.cos_x * (t_.array() * lift.s1.col(m).array()).matrix() + w_ * basis_->cheb.d1().row(m).transpose();
  const Eigen::VectorXd trace_x = lift.cos_dx * t_;
  return ((1.0 + hx_.array().square()) * us.array() / h_.array() - hx_.array() * trace_x.array())
      .matrix();
}

EvenField LayerSolution::dno() const { return even_from_half_values(basis_->grid, dno_half_values()); }

// ---------------------------------------------------------------------------

LayerSolver::LayerSolver(const CollocationGrid& grid, LayerSolverOptions options)
    : basis_(std::make_shared<const StripBasis>(grid, options.vertical)), options_(options) {
  if (options.vertical < 8) throw std::invalid_argument("vertical resolution must be at least 8");
}

const CollocationGrid& LayerSolver::grid() const noexcept { return basis_->grid; }

LayerSolution LayerSolver::solve(const LayerGeometry& geom, const EvenField& trace) const {
  const StripBasis& basis = *basis_;
  const StripOperator op = make_operator(basis, geom, options_.gap_floor * geom.depth);
  if (trace.n_modes() != basis.grid.n_modes())
    throw std::invalid_argument("trace does not live on the solver grid");

  const LiftTable lift(basis, geom.depth);
  const Fields lifted = lift.fields(trace.coeffs());
  Eigen::VectorXd x;
  bool done = false;
  if (options_.solver == LinearSolver::iterative) {
    const Eigen::VectorXd rhs = -flatten(interior_of(op.apply(lifted, true)));
    const ModePreconditioner prec(basis, op.h);
    GmresResult r = gmres([&](const Eigen::VectorXd& v) { return op.apply_scaled_interior(v); },
                          [&](const Eigen::VectorXd& v) { return prec.apply(v); }, rhs,
                          options_.gmres_tolerance, options_.gmres_restart,
                          options_.gmres_max_iterations);
    if (r.converged) {
      x = std::move(r.x);
      done = true;
    }
  }
  if (!done) {
    const Eigen::VectorXd rhs = -flatten(interior_of(op.apply(lifted)));
    x = factorize(op).solve(rhs);
  }
  if (!x.allFinite()) throw LinearSolveFailure("layer solve produced non-finite values");

  LayerSolution sol;
  sol.basis_ = basis_;
  sol.which_ = geom.which;
  sol.depth_ = geom.depth;
  sol.eta_ = geom.interface;
  sol.h_ = op.h;
  sol.hx_ = op.hx;
  sol.t_ = trace.coeffs();
  sol.w_ = from_interior(basis, x);
  return sol;
}

EvenField LayerSolver::dno(const LayerGeometry& geom, const EvenField& trace) const {
  return solve(geom, trace).dno();
}

double LayerSolver::interior_dy(const LayerGeometry& geom, const EvenField& trace, Point p) const {
  return solve(geom, trace).dy(p, options_.point_guard * geom.depth);
}

double LayerSolver::shape_step_for(const LayerGeometry& geom, const EvenField& direction,
                                   std::optional<double> step) const {
  if (step) return *step;
  return options_.shape_step * geom.depth / std::max(1.0, sup_norm(direction));
}

EvenField LayerSolver::shape_derivative_dno(const LayerGeometry& geom, const EvenField& trace,
                                            const EvenField& direction,
                                            std::optional<double> step) const {
  const double tau = shape_step_for(geom, direction, step);
  LayerGeometry plus = geom, minus = geom;
  plus.interface += tau * direction;
  minus.interface -= tau * direction;
  return (dno(plus, trace) - dno(minus, trace)) * (0.5 / tau);
}

double LayerSolver::shape_derivative_interior_dy(const LayerGeometry& geom, const EvenField& trace,
                                                 const EvenField& direction, Point p,
                                                 std::optional<double> step) const {
  const double tau = shape_step_for(geom, direction, step);
  LayerGeometry plus = geom, minus = geom;
  plus.interface += tau * direction;
  minus.interface -= tau * direction;
  return (interior_dy(plus, trace, p) - interior_dy(minus, trace, p)) * (0.5 / tau);
}

LayerLinearization LayerSolver::linearize(const LayerGeometry& geom, const EvenField& trace,
                                          std::optional<Point> probe) const {
  const StripBasis& basis = *basis_;
  const StripOperator op = make_operator(basis, geom, options_.gap_floor * geom.depth);
  if (trace.n_modes() != basis.grid.n_modes())
    throw std::invalid_argument("trace does not live on the solver grid");
  const auto lu = factorize(op);
  const int nx = basis.nx();
  const int m = basis.order();
  const double sign = layer_sign(geom.which);
  const LiftTable lift(basis, geom.depth);
  const Eigen::VectorXd& t = trace.coeffs();

  const Eigen::VectorXd x0 = lu.solve(-flatten(interior_of(op.apply(lift.fields(t)))));
  if (!x0.allFinite()) throw LinearSolveFailure("layer solve produced non-finite values");
  const Eigen::MatrixXd w = from_interior(basis, x0);
  const Fields u_fields = lift.fields(t) + collocated_fields(basis, w);

  // Right-hand sides: cosine traces (columns 0..N), then shape directions.
  Eigen::MatrixXd rhs(basis.interior_size(), 2 * nx);
  Eigen::MatrixXd dh(nx, nx), dhx(nx, nx), dhxx(nx, nx);
  for (int k = 0; k < nx; ++k) {
    dh.col(k) = sign * lift.cos_x.col(k);
    dhx.col(k) = sign * lift.cos_dx.col(k);
    dhxx.col(k) = sign * lift.cos_xx.col(k);
    rhs.col(k) = -flatten(interior_of(op.apply(lift.mode_fields(k))));
    rhs.col(nx + k) = -flatten(interior_of(op.apply_variation(u_fields, dh.col(k), dhx.col(k), dhxx.col(k))));
  }
  const Eigen::MatrixXd sol = lu.solve(rhs);
  if (!sol.allFinite()) throw LinearSolveFailure("linearized layer solve produced non-finite values");

  LayerLinearization out;
  out.solution.basis_ = basis_;
  out.solution.which_ = geom.which;
  out.solution.depth_ = geom.depth;
  out.solution.eta_ = geom.interface;
  out.solution.h_ = op.h;
  out.solution.hx_ = op.hx;
  out.solution.t_ = t;
  out.solution.w_ = w;
  out.dno = out.solution.dno_half_values();

  const Eigen::VectorXd wall_to_surface = basis.cheb.d1().row(m).transpose();
  const Eigen::ArrayXd metric = 1.0 + op.hx.array().square();
  const Eigen::VectorXd us = u_fields.us.col(m);
  const Eigen::VectorXd trace_x = lift.cos_dx * t;

  out.dno_trace.resize(nx, nx);
  out.dno_shape.resize(nx, nx);
  std::vector<Eigen::MatrixXd> trace_solutions, shape_solutions;
  trace_solutions.reserve(nx);
  shape_solutions.reserve(nx);
  for (int k = 0; k < nx; ++k) {
    trace_solutions.push_back(from_interior(basis, sol.col(k)));
    shape_solutions.push_back(from_interior(basis, sol.col(nx + k)));
    const Eigen::VectorXd us_k =
        lift.cos_x.col(k) * lift.s1(k, m) + trace_solutions.back() * wall_to_surface;
    out.dno_trace.col(k) =
        (metric * us_k.array() / op.h.array() - op.hx.array() * lift.cos_dx.col(k).array()).matrix();
    const Eigen::VectorXd dus = shape_solutions.back() * wall_to_surface;
    const Eigen::ArrayXd dhk = dh.col(k).array();
    const Eigen::ArrayXd dhxk = dhx.col(k).array();
    out.dno_shape.col(k) =
        ((2.0 * op.hx.array() * dhxk / op.h.array() - metric * dhk / op.h.array().square()) *
             us.array() +
         metric * dus.array() / op.h.array() - dhxk * trace_x.array())
            .matrix();
  }

  if (probe) {
    const LayerSolution::Local loc = out.solution.locate(*probe, options_.point_guard * geom.depth);
    const double us0 = (loc.cx.array() * loc.ls1.array()).matrix().dot(t) + bilinear(loc.wx, w, loc.ws1);
    const double uss0 = (loc.cx.array() * loc.ls2.array()).matrix().dot(t) + bilinear(loc.wx, w, loc.ws2);
    out.probe_dy = sign * us0 / loc.h;
    out.probe_trace.resize(nx);
    out.probe_shape.resize(nx);
    for (int k = 0; k < nx; ++k) {
      out.probe_trace[k] =
          sign * (loc.cx[k] * loc.ls1[k] + bilinear(loc.wx, trace_solutions[k], loc.ws1)) / loc.h;
      const double dh0 = sign * loc.cx[k];
      const double ds0 = -loc.s * dh0 / loc.h;
      const double dus0 = bilinear(loc.wx, shape_solutions[k], loc.ws1);
      out.probe_shape[k] = sign * ((dus0 + uss0 * ds0) / loc.h - us0 * dh0 / (loc.h * loc.h));
    }
  }
  return out;
}

}  // namespace vw
