#include "catch_amalgamated.hpp"

#include "vwave/errors.hpp"
#include "vwave/layer.hpp"

#include <cmath>
#include <random>

using namespace vw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const CollocationGrid grid(pi, 32);
const LayerSolver solver(grid, LayerSolverOptions{.vertical = 24});

LayerGeometry flat(Layer which, double d = 1.0) { return {which, d, EvenField::zero(grid)}; }

LayerGeometry wavy(Layer which) {
  return {which, 1.0, EvenField::mode(grid, 1, 0.1) + EvenField::mode(grid, 2, -0.03)};
}

}  // namespace

TEST_CASE("flat layers reproduce kappa coth(kappa d)", "[layer]") {
  for (const Layer which : {Layer::lower, Layer::upper}) {
    for (double d : {1.0, 0.6}) {
      const LayerGeometry geom = flat(which, d);
      for (int k = 0; k <= 32; ++k) {
        const double kappa = grid.wavenumber(k);
        const double exact = k == 0 ? 1.0 / d : kappa / std::tanh(kappa * d);
        const EvenField g = solver.dno(geom, EvenField::mode(grid, k));
        CHECK_THAT(g[k], WithinRel(exact, 1e-10));
        CHECK((g.coeffs() - exact * EvenField::mode(grid, k).coeffs()).cwiseAbs().maxCoeff() < 1e-10 * exact);
      }
    }
  }
}

TEST_CASE("flat lower layer reproduces the separated solution", "[layer]") {
  const int k = 3;
  const double kappa = grid.wavenumber(k);
  const LayerSolution sol = solver.solve(flat(Layer::lower), EvenField::mode(grid, k));
  for (const Point p : {Point{0.0, -0.5}, Point{0.7, -0.2}, Point{-2.1, -0.9}}) {
    const double exact = std::cos(kappa * p.x) * std::sinh(kappa * (p.y + 1.0)) / std::sinh(kappa);
    CHECK_THAT(sol.value(p), WithinAbs(exact, 1e-10));
  }
  const double y0 = -0.5;
  CHECK_THAT(sol.dy({0.0, y0}, 0.05), WithinRel(kappa * std::cosh(kappa * (y0 + 1.0)) / std::sinh(kappa), 1e-10));
}

TEST_CASE("constant trace extends linearly", "[layer]") {
  const LayerSolution lo = solver.solve(flat(Layer::lower), EvenField::constant(grid, 1.0));
  CHECK_THAT(lo.value({0.3, -0.25}), WithinAbs(0.75, 1e-12));
  CHECK_THAT(lo.dy({1.0, -0.6}, 0.05), WithinRel(1.0, 1e-12));
  CHECK_THAT(solver.interior_dy(flat(Layer::lower, 2.0), EvenField::constant(grid, 1.0), {0.0, -1.0}),
             WithinRel(0.5, 1e-12));
  const LayerSolution up = solver.solve(flat(Layer::upper), EvenField::constant(grid, 1.0));
  CHECK_THAT(up.value({0.3, 0.25}), WithinAbs(0.75, 1e-12));
}

TEST_CASE("zero trace gives the zero solution", "[layer]") {
  const LayerSolution sol = solver.solve(wavy(Layer::lower), EvenField::zero(grid));
  CHECK(sol.nodal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(solver.interior_dy(wavy(Layer::upper), EvenField::zero(grid), {0.0, 0.5}) == 0.0);
}

TEST_CASE("solution vanishes on the wall and matches the trace", "[layer]") {
  const EvenField trace = EvenField::mode(grid, 1, 0.4) + EvenField::mode(grid, 4, 0.1);
  const LayerSolution sol = solver.solve(wavy(Layer::lower), trace);
  const Eigen::MatrixXd u = sol.nodal();
  CHECK(u.col(0).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((u.col(u.cols() - 1) - trace.half_values()).cwiseAbs().maxCoeff() < 1e-11 * trace.half_values().norm());
}

TEST_CASE("flat operator is self-adjoint", "[layer]") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  Eigen::VectorXd a(33), b(33);
  for (int k = 0; k <= 32; ++k) {
    a[k] = n(rng) / (1 + k);
    b[k] = n(rng) / (1 + k);
  }
  const EvenField f(pi, a), g(pi, b);
  const double lhs = inner_product(solver.dno(flat(Layer::lower), f), g);
  const double rhs = inner_product(f, solver.dno(flat(Layer::lower), g));
  CHECK_THAT(lhs, WithinRel(rhs, 1e-10));
}

TEST_CASE("resolution convergence on a wavy interface", "[layer]") {
  auto dno_at = [](int n, int m) {
    const CollocationGrid g(pi, n);
    const LayerSolver s(g, LayerSolverOptions{.vertical = m});
    const LayerGeometry geom{Layer::lower, 1.0, EvenField::mode(g, 1, 0.1)};
    return s.dno(geom, EvenField::mode(g, 1) + EvenField::mode(g, 2, 0.5));
  };
  const EvenField coarse = dno_at(48, 24);
  const EvenField fine = dno_at(96, 48);
  CHECK((fine.coeffs().head(49) - coarse.coeffs()).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fine.coeffs().tail(48).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("interior derivative agrees with finite differences of the field", "[layer]") {
  const EvenField trace = EvenField::mode(grid, 1, 0.4) + EvenField::mode(grid, 2, -0.2);
  const LayerSolution sol = solver.solve(wavy(Layer::lower), trace);
  const Point p{0.4, -0.45};
  const double h = 1e-5;
  const double fd = (sol.value({p.x, p.y + h}) - sol.value({p.x, p.y - h})) / (2 * h);
  CHECK_THAT(sol.dy(p, 0.05), WithinAbs(fd, 1e-6));
  const double fdx = (sol.value({p.x + h, p.y}) - sol.value({p.x - h, p.y})) / (2 * h);
  CHECK_THAT(sol.dx(p, 0.05), WithinAbs(fdx, 1e-6));
}

TEST_CASE("shape derivatives", "[layer]") {
  const LayerGeometry geom = wavy(Layer::upper);
  const EvenField trace = EvenField::mode(grid, 1, 0.3) + EvenField::mode(grid, 3, 0.1);
  const EvenField dir = EvenField::mode(grid, 2, 0.05) + EvenField::constant(grid, 0.02);

  CHECK(solver.shape_derivative_dno(geom, trace, EvenField::zero(grid)).coeffs().cwiseAbs().maxCoeff() == 0.0);

  const EvenField one = solver.shape_derivative_dno(geom, trace, dir);
  const EvenField two = solver.shape_derivative_dno(geom, trace, 2.0 * dir);
  CHECK((two.coeffs() - 2.0 * one.coeffs()).norm() < 1e-6 * one.coeffs().norm());

  // The linearized operator agrees with the finite difference.
  const LayerLinearization lin = solver.linearize(geom, trace, Point{0.0, 0.5});
  // Rows of the linearization are half-grid nodes.
  const Eigen::VectorXd exact = lin.dno_shape * dir.coeffs();
  CHECK((exact - one.half_values()).norm() < 1e-7 * exact.norm());
  const double probe = lin.probe_shape * dir.coeffs();
  CHECK_THAT(solver.shape_derivative_interior_dy(geom, trace, dir, {0.0, 0.5}), WithinAbs(probe, 1e-7));

  // Halving the step reduces the truncation error by about four.
  const double h = 1e-2;
  const double e1 = (solver.shape_derivative_dno(geom, trace, dir, h).half_values() - exact).norm();
  const double e2 = (solver.shape_derivative_dno(geom, trace, dir, h / 2).half_values() - exact).norm();
  CHECK_THAT(e1 / e2, WithinAbs(4.0, 0.2));
}

TEST_CASE("linearization outputs agree with direct evaluations", "[layer]") {
  const LayerGeometry geom = wavy(Layer::lower);
  const EvenField trace = EvenField::mode(grid, 1, 0.3);
  const LayerLinearization lin = solver.linearize(geom, trace, Point{0.0, -0.5});
  CHECK((lin.dno - solver.dno(geom, trace).half_values()).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd g5 = solver.dno(geom, EvenField::mode(grid, 5)).coeffs();
  CHECK((lin.dno_trace.col(5) - EvenField(pi, g5).half_values()).cwiseAbs().maxCoeff() < 1e-11);
  CHECK_THAT(lin.probe_dy, WithinAbs(solver.interior_dy(geom, trace, {0.0, -0.5}), 1e-12));
}

TEST_CASE("guards", "[layer]") {
  const LayerGeometry thin{Layer::lower, 1.0, EvenField::constant(grid, -0.99)};
  CHECK_THROWS_AS(solver.solve(thin, EvenField::constant(grid, 1.0)), DegenerateStrip);
  const LayerSolution sol = solver.solve(flat(Layer::lower), EvenField::mode(grid, 1));
  CHECK_THROWS_AS(sol.dy({0.0, -0.01}, 0.05), PointOutsideLayer);
  CHECK_THROWS_AS(sol.dy({0.0, 0.3}, 0.05), PointOutsideLayer);
}
