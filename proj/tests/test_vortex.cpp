#include "catch_amalgamated.hpp"

#include "vwave/errors.hpp"
#include "vwave/spectral.hpp"
#include "vwave/vortex.hpp"

#include <cmath>
#include <random>

using namespace vw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("gamma oracles", "[vortex]") {
  CHECK_THAT(gamma({1.0, 0.0}), WithinAbs(0.0, 1e-16));
  CHECK_THAT(gamma({0.0, std::exp(1.0)}), WithinRel(1.0 / (2.0 * pi), 1e-14));
  CHECK_THAT(gamma({3.0, 4.0}), WithinRel(std::log(5.0) / (2.0 * pi), 1e-14));
  CHECK_THROWS_AS(gamma({0.0, 0.0}), SingularEvaluation);
}

TEST_CASE("gamma_grad oracles", "[vortex]") {
  const double h = 0.37;
  const Point a = gamma_grad({0.0, h});
  CHECK(a.x == 0.0);
  CHECK_THAT(a.y, WithinRel(1.0 / (2.0 * pi * h), 1e-14));
  const Point b = gamma_grad({h, 0.0});
  CHECK_THAT(b.x, WithinRel(1.0 / (2.0 * pi * h), 1e-14));
  CHECK(b.y == 0.0);

  const Point p{0.3, -0.7};
  const double e = 1e-6;
  const double fx = (gamma({p.x + e, p.y}) - gamma({p.x - e, p.y})) / (2 * e);
  const double fy = (gamma({p.x, p.y + e}) - gamma({p.x, p.y - e})) / (2 * e);
  const Point g = gamma_grad(p);
  CHECK(std::hypot(g.x - fx, g.y - fy) / std::hypot(g.x, g.y) < 1e-8);
}

TEST_CASE("periodized kernel", "[vortex]") {
  const double L = 1.3;
  const Point p{0.4, 0.2};
  CHECK_THAT(periodic_gamma({p.x + 2 * L, p.y}, L), WithinAbs(periodic_gamma(p, L), 1e-14));

  double lo = 1e300, hi = -1e300;
  for (double r = 1e-2; r >= 1e-6; r /= 10) {
    const Point q{0.6 * r, 0.8 * r};
    const double diff = periodic_gamma(q, L) - gamma(q);
    lo = std::min(lo, diff);
    hi = std::max(hi, diff);
  }
  CHECK(hi - lo < 1e-4);

  CHECK_THAT(periodic_gamma_grad({0.0, 10 * L}, L).y, WithinAbs(1.0 / (4.0 * L), 1e-10));
  CHECK_THROWS_AS(periodic_gamma({2 * L, 0.0}, L), SingularEvaluation);
}

TEST_CASE("kernels are harmonic away from the singularity", "[vortex]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-3;
  for (int i = 0; i < 20; ++i) {
    const Point p{u(rng), u(rng)};
    if (std::hypot(p.x, p.y) < 0.1) continue;
    for (auto f : {+[](Point q) { return gamma(q); }, +[](Point q) { return periodic_gamma(q, pi); }}) {
      const double lap = (f({p.x + h, p.y}) + f({p.x - h, p.y}) + f({p.x, p.y + h}) + f({p.x, p.y - h}) - 4 * f(p)) / (h * h);
      CHECK(std::abs(lap) < 1e-5);
    }
  }
}

TEST_CASE("c1 oracles", "[vortex]") {
  CHECK_THAT(c1(VortexPair{}, KernelChoice::free_space, pi), WithinRel(-1.0 / (2.0 * pi), 1e-14));
  const double h = 0.3;
  const VortexPair pair{{0.0, -h}, {0.0, h}};
  CHECK_THAT(c1(pair, KernelChoice::free_space, pi), WithinRel(-1.0 / (4.0 * pi * h), 1e-14));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int i = 0; i < 10; ++i) {
    double a = u(rng), b = u(rng);
    if (std::abs(a - b) < 1e-3) continue;
    if (a > b) std::swap(a, b);
    const VortexPair q{{0.0, a}, {0.0, b}};
    CHECK(c1(q, KernelChoice::free_space, pi) < 0.0);
    const VortexPair swapped{{0.0, b}, {0.0, a}};
    CHECK_THAT(c1(swapped, KernelChoice::free_space, pi), WithinRel(-c1(q, KernelChoice::free_space, pi), 1e-14));
  }
}

TEST_CASE("interface traces on the flat interface", "[vortex]") {
  const CollocationGrid g(pi, 16);
  const VortexTraces t = vortex_traces(EvenField::zero(g), VortexPair{}, KernelChoice::free_space, g, VortexGuard{});
  const int mid = g.n_modes();  // node x = 0
  CHECK(g.node(mid) == 0.0);
  CHECK_THAT(t.phi[mid], WithinAbs(0.0, 1e-15));
  CHECK_THAT(t.phi_y[mid], WithinRel(2.0 / pi, 1e-14));
  for (int j = 0; j < g.size(); ++j) CHECK(t.phi_y[j] > 0.0);
  CHECK_THAT(t.min_distance, WithinRel(0.5, 1e-14));
}

TEST_CASE("traces of an even interface have the declared parity", "[vortex]") {
  const CollocationGrid g(pi, 16);
  const EvenField eta = EvenField::mode(g, 1, 0.1) + EvenField::mode(g, 3, -0.03);
  const VortexTraces t = vortex_traces(eta, VortexPair{}, KernelChoice::periodized, g, VortexGuard{});
  auto span = [](const Eigen::VectorXd& v) { return std::span<const double>(v.data(), v.size()); };
  CHECK(odd_energy_fraction(span(t.phi)) < 1e-12);
  CHECK(odd_energy_fraction(span(t.phi_y)) < 1e-12);
  CHECK(odd_energy_fraction(span(t.phi_bar)) < 1e-12);
  CHECK(even_energy_fraction(span(t.phi_x)) < 1e-12);
  CHECK(even_energy_fraction(span(t.phi_bar_x)) < 1e-12);
}

TEST_CASE("interface too close to a vortex is rejected", "[vortex]") {
  const CollocationGrid g(pi, 16);
  const EvenField eta = EvenField::constant(g, -0.47);
  CHECK_THROWS_AS(vortex_traces(eta, VortexPair{}, KernelChoice::periodized, g, VortexGuard{0.05}), VortexTooClose);
  const EvenField crossed = EvenField::constant(g, -0.6);
  CHECK_THROWS_AS(vortex_traces(crossed, VortexPair{}, KernelChoice::periodized, g, VortexGuard{0.05}), VortexTooClose);
}

TEST_CASE("vortex pairs must sit on the axis in the right layers", "[vortex]") {
  CHECK_NOTHROW(VortexPair{}.validate(1.0));
  CHECK_THROWS_AS((VortexPair{{0.1, -0.5}, {0.0, 0.5}}.validate(1.0)), ValidationError);
  CHECK_THROWS_AS((VortexPair{{0.0, 0.5}, {0.0, -0.5}}.validate(1.0)), ValidationError);
  CHECK_THROWS_AS((VortexPair{{0.0, -1.5}, {0.0, 0.5}}.validate(1.0)), ValidationError);
}
