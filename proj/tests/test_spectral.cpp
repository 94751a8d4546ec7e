#include "catch_amalgamated.hpp"

#include "vwave/errors.hpp"
#include "vwave/spectral.hpp"

#include <cmath>
#include <random>

using namespace vw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::VectorXd sample(const CollocationGrid& g, double (*f)(double, double)) {
  const Eigen::VectorXd x = g.nodes();
  Eigen::VectorXd v(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) v[j] = f(x[j], g.half_period());
  return v;
}

EvenField even(const CollocationGrid& g, const Eigen::VectorXd& v) {
  return to_even_coeffs(g, std::span<const double>(v.data(), v.size()));
}

double max_interp_error(int n, double amplitude) {
  const CollocationGrid g(pi, n);
  Eigen::VectorXd v(g.size());
  for (int j = 0; j < g.size(); ++j) v[j] = std::exp(amplitude * std::cos(g.node(j)));
  const EvenField f = even(g, v);
  double err = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double x = -pi + (2.0 * pi) * (i + 0.37) / 200.0;
    err = std::max(err, std::abs(f(x) - std::exp(amplitude * std::cos(x))));
  }
  return err;
}

}  // namespace

TEST_CASE("grid nodes cover one period and are mirror symmetric", "[spectral]") {
  const CollocationGrid g(2.0, 8);
  REQUIRE(g.size() == 16);
  CHECK(g.node(0) == -2.0);
  CHECK_THAT(g.node(15), WithinAbs(2.0 - 0.25, 1e-15));
  for (int j = 1; j < 8; ++j) CHECK(g.node(8 + j) == -g.node(8 - j));
  CHECK_THROWS(CollocationGrid(1.0, 7));
}

TEST_CASE("to_even_coeffs oracles", "[spectral]") {
  const CollocationGrid g(pi, 8);
  const EvenField c1 = even(g, sample(g, [](double x, double L) { return std::cos(pi * x / L); }));
  for (int k = 0; k <= 8; ++k) CHECK_THAT(c1[k], WithinAbs(k == 1 ? 1.0 : 0.0, 1e-14));

  const EvenField three = even(g, sample(g, [](double, double) { return 3.0; }));
  for (int k = 0; k <= 8; ++k) CHECK_THAT(three[k], WithinAbs(k == 0 ? 3.0 : 0.0, 1e-14));

  const EvenField sq = even(g, sample(g, [](double x, double L) {
    const double c = std::cos(pi * x / L);
    return c * c;
  }));
  for (int k = 0; k <= 8; ++k) CHECK_THAT(sq[k], WithinAbs(k == 0 || k == 2 ? 0.5 : 0.0, 1e-14));
}

TEST_CASE("odd samples are rejected as even", "[spectral]") {
  const CollocationGrid g(pi, 8);
  const Eigen::VectorXd v = sample(g, [](double x, double) { return std::sin(x) + std::cos(x); });
  CHECK_THROWS_AS(even(g, v), ParityViolation);
  const Eigen::VectorXd s = sample(g, [](double x, double) { return std::sin(2.0 * x); });
  const OddField f = to_odd_coeffs(g, std::span<const double>(s.data(), s.size()));
  CHECK_THAT(f[2], WithinAbs(1.0, 1e-14));
}

TEST_CASE("round trip of random band-limited fields", "[spectral]") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  const CollocationGrid g(1.7, 32);
  Eigen::VectorXd a(33);
  for (auto& x : a) x = n(rng);
  const EvenField f(1.7, a);
  const EvenField back = even(g, f.values());
  CHECK((back.coeffs() - a).norm() / a.norm() < 1e-13);
  CHECK((even_from_half_values(g, f.half_values()).coeffs() - a).norm() / a.norm() < 1e-13);
}

TEST_CASE("ddx oracles", "[spectral]") {
  const CollocationGrid g(2.5, 16);
  for (int k : {1, 3, 7}) {
    const OddField d = ddx(EvenField::mode(g, k));
    for (int j = 1; j <= 16; ++j) CHECK_THAT(d[j], WithinAbs(j == k ? -g.wavenumber(k) : 0.0, 1e-13));
  }
  const OddField z = ddx(EvenField::constant(g, 4.0));
  CHECK(z.coeffs().cwiseAbs().maxCoeff() < 1e-15);

  const CollocationGrid h(pi, 8);
  const OddField d = ddx(EvenField::mode(h, 1) + EvenField::mode(h, 2));
  CHECK_THAT(d[1], WithinAbs(-1.0, 1e-14));
  CHECK_THAT(d[2], WithinAbs(-2.0, 1e-14));
  const EvenField dd = ddx(d);
  CHECK_THAT(dd[1], WithinAbs(-1.0, 1e-14));
  CHECK_THAT(dd[2], WithinAbs(-4.0, 1e-14));
}

TEST_CASE("apply_multiplier oracles", "[spectral]") {
  const CollocationGrid g(pi, 8);
  const EvenField f = EvenField::mode(g, 2, 1.5) + EvenField::mode(g, 5, -0.25);
  CHECK(apply_multiplier([](int) { return 1.0; }, f).coeffs() == f.coeffs());
  const EvenField lap = apply_multiplier([&](int k) { return -std::pow(g.wavenumber(k), 2); }, f);
  CHECK((lap.coeffs() - ddx(ddx(f)).coeffs()).cwiseAbs().maxCoeff() < 1e-13);
  const double m2 = apply_multiplier([&](int k) { return (0.9 - 1.0) * 1.0 - 0.1 * std::pow(g.wavenumber(k), 2); },
                                     EvenField::mode(g, 2))[2];
  CHECK_THAT(m2, WithinAbs(-0.5, 1e-15));
}

TEST_CASE("norm oracles", "[spectral]") {
  const CollocationGrid g(pi, 8);
  CHECK(sobolev_norm(EvenField::zero(g), 3) == 0.0);
  CHECK_THAT(std::pow(sobolev_norm(EvenField::constant(g, 1.0), 0), 2), WithinRel(2.0 * pi, 1e-14));
  CHECK_THAT(std::pow(sobolev_norm(EvenField::mode(g, 1), 1), 2), WithinRel(2.0 * pi, 1e-14));
  CHECK_THAT(inner_product(EvenField::mode(g, 3), EvenField::mode(g, 3)), WithinRel(pi, 1e-14));
  CHECK_THAT(sup_norm(EvenField::mode(g, 2, -0.7)), WithinAbs(0.7, 1e-15));
}

TEST_CASE("spectral accuracy on analytic functions", "[spectral]") {
  // exp(cos x) is at rounding level already at N = 16; the steeper exp(4 cos x)
  // shows the decay between 16 and 32.
  CHECK(max_interp_error(8, 1.0) / max_interp_error(16, 1.0) >= 1e3);
  CHECK(max_interp_error(16, 4.0) / max_interp_error(32, 4.0) >= 1e3);
}

TEST_CASE("dealiased product zeroes the upper third", "[spectral]") {
  const CollocationGrid g(pi, 12);
  const EvenField f = EvenField::mode(g, 5);
  const EvenField p = product(f, f, true);
  CHECK_THAT(p[0], WithinAbs(0.5, 1e-14));
  CHECK(std::abs(p[10]) < 1e-15);
  CHECK_THAT(product(f, f)[10], WithinAbs(0.5, 1e-14));
}
