#include "vwave/validation.hpp"

#include "vwave/chebyshev.hpp"
#include "vwave/config.hpp"
#include "vwave/continuation.hpp"
#include "vwave/errors.hpp"
#include "vwave/layer.hpp"

#include <fmt/format.h>

#include <cmath>
#include <functional>

namespace vw {

using Eigen::MatrixXd;
using Eigen::VectorXd;

WaveState random_state(const CollocationGrid& grid, std::mt19937_64& rng, double amplitude,
                       double depth, int active) {
  std::normal_distribution<double> normal;
  const int nx = grid.n_modes() + 1;
  VectorXd a = VectorXd::Zero(nx), b = VectorXd::Zero(nx), c = VectorXd::Zero(nx);
  for (int k = 0; k < std::min(active, nx); ++k) {
    const double decay = 1.0 / (1.0 + k * k);
    a[k] = amplitude * depth * normal(rng) * decay;
    b[k] = 2.5 * amplitude * normal(rng) * decay;
    c[k] = 2.5 * amplitude * normal(rng) * decay;
  }
  WaveState s;
  s.eta = EvenField(grid.half_period(), a);
  s.xi_bar = EvenField(grid.half_period(), b);
  s.xi = EvenField(grid.half_period(), c);
  s.c = 5.0 * amplitude * normal(rng);
  return s;
}

namespace {

CheckResult check(std::string name, double value, double bound) {
  return {std::move(name), value < bound, fmt::format("{:.3e} < {:.1e}", value, bound)};
}

CheckResult guarded(const std::string& name, const std::function<CheckResult()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return {name, false, fmt::format("threw: {}", e.what())};
  }
}

double relative(const VectorXd& a, const VectorXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

std::vector<CheckResult> run_validation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  const CollocationGrid grid(pi, 16);

  out.push_back(guarded("spectral: cosine interpolation round trip", [&] {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorXd coeffs(grid.n_modes() + 1);
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs[k] = u(rng);
    const EvenField f(pi, coeffs);
    const VectorXd v = f.values();
    const EvenField g = to_even_coeffs(grid, std::span<const double>(v.data(), v.size()));
    return check("spectral: cosine interpolation round trip", (g.coeffs() - coeffs).cwiseAbs().maxCoeff(), 1e-13);
  }));

  out.push_back(guarded("spectral: derivative of cos(3x)", [&] {
    const OddField d = ddx(EvenField::mode(grid, 3));
    double err = 0.0;
    for (int k = 0; k <= grid.n_modes(); ++k) err = std::max(err, std::abs(d[k] - (k == 3 ? -3.0 : 0.0)));
    return check("spectral: derivative of cos(3x)", err, 1e-13);
  }));

  out.push_back(guarded("chebyshev: exact on cubics", [&] {
    const ChebyshevLobatto cheb(12);
    const VectorXd s = cheb.nodes();
    const VectorXd f = s.array().cube();
    const double e1 = (cheb.d1() * f - 3.0 * s.array().square().matrix()).cwiseAbs().maxCoeff();
    const double e2 = (cheb.d2() * f - 6.0 * s).cwiseAbs().maxCoeff();
    return check("chebyshev: exact on cubics", std::max(e1, e2), 1e-11);
  }));

  out.push_back(guarded("vortex: free-space c1 of the ±0.5 pair", [&] {
    const double v = c1(VortexPair{}, KernelChoice::free_space, pi);
    return check("vortex: free-space c1 of the ±0.5 pair", std::abs(v + 1.0 / (2.0 * pi)), 1e-14);
  }));

  out.push_back(guarded("layer: flat Dirichlet-Neumann symbol", [&] {
    const LayerSolver solver(grid, LayerSolverOptions{.vertical = 12});
    double err = 0.0;
    for (const Layer which : {Layer::lower, Layer::upper}) {
      const LayerGeometry geom{which, 1.0, EvenField::zero(grid)};
      for (int k = 0; k <= grid.n_modes(); ++k) {
        const double kappa = grid.wavenumber(k);
        const double exact = k == 0 ? 1.0 : kappa / std::tanh(kappa);
        const EvenField g = solver.dno(geom, EvenField::mode(grid, k));
        err = std::max(err, std::abs(g[k] - exact) / exact);
      }
    }
    return check("layer: flat Dirichlet-Neumann symbol", err, 1e-10);
  }));

  const PhysicalParameters params;
  const WaveSystem system(params, Discretization{16, 12});
  const WaveState origin = WaveState::zero(system.grid());

  out.push_back(guarded("wave_system: origin is a solution", [&] {
    return check("wave_system: origin is a solution", system.residual(origin, 0.0).max_block_norm(), 1e-12);
  }));

  out.push_back(guarded("wave_system: origin Jacobian equals flat multipliers", [&] {
    const MatrixXd j = system.jacobian(origin, 0.0);
    return check("wave_system: origin Jacobian equals flat multipliers",
                 (j - system.flat_linearization()).cwiseAbs().maxCoeff(), 1e-9);
  }));

  const WaveState sample = random_state(system.grid(), rng, 0.02, params.depth);
  const double eps = 0.05;

  out.push_back(guarded("wave_system: analytic vs finite-difference Jacobian", [&] {
    const MatrixXd ja = system.jacobian(sample, eps);
    const MatrixXd jf = system.jacobian(sample, eps, JacobianMode::finite_difference);
    return check("wave_system: analytic vs finite-difference Jacobian", (ja - jf).norm() / jf.norm(), 1e-5);
  }));

  out.push_back(guarded("wave_system: eps derivative vs finite difference", [&] {
    const double h = 1e-6;
    const VectorXd fd =
        (system.residual(sample, eps + h).pack() - system.residual(sample, eps - h).pack()) / (2.0 * h);
    return check("wave_system: eps derivative vs finite difference",
                 relative(system.d_eps(sample, eps).pack(), fd), 1e-7);
  }));

  out.push_back(guarded("wave_system: vortex on the axis feels no horizontal drift", [&] {
    return check("wave_system: vortex on the axis feels no horizontal drift",
                 std::abs(system.vertical_equilibrium(sample, eps)), 1e-10);
  }));

  out.push_back(guarded("continuation: flat determinant sign", [&] {
    const int sign = determinant_info(system.flat_linearization()).sign;
    const bool ok = sign == system.flat_determinant_sign() && sign != 0;
    return CheckResult{"continuation: flat determinant sign", ok,
                       fmt::format("LU sign {} closed form {}", sign, system.flat_determinant_sign())};
  }));

  out.push_back(guarded("continuation: toy fold has one parity change", [&] {
    ContinuationSettings s;
    s.ds_max = 0.1;
    s.newton_max = 12;
    const FoldProblem fold;
    const auto path = trace_path(fold, VectorXd{{-1.0, -1.0}}, 1.0, -1, 40, 0.1, s);
    std::vector<int> signs;
    for (const PathPoint& p : path) signs.push_back(determinant_info(p.lin.jacobian).sign);
    const std::size_t changes = parity_monitor(signs).size();
    return CheckResult{"continuation: toy fold has one parity change", changes == 1,
                       fmt::format("{} sign changes", changes)};
  }));

  out.push_back(guarded("continuation: short branch converges", [&] {
    ContinuationSettings s;
    s.max_steps = 3;
    const Branch b = continue_branch(system, s, 1);
    const bool ok = b.termination == Alternative::max_steps_reached && b.points.size() == 4;
    return CheckResult{"continuation: short branch converges", ok,
                       fmt::format("{} points, {}", b.points.size(), to_string(b.termination))};
  }));

  out.push_back(guarded("config: defaults and rejected inputs", [&] {
    const RunConfig c = load_config("");
    bool ok = c.discretization.n_modes == 64 && c.physical.rho_bar == 0.9;
    for (const char* bad : {"[physical]\nrho_bar = 1.2\n", "[discretization]\nN = 7\n", "[physical]\nfoo = 1\n"}) {
      try {
        load_config(bad);
        ok = false;
      } catch (const Error&) {
      }
    }
    ok = ok && load_config(echo_config(c)).physical.rho_bar == c.physical.rho_bar;
    return CheckResult{"config: defaults and rejected inputs", ok, ""};
  }));

  return out;
}

bool report(const std::vector<CheckResult>& results, std::ostream& out) {
  bool all = true;
  for (const CheckResult& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) out << " (" << r.detail << ")";
    out << '\n';
    all = all && r.passed;
  }
  out << (all ? "all checks passed" : "some checks failed") << '\n';
  return all;
}

}  // namespace vw
