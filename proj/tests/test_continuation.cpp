#include "catch_amalgamated.hpp"

#include "vwave/continuation.hpp"
#include "vwave/errors.hpp"

#include <cmath>

using namespace vw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const PhysicalParameters defaults;
const WaveSystem small(defaults, Discretization{16, 12});
const WaveProblem problem(small);

}  // namespace

TEST_CASE("settings invariants", "[continuation]") {
  ContinuationSettings s;
  CHECK_NOTHROW(s.validate());
  s.ds0 = 1e-2;
  s.ds_max = 1e-3;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = ContinuationSettings{};
  s.newton_tol = 0.0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("Newton returns the origin untouched", "[continuation]") {
  const NewtonResult r = newton_solve(problem, VectorXd::Zero(small.dimension()), 0.0, ContinuationSettings{});
  CHECK(r.iterations == 0);
  CHECK(r.x.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Newton from the origin at small eps", "[continuation]") {
  const NewtonResult r = newton_solve(problem, VectorXd::Zero(small.dimension()), 1e-3, ContinuationSettings{});
  CHECK(r.iterations <= 5);
  CHECK(r.residual_norm <= 1e-10);
  const WaveState s = WaveState::unpack(small.grid(), r.x);
  CHECK(sup_norm(s.eta) < 1.0 * 1e-3 * 1e-3);
}

TEST_CASE("guard violation stops Newton before iterating", "[continuation]") {
  WaveState s = WaveState::zero(small.grid());
  s.eta = EvenField::constant(small.grid(), -0.47);
  CHECK_THROWS_AS(newton_solve(problem, s.pack(), 0.01, ContinuationSettings{}), VortexTooClose);
}

TEST_CASE("tangent at the origin matches block substitution", "[continuation]") {
  const PathPoint p = start_path(problem, VectorXd::Zero(small.dimension()), 0.0, 1);
  const int n = small.dimension();
  REQUIRE(p.tangent[n] > 0.0);
  // X' = -J^{-1} dF/deps with the flat Jacobian.
  const MatrixXd j = small.flat_linearization();
  const VectorXd de = small.d_eps(WaveState::zero(small.grid()), 0.0).pack();
  const VectorXd xp = -j.partialPivLu().solve(de);
  const VectorXd t = p.tangent.head(n) / p.tangent[n];
  CHECK((t - xp).cwiseAbs().maxCoeff() < 1e-8);
  const int nx = small.grid().n_modes() + 1;
  CHECK(t.head(nx).cwiseAbs().maxCoeff() < 1e-12);

  // Scaling the bordered system leaves the tangent unchanged.
  ProblemLinearization scaled = p.lin;
  scaled.jacobian *= 2.0;
  scaled.d_eps *= 2.0;
  const VectorXd t2 = tangent(scaled, p.tangent, problem.arclength_weights());
  CHECK((t2 - p.tangent).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("speed on the branch tends to the tangent slope", "[continuation]") {
  const int n = small.dimension();
  const PathPoint p = start_path(problem, VectorXd::Zero(n), 0.0, 1);
  const double slope = p.tangent[n - 1] / p.tangent[n];
  const double eps = 1e-4;
  const NewtonResult r = newton_solve(problem, VectorXd::Zero(n), eps, ContinuationSettings{});
  CHECK_THAT(r.x[n - 1] / eps, WithinRel(slope, 1e-4));
}

TEST_CASE("toy fold problem has one parity change", "[continuation]") {
  ContinuationSettings s;
  s.ds_max = 0.1;
  s.newton_max = 12;
  const FoldProblem fold;
  const auto path = trace_path(fold, VectorXd{{-1.0, -1.0}}, 1.0, -1, 40, 0.1, s);
  std::vector<int> signs;
  for (const PathPoint& p : path) {
    CHECK(fold.residual(p.x, p.eps).norm() < 1e-10);
    signs.push_back(determinant_info(p.lin.jacobian).sign);
  }
  CHECK(path.front().eps > path[5].eps);
  CHECK(path.back().x[0] > 0.5);
  CHECK(parity_monitor(signs).size() == 1);
}

TEST_CASE("parity monitor skips flagged points", "[continuation]") {
  CHECK(parity_monitor({1, 1, 0, 1, -1, 0, -1}) == std::vector<std::size_t>{4});
  CHECK(parity_monitor({-1, 0, 1}) == std::vector<std::size_t>{2});
  CHECK(parity_monitor({}).empty());
}

TEST_CASE("determinant sign", "[continuation]") {
  CHECK(determinant_info(MatrixXd{{0.0, 1.0}, {1.0, 0.0}}).sign == -1);
  CHECK(determinant_info(MatrixXd{{2.0, 0.0}, {0.0, 3.0}}).sign == 1);
  CHECK(determinant_info(MatrixXd{{1.0, 1.0}, {1.0, 1.0}}).sign == 0);
  const int sign = determinant_info(small.flat_linearization()).sign;
  CHECK(sign == small.flat_determinant_sign());
  CHECK(sign == ((small.grid().n_modes() + 1) % 2 == 0 ? 1 : -1));
}

TEST_CASE("termination classification", "[continuation]") {
  const ContinuationSettings s;
  const Guards g = Guards::for_depth(1.0);
  StopEvidence e;
  CHECK(classify_termination(e, s, g, 1.0) == Alternative::max_steps_reached);
  e.newton_failed = true;
  CHECK(classify_termination(e, s, g, 1.0) == Alternative::newton_failure);
  e.norm = 2 * s.norm_cap;
  CHECK(classify_termination(e, s, g, 1.0) == Alternative::unbounded);
  e.eta_sup = 1.0 - g.gap_floor / 2;
  CHECK(classify_termination(e, s, g, 1.0) == Alternative::interface_touches_boundary);
  e.min_vortex_distance = g.vortex_distance / 2;
  CHECK(classify_termination(e, s, g, 1.0) == Alternative::vortex_near_interface);

  CHECK(exit_code(Alternative::max_steps_reached) == 0);
  CHECK(exit_code(Alternative::newton_failure) == 3);
  CHECK(exit_code(Alternative::unbounded) == 4);
  CHECK(exit_code(Alternative::interface_touches_boundary) == 4);
  CHECK(exit_code(Alternative::vortex_near_interface) == 4);
  CHECK(std::string(to_string(Alternative::vortex_near_interface)) == "VortexNearInterface");
}

TEST_CASE("tiny norm cap ends the branch as unbounded", "[continuation]") {
  ContinuationSettings s;
  s.norm_cap = 1e-6;
  const Branch b = continue_branch(small, s, 1);
  CHECK(b.termination == Alternative::unbounded);
  CHECK(b.points.size() == 2);
}

TEST_CASE("short branches in both directions", "[continuation]") {
  ContinuationSettings s;
  s.max_steps = 6;
  const Branch plus = continue_branch(small, s, 1);
  const Branch minus = continue_branch(small, s, -1);
  REQUIRE(plus.points.size() == 7);
  REQUIRE(minus.points.size() == 7);
  CHECK(plus.points[0].eps == 0.0);
  CHECK(plus.points[0].state.pack().cwiseAbs().maxCoeff() == 0.0);
  double prev = 0.0;
  for (std::size_t i = 1; i < plus.points.size(); ++i) {
    const BranchPoint& p = plus.points[i];
    CHECK(p.eps > prev);
    prev = p.eps;
    CHECK(p.diagnostics.residual_norm <= s.newton_tol);
    CHECK(p.diagnostics.newton_iterations <= 6);
    CHECK(p.diagnostics.det_sign == plus.points[0].diagnostics.det_sign);
    CHECK(minus.points[i].eps < 0.0);
  }
  // Mirror symmetry of the default pair: (eta, xi_bar, xi, c) -> (eta, -xi_bar, -xi, -c) at -eps.
  const BranchPoint& a = plus.points[3];
  const WaveProblem wp(small);
  WaveState m = a.state;
  m.xi_bar = -m.xi_bar;
  m.xi = -m.xi;
  m.c = -m.c;
  CHECK(wp.residual_norm(wp.residual(m.pack(), -a.eps)) < 1e-10);
}

TEST_CASE("chord solve on a refined grid", "[continuation]") {
  const NewtonResult coarse = newton_solve(problem, VectorXd::Zero(small.dimension()), 5e-3, ContinuationSettings{});
  const WaveState s = WaveState::unpack(small.grid(), coarse.x);
  const WaveSystem fine(defaults, Discretization{32, 24});
  const NewtonResult r = refine_solution(small, s, 5e-3, small.jacobian(s, 5e-3), fine, 1e-11);
  CHECK(r.residual_norm <= 1e-11);
  CHECK_THAT(r.x[fine.dimension() - 1], WithinRel(coarse.x[small.dimension() - 1], 1e-6));
}
