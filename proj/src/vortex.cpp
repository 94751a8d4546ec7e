#include "vwave/vortex.hpp"

#include "vwave/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace vw {

namespace {

constexpr double inv_four_pi = 1.0 / (4.0 * pi);

KernelJet free_space_jet(Point p, double tol_sing) {
  const double r2 = p.x * p.x + p.y * p.y;
  if (std::sqrt(r2) < tol_sing)
    throw SingularEvaluation(fmt::format("log kernel evaluated at ({}, {})", p.x, p.y));
  const double r4 = r2 * r2;
  KernelJet j;
  j.value = inv_four_pi * std::log(r2);
  j.dx = p.x / (2.0 * pi * r2);
  j.dy = p.y / (2.0 * pi * r2);
  j.dxx = (p.y * p.y - p.x * p.x) / (2.0 * pi * r4);
  j.dxy = -2.0 * p.x * p.y / (2.0 * pi * r4);
  j.dyy = -j.dxx;
  return j;
}

KernelJet periodic_jet(Point p, double half_period, double tol_sing) {
  // distance to the nearest lattice point (2Lm, 0)
  const double period = 2.0 * half_period;
  const double xr = p.x - period * std::round(p.x / period);
  if (std::hypot(xr, p.y) < tol_sing)
    throw SingularEvaluation(fmt::format("periodic log kernel evaluated at ({}, {})", p.x, p.y));

  const double k = pi / half_period;
  const double a = k * p.y;
  const double b = k * p.x;
  // cosh a - cos b without cancellation near the singularity
  const double sh = std::sinh(0.5 * a);
  const double sn = std::sin(0.5 * b);
  const double d = 2.0 * (sh * sh + sn * sn);
  const double d2 = d * d;
  KernelJet j;
  j.value = inv_four_pi * std::log(d);
  j.dx = inv_four_pi * k * std::sin(b) / d;
  j.dy = inv_four_pi * k * std::sinh(a) / d;
  j.dxx = inv_four_pi * k * k * (std::cos(b) * std::cosh(a) - 1.0) / d2;
  j.dxy = -inv_four_pi * k * k * std::sin(b) * std::sinh(a) / d2;
  j.dyy = -j.dxx;
  return j;
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

void VortexPair::validate(double depth) const {
  if (lower.x != 0.0 || upper.x != 0.0)
    throw ValidationError("vortex centers must lie on the symmetry axis x = 0");
  if (!(-depth < lower.y && lower.y < upper.y && upper.y < depth))
    throw ValidationError(fmt::format(
        "vortex heights must satisfy -d < y0 < ybar0 < d (got y0 = {}, ybar0 = {}, d = {})",
        lower.y, upper.y, depth));
}

const char* to_string(KernelChoice k) {
  return k == KernelChoice::free_space ? "free_space" : "periodized";
}

KernelChoice kernel_from_string(const std::string& name) {
  if (name == "free_space") return KernelChoice::free_space;
  if (name == "periodized") return KernelChoice::periodized;
  throw ValidationError(fmt::format("unknown kernel '{}' (expected free_space or periodized)", name));
}

double gamma(Point p, double tol_sing) { return free_space_jet(p, tol_sing).value; }

Point gamma_grad(Point p, double tol_sing) {
  const KernelJet j = free_space_jet(p, tol_sing);
  return {j.dx, j.dy};
}

double periodic_gamma(Point p, double half_period, double tol_sing) {
  return periodic_jet(p, half_period, tol_sing).value;
}

Point periodic_gamma_grad(Point p, double half_period, double tol_sing) {
  const KernelJet j = periodic_jet(p, half_period, tol_sing);
  return {j.dx, j.dy};
}

KernelJet kernel_jet(KernelChoice kernel, Point p, double half_period, double tol_sing) {
  return kernel == KernelChoice::free_space ? free_space_jet(p, tol_sing)
                                            : periodic_jet(p, half_period, tol_sing);
}

VortexTraces vortex_traces_at(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                              const VortexPair& pair, KernelChoice kernel, double half_period,
                              const VortexGuard& guard) {
  const Eigen::Index n = xs.size();
  VortexTraces t;
  for (auto* v : {&t.phi, &t.phi_x, &t.phi_y, &t.phi_xy, &t.phi_yy, &t.phi_bar, &t.phi_bar_x,
                  &t.phi_bar_y, &t.phi_bar_xy, &t.phi_bar_yy})
    v->resize(n);

  t.min_distance = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Point p{xs[j], ys[j]};
    t.min_distance = std::min({t.min_distance, distance(p, pair.lower), distance(p, pair.upper)});
  }
  if (t.min_distance <= guard.min_distance)
    throw VortexTooClose(fmt::format("interface within {:.3e} of a vortex center (guard {:.3e})",
                                     t.min_distance, guard.min_distance));

  for (Eigen::Index j = 0; j < n; ++j) {
    const Point p{xs[j], ys[j]};
    const KernelJet a = kernel_jet(kernel, p - pair.lower, half_period, guard.singular_radius);
    const KernelJet b = kernel_jet(kernel, p - pair.upper, half_period, guard.singular_radius);
    t.phi[j] = a.value - b.value;
    t.phi_x[j] = a.dx - b.dx;
    t.phi_y[j] = a.dy - b.dy;
    t.phi_xy[j] = a.dxy - b.dxy;
    t.phi_yy[j] = a.dyy - b.dyy;
    t.phi_bar[j] = -t.phi[j];
    t.phi_bar_x[j] = -t.phi_x[j];
    t.phi_bar_y[j] = -t.phi_y[j];
    t.phi_bar_xy[j] = -t.phi_xy[j];
    t.phi_bar_yy[j] = -t.phi_yy[j];
  }
  return t;
}

VortexTraces vortex_traces(const EvenField& eta, const VortexPair& pair, KernelChoice kernel,
                           const CollocationGrid& grid, const VortexGuard& guard) {
  // The centers sit on the axis; the interface must pass above z and below z_bar there.
  if (!(pair.lower.y < eta(pair.lower.x)) || !(eta(pair.upper.x) < pair.upper.y))
    throw VortexTooClose("interface crossed a vortex center");
  return vortex_traces_at(grid.nodes(), eta.values(), pair, kernel, grid.half_period(), guard);
}

double min_vortex_distance(const EvenField& eta, const VortexPair& pair) {
  const CollocationGrid grid = eta.grid();
  const Eigen::VectorXd xs = grid.nodes();
  const Eigen::VectorXd ys = eta.values();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < xs.size(); ++j) {
    const Point p{xs[j], ys[j]};
    best = std::min({best, distance(p, pair.lower), distance(p, pair.upper)});
  }
  return best;
}

double c1(const VortexPair& pair, KernelChoice kernel, double half_period, double tol_sing) {
  return kernel_jet(kernel, pair.lower - pair.upper, half_period, tol_sing).dy;
}

}  // namespace vw
