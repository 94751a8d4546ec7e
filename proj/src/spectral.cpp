#include "vwave/spectral.hpp"

#include "vwave/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace vw {

namespace {

void require_same_shape(const EvenField& a, const EvenField& b) {
  if (a.n_modes() != b.n_modes() || a.half_period() != b.half_period())
    throw std::invalid_argument("even fields live on different grids");
}

// Quadrature weight of cos^2(k pi x/L) over one period.
double mode_weight(int k, double half_period) { return k == 0 ? 2.0 * half_period : half_period; }

double energy(std::span<const double> v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

// f(pi q / n) for q = 0..2n-1
template <class F>
Eigen::VectorXd angle_table(int n, F f) {
  Eigen::VectorXd t(2 * n);
  for (int q = 0; q < 2 * n; ++q) t[q] = f(pi * q / n);
  return t;
}

int wrap(int q, int n) {
  const int r = q % (2 * n);
  return r < 0 ? r + 2 * n : r;
}

// Index of the node at -x_j on the full grid.
int mirror_index(int j, int size) { return (size - j) % size; }

}  // namespace

CollocationGrid::CollocationGrid(double half_period, int n_modes)
    : half_period_(half_period), n_modes_(n_modes) {
  if (!(half_period > 0.0)) throw std::invalid_argument("half period must be positive");
  if (n_modes < 8 || n_modes % 2 != 0)
    throw std::invalid_argument(fmt::format("n_modes must be even and >= 8 (got {})", n_modes));
}

Eigen::VectorXd CollocationGrid::nodes() const {
  Eigen::VectorXd x(size());
  for (int j = 0; j < size(); ++j) x[j] = node(j);
  return x;
}

Eigen::VectorXd CollocationGrid::half_nodes() const {
  Eigen::VectorXd x(n_modes_ + 1);
  for (int i = 0; i <= n_modes_; ++i) x[i] = i * half_period_ / n_modes_;
  return x;
}

// ---------------------------------------------------------------------------

EvenField::EvenField(double half_period, Eigen::VectorXd coeffs)
    : half_period_(half_period), coeffs_(std::move(coeffs)) {}

EvenField EvenField::zero(const CollocationGrid& grid) {
  return {grid.half_period(), Eigen::VectorXd::Zero(grid.n_modes() + 1)};
}

EvenField EvenField::mode(const CollocationGrid& grid, int k, double amplitude) {
  if (k < 0 || k > grid.n_modes()) throw std::out_of_range("cosine mode index out of range");
  EvenField f = zero(grid);
  f.coeffs_[k] = amplitude;
  return f;
}

EvenField EvenField::constant(const CollocationGrid& grid, double value) {
  return mode(grid, 0, value);
}

double EvenField::operator()(double x) const {
  const double theta = pi * x / half_period_;
  double sum = 0.0;
  for (int k = 0; k <= n_modes(); ++k) sum += coeffs_[k] * std::cos(k * theta);
  return sum;
}

Eigen::VectorXd EvenField::values() const {
  const int n = n_modes();
  const Eigen::VectorXd half = half_values();
  Eigen::VectorXd v(2 * n);
  for (int j = 0; j < 2 * n; ++j) v[j] = half[std::abs(j - n)];
  return v;
}

Eigen::VectorXd EvenField::half_values() const {
  return collocation::cosine_synthesis(grid()) * coeffs_;
}

EvenField& EvenField::operator+=(const EvenField& other) {
  require_same_shape(*this, other);
  coeffs_ += other.coeffs_;
  return *this;
}

EvenField& EvenField::operator-=(const EvenField& other) {
  require_same_shape(*this, other);
  coeffs_ -= other.coeffs_;
  return *this;
}

EvenField& EvenField::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

// ---------------------------------------------------------------------------

OddField::OddField(double half_period, Eigen::VectorXd coeffs)
    : half_period_(half_period), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() > 0) coeffs_[0] = 0.0;
}

OddField OddField::zero(const CollocationGrid& grid) {
  return {grid.half_period(), Eigen::VectorXd::Zero(grid.n_modes() + 1)};
}

double OddField::operator()(double x) const {
  const double theta = pi * x / half_period_;
  double sum = 0.0;
  for (int k = 1; k <= n_modes(); ++k) sum += coeffs_[k] * std::sin(k * theta);
  return sum;
}

Eigen::VectorXd OddField::half_values() const {
  const int n = n_modes();
  Eigen::VectorXd v(n + 1);
  for (int i = 0; i <= n; ++i) {
    double sum = 0.0;
    for (int k = 1; k <= n; ++k) sum += coeffs_[k] * std::sin(pi * k * i / n);
    v[i] = sum;
  }
  return v;
}

Eigen::VectorXd OddField::values() const {
  const int n = n_modes();
  const Eigen::VectorXd half = half_values();
  Eigen::VectorXd v(2 * n);
  for (int j = 0; j < 2 * n; ++j) v[j] = j < n ? -half[n - j] : half[j - n];
  return v;
}

// ---------------------------------------------------------------------------

double odd_energy_fraction(std::span<const double> values) {
  const int size = static_cast<int>(values.size());
  const double total = energy(values);
  if (total == 0.0) return 0.0;
  double odd = 0.0;
  for (int j = 0; j < size; ++j) {
    const double part = 0.5 * (values[j] - values[mirror_index(j, size)]);
    odd += part * part;
  }
  return odd / total;
}

double even_energy_fraction(std::span<const double> values) {
  const int size = static_cast<int>(values.size());
  const double total = energy(values);
  if (total == 0.0) return 0.0;
  double even = 0.0;
  for (int j = 0; j < size; ++j) {
    const double part = 0.5 * (values[j] + values[mirror_index(j, size)]);
    even += part * part;
  }
  return even / total;
}

EvenField to_even_coeffs(const CollocationGrid& grid, std::span<const double> values,
                         double tol_parity) {
  if (static_cast<int>(values.size()) != grid.size())
    throw std::invalid_argument("sample count does not match the grid");
  const double odd = odd_energy_fraction(values);
  if (odd > tol_parity)
    throw ParityViolation(fmt::format("samples declared even carry odd energy fraction {:.3e}", odd));
  const int n = grid.n_modes();
  const Eigen::VectorXd table = angle_table(n, [](double t) { return std::cos(t); });
  Eigen::VectorXd a(n + 1);
  for (int k = 0; k <= n; ++k) {
    double sum = 0.0;
    for (int j = 0; j < 2 * n; ++j) sum += values[j] * table[wrap(k * (j - n), n)];
    a[k] = sum / ((k == 0 || k == n) ? 2.0 * n : n);
  }
  return {grid.half_period(), std::move(a)};
}

OddField to_odd_coeffs(const CollocationGrid& grid, std::span<const double> values,
                       double tol_parity) {
  if (static_cast<int>(values.size()) != grid.size())
    throw std::invalid_argument("sample count does not match the grid");
  const double even = even_energy_fraction(values);
  if (even > tol_parity)
    throw ParityViolation(fmt::format("samples declared odd carry even energy fraction {:.3e}", even));
  const int n = grid.n_modes();
  const Eigen::VectorXd table = angle_table(n, [](double t) { return std::sin(t); });
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  for (int k = 1; k < n; ++k) {
    double sum = 0.0;
    for (int j = 0; j < 2 * n; ++j) sum += values[j] * table[wrap(k * (j - n), n)];
    b[k] = sum / n;
  }
  return {grid.half_period(), std::move(b)};
}

EvenField even_from_half_values(const CollocationGrid& grid, const Eigen::VectorXd& half_values) {
  return {grid.half_period(), collocation::cosine_analysis(grid) * half_values};
}

OddField ddx(const EvenField& f) {
  const CollocationGrid grid = f.grid();
  Eigen::VectorXd b(f.n_modes() + 1);
  for (int k = 0; k <= f.n_modes(); ++k) b[k] = -grid.wavenumber(k) * f[k];
  return {f.half_period(), std::move(b)};
}

EvenField ddx(const OddField& f) {
  const CollocationGrid grid(f.half_period(), f.n_modes());
  Eigen::VectorXd a(f.n_modes() + 1);
  a[0] = 0.0;
  for (int k = 1; k <= f.n_modes(); ++k) a[k] = grid.wavenumber(k) * f[k];
  return {f.half_period(), std::move(a)};
}

EvenField apply_multiplier(std::span<const double> symbol, const EvenField& f) {
  if (static_cast<int>(symbol.size()) != f.n_modes() + 1)
    throw std::invalid_argument("multiplier must be defined for k = 0..N");
  Eigen::VectorXd a = f.coeffs();
  for (int k = 0; k <= f.n_modes(); ++k) a[k] *= symbol[k];
  return {f.half_period(), std::move(a)};
}

double inner_product(const EvenField& f, const EvenField& g) {
  require_same_shape(f, g);
  double sum = 0.0;
  for (int k = 0; k <= f.n_modes(); ++k) sum += mode_weight(k, f.half_period()) * f[k] * g[k];
  return sum;
}

double sobolev_norm(const EvenField& f, int s) {
  if (s < 0) throw std::invalid_argument("Sobolev index must be non-negative");
  const CollocationGrid grid = f.grid();
  double sum = 0.0;
  for (int k = 0; k <= f.n_modes(); ++k) {
    const double kappa = grid.wavenumber(k);
    sum += mode_weight(k, f.half_period()) * std::pow(1.0 + kappa * kappa, s) * f[k] * f[k];
  }
  return std::sqrt(sum);
}

double sup_norm(const EvenField& f) { return f.half_values().cwiseAbs().maxCoeff(); }

EvenField truncate_upper_third(const EvenField& f) {
  Eigen::VectorXd a = f.coeffs();
  const int keep = (2 * f.n_modes()) / 3;
  for (int k = keep + 1; k <= f.n_modes(); ++k) a[k] = 0.0;
  return {f.half_period(), std::move(a)};
}

EvenField product(const EvenField& f, const EvenField& g, bool dealias) {
  require_same_shape(f, g);
  const CollocationGrid grid = f.grid();
  EvenField p = even_from_half_values(grid, f.half_values().cwiseProduct(g.half_values()));
  return dealias ? truncate_upper_third(p) : p;
}

// ---------------------------------------------------------------------------

namespace collocation {

Eigen::MatrixXd cosine_synthesis(const CollocationGrid& grid) {
  const int n = grid.n_modes();
  Eigen::MatrixXd e(n + 1, n + 1);
  // cos(pi k i / n) depends only on k*i mod 2n.
  Eigen::VectorXd table(2 * n);
  for (int q = 0; q < 2 * n; ++q) table[q] = std::cos(pi * q / n);
  for (int i = 0; i <= n; ++i)
    for (int k = 0; k <= n; ++k) e(i, k) = table[(k * i) % (2 * n)];
  return e;
}

Eigen::MatrixXd cosine_analysis(const CollocationGrid& grid) {
  const int n = grid.n_modes();
  Eigen::MatrixXd c = cosine_synthesis(grid).transpose();
  for (int k = 0; k <= n; ++k) {
    c(k, 0) *= 0.5;
    c(k, n) *= 0.5;
    const double scale = (k == 0 || k == n) ? 1.0 / n : 2.0 / n;
    c.row(k) *= scale;
  }
  return c;
}

Eigen::MatrixXd first_derivative(const CollocationGrid& grid) {
  const int n = grid.n_modes();
  Eigen::MatrixXd s(n + 1, n + 1);
  for (int i = 0; i <= n; ++i)
    for (int k = 0; k <= n; ++k) s(i, k) = -grid.wavenumber(k) * std::sin(pi * ((k * i) % (2 * n)) / n);
  return s * cosine_analysis(grid);
}

Eigen::MatrixXd second_derivative(const CollocationGrid& grid) {
  const int n = grid.n_modes();
  Eigen::MatrixXd e = cosine_synthesis(grid);
  for (int k = 0; k <= n; ++k) e.col(k) *= -grid.wavenumber(k) * grid.wavenumber(k);
  return e * cosine_analysis(grid);
}

Eigen::RowVectorXd point_weights(const CollocationGrid& grid, double x, int order) {
  const int n = grid.n_modes();
  Eigen::RowVectorXd basis(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double kappa = grid.wavenumber(k);
    const double arg = kappa * x;
    switch (order) {
      case 0: basis[k] = std::cos(arg); break;
      case 1: basis[k] = -kappa * std::sin(arg); break;
      case 2: basis[k] = -kappa * kappa * std::cos(arg); break;
      default: throw std::invalid_argument("derivative order must be 0, 1 or 2");
    }
  }
  return basis * cosine_analysis(grid);
}

}  // namespace collocation

}  // namespace vw
