#pragma once

// Periodic cosine/sine collocation on [-L, L).
//
// A grid with N modes has 2N equispaced nodes x_j = -L + jL/N. Even fields are
// stored as cosine coefficients a_0..a_N, odd fields as sine coefficients
// b_1..b_N. Because every field in the solver is even or odd, most internal
// work happens on the "half grid" x_i = iL/N, i = 0..N, which determines a
// field of known parity completely.

#include <Eigen/Dense>

#include <numbers>
#include <span>

namespace vw {

inline constexpr double pi = std::numbers::pi;

class CollocationGrid {
 public:
  /// Throws std::invalid_argument unless half_period > 0 and n_modes is even and >= 8.
  CollocationGrid(double half_period, int n_modes);

  double half_period() const noexcept { return half_period_; }
  int n_modes() const noexcept { return n_modes_; }
  int size() const noexcept { return 2 * n_modes_; }

  double node(int j) const noexcept { return (j - n_modes_) * half_period_ / n_modes_; }
  Eigen::VectorXd nodes() const;
  Eigen::VectorXd half_nodes() const;

  double wavenumber(int k) const noexcept { return k * pi / half_period_; }

  friend bool operator==(const CollocationGrid&, const CollocationGrid&) = default;

 private:
  double half_period_;
  int n_modes_;
};

/// a_0 + sum_{k=1..N} a_k cos(k pi x / L)
class EvenField {
 public:
  EvenField() = default;
  EvenField(double half_period, Eigen::VectorXd coeffs);

  static EvenField zero(const CollocationGrid& grid);
  static EvenField mode(const CollocationGrid& grid, int k, double amplitude = 1.0);
  static EvenField constant(const CollocationGrid& grid, double value);

  double half_period() const noexcept { return half_period_; }
  int n_modes() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  CollocationGrid grid() const { return {half_period_, n_modes()}; }

  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
  double operator[](int k) const { return coeffs_[k]; }

  double operator()(double x) const;
  /// Values on the full 2N-node grid.
  Eigen::VectorXd values() const;
  /// Values on x_i = iL/N, i = 0..N.
  Eigen::VectorXd half_values() const;

  EvenField& operator+=(const EvenField& other);
  EvenField& operator-=(const EvenField& other);
  EvenField& operator*=(double s);

  friend EvenField operator+(EvenField a, const EvenField& b) { return a += b; }
  friend EvenField operator-(EvenField a, const EvenField& b) { return a -= b; }
  friend EvenField operator*(EvenField a, double s) { return a *= s; }
  friend EvenField operator*(double s, EvenField a) { return a *= s; }
  friend EvenField operator-(EvenField a) { return a *= -1.0; }

 private:
  double half_period_ = 1.0;
  Eigen::VectorXd coeffs_;
};

/// sum_{k=1..N} b_k sin(k pi x / L). coeffs()[0] is kept at zero so that
/// coeffs()[k] is b_k.
class OddField {
 public:
  OddField() = default;
  OddField(double half_period, Eigen::VectorXd coeffs);

  static OddField zero(const CollocationGrid& grid);

  double half_period() const noexcept { return half_period_; }
  int n_modes() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
  double operator[](int k) const { return coeffs_[k]; }

  double operator()(double x) const;
  Eigen::VectorXd values() const;
  Eigen::VectorXd half_values() const;

 private:
  double half_period_ = 1.0;
  Eigen::VectorXd coeffs_;
};

inline constexpr double default_parity_tolerance = 1e-10;

/// Fraction of the sample energy carried by the odd part (values on the full grid).
double odd_energy_fraction(std::span<const double> values);
double even_energy_fraction(std::span<const double> values);

/// Trigonometric interpolant of full-grid samples. Throws ParityViolation when the
/// opposite-parity energy exceeds tol_parity times the total.
EvenField to_even_coeffs(const CollocationGrid& grid, std::span<const double> values,
                         double tol_parity = default_parity_tolerance);
OddField to_odd_coeffs(const CollocationGrid& grid, std::span<const double> values,
                       double tol_parity = default_parity_tolerance);

/// Interpolant of half-grid samples; parity holds by construction.
EvenField even_from_half_values(const CollocationGrid& grid, const Eigen::VectorXd& half_values);

OddField ddx(const EvenField& f);
EvenField ddx(const OddField& f);

/// Coefficient-wise multiplication a_k -> m_k a_k, k = 0..N.
EvenField apply_multiplier(std::span<const double> symbol, const EvenField& f);

template <class Symbol>
  requires std::invocable<Symbol, int>
EvenField apply_multiplier(Symbol&& symbol, const EvenField& f) {
  Eigen::VectorXd m(f.n_modes() + 1);
  for (int k = 0; k <= f.n_modes(); ++k) m[k] = symbol(k);
  return apply_multiplier(std::span<const double>(m.data(), m.size()), f);
}

/// Integral of f g over one period.
double inner_product(const EvenField& f, const EvenField& g);
/// sqrt( sum_k w_k (1 + (k pi/L)^2)^s a_k^2 ), w_0 = 2L, w_k = L.
double sobolev_norm(const EvenField& f, int s = 3);
double sup_norm(const EvenField& f);

/// Zeroes modes k > 2N/3.
EvenField truncate_upper_third(const EvenField& f);
/// Pointwise product on the 2N-node grid, optionally followed by the 2/3 truncation.
EvenField product(const EvenField& f, const EvenField& g, bool dealias = false);

/// Collocation matrices on the half grid. Rows are nodes x_i = iL/N, i = 0..N.
namespace collocation {

/// values = synthesis * coeffs
Eigen::MatrixXd cosine_synthesis(const CollocationGrid& grid);
/// coeffs = analysis * values (inverse of cosine_synthesis)
Eigen::MatrixXd cosine_analysis(const CollocationGrid& grid);
/// Derivative values (odd) at half nodes from even half-node values.
Eigen::MatrixXd first_derivative(const CollocationGrid& grid);
Eigen::MatrixXd second_derivative(const CollocationGrid& grid);
/// Row vector w with w * half_values = d^order/dx^order of the interpolant at x.
Eigen::RowVectorXd point_weights(const CollocationGrid& grid, double x, int order = 0);

}  // namespace collocation

}  // namespace vw
