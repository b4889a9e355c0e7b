#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

#include "qedbohm/units.hpp"

namespace qedbohm {

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Infinite square well on [0, L]: phi_n(x) = sqrt(2/L) sin((n+1) pi x / L).
///
/// Position matrix elements use the well center as origin, so the diagonal
/// of <n|x|n'> vanishes identically.
class WellBasis {
 public:
  WellBasis(double length, double mass, std::size_t n_levels);

  std::size_t size() const { return n_levels_; }
  double length() const { return length_; }
  double mass() const { return mass_; }

  double wavenumber(std::size_t n) const;
  double energy(std::size_t n) const;
  /// <n|x - L/2|n2> [nm], closed form.
  double dipole(std::size_t n, std::size_t n2) const;

  template <class Scalar>
  Scalar value(std::size_t n, Scalar x) const {
    check(n);
    if (x < Scalar(0) || x > Scalar(length_)) return Scalar(0);
    return Scalar(norm_) * std::sin(Scalar(wavenumber(n)) * x);
  }
  template <class Scalar>
  Scalar derivative(std::size_t n, Scalar x) const {
    check(n);
    if (x < Scalar(0) || x > Scalar(length_)) return Scalar(0);
    const Scalar k(wavenumber(n));
    return Scalar(norm_) * k * std::cos(k * x);
  }
  template <class Scalar>
  Scalar second_derivative(std::size_t n, Scalar x) const {
    const Scalar k(wavenumber(n));
    return -k * k * value(n, x);
  }

 private:
  void check(std::size_t n) const {
    if (n >= n_levels_) throw IndexError("well level index out of range");
  }

  double length_;
  double mass_;
  std::size_t n_levels_;
  double norm_;
};

/// Harmonic oscillator in the dimensionless mode coordinate q, H = hbar w (-d^2/dq^2 + q^2) / 2.
class OscillatorBasis {
 public:
  OscillatorBasis(double omega, std::size_t n_levels);

  std::size_t size() const { return n_levels_; }
  double omega() const { return omega_; }
  double energy(std::size_t m) const;
  /// <k|q|k2> = sqrt(max(k,k2)/2) for |k - k2| = 1.
  double q_element(std::size_t k, std::size_t k2) const;

  /// Hermite functions psi_0..psi_{count-1} at q by upward recurrence.
  template <class Scalar>
  Eigen::Array<Scalar, Eigen::Dynamic, 1> values(Scalar q, std::size_t count) const {
    Eigen::Array<Scalar, Eigen::Dynamic, 1> psi(static_cast<Eigen::Index>(count));
    if (count == 0) return psi;
    using std::exp;
    using std::pow;
    psi(0) = Scalar(std::pow(units::pi, -0.25)) * exp(-q * q / Scalar(2));
    if (count > 1) psi(1) = Scalar(std::sqrt(2.0)) * q * psi(0);
    for (std::size_t m = 1; m + 1 < count; ++m) {
      const auto i = static_cast<Eigen::Index>(m);
      psi(i + 1) = Scalar(std::sqrt(2.0 / double(m + 1))) * q * psi(i) -
                   Scalar(std::sqrt(double(m) / double(m + 1))) * psi(i - 1);
    }
    return psi;
  }

  template <class Scalar>
  Scalar value(std::size_t m, Scalar q) const {
    check(m);
    return values(q, m + 1)(static_cast<Eigen::Index>(m));
  }

  /// d psi_m / dq = sqrt(m/2) psi_{m-1} - sqrt((m+1)/2) psi_{m+1}.
  template <class Scalar>
  Scalar derivative(std::size_t m, Scalar q) const {
    check(m);
    const auto psi = values(q, m + 2);
    const auto i = static_cast<Eigen::Index>(m);
    Scalar d = -Scalar(std::sqrt(double(m + 1) / 2.0)) * psi(i + 1);
    if (m > 0) d += Scalar(std::sqrt(double(m) / 2.0)) * psi(i - 1);
    return d;
  }

 private:
  void check(std::size_t m) const {
    if (m >= n_levels_) throw IndexError("oscillator level index out of range");
  }

  double omega_;
  std::size_t n_levels_;
};

/// Plane-wave pointer basis phi_l(y) = exp(i pi l y / L_y) / sqrt(2 L_y), l = -T..T.
///
/// The modes are periodic over [-L_y, L_y); index i in [0, 2T] maps to mode l = i - T.
class PointerBasis {
 public:
  PointerBasis(double box_length, std::size_t truncation, double mass);

  std::size_t size() const { return 2 * truncation_ + 1; }
  std::size_t truncation() const { return truncation_; }
  double box_length() const { return box_length_; }
  double mass() const { return mass_; }
  double period() const { return 2.0 * box_length_; }
  double domain_min() const { return -box_length_; }
  double domain_max() const { return box_length_; }

  int mode(std::size_t index) const;
  std::size_t index_of(int mode) const;
  double wavenumber(std::size_t index) const;
  double momentum(std::size_t index) const { return units::hbar * wavenumber(index); }
  double energy(std::size_t index) const;
  std::complex<double> value(std::size_t index, double y) const;
  /// All modes at y.
  Eigen::VectorXcd values(double y) const;

 private:
  double box_length_;
  std::size_t truncation_;
  double mass_;
};

struct PointerPacket {
  Eigen::VectorXd coefficients;  // indexed like PointerBasis
  bool degenerate = false;       // weight concentrated in a single mode
};

/// Gaussian superposition c_l ~ exp(-(l - l0)^2 / (4 sigma^2)), unit sum of squares.
PointerPacket pointer_packet(const PointerBasis& basis, double sigma_modes, int center_mode);

/// Spatial standard deviation of |sum_l c_l phi_l(y)|^2 on a fine grid over one period.
double packet_spatial_width(const PointerBasis& basis, const Eigen::VectorXcd& coefficients);

struct LadderCheck {
  double max_abs_deviation = 0.0;  // diagonal energies vs hbar w (a^dag a + 1/2)
  Eigen::MatrixXd commutator;      // [a, a^dag] on the truncated space
};

/// Builds the field Hamiltonian from truncated ladder matrices and compares it
/// with the diagonal form.
LadderCheck ladder_hamiltonian_check(const OscillatorBasis& basis);

Eigen::MatrixXd annihilation_matrix(std::size_t n_levels);

}  // namespace qedbohm
