#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstddef>
#include <vector>

#include "qedbohm/basis.hpp"
#include "qedbohm/config.hpp"

namespace qedbohm {

struct MultiIndex {
  std::size_t n = 0;  // electron 1 level
  std::size_t m = 0;  // electron 2 level
  std::size_t k = 0;  // photon number
  std::size_t l = 0;  // y-pointer index
  std::size_t s = 0;  // z-pointer index

  bool operator==(const MultiIndex&) const = default;
};

/// Flat index <-> (n, m, k, l, s), with s running fastest.
class MultiIndexSpace {
 public:
  MultiIndexSpace(std::size_t n_electron, std::size_t n_photon, std::size_t n_y, std::size_t n_z);

  std::size_t size() const { return size_; }
  std::size_t n_electron() const { return n_electron_; }
  std::size_t n_photon() const { return n_photon_; }
  std::size_t n_y() const { return n_y_; }
  std::size_t n_z() const { return n_z_; }
  /// Number of (l, s) pointer entries per (n, m, k) block.
  std::size_t pointer_block() const { return n_y_ * n_z_; }
  /// Number of (n, m, k) blocks.
  std::size_t matter_size() const { return n_electron_ * n_electron_ * n_photon_; }

  std::size_t flat(std::size_t n, std::size_t m, std::size_t k, std::size_t l, std::size_t s) const;
  std::size_t flat(const MultiIndex& idx) const { return flat(idx.n, idx.m, idx.k, idx.l, idx.s); }
  MultiIndex tuple(std::size_t i) const;
  /// Block number of (n, m, k); flat(n, m, k, l, s) = block * pointer_block() + l * n_z() + s.
  std::size_t block(std::size_t n, std::size_t m, std::size_t k) const;

  bool is_odd(std::size_t i) const;
  const std::vector<std::size_t>& odd_indices() const { return odd_; }
  const std::vector<std::size_t>& even_indices() const { return even_; }

 private:
  std::size_t n_electron_, n_photon_, n_y_, n_z_;
  std::size_t size_;
  std::vector<std::size_t> odd_;
  std::vector<std::size_t> even_;
};

inline constexpr std::size_t kMaxFlatSize = 10'000'000;

/// Pointer dimensions collapse to one mode each when measurement is disabled.
MultiIndexSpace build_space(const ScenarioConfig& cfg, std::size_t cap = kMaxFlatSize);

struct Bases {
  WellBasis well;
  OscillatorBasis photon;
  PointerBasis pointer;  // truncation 0 without measurement
};

Bases make_bases(const ScenarioConfig& cfg);

struct Coupling {
  Eigen::Index row;
  Eigen::Index col;
  double value;  // eV
};

struct HamiltonianTerms {
  Eigen::VectorXd diag_energy;         // eV
  std::vector<Coupling> coupling_x1;   // alpha <n|x|n'> <k|q|k'>
  std::vector<Coupling> coupling_x2;   // alpha <m|x|m'> <k|q|k'>
  Eigen::VectorXd meas_diag_y;         // (hbar pi l / L_y)(E_n - E_0), multiplied by mu(t)
  Eigen::VectorXd meas_diag_z;         // (hbar pi s / L_z)(E_m - E_0)
  Eigen::SparseMatrix<double> coupling;  // coupling_x1 + coupling_x2

  Eigen::Index size() const { return diag_energy.size(); }
};

struct AssemblyOptions {
  /// Test hook: negates the upper-triangle coupling entries (breaks hermiticity).
  bool corrupt_coupling_sign = false;
};

HamiltonianTerms assemble(const ScenarioConfig& cfg, const MultiIndexSpace& space, const Bases& bases,
                          const AssemblyOptions& options = {});

/// out = H(mu) c, matrix-free.
template <class Derived>
Eigen::VectorXcd apply(const HamiltonianTerms& terms, const Eigen::MatrixBase<Derived>& c, double mu) {
  if (c.size() != terms.size()) throw std::invalid_argument("apply: dimension mismatch");
  Eigen::VectorXcd out = (terms.diag_energy + mu * (terms.meas_diag_y + terms.meas_diag_z))
                             .template cast<std::complex<double>>()
                             .cwiseProduct(c);
  const Eigen::VectorXd re = terms.coupling * c.real();
  const Eigen::VectorXd im = terms.coupling * c.imag();
  out.real() += re;
  out.imag() += im;
  return out;
}

/// Dense H(mu) for oracle comparisons.
Eigen::MatrixXd dense_matrix(const HamiltonianTerms& terms, double mu);

/// mu(t) = mu0 exp(-(t - t0)^2 / (4 sigma^2)); zero without measurement.
double mu_of_t(const ScenarioConfig& cfg, double t);
/// Integral of mu from 0 to t.
double integrated_mu(const ScenarioConfig& cfg, double t);
/// Integral of mu from t0 to t (the half-window convention).
double integrated_mu_from_center(const ScenarioConfig& cfg, double t);

struct CorrectionReport {
  double diamagnetic_shift = 0.0;    // alpha^2 / (omega^2 m_e) [eV]
  double dipole_self_shift = 0.0;    // alpha^2 <0|x|1>^2 / (2 hbar omega) [eV]
  double photon_energy = 0.0;        // hbar omega [eV]
  double timescale_ratio = 0.0;      // tau_xx / tau_R = hbar omega <0|q|1> / (alpha |<0|x|1>|)
  bool corrections_negligible = false;
};

CorrectionReport correction_report(const ScenarioConfig& cfg, const Bases& bases);

}  // namespace qedbohm
