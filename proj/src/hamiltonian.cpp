#include "qedbohm/hamiltonian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qedbohm/units.hpp"

namespace qedbohm {

MultiIndexSpace::MultiIndexSpace(std::size_t n_electron, std::size_t n_photon, std::size_t n_y,
                                 std::size_t n_z)
    : n_electron_(n_electron), n_photon_(n_photon), n_y_(n_y), n_z_(n_z) {
  if (n_electron == 0 || n_photon == 0 || n_y == 0 || n_z == 0) {
    throw std::invalid_argument("MultiIndexSpace: all dimensions must be at least 1");
  }
  size_ = n_electron * n_electron * n_photon * n_y * n_z;
  for (std::size_t i = 0; i < size_; ++i) (is_odd(i) ? odd_ : even_).push_back(i);
}

std::size_t MultiIndexSpace::block(std::size_t n, std::size_t m, std::size_t k) const {
  if (n >= n_electron_ || m >= n_electron_ || k >= n_photon_) {
    throw IndexError("matter index out of range");
  }
  return (n * n_electron_ + m) * n_photon_ + k;
}

std::size_t MultiIndexSpace::flat(std::size_t n, std::size_t m, std::size_t k, std::size_t l,
                                  std::size_t s) const {
  if (l >= n_y_ || s >= n_z_) throw IndexError("pointer index out of range");
  return (block(n, m, k) * n_y_ + l) * n_z_ + s;
}

MultiIndex MultiIndexSpace::tuple(std::size_t i) const {
  if (i >= size_) throw IndexError("flat index out of range");
  MultiIndex idx;
  idx.s = i % n_z_;
  i /= n_z_;
  idx.l = i % n_y_;
  i /= n_y_;
  idx.k = i % n_photon_;
  i /= n_photon_;
  idx.m = i % n_electron_;
  idx.n = i / n_electron_;
  return idx;
}

bool MultiIndexSpace::is_odd(std::size_t i) const {
  const std::size_t b = i / pointer_block();
  const std::size_t k = b % n_photon_;
  const std::size_t m = (b / n_photon_) % n_electron_;
  const std::size_t n = b / (n_photon_ * n_electron_);
  return (n + m + k) % 2 == 1;
}

MultiIndexSpace build_space(const ScenarioConfig& cfg, std::size_t cap) {
  const std::size_t np = cfg.measurement_enabled ? 2 * cfg.pointer_truncation + 1 : 1;
  const std::size_t dims[] = {cfg.n_electron_levels, cfg.n_electron_levels, cfg.n_photon_levels, np, np};
  std::size_t total = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw ConfigError("basis dimensions must be at least 1");
    if (total > cap / d) {
      throw ConfigError("basis size exceeds the cap of " + std::to_string(cap) + " states");
    }
    total *= d;
  }
  return MultiIndexSpace(cfg.n_electron_levels, cfg.n_photon_levels, np, np);
}

Bases make_bases(const ScenarioConfig& cfg) {
  return Bases{WellBasis(cfg.well_length, electron_mass(cfg), cfg.n_electron_levels),
               OscillatorBasis(cfg.cavity_omega, cfg.n_photon_levels),
               PointerBasis(cfg.pointer_box_length, cfg.measurement_enabled ? cfg.pointer_truncation : 0,
                            pointer_mass(cfg))};
}

HamiltonianTerms assemble(const ScenarioConfig& cfg, const MultiIndexSpace& space, const Bases& bases,
                          const AssemblyOptions& options) {
  if (bases.well.size() != space.n_electron() || bases.photon.size() != space.n_photon() ||
      bases.pointer.size() != space.n_y() || bases.pointer.size() != space.n_z()) {
    throw std::invalid_argument("assemble: basis and index-space dimensions disagree");
  }
  const auto dim = static_cast<Eigen::Index>(space.size());
  HamiltonianTerms terms;
  terms.diag_energy.resize(dim);
  terms.meas_diag_y.resize(dim);
  terms.meas_diag_z.resize(dim);
  const double e0 = bases.well.energy(0);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const MultiIndex t = space.tuple(i);
    const auto ii = static_cast<Eigen::Index>(i);
    terms.diag_energy(ii) = bases.well.energy(t.n) + bases.well.energy(t.m) + bases.photon.energy(t.k) +
                            bases.pointer.energy(t.l) + bases.pointer.energy(t.s);
    terms.meas_diag_y(ii) = bases.pointer.momentum(t.l) * (bases.well.energy(t.n) - e0);
    terms.meas_diag_z(ii) = bases.pointer.momentum(t.s) * (bases.well.energy(t.m) - e0);
  }

  const std::size_t ne = space.n_electron();
  const std::size_t nk = space.n_photon();
  const std::size_t ny = space.n_y();
  const std::size_t nz = space.n_z();
  auto push = [&](std::vector<Coupling>& list, std::size_t i, std::size_t j, double v) {
    if (options.corrupt_coupling_sign && i < j) v = -v;
    list.push_back({static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), v});
  };
  for (std::size_t a = 0; a < ne; ++a) {
    for (std::size_t a2 = 0; a2 < ne; ++a2) {
      const double d = bases.well.dipole(a, a2);
      if (d == 0.0) continue;
      for (std::size_t k = 0; k < nk; ++k) {
        for (std::size_t k2 = 0; k2 < nk; ++k2) {
          const double q = bases.photon.q_element(k, k2);
          if (q == 0.0) continue;
          const double v = cfg.coupling_alpha * d * q;
          for (std::size_t other = 0; other < ne; ++other) {
            for (std::size_t l = 0; l < ny; ++l) {
              for (std::size_t s = 0; s < nz; ++s) {
                push(terms.coupling_x1, space.flat(a, other, k, l, s), space.flat(a2, other, k2, l, s), v);
                push(terms.coupling_x2, space.flat(other, a, k, l, s), space.flat(other, a2, k2, l, s), v);
              }
            }
          }
        }
      }
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(terms.coupling_x1.size() + terms.coupling_x2.size());
  for (const auto* list : {&terms.coupling_x1, &terms.coupling_x2}) {
    for (const Coupling& c : *list) triplets.emplace_back(c.row, c.col, c.value);
  }
  terms.coupling.resize(dim, dim);
  terms.coupling.setFromTriplets(triplets.begin(), triplets.end());
  terms.coupling.makeCompressed();
  return terms;
}

Eigen::MatrixXd dense_matrix(const HamiltonianTerms& terms, double mu) {
  const Eigen::Index dim = terms.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  h.diagonal() = terms.diag_energy + mu * (terms.meas_diag_y + terms.meas_diag_z);
  for (const auto* list : {&terms.coupling_x1, &terms.coupling_x2}) {
    for (const Coupling& c : *list) h(c.row, c.col) += c.value;
  }
  return h;
}

double mu_of_t(const ScenarioConfig& cfg, double t) {
  if (!cfg.measurement_enabled) return 0.0;
  const double u = t - cfg.meas_center_time;
  return cfg.meas_strength * std::exp(-u * u / (4.0 * cfg.meas_width * cfg.meas_width));
}

double integrated_mu(const ScenarioConfig& cfg, double t) {
  if (!cfg.measurement_enabled) return 0.0;
  const double w = 2.0 * cfg.meas_width;
  return cfg.meas_strength * cfg.meas_width * std::sqrt(units::pi) *
         (std::erf((t - cfg.meas_center_time) / w) + std::erf(cfg.meas_center_time / w));
}

double integrated_mu_from_center(const ScenarioConfig& cfg, double t) {
  if (!cfg.measurement_enabled) return 0.0;
  return cfg.meas_strength * cfg.meas_width * std::sqrt(units::pi) *
         std::erf((t - cfg.meas_center_time) / (2.0 * cfg.meas_width));
}

CorrectionReport correction_report(const ScenarioConfig& cfg, const Bases& bases) {
  CorrectionReport r;
  const double alpha = cfg.coupling_alpha;
  const double omega = cfg.cavity_omega;
  const double x01 = bases.well.size() > 1 ? std::abs(bases.well.dipole(0, 1)) : 0.0;
  const double q01 = bases.photon.size() > 1 ? bases.photon.q_element(0, 1) : 0.0;
  r.photon_energy = units::hbar * omega;
  r.diamagnetic_shift = alpha * alpha / (omega * omega * bases.well.mass());
  r.dipole_self_shift = alpha * alpha * x01 * x01 / (2.0 * r.photon_energy);
  r.timescale_ratio = alpha * x01 > 0.0 ? r.photon_energy * q01 / (alpha * x01)
                                        : std::numeric_limits<double>::infinity();
  r.corrections_negligible = r.diamagnetic_shift < 0.1 * r.photon_energy &&
                             r.dipole_self_shift < 0.1 * r.photon_energy && r.timescale_ratio > 1.0;
  return r;
}

}  // namespace qedbohm
