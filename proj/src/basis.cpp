#include "qedbohm/basis.hpp"

#include <algorithm>
#include <cmath>

#include "qedbohm/surd.hpp"

namespace qedbohm {

double Surd::to_double() const {
  return static_cast<double>(coef_) * std::sqrt(static_cast<double>(radicand_));
}

void Surd::normalize() {
  if (coef_ == 0) {
    radicand_ = 1;
    return;
  }
  for (std::int64_t p = 2; p * p <= radicand_; ++p) {
    while (radicand_ % (p * p) == 0) {
      radicand_ /= p * p;
      coef_ *= p;
    }
  }
}

std::ostream& operator<<(std::ostream& os, const Surd& s) {
  os << s.coef_;
  if (s.radicand_ != 1 && s.coef_ != 0) os << "*sqrt(" << s.radicand_ << ")";
  return os;
}

WellBasis::WellBasis(double length, double mass, std::size_t n_levels)
    : length_(length), mass_(mass), n_levels_(n_levels), norm_(std::sqrt(2.0 / length)) {
  if (!(length > 0.0) || !(mass > 0.0)) throw std::invalid_argument("WellBasis: length and mass must be positive");
  if (n_levels == 0) throw std::invalid_argument("WellBasis: need at least one level");
}

double WellBasis::wavenumber(std::size_t n) const {
  check(n);
  return static_cast<double>(n + 1) * units::pi / length_;
}

double WellBasis::energy(std::size_t n) const {
  const double k = wavenumber(n);
  return units::hbar * units::hbar * k * k / (2.0 * mass_);
}

double WellBasis::dipole(std::size_t n, std::size_t n2) const {
  check(n);
  check(n2);
  const double a = static_cast<double>(n + 1);
  const double b = static_cast<double>(n2 + 1);
  if ((n + n2) % 2 == 0) return 0.0;
  const double d = a * a - b * b;
  return -8.0 * length_ * a * b / (units::pi * units::pi * d * d);
}

OscillatorBasis::OscillatorBasis(double omega, std::size_t n_levels) : omega_(omega), n_levels_(n_levels) {
  if (!(omega > 0.0)) throw std::invalid_argument("OscillatorBasis: omega must be positive");
  if (n_levels == 0) throw std::invalid_argument("OscillatorBasis: need at least one level");
}

double OscillatorBasis::energy(std::size_t m) const {
  check(m);
  return units::hbar * omega_ * (static_cast<double>(m) + 0.5);
}

double OscillatorBasis::q_element(std::size_t k, std::size_t k2) const {
  check(k);
  check(k2);
  const std::size_t hi = std::max(k, k2);
  const std::size_t lo = std::min(k, k2);
  if (hi - lo != 1) return 0.0;
  return std::sqrt(static_cast<double>(hi) / 2.0);
}

PointerBasis::PointerBasis(double box_length, std::size_t truncation, double mass)
    : box_length_(box_length), truncation_(truncation), mass_(mass) {
  if (!(box_length > 0.0) || !(mass > 0.0)) {
    throw std::invalid_argument("PointerBasis: box length and mass must be positive");
  }
}

int PointerBasis::mode(std::size_t index) const {
  if (index >= size()) throw IndexError("pointer mode index out of range");
  return static_cast<int>(index) - static_cast<int>(truncation_);
}

std::size_t PointerBasis::index_of(int mode) const {
  const int t = static_cast<int>(truncation_);
  if (mode < -t || mode > t) throw IndexError("pointer mode out of range");
  return static_cast<std::size_t>(mode + t);
}

double PointerBasis::wavenumber(std::size_t index) const {
  return units::pi * static_cast<double>(mode(index)) / box_length_;
}

double PointerBasis::energy(std::size_t index) const {
  const double p = momentum(index);
  return p * p / (2.0 * mass_);
}

std::complex<double> PointerBasis::value(std::size_t index, double y) const {
  return std::polar(1.0 / std::sqrt(period()), wavenumber(index) * y);
}

Eigen::VectorXcd PointerBasis::values(double y) const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::VectorXcd v(n);
  // exp(i k_l y) = w^l with w = exp(i pi y / L_y)
  const std::complex<double> w = std::polar(1.0, units::pi * y / box_length_);
  const double norm = 1.0 / std::sqrt(period());
  const auto t = static_cast<Eigen::Index>(truncation_);
  v(t) = norm;
  for (Eigen::Index l = 1; l <= t; ++l) {
    v(t + l) = v(t + l - 1) * w;
    v(t - l) = std::conj(v(t + l));
  }
  return v;
}

PointerPacket pointer_packet(const PointerBasis& basis, double sigma_modes, int center_mode) {
  if (!(sigma_modes > 0.0)) throw std::invalid_argument("pointer_packet: width must be positive");
  PointerPacket packet;
  packet.coefficients.resize(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double dl = static_cast<double>(basis.mode(i) - center_mode);
    packet.coefficients(static_cast<Eigen::Index>(i)) = std::exp(-dl * dl / (4.0 * sigma_modes * sigma_modes));
  }
  const double norm = packet.coefficients.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("pointer_packet: packet vanishes on the truncated basis");
  packet.coefficients /= norm;
  packet.degenerate = packet.coefficients.cwiseAbs2().maxCoeff() > 1.0 - 1e-12;
  return packet;
}

double packet_spatial_width(const PointerBasis& basis, const Eigen::VectorXcd& coefficients) {
  constexpr int kGrid = 4096;
  const double h = basis.period() / kGrid;
  double w = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double y = basis.domain_min() + (i + 0.5) * h;
    const double rho = std::norm(basis.values(y).dot(coefficients.conjugate()));
    w += rho;
    m1 += rho * y;
    m2 += rho * y * y;
  }
  m1 /= w;
  return std::sqrt(std::max(0.0, m2 / w - m1 * m1));
}

namespace {

using SurdMatrix = Eigen::Matrix<Surd, Eigen::Dynamic, Eigen::Dynamic>;

SurdMatrix exact_annihilation(std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(n);
  SurdMatrix a = SurdMatrix::Constant(dim, dim, Surd(0));
  for (Eigen::Index m = 1; m < dim; ++m) a(m - 1, m) = Surd::sqrt_of(m);
  return a;
}

}  // namespace

Eigen::MatrixXd annihilation_matrix(std::size_t n_levels) {
  return exact_annihilation(n_levels).unaryExpr([](const Surd& s) { return s.to_double(); });
}

LadderCheck ladder_hamiltonian_check(const OscillatorBasis& basis) {
  const SurdMatrix a = exact_annihilation(basis.size());
  const SurdMatrix ad = a.transpose();
  const SurdMatrix number = ad * a;
  const SurdMatrix comm = a * ad - ad * a;

  LadderCheck out;
  const auto dim = static_cast<Eigen::Index>(basis.size());
  out.commutator.resize(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (!comm(i, j).is_integer() || !number(i, j).is_integer()) {
        throw std::logic_error("ladder products left the integers");
      }
      out.commutator(i, j) = static_cast<double>(comm(i, j).coefficient());
      const double n_ij = static_cast<double>(number(i, j).coefficient());
      const double h_ladder = units::hbar * basis.omega() * (n_ij + (i == j ? 0.5 : 0.0));
      const double h_diag = i == j ? basis.energy(static_cast<std::size_t>(i)) : 0.0;
      out.max_abs_deviation = std::max(out.max_abs_deviation, std::abs(h_ladder - h_diag));
    }
  }
  return out;
}

}  // namespace qedbohm
