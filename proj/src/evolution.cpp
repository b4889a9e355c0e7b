#include "qedbohm/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qedbohm/units.hpp"

namespace qedbohm {

namespace {

const std::complex<double> kMinusIOverHbar(0.0, -1.0 / units::hbar);

}  // namespace

std::size_t CoefficientSeries::nearest(double t) const {
  if (times.empty()) throw std::out_of_range("empty coefficient series");
  if (times.size() == 1) return 0;
  const double pos = (t - times.front()) / (times[1] - times[0]);
  const long i = std::lround(pos);
  return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(times.size()) - 1));
}

MuSchedule MuSchedule::none() {
  return {[](double) { return 0.0; }, [](double) { return 0.0; }};
}

MuSchedule MuSchedule::from_config(const ScenarioConfig& cfg) {
  return {[cfg](double t) { return mu_of_t(cfg, t); }, [cfg](double t) { return integrated_mu(cfg, t); }};
}

InitialSpec default_initial_spec(const ScenarioConfig& cfg) {
  InitialSpec spec;
  spec.sigma_modes = cfg.pointer_packet_width_modes;
  return spec;
}

CoefficientState initial_state(const MultiIndexSpace& space, const Bases& bases, const InitialSpec& spec) {
  if (spec.ket.size() != 3) throw std::invalid_argument("initial ket must have three digits, got '" + spec.ket + "'");
  std::size_t levels[3];
  for (int i = 0; i < 3; ++i) {
    const char ch = spec.ket[static_cast<std::size_t>(i)];
    if (ch < '0' || ch > '9') throw std::invalid_argument("unknown ket label '" + spec.ket + "'");
    levels[i] = static_cast<std::size_t>(ch - '0');
  }
  if (levels[0] >= space.n_electron() || levels[1] >= space.n_electron() || levels[2] >= space.n_photon()) {
    throw std::invalid_argument("ket '" + spec.ket + "' lies outside the truncated basis");
  }
  Eigen::VectorXd py = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd pz = Eigen::VectorXd::Ones(1);
  if (space.n_y() > 1) py = pointer_packet(bases.pointer, spec.sigma_modes, spec.center_y).coefficients;
  if (space.n_z() > 1) pz = pointer_packet(bases.pointer, spec.sigma_modes, spec.center_z).coefficients;

  CoefficientState state;
  state.c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space.size()));
  for (std::size_t l = 0; l < space.n_y(); ++l) {
    for (std::size_t s = 0; s < space.n_z(); ++s) {
      state.c(static_cast<Eigen::Index>(space.flat(levels[0], levels[1], levels[2], l, s))) =
          py(static_cast<Eigen::Index>(l)) * pz(static_cast<Eigen::Index>(s));
    }
  }
  return state;
}

Eigen::VectorXcd time_derivative(const HamiltonianTerms& terms, const Eigen::VectorXcd& c, double mu) {
  return kMinusIOverHbar * apply(terms, c, mu);
}

CoefficientSeries evolve(const HamiltonianTerms& terms, const CoefficientState& state, double t_end,
                         const MuSchedule& mu, const EvolveOptions& options) {
  if (!(options.dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
  if (state.c.size() != terms.size()) throw std::invalid_argument("evolve: dimension mismatch");
  const double span = std::abs(t_end - state.t);
  if (!(span > 0.0)) throw std::invalid_argument("evolve: t_end must differ from the start time");
  const double dir = t_end > state.t ? 1.0 : -1.0;

  const double requested = options.cadence > 0.0 ? options.cadence : options.dt;
  const auto n_out = std::max<long>(1, std::lround(span / requested));
  const double cadence = span / static_cast<double>(n_out);
  const auto substeps = std::max<long>(1, static_cast<long>(std::ceil(cadence / options.dt - 1e-9)));
  const double h = dir * cadence / static_cast<double>(substeps);

  CoefficientSeries out;
  out.cadence = cadence;
  out.step = std::abs(h);
  out.times.reserve(static_cast<std::size_t>(n_out) + 1);
  out.states.reserve(static_cast<std::size_t>(n_out) + 1);
  out.times.push_back(state.t);
  out.states.push_back(state.c);

  const double norm0 = state.c.squaredNorm();
  Eigen::VectorXcd c = state.c;
  Eigen::VectorXcd k1, k2, k3, k4;
  for (long j = 0; j < n_out; ++j) {
    const double t_seg = state.t + dir * cadence * static_cast<double>(j);
    for (long s = 0; s < substeps; ++s) {
      const double t = t_seg + h * static_cast<double>(s);
      const double mu_a = mu.value(t);
      const double mu_b = mu.value(t + 0.5 * h);
      const double mu_c = mu.value(t + h);
      k1 = time_derivative(terms, c, mu_a);
      k2 = time_derivative(terms, c + (0.5 * h) * k1, mu_b);
      k3 = time_derivative(terms, c + (0.5 * h) * k2, mu_b);
      k4 = time_derivative(terms, c + h * k3, mu_c);
      c += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double t_now = j + 1 == n_out ? t_end : state.t + dir * cadence * static_cast<double>(j + 1);
    const double drift = std::abs(c.squaredNorm() - norm0);
    out.max_norm_drift = std::max(out.max_norm_drift, drift);
    if (!(drift <= options.abort_drift)) {
      std::ostringstream os;
      os << "norm drift " << drift << " exceeds " << options.abort_drift << " at t = " << t_now << " fs (step "
         << std::abs(h) << " fs)";
      throw NormDriftError(os.str());
    }
    out.times.push_back(t_now);
    out.states.push_back(c);
  }
  return out;
}

SeriesInterpolator::SeriesInterpolator(const CoefficientSeries& series, const HamiltonianTerms& terms,
                                       MuSchedule mu)
    : series_(&series), terms_(&terms), mu_(std::move(mu)) {
  if (series.size() < 2) throw std::invalid_argument("interpolation needs at least two snapshots");
}

Eigen::VectorXcd SeriesInterpolator::rotate(const Eigen::VectorXcd& c, double t, double sign) const {
  const double m = mu_.integral(t);
  const Eigen::ArrayXd phase =
      sign * (terms_->diag_energy.array() * t + m * (terms_->meas_diag_y + terms_->meas_diag_z).array()) /
      units::hbar;
  const Eigen::ArrayXcd rot = phase.unaryExpr([](double p) { return std::polar(1.0, p); });
  return (c.array() * rot).matrix();
}

long SeriesInterpolator::exact_index(double t) const {
  const auto& s = *series_;
  const double pos = (t - s.times.front()) / s.cadence;
  const long i = std::lround(pos);
  if (i < 0 || i >= static_cast<long>(s.size()) || std::abs(pos - static_cast<double>(i)) > 1e-9) return -1;
  return i;
}

Eigen::VectorXcd SeriesInterpolator::operator()(double t) const {
  const auto& s = *series_;
  if (const long i = exact_index(t); i >= 0) return s.states[static_cast<std::size_t>(i)];
  const double pos = (t - s.times.front()) / s.cadence;
  if (pos < 0.0 || pos > static_cast<double>(s.size() - 1)) {
    throw std::out_of_range("interpolation time outside the coefficient series");
  }
  const auto i = std::min(static_cast<std::size_t>(pos), s.size() - 2);
  const double w = pos - static_cast<double>(i);
  const Eigen::VectorXcd a = rotate(s.states[i], s.times[i], 1.0);
  const Eigen::VectorXcd b = rotate(s.states[i + 1], s.times[i + 1], 1.0);
  return rotate((1.0 - w) * a + w * b, t, -1.0);
}

double population(const CoefficientState& state, const MultiIndexSpace& space, std::size_t n, std::size_t m,
                  std::size_t k) {
  const auto width = static_cast<Eigen::Index>(space.pointer_block());
  const auto start = static_cast<Eigen::Index>(space.block(n, m, k) * space.pointer_block());
  return state.c.segment(start, width).squaredNorm();
}

Eigen::VectorXd block_populations(const Eigen::VectorXcd& c, const MultiIndexSpace& space) {
  const auto width = static_cast<Eigen::Index>(space.pointer_block());
  const auto blocks = static_cast<Eigen::Index>(space.matter_size());
  Eigen::VectorXd p(blocks);
  for (Eigen::Index b = 0; b < blocks; ++b) p(b) = c.segment(b * width, width).squaredNorm();
  return p;
}

double even_sector_probability(const Eigen::VectorXcd& c, const MultiIndexSpace& space) {
  double p = 0.0;
  for (std::size_t i : space.even_indices()) p += std::norm(c(static_cast<Eigen::Index>(i)));
  return p;
}

EnergyBreakdown energies(const Eigen::VectorXcd& c, const MultiIndexSpace& space, const Bases& bases,
                         const HamiltonianTerms& terms, double mu) {
  EnergyBreakdown e;
  const Eigen::VectorXd prob = c.cwiseAbs2();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const MultiIndex t = space.tuple(i);
    const double p = prob(static_cast<Eigen::Index>(i));
    e.x1 += bases.well.energy(t.n) * p;
    e.x2 += bases.well.energy(t.m) * p;
    e.field += bases.photon.energy(t.k) * p;
    e.pointers += (bases.pointer.energy(t.l) + bases.pointer.energy(t.s)) * p;
  }
  const Eigen::VectorXd vre = terms.coupling * c.real();
  const Eigen::VectorXd vim = terms.coupling * c.imag();
  e.interaction = c.real().dot(vre) + c.imag().dot(vim);
  e.measurement = mu * prob.dot(terms.meas_diag_y + terms.meas_diag_z);
  e.total = e.x1 + e.x2 + e.field + e.pointers + e.interaction + e.measurement;
  return e;
}

}  // namespace qedbohm
