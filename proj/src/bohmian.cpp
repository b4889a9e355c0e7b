#include "qedbohm/bohmian.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <thread>

#include "qedbohm/units.hpp"

namespace qedbohm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Uniform in the open interval (0, 1) from the top 53 bits.
double open_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::size_t factor_dim(const MultiIndexSpace& space, Coordinate coord) {
  switch (coord) {
    case Coordinate::x1:
    case Coordinate::x2: return space.n_electron();
    case Coordinate::q: return space.n_photon();
    case Coordinate::y: return space.n_y();
    case Coordinate::z: return space.n_z();
  }
  return 0;
}

std::size_t& factor_ref(MultiIndex& idx, Coordinate coord) {
  switch (coord) {
    case Coordinate::x1: return idx.n;
    case Coordinate::x2: return idx.m;
    case Coordinate::q: return idx.k;
    case Coordinate::y: return idx.l;
    case Coordinate::z: return idx.s;
  }
  return idx.n;
}

/// Basis functions of one factor at u.
Eigen::VectorXcd factor_values(const Bases& bases, const MultiIndexSpace& space, Coordinate coord, double u) {
  const auto d = static_cast<Eigen::Index>(factor_dim(space, coord));
  Eigen::VectorXcd f(d);
  switch (coord) {
    case Coordinate::x1:
    case Coordinate::x2:
      for (Eigen::Index i = 0; i < d; ++i) f(i) = bases.well.value(static_cast<std::size_t>(i), u);
      break;
    case Coordinate::q: f = bases.photon.values(u, static_cast<std::size_t>(d)).cast<cplx>().matrix(); break;
    case Coordinate::y:
    case Coordinate::z: f = bases.pointer.values(u).head(d); break;
  }
  return f;
}

double wrap_periodic(double y, double lo, double period) {
  double r = std::fmod(y - lo, period);
  if (r < 0.0) r += period;
  return lo + r;
}

}  // namespace

const char* coordinate_name(Coordinate c) {
  switch (c) {
    case Coordinate::x1: return "x1";
    case Coordinate::x2: return "x2";
    case Coordinate::q: return "q";
    case Coordinate::y: return "y";
    case Coordinate::z: return "z";
  }
  return "?";
}

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::y: return "Y";
    case Branch::z: return "Z";
    case Branch::unresolved: return "UNRESOLVED";
  }
  return "?";
}

double coordinate_of(const ConfigPoint& p, Coordinate coord) { return p.vector()(static_cast<int>(coord)); }

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ull));
}

MarginalTable::MarginalTable(double lo, double hi, Eigen::VectorXd density) : lo_(lo), hi_(hi) {
  const Eigen::Index n = density.size();
  if (n < 2 || !(hi > lo)) throw std::invalid_argument("MarginalTable: need at least two grid points");
  step_ = (hi - lo) / static_cast<double>(n - 1);
  grid_ = Eigen::VectorXd::LinSpaced(n, lo, hi);
  density_ = density.cwiseMax(0.0);
  cdf_.resize(n);
  cdf_(0) = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) cdf_(i) = cdf_(i - 1) + 0.5 * step_ * (density_(i - 1) + density_(i));
  const double total = cdf_(n - 1);
  if (!(total > 0.0)) throw std::invalid_argument("MarginalTable: density integrates to zero");
  cdf_ /= total;
  density_ /= total;
}

double MarginalTable::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  const double pos = (x - lo_) / step_;
  const auto i = std::min(static_cast<Eigen::Index>(pos), cdf_.size() - 2);
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * cdf_(i) + w * cdf_(i + 1);
}

double MarginalTable::quantile(double u) const {
  if (u <= 0.0) return lo_;
  if (u >= 1.0) return hi_;
  const auto* begin = cdf_.data();
  const auto* end = cdf_.data() + cdf_.size();
  const auto* it = std::lower_bound(begin, end, u);
  const auto i = static_cast<Eigen::Index>(it - begin);
  if (i == 0) return lo_;
  const double c0 = cdf_(i - 1);
  const double c1 = cdf_(i);
  const double w = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
  return grid_(i - 1) + w * step_;
}

std::pair<double, double> coordinate_range(const Bases& bases, Coordinate coord) {
  switch (coord) {
    case Coordinate::x1:
    case Coordinate::x2: return {0.0, bases.well.length()};
    case Coordinate::q: {
      const double m = static_cast<double>(bases.photon.size());
      const double qmax = std::max(8.0, 2.0 * std::sqrt(2.0 * m + 1.0) + 4.0);
      return {-qmax, qmax};
    }
    case Coordinate::y:
    case Coordinate::z: return {bases.pointer.domain_min(), bases.pointer.domain_max()};
  }
  return {0.0, 0.0};
}

Eigen::MatrixXcd reduced_density(const Eigen::VectorXcd& c, const MultiIndexSpace& space, Coordinate coord) {
  const auto d = static_cast<Eigen::Index>(factor_dim(space, coord));
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const cplx ci = c(static_cast<Eigen::Index>(i));
    if (ci == cplx(0.0)) continue;
    MultiIndex idx = space.tuple(i);
    const auto a = static_cast<Eigen::Index>(factor_ref(idx, coord));
    for (Eigen::Index b = 0; b < d; ++b) {
      factor_ref(idx, coord) = static_cast<std::size_t>(b);
      g(a, b) += ci * std::conj(c(static_cast<Eigen::Index>(space.flat(idx))));
    }
  }
  return g;
}

bool is_product_state(const Eigen::VectorXcd& c, const MultiIndexSpace& space) {
  const double norm2 = c.squaredNorm();
  for (Coordinate coord : kAllCoordinates) {
    const Eigen::MatrixXcd g = reduced_density(c, space, coord) / norm2;
    const double purity = (g * g).trace().real();
    if (purity < 1.0 - 1e-10) return false;
  }
  return true;
}

MarginalTable marginal(const Eigen::VectorXcd& c, const MultiIndexSpace& space, const Bases& bases,
                       Coordinate coord, std::size_t grid) {
  const Eigen::MatrixXcd g = reduced_density(c, space, coord);
  const auto [lo, hi] = coordinate_range(bases, coord);
  const auto n = static_cast<Eigen::Index>(grid);
  Eigen::VectorXd rho(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXcd f = factor_values(bases, space, coord, lo + step * static_cast<double>(i));
    rho(i) = (f.transpose() * g * f.conjugate()).value().real();
  }
  return MarginalTable(lo, hi, rho);
}

std::vector<ConfigPoint> sample_initial(const Eigen::VectorXcd& c, const MultiIndexSpace& space,
                                        const Bases& bases, std::size_t n, std::uint64_t seed) {
  if (!is_product_state(c, space)) {
    throw std::invalid_argument("initial sampling requires a product state");
  }
  std::vector<MarginalTable> tables;
  for (Coordinate coord : kAllCoordinates) tables.push_back(marginal(c, space, bases, coord));
  std::vector<ConfigPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(trajectory_seed(seed, i));
    Vector5d v;
    for (int k = 0; k < 5; ++k) v(k) = tables[static_cast<std::size_t>(k)].quantile(open_uniform(rng));
    out[i] = ConfigPoint::from_vector(v);
  }
  return out;
}

Vector5d velocity_from_field(const FieldEval& f, const Bases& bases, double mu, double rho_floor) {
  const double hbar = units::hbar;
  const double me = bases.well.mass();
  const double my = bases.pointer.mass();
  const double kin = hbar * hbar / (2.0 * me);
  const double e0 = bases.well.energy(0);
  const double density = f.density();
  const double rho = std::max(density, rho_floor);
  const cplx phi_c = std::conj(f.value);
  Vector5d v;
  v(0) = (hbar / me * std::imag(phi_c * f.d_x1) - mu * kin * 2.0 * std::real(phi_c * f.d2_y_x1)) / rho;
  v(1) = (hbar / me * std::imag(phi_c * f.d_x2) - mu * kin * 2.0 * std::real(phi_c * f.d2_z_x2)) / rho;
  v(2) = bases.photon.omega() * std::imag(phi_c * f.d_q) / rho;
  v(3) = (hbar / my * std::imag(phi_c * f.d_y) + mu * kin * std::norm(f.d_x1) - mu * e0 * density) / rho;
  v(4) = (hbar / my * std::imag(phi_c * f.d_z) + mu * kin * std::norm(f.d_x2) - mu * e0 * density) / rho;
  return v;
}

Vector5d velocity(const Eigen::VectorXcd& c, const MultiIndexSpace& space, const Bases& bases,
                  const ConfigPoint& p, double mu) {
  return velocity_from_field(evaluate(c, space, bases, p), bases, mu);
}

PointerScales pointer_scales(const ScenarioConfig& cfg, const Bases& bases) {
  PointerScales s;
  const double gap = bases.well.energy(1) - bases.well.energy(0);
  s.shift_full = gap * integrated_mu(cfg, cfg.sim_duration);
  s.shift_half = gap * integrated_mu_from_center(cfg, cfg.sim_duration);
  const PointerBasis full(cfg.pointer_box_length, cfg.pointer_truncation, pointer_mass(cfg));
  s.sigma0 = packet_spatial_width(
      full, pointer_packet(full, cfg.pointer_packet_width_modes, 0).coefficients.cast<cplx>());
  s.five_sigma = 5.0 * s.sigma0;
  return s;
}

BranchRule default_branch_rule(const ScenarioConfig& cfg, const Bases& bases) {
  const double t = 0.5 * pointer_scales(cfg, bases).shift_full;
  return {t, t};
}

Branch classify(const ConfigPoint& start, const ConfigPoint& end, const BranchRule& rule, bool* both) {
  const bool dy = std::abs(end.y - start.y) > rule.threshold_y;
  const bool dz = std::abs(end.z - start.z) > rule.threshold_z;
  if (both) *both = dy && dz;
  if (dy && !dz) return Branch::y;
  if (dz && !dy) return Branch::z;
  return Branch::unresolved;
}

namespace {

class Stepper {
 public:
  Stepper(const SeriesInterpolator& coeffs, const MultiIndexSpace& space, const Bases& bases, const MuSchedule& mu,
          const PropagateOptions& options, Trajectory& traj)
      : coeffs_(coeffs), bases_(bases), mu_(mu), options_(options), traj_(traj), eval_(space, bases) {}

  void set_running_max(double rho) { running_max_ = std::max(running_max_, rho); }

  /// Advances x by h from t; false if the trajectory had to be aborted.
  bool advance(Vector5d& x, double t, double h, int depth) {
    Vector5d trial = x;
    Outcome out = rk4(trial, t, h, 0.0);
    if (out == Outcome::abort) return false;
    // nodes and stages that overshoot a wall both refine the step
    if (out != Outcome::ok && depth < options_.max_halvings) {
      ++traj_.halvings;
      return advance(x, t, 0.5 * h, depth + 1) && advance(x, t + 0.5 * h, 0.5 * h, depth + 1);
    }
    if (out == Outcome::wall) return fail("electron left the well");
    if (out == Outcome::node) {
      ++traj_.regularized_steps;
      trial = x;
      out = rk4(trial, t, h, options_.node_fraction * running_max_);
      if (out == Outcome::abort) return false;
      if (out == Outcome::wall) return fail("electron left the well");
    }
    x = trial;
    return true;
  }

  double density_at(const Vector5d& x, double t) {
    const Eigen::VectorXcd& c = coefficients(t);
    return eval_(c, ConfigPoint::from_vector(x)).density();
  }

 private:
  enum class Outcome { ok, node, wall, abort };

  const Eigen::VectorXcd& coefficients(double t) {
    const long i = coeffs_.exact_index(t);
    if (i >= 0) return coeffs_.series().states[static_cast<std::size_t>(i)];
    buffer_ = coeffs_(t);
    return buffer_;
  }

  Outcome wrap(Vector5d& x) {
    if (!x.allFinite()) {
      fail("non-finite configuration");
      return Outcome::abort;
    }
    const double l = bases_.well.length();
    if (x(0) < 0.0 || x(0) > l || x(1) < 0.0 || x(1) > l) return Outcome::wall;
    const double lo = bases_.pointer.domain_min();
    const double period = bases_.pointer.period();
    x(3) = wrap_periodic(x(3), lo, period);
    x(4) = wrap_periodic(x(4), lo, period);
    return Outcome::ok;
  }

  bool fail(const std::string& why) {
    traj_.aborted = true;
    traj_.diagnostic = why;
    return false;
  }

  /// Velocity at a stage; a positive floor switches off node detection.
  Outcome stage(Vector5d x, double t, double floor, Vector5d& v) {
    if (const Outcome w = wrap(x); w != Outcome::ok) return w;
    if (options_.freeze) {
      v.setZero();
      return Outcome::ok;
    }
    const FieldEval f = eval_(coefficients(t), ConfigPoint::from_vector(x));
    const double rho = f.density();
    running_max_ = std::max(running_max_, rho);
    v = velocity_from_field(f, bases_, mu_.value(t), floor);
    if (floor == 0.0 && rho < options_.node_fraction * running_max_) return Outcome::node;
    return Outcome::ok;
  }

  Outcome rk4(Vector5d& x, double t, double h, double floor) {
    Vector5d k1, k2, k3, k4;
    Outcome worst = Outcome::ok;
    auto run = [&](const Vector5d& at, double ts, Vector5d& k) {
      const Outcome o = stage(at, ts, floor, k);
      if (o == Outcome::abort || o == Outcome::wall) return o;
      if (o == Outcome::node) worst = Outcome::node;
      return Outcome::ok;
    };
    if (const Outcome o = run(x, t, k1); o != Outcome::ok) return o;
    if (const Outcome o = run(x + 0.5 * h * k1, t + 0.5 * h, k2); o != Outcome::ok) return o;
    if (const Outcome o = run(x + 0.5 * h * k2, t + 0.5 * h, k3); o != Outcome::ok) return o;
    if (const Outcome o = run(x + h * k3, t + h, k4); o != Outcome::ok) return o;
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (const Outcome o = wrap(x); o != Outcome::ok) return o;
    return worst;
  }

  const SeriesInterpolator& coeffs_;
  const Bases& bases_;
  const MuSchedule& mu_;
  const PropagateOptions& options_;
  Trajectory& traj_;
  FieldEvaluator eval_;
  Eigen::VectorXcd buffer_;
  double running_max_ = 0.0;
};

}  // namespace

Trajectory propagate(const SeriesInterpolator& coefficients, const MultiIndexSpace& space, const Bases& bases,
                     const ConfigPoint& start, double t_end, const MuSchedule& mu, const PropagateOptions& options,
                     std::uint64_t seed) {
  if (!(options.dt > 0.0)) throw std::invalid_argument("propagate: dt must be positive");
  Trajectory traj;
  traj.seed = seed;
  const double t0 = coefficients.series().times.front();
  const auto n_steps = std::max<long>(1, std::lround((t_end - t0) / options.dt));
  const double h = (t_end - t0) / static_cast<double>(n_steps);
  const long every =
      options.output_cadence > 0.0 ? std::max<long>(1, std::lround(options.output_cadence / h)) : 1;

  Stepper stepper(coefficients, space, bases, mu, options, traj);
  Vector5d x = start.vector();
  if (!in_domain(bases, start)) {
    traj.aborted = true;
    traj.diagnostic = "start point outside the domain";
    return traj;
  }
  stepper.set_running_max(stepper.density_at(x, t0));
  traj.times.push_back(t0);
  traj.points.push_back(start);
  for (long step = 0; step < n_steps; ++step) {
    const double t = t0 + h * static_cast<double>(step);
    bool ok = false;
    try {
      ok = stepper.advance(x, t, h, 0);
    } catch (const DomainError& e) {
      traj.aborted = true;
      traj.diagnostic = e.what();
    }
    if (!ok) {
      std::ostringstream os;
      os << traj.diagnostic << " at t = " << t << " fs";
      traj.diagnostic = os.str();
      return traj;
    }
    if ((step + 1) % every == 0 || step + 1 == n_steps) {
      traj.times.push_back(step + 1 == n_steps ? t_end : t + h);
      traj.points.push_back(ConfigPoint::from_vector(x));
    }
  }
  if (options.measurement) traj.branch = classify(traj.points.front(), traj.points.back(), options.rule, &traj.both_displaced);
  return traj;
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QEDBOHM_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

Ensemble run_ensemble(const SeriesInterpolator& coefficients, const MultiIndexSpace& space, const Bases& bases,
                      double t_end, const MuSchedule& mu, const PropagateOptions& options, std::size_t n,
                      std::uint64_t master_seed, unsigned threads) {
  if (n == 0) throw std::invalid_argument("run_ensemble: need at least one trajectory");
  const auto starts = sample_initial(coefficients.series().states.front(), space, bases, n, master_seed);
  Ensemble ens;
  ens.master_seed = master_seed;
  ens.trajectories.resize(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      ens.trajectories[i] =
          propagate(coefficients, space, bases, starts[i], t_end, mu, options, trajectory_seed(master_seed, i));
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads ? threads : worker_count(),
                                                           static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  for (const auto& t : ens.trajectories) {
    if (t.aborted) {
      ++ens.n_aborted;
      continue;
    }
    if (t.both_displaced) ++ens.n_both;
    switch (t.branch) {
      case Branch::y: ++ens.n_y; break;
      case Branch::z: ++ens.n_z; break;
      case Branch::unresolved: ++ens.n_unresolved; break;
    }
  }
  return ens;
}

KsResult ks_statistic(std::vector<double> samples, const MarginalTable& table) {
  KsResult r;
  if (samples.empty()) return r;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = table.cdf(samples[i]);
    r.distance = std::max({r.distance, std::abs(f - static_cast<double>(i) / n),
                           std::abs(static_cast<double>(i + 1) / n - f)});
  }
  r.critical = 1.36 / std::sqrt(n);
  r.pass = r.distance < r.critical;
  return r;
}

KsResult equivariance_check(const Ensemble& ensemble, double t, const Eigen::VectorXcd& c,
                            const MultiIndexSpace& space, const Bases& bases, Coordinate coord) {
  std::vector<double> samples;
  for (const auto& traj : ensemble.trajectories) {
    if (traj.aborted || traj.times.empty()) continue;
    const double cadence = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 1.0;
    const double pos = (t - traj.times.front()) / cadence;
    const long i = std::lround(pos);
    if (i < 0 || i >= static_cast<long>(traj.times.size()) || std::abs(traj.times[static_cast<std::size_t>(i)] - t) > 1e-6 * cadence) {
      throw std::invalid_argument("equivariance_check: no trajectory sample at the requested time");
    }
    samples.push_back(coordinate_of(traj.points[static_cast<std::size_t>(i)], coord));
  }
  return ks_statistic(std::move(samples), marginal(c, space, bases, coord));
}

}  // namespace qedbohm
