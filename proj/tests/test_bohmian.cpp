#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "qedbohm/bohmian.hpp"

using namespace qedbohm;

namespace {

struct Setup {
  ScenarioConfig cfg;
  MultiIndexSpace space;
  Bases bases;
  HamiltonianTerms terms;
  explicit Setup(const ScenarioConfig& c)
      : cfg(c), space(build_space(c)), bases(make_bases(c)), terms(assemble(c, space, bases)) {}
};

ScenarioConfig unmeasured() {
  ScenarioConfig cfg;
  cfg.measurement_enabled = false;
  return cfg;
}

Eigen::VectorXcd random_state(std::size_t n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd c(static_cast<Eigen::Index>(n));
  for (auto& v : c) v = {g(rng), g(rng)};
  return c / c.norm();
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("per-trajectory seeds are deterministic and distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(trajectory_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(trajectory_seed(42, 7) == trajectory_seed(42, 7));
  CHECK(trajectory_seed(42, 7) != trajectory_seed(43, 7));
}

TEST_CASE("marginals of the initial state") {
  const Setup s(unmeasured());
  const auto c = initial_state(s.space, s.bases, default_initial_spec(s.cfg)).c;
  const double l = s.cfg.well_length;
  const MarginalTable x1 = marginal(c, s.space, s.bases, Coordinate::x1);
  const MarginalTable q = marginal(c, s.space, s.bases, Coordinate::q);
  for (double x : {1.0, 4.0, 8.0, 13.5}) {
    const double ref = std::pow(oracle::well_function(0, l, x), 2);
    const Eigen::Index i = std::lround((x - x1.lo()) / (x1.hi() - x1.lo()) * double(x1.grid().size() - 1));
    CHECK(x1.density()(i) == doctest::Approx(std::pow(oracle::well_function(0, l, x1.grid()(i)), 2)).epsilon(1e-9));
    CHECK(x1.density()(i) == doctest::Approx(ref).epsilon(1e-2));
  }
  for (Eigen::Index i = 0; i < q.grid().size(); i += 997) {
    const double ref = std::pow(oracle::hermite_function(1, q.grid()(i)), 2);
    CHECK(std::abs(q.density()(i) - ref) <= 1e-9);
  }
  CHECK(x1.cdf(l / 2) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(q.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-9));
  for (double u : {0.01, 0.3, 0.77, 0.999}) CHECK(x1.cdf(x1.quantile(u)) == doctest::Approx(u).epsilon(1e-6));
}

TEST_CASE("product-state detection") {
  const Setup s(unmeasured());
  const auto st = initial_state(s.space, s.bases, default_initial_spec(s.cfg));
  CHECK(is_product_state(st.c, s.space));
  const auto series = evolve(s.terms, st, oracle::kRabiPeriod / 4, MuSchedule::none(), {0.05, 1.0});
  CHECK_FALSE(is_product_state(series.states.back(), s.space));
  CHECK_THROWS(sample_initial(series.states.back(), s.space, s.bases, 10, 1));

  const Setup m{ScenarioConfig{}};
  const auto sm = initial_state(m.space, m.bases, default_initial_spec(m.cfg));
  CHECK(is_product_state(sm.c, m.space));
  const Eigen::MatrixXcd ry = reduced_density(sm.c, m.space, Coordinate::y);
  CHECK(ry.trace().real() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK((ry * ry - ry).norm() < 1e-12);
}

TEST_CASE("initial samples follow quantum equilibrium") {
  const Setup s{ScenarioConfig{}};
  const auto c = initial_state(s.space, s.bases, default_initial_spec(s.cfg)).c;
  const std::size_t n = 4000;
  const auto pts = sample_initial(c, s.space, s.bases, n, 2024);
  const auto again = sample_initial(c, s.space, s.bases, n, 2024);
  const auto other = sample_initial(c, s.space, s.bases, n, 2025);
  CHECK(pts.front().x1 == again.front().x1);
  CHECK(pts.back().z == again.back().z);
  CHECK(pts.front().x1 != other.front().x1);

  std::vector<double> x1, q, y;
  for (const auto& p : pts) {
    x1.push_back(p.x1);
    q.push_back(p.q);
    y.push_back(p.y);
  }
  const double l = s.cfg.well_length;
  const double var_x = l * l * (1.0 / 12.0 - 1.0 / (2.0 * oracle::kPi * oracle::kPi));
  const double sigma0 = pointer_scales(s.cfg, s.bases).sigma0;
  // five standard errors
  CHECK(std::abs(mean(x1) - l / 2) < 5.0 * std::sqrt(var_x / n));
  CHECK(std::abs(mean(q)) < 5.0 * std::sqrt(1.5 / n));
  CHECK(variance(q) == doctest::Approx(1.5).epsilon(0.06));
  CHECK(variance(x1) == doctest::Approx(var_x).epsilon(0.06));
  CHECK(std::abs(mean(y)) < 5.0 * sigma0 / std::sqrt(double(n)));
  CHECK(std::sqrt(variance(y)) == doctest::Approx(sigma0).epsilon(0.05));
  for (Coordinate coord : kAllCoordinates) {
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(coordinate_of(p, coord));
    CHECK_MESSAGE(ks_statistic(v, marginal(c, s.space, s.bases, coord)).pass, coordinate_name(coord));
  }
}

TEST_CASE("velocity vanishes for a real field without measurement") {
  const Setup s(unmeasured());
  const auto c = initial_state(s.space, s.bases, default_initial_spec(s.cfg)).c;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> x(0.5, 15.5), q(-3.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    const ConfigPoint p{x(rng), x(rng), q(rng), 0.0, 0.0};
    CHECK(velocity(c, s.space, s.bases, p, 0.0).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("continuity residual at random space-time points") {
  const ScenarioConfig cfg;
  const Setup s(cfg);
  const auto c = random_state(s.space.size(), 31);
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> x(0.4, 15.6), q(-3.0, 3.0), y(-900.0, 900.0), tt(40.0, 75.0);
  const double hbar = 0.6582119569;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ConfigPoint p{x(rng), x(rng), q(rng), y(rng), y(rng)};
    const double mu = mu_of_t(cfg, tt(rng));
    const FieldEval f = evaluate(c, s.space, s.bases, p);
    const cplx dphi = cplx(0.0, -1.0 / hbar) * hamiltonian_action(f, p, cfg, s.bases, mu);
    const double drho = 2.0 * std::real(std::conj(f.value) * dphi);

    double div = 0.0, scale = std::abs(drho);
    const double steps[5] = {1e-3, 1e-3, 1e-3, 5e-2, 5e-2};
    for (int k = 0; k < 5; ++k) {
      auto flux = [&](double u) {
        Vector5d v = p.vector();
        v(k) = u;
        const FieldEval g = evaluate(c, s.space, s.bases, ConfigPoint::from_vector(v));
        return g.density() * velocity_from_field(g, s.bases, mu)(k);
      };
      const double d = oracle::central_difference(flux, p.vector()(k), steps[k]);
      div += d;
      scale += std::abs(d);
    }
    worst = std::max(worst, std::abs(drho + div) / scale);
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("branch classification") {
  const BranchRule rule{10.0, 10.0};
  bool both = true;
  CHECK(classify({0, 0, 0, 0, 0}, {0, 0, 0, 12, 3}, rule, &both) == Branch::y);
  CHECK_FALSE(both);
  CHECK(classify({0, 0, 0, 5, 5}, {0, 0, 0, 4, -6}, rule, &both) == Branch::z);
  CHECK(classify({0, 0, 0, 0, 0}, {0, 0, 0, 3, 3}, rule, &both) == Branch::unresolved);
  CHECK_FALSE(both);
  CHECK(classify({0, 0, 0, 0, 0}, {0, 0, 0, 30, -30}, rule, &both) == Branch::unresolved);
  CHECK(both);
  CHECK(std::string(branch_name(Branch::y)) == "Y");
}

TEST_CASE("pointer displacement scales") {
  const ScenarioConfig cfg;
  const Bases bases = make_bases(cfg);
  const PointerScales sc = pointer_scales(cfg, bases);
  const double s = cfg.meas_width, t0 = cfg.meas_center_time, t = cfg.sim_duration;
  const double integral = cfg.meas_strength * s * std::sqrt(oracle::kPi) *
                          (std::erf((t - t0) / (2 * s)) + std::erf(t0 / (2 * s)));
  CHECK(sc.shift_full == doctest::Approx((oracle::kE1 - oracle::kE0) * integral).epsilon(1e-12));
  CHECK(sc.shift_half == doctest::Approx(0.5 * sc.shift_full).epsilon(1e-9));
  const double sigma_ideal = cfg.pointer_box_length / (2 * oracle::kPi * cfg.pointer_packet_width_modes);
  // cutting the packet at |l| <= 10 (3.2 sigma_k) widens it slightly
  CHECK(sc.sigma0 == doctest::Approx(sigma_ideal).epsilon(0.04));
  ScenarioConfig wide = cfg;
  wide.pointer_truncation = 40;
  CHECK(pointer_scales(wide, bases).sigma0 == doctest::Approx(sigma_ideal).epsilon(1e-4));
  CHECK(default_branch_rule(cfg, bases).threshold_y == doctest::Approx(0.5 * sc.shift_full));
  CHECK(sc.five_sigma > sc.shift_full);
}

TEST_CASE("frozen trajectories are detected by the equivariance check") {
  const Setup s(unmeasured());
  const double t_end = oracle::kRabiPeriod / 2;
  const auto st = initial_state(s.space, s.bases, default_initial_spec(s.cfg));
  const auto series = evolve(s.terms, st, t_end, MuSchedule::none(), {s.cfg.dt_coeff, 0.5});
  const SeriesInterpolator interp(series, s.terms, MuSchedule::none());
  PropagateOptions opt;
  opt.dt = 0.5;
  opt.freeze = true;
  const Ensemble ens = run_ensemble(interp, s.space, s.bases, t_end, MuSchedule::none(), opt, 400, 9);
  const auto& tr = ens.trajectories.front();
  CHECK(tr.times.back() == t_end);
  CHECK(tr.points.back().x1 == tr.points.front().x1);
  const KsResult k = equivariance_check(ens, t_end, series.states.back(), s.space, s.bases, Coordinate::q);
  CHECK_FALSE(k.pass);
  CHECK(k.distance > 0.2);
  CHECK_THROWS(equivariance_check(ens, 0.3, series.states.back(), s.space, s.bases, Coordinate::q));
}

TEST_CASE("ensembles do not depend on the worker count") {
  const Setup s(unmeasured());
  const double t_end = 20.0;
  const auto st = initial_state(s.space, s.bases, default_initial_spec(s.cfg));
  const auto series = evolve(s.terms, st, t_end, MuSchedule::none(), {s.cfg.dt_coeff, 0.115});
  const SeriesInterpolator interp(series, s.terms, MuSchedule::none());
  PropagateOptions opt;
  opt.dt = 0.115;
  const Ensemble one = run_ensemble(interp, s.space, s.bases, t_end, MuSchedule::none(), opt, 12, 77, 1);
  const Ensemble three = run_ensemble(interp, s.space, s.bases, t_end, MuSchedule::none(), opt, 12, 77, 3);
  for (std::size_t i = 0; i < 12; ++i) {
    const auto& a = one.trajectories[i];
    const auto& b = three.trajectories[i];
    REQUIRE(a.points.size() == b.points.size());
    CHECK(a.seed == b.seed);
    for (std::size_t j = 0; j < a.points.size(); ++j) CHECK(a.points[j].vector() == b.points[j].vector());
  }
}

TEST_CASE("equivariance under a pointer measurement of an excited electron") {
  // Without light-matter coupling the truncated dynamics is exact, so the
  // ensemble must stay distributed as |Phi|^2.
  ScenarioConfig cfg;
  cfg.coupling_alpha = 0.0;
  cfg.sim_duration = 69.0;
  const Setup s(cfg);
  InitialSpec spec = default_initial_spec(cfg);
  spec.ket = "100";
  const MuSchedule mu = MuSchedule::from_config(cfg);
  const auto st = initial_state(s.space, s.bases, spec);
  const auto series = evolve(s.terms, st, cfg.sim_duration, mu, {cfg.dt_coeff, cfg.dt_coeff});
  const SeriesInterpolator interp(series, s.terms, mu);
  PropagateOptions opt;
  opt.dt = cfg.dt_traj;
  opt.measurement = true;
  opt.rule = default_branch_rule(cfg, s.bases);
  const Ensemble ens = run_ensemble(interp, s.space, s.bases, cfg.sim_duration, mu, opt, 300, 5);
  CHECK(ens.n_aborted <= 15);
  CHECK(ens.n_y > 2 * (ens.trajectories.size() - ens.n_aborted) / 3);
  CHECK(ens.n_z < ens.n_y / 10);
  for (Coordinate coord : kAllCoordinates) {
    const KsResult k = equivariance_check(ens, cfg.sim_duration, series.states.back(), s.space, s.bases, coord);
    CHECK_MESSAGE(k.pass, coordinate_name(coord), " D = ", k.distance);
  }
}
