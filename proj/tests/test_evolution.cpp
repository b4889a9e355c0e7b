#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qedbohm/evolution.hpp"

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

}  // namespace

TEST_CASE("initial state") {
  const Setup s(unmeasured());
  const auto st = initial_state(s.space, s.bases, default_initial_spec(s.cfg));
  CHECK(st.c.size() == 8);
  CHECK(st.c(Eigen::Index(s.space.flat(0, 0, 1, 0, 0))) == std::complex<double>(1.0));
  CHECK(st.c.squaredNorm() == 1.0);
  CHECK(population(st, s.space, 0, 0, 1) == 1.0);

  const Setup m(ScenarioConfig{});
  const auto sm = initial_state(m.space, m.bases, default_initial_spec(m.cfg));
  CHECK(sm.c.squaredNorm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(population(sm, m.space, 0, 0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(block_populations(sm.c, m.space).sum() == doctest::Approx(1.0).epsilon(1e-14));

  InitialSpec bad;
  bad.ket = "0x1";
  CHECK_THROWS(initial_state(s.space, s.bases, bad));
  bad.ket = "003";
  CHECK_THROWS(initial_state(s.space, s.bases, bad));
}

TEST_CASE("uncoupled eigenstate is stationary") {
  ScenarioConfig cfg = unmeasured();
  cfg.coupling_alpha = 1e-300;
  const Setup s(cfg);
  const auto st = initial_state(s.space, s.bases, default_initial_spec(cfg));
  const auto series = evolve(s.terms, st, 200.0, MuSchedule::none(), {0.05, 1.0});
  for (std::size_t i = 0; i < series.size(); ++i) {
    // RK4 damps the phase rotation slightly; no amplitude leaves |001>.
    const double norm = series.states[i].squaredNorm();
    CHECK(population(series.at(i), s.space, 0, 0, 1) / norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(norm - 1.0) < 1e-8);
  }
}

TEST_CASE("Rabi populations at half period") {
  const Setup s(unmeasured());
  const double tr = oracle::kRabiPeriod;
  const auto st = initial_state(s.space, s.bases, default_initial_spec(s.cfg));
  const auto series = evolve(s.terms, st, tr / 2, MuSchedule::none(), {tr / 2000, tr / 200});
  const auto last = series.at(series.size() - 1);
  CHECK(last.t == tr / 2);
  CHECK(population(last, s.space, 1, 0, 0) == doctest::Approx(0.5).epsilon(0.04));
  CHECK(population(last, s.space, 0, 1, 0) == doctest::Approx(0.5).epsilon(0.04));
  CHECK(population(last, s.space, 1, 0, 0) == doctest::Approx(population(last, s.space, 0, 1, 0)).epsilon(1e-12));
}

TEST_CASE("unitarity, parity and energy over four periods") {
  const Setup s(unmeasured());
  const double tr = oracle::kRabiPeriod;
  const auto st = initial_state(s.space, s.bases, default_initial_spec(s.cfg));
  const auto series = evolve(s.terms, st, 4 * tr, MuSchedule::none(), {tr / 2000, tr / 200});
  CHECK(series.max_norm_drift <= 1e-8);
  const double e0 = energies(st.c, s.space, s.bases, s.terms, 0.0).total;
  double max_even = 0.0;
  double max_de = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    max_even = std::max(max_even, even_sector_probability(series.states[i], s.space));
    max_de = std::max(max_de, std::abs(energies(series.states[i], s.space, s.bases, s.terms, 0.0).total - e0));
    CHECK(block_populations(series.states[i], s.space).sum() == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK(max_even < 1e-12);
  CHECK(max_de < 1e-6);
}

TEST_CASE("step halving and time reversal") {
  const Setup s(unmeasured());
  const double tr = oracle::kRabiPeriod;
  const auto st = initial_state(s.space, s.bases, default_initial_spec(s.cfg));
  const auto a = evolve(s.terms, st, tr, MuSchedule::none(), {tr / 2000, tr / 200});
  const auto b = evolve(s.terms, st, tr, MuSchedule::none(), {tr / 4000, tr / 200});
  const auto pa = block_populations(a.states.back(), s.space);
  const auto pb = block_populations(b.states.back(), s.space);
  CHECK((pa - pb).cwiseAbs().maxCoeff() <= 1e-6);

  const auto back = evolve(s.terms, a.at(a.size() - 1), 0.0, MuSchedule::none(), {tr / 2000, tr / 200});
  CHECK(back.times.back() == 0.0);
  CHECK((back.states.back() - st.c).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("norm drift aborts") {
  const Setup s(unmeasured());
  const auto st = initial_state(s.space, s.bases, default_initial_spec(s.cfg));
  EvolveOptions coarse{40.0, 40.0, 1e-6};
  CHECK_THROWS_AS(evolve(s.terms, st, 400.0, MuSchedule::none(), coarse), NormDriftError);
}

TEST_CASE("measured evolution keeps the norm") {
  ScenarioConfig cfg;
  cfg.pointer_truncation = 3;
  const Setup s(cfg);
  const auto st = initial_state(s.space, s.bases, default_initial_spec(cfg));
  const auto series = evolve(s.terms, st, 70.0, MuSchedule::from_config(cfg), {cfg.dt_coeff, cfg.dt_traj / 2});
  CHECK(series.max_norm_drift < 1e-8);
  CHECK(series.step <= cfg.dt_coeff);
  CHECK(series.size() == 1 + std::size_t(std::lround(70.0 / (cfg.dt_traj / 2))));
}

TEST_CASE("interpolation is exact at snapshots and accurate between") {
  ScenarioConfig cfg;
  cfg.pointer_truncation = 3;
  const Setup s(cfg);
  const auto mu = MuSchedule::from_config(cfg);
  const auto st = initial_state(s.space, s.bases, default_initial_spec(cfg));
  const auto coarse = evolve(s.terms, st, 64.0, mu, {0.02, 0.1});
  const auto fine = evolve(s.terms, st, 64.0, mu, {0.02, 0.02});
  const SeriesInterpolator interp(coarse, s.terms, mu);
  CHECK(interp(coarse.times[7]) == coarse.states[7]);
  double worst = 0.0;
  for (std::size_t i = 1; i < fine.size(); i += 3) {
    worst = std::max(worst, (interp(fine.times[i]) - fine.states[i]).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-4);
  CHECK_THROWS(interp(65.0));
}

TEST_CASE("energy breakdown") {
  const Setup s(unmeasured());
  const auto st = initial_state(s.space, s.bases, default_initial_spec(s.cfg));
  const auto e = energies(st.c, s.space, s.bases, s.terms, 0.0);
  CHECK(e.x1 == doctest::Approx(oracle::kE0));
  CHECK(e.field == doctest::Approx(1.5 * 0.6582119569 * 0.1594));
  CHECK(e.interaction == 0.0);
  CHECK(e.total == doctest::Approx(std::real(st.c.dot(apply(s.terms, st.c, 0.0)))).epsilon(1e-15));
}
