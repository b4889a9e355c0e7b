#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qedbohm/basis.hpp"
#include "qedbohm/surd.hpp"

using namespace qedbohm;

namespace {
const double kL = 16.0;
}

TEST_CASE("well values at the midpoint") {
  const WellBasis well(kL, oracle::kElectronMass, 4);
  CHECK(well.value(0, kL / 2) == doctest::Approx(std::sqrt(2.0 / kL)).epsilon(1e-15));
  CHECK(std::abs(well.value(1, kL / 2)) < 1e-15);
  CHECK(well.value(0, -1.0) == 0.0);
  CHECK(well.value(0, kL + 1.0) == 0.0);
  CHECK_THROWS_AS(well.value(4, 1.0), IndexError);
  CHECK_THROWS_AS(well.dipole(0, 4), IndexError);
}

TEST_CASE("well energies") {
  const WellBasis well(kL, oracle::kElectronMass, 4);
  CHECK(well.energy(0) == doctest::Approx(oracle::kE0).epsilon(1e-12));
  CHECK(well.energy(1) == doctest::Approx(oracle::kE1).epsilon(1e-12));
  for (std::size_t n = 1; n < 4; ++n) CHECK(well.energy(n) > well.energy(n - 1));
}

TEST_CASE("well orthonormality by quadrature") {
  const WellBasis well(kL, oracle::kElectronMass, 5);
  for (std::size_t a = 0; a < 5; ++a) {
    for (std::size_t b = 0; b < 5; ++b) {
      const double overlap =
          oracle::integrate([&](double x) { return well.value(a, x) * well.value(b, x); }, 0.0, kL);
      CHECK(std::abs(overlap - (a == b ? 1.0 : 0.0)) < 1e-10);
    }
  }
}

TEST_CASE("well dipole against quadrature") {
  const WellBasis well(kL, oracle::kElectronMass, 5);
  CHECK(well.dipole(0, 1) == doctest::Approx(oracle::kDipole01).epsilon(1e-13));
  CHECK(std::abs(well.dipole(0, 1)) == doctest::Approx(16.0 * kL / (9.0 * oracle::kPi * oracle::kPi)));
  for (std::size_t a = 0; a < 5; ++a) {
    CHECK(well.dipole(a, a) == 0.0);
    for (std::size_t b = 0; b < 5; ++b) {
      const double q = oracle::integrate(
          [&](double x) {
            return oracle::well_function(int(a), kL, x) * (x - kL / 2) * oracle::well_function(int(b), kL, x);
          },
          0.0, kL);
      CHECK(std::abs(well.dipole(a, b) - q) < 1e-10);
      CHECK(well.dipole(a, b) == well.dipole(b, a));
    }
  }
}

TEST_CASE("well derivatives match finite differences") {
  const WellBasis well(kL, oracle::kElectronMass, 4);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, kL - 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const double x = u(rng);
    for (std::size_t n = 0; n < 4; ++n) {
      const double d = oracle::central_difference([&](double s) { return well.value(n, s); }, x, 1e-3);
      const double d2 =
          oracle::central_difference([&](double s) { return well.derivative(n, s); }, x, 1e-3);
      CHECK(std::abs(well.derivative(n, x) - d) <= 1e-8 * std::max(1.0, std::abs(d)));
      CHECK(std::abs(well.second_derivative(n, x) - d2) <= 1e-8 * std::max(1.0, std::abs(d2)));
    }
  }
}

TEST_CASE("oscillator values") {
  const OscillatorBasis osc(0.1594, 6);
  CHECK(osc.value(0, 0.0) == doctest::Approx(std::pow(oracle::kPi, -0.25)).epsilon(1e-15));
  CHECK(osc.value(1, 0.0) == 0.0);
  CHECK(osc.energy(1) == doctest::Approx(1.5 * 0.6582119569 * 0.1594).epsilon(1e-15));
  for (int m = 0; m < 6; ++m) {
    for (double q : {-3.1, -0.4, 0.0, 0.77, 2.5}) {
      CHECK(std::abs(osc.value(std::size_t(m), q) - oracle::hermite_function(m, q)) < 1e-13);
    }
  }
  CHECK_THROWS_AS(osc.value(6, 0.0), IndexError);
}

TEST_CASE("oscillator orthonormality and q elements by quadrature") {
  const OscillatorBasis osc(0.1594, 6);
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      const double overlap = oracle::integrate(
          [&](double q) { return oracle::hermite_function(a, q) * oracle::hermite_function(b, q); }, -12.0, 12.0);
      const double qab = oracle::integrate(
          [&](double q) { return oracle::hermite_function(a, q) * q * oracle::hermite_function(b, q); }, -12.0,
          12.0);
      CHECK(std::abs(overlap - (a == b ? 1.0 : 0.0)) < 1e-10);
      CHECK(std::abs(osc.q_element(std::size_t(a), std::size_t(b)) - qab) < 1e-10);
    }
  }
  CHECK(osc.q_element(0, 1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(osc.q_element(0, 0) == 0.0);
  CHECK(osc.q_element(1, 2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("oscillator derivative matches finite differences") {
  const OscillatorBasis osc(0.1594, 4);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double q = u(rng);
    for (std::size_t m = 0; m < 4; ++m) {
      const double d = oracle::central_difference([&](double s) { return osc.value(m, s); }, q, 1e-3);
      CHECK(std::abs(osc.derivative(m, q) - d) < 1e-8);
    }
  }
}

TEST_CASE("pointer basis is orthonormal over one period") {
  const PointerBasis ptr(1000.0, 3, oracle::kElectronMass);
  CHECK(ptr.size() == 7);
  CHECK(ptr.mode(0) == -3);
  CHECK(ptr.index_of(2) == 5);
  for (std::size_t a = 0; a < ptr.size(); ++a) {
    for (std::size_t b = 0; b < ptr.size(); ++b) {
      const double re = oracle::integrate(
          [&](double y) { return std::real(std::conj(ptr.value(a, y)) * ptr.value(b, y)); }, -1000.0, 1000.0);
      const double im = oracle::integrate(
          [&](double y) { return std::imag(std::conj(ptr.value(a, y)) * ptr.value(b, y)); }, -1000.0, 1000.0);
      CHECK(std::abs(re - (a == b ? 1.0 : 0.0)) < 1e-10);
      CHECK(std::abs(im) < 1e-10);
    }
  }
  const Eigen::VectorXcd v = ptr.values(123.0);
  for (std::size_t a = 0; a < ptr.size(); ++a) CHECK(std::abs(v(Eigen::Index(a)) - ptr.value(a, 123.0)) < 1e-14);
  const double p = 0.6582119569 * oracle::kPi * 2 / 1000.0;
  CHECK(ptr.momentum(ptr.index_of(2)) == doctest::Approx(p));
  CHECK(ptr.energy(ptr.index_of(-2)) == doctest::Approx(p * p / (2 * oracle::kElectronMass)));
}

TEST_CASE("pointer packet") {
  const PointerBasis ptr(1000.0, 10, oracle::kElectronMass);
  const auto packet = pointer_packet(ptr, std::sqrt(10.0), 0);
  CHECK_FALSE(packet.degenerate);
  CHECK(packet.coefficients.squaredNorm() == doctest::Approx(1.0).epsilon(1e-15));
  for (int l = 1; l <= 10; ++l) {
    CHECK(packet.coefficients(Eigen::Index(ptr.index_of(l))) == packet.coefficients(Eigen::Index(ptr.index_of(-l))));
  }
  const double width = packet_spatial_width(ptr, packet.coefficients.cast<std::complex<double>>());
  const double expected = 1000.0 / (2.0 * oracle::kPi * std::sqrt(10.0));
  CHECK(std::abs(width - expected) < 0.2 * expected);
  CHECK(pointer_packet(ptr, 1e-3, 0).degenerate);
  CHECK_THROWS(pointer_packet(ptr, 0.0, 0));
}

TEST_CASE("ladder construction of the field Hamiltonian is exact") {
  for (std::size_t m : {2u, 3u, 5u, 9u}) {
    const OscillatorBasis osc(0.1594, m);
    const auto check = ladder_hamiltonian_check(osc);
    CHECK(check.max_abs_deviation == 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) CHECK(check.commutator(Eigen::Index(i), Eigen::Index(i)) == 1.0);
    const auto last = Eigen::Index(m - 1);
    // truncation artifact at the top corner
    CHECK(check.commutator(last, last) == -double(m - 1));
    Eigen::MatrixXd off = check.commutator;
    off.diagonal().setZero();
    CHECK(off.isZero(0.0));
  }
  const Eigen::MatrixXd a = annihilation_matrix(3);
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 2) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("surd arithmetic") {
  const Surd r2 = Surd::sqrt_of(2);
  CHECK(r2 * r2 == Surd(2));
  CHECK(Surd::sqrt_of(12) * Surd::sqrt_of(3) == Surd(6));
  CHECK(Surd::sqrt_of(8).coefficient() == 2);
  CHECK(Surd::sqrt_of(8).radicand() == 2);
  CHECK(r2 + r2 == Surd::sqrt_of(8));
  CHECK((r2 - r2) == Surd(0));
  CHECK_THROWS(r2 + Surd::sqrt_of(3));
}
