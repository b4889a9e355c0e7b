#include "qedbohm/verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "qedbohm/bohmian.hpp"
#include "qedbohm/units.hpp"

namespace qedbohm {

namespace {

/// Composite 5-point Gauss-Legendre rule on [a, b].
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels) {
  static const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                               0.9061798459386640};
  static const double ws[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                               0.4786286704993665, 0.2369268850561891};
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < 5; ++i) sum += ws[i] * f(mid + 0.5 * h * xs[i]);
  }
  return 0.5 * h * sum;
}

template <class F>
auto central_difference(F f, double x, double h) {
  return (f(x - 2 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2 * h)) / (12.0 * h);
}

Eigen::VectorXcd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd c(n);
  for (auto& v : c) v = {g(rng), g(rng)};
  return c / c.norm();
}

OracleCheck check(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, value <= tolerance};
}

ConfigPoint random_point(const Bases& bases, std::mt19937_64& rng) {
  const double l = bases.well.length();
  std::uniform_real_distribution<double> x(0.03 * l, 0.97 * l), q(-3.0, 3.0);
  std::uniform_real_distribution<double> y(0.9 * bases.pointer.domain_min(), 0.9 * bases.pointer.domain_max());
  return {x(rng), x(rng), q(rng), y(rng), y(rng)};
}

double well_quadrature(const WellBasis& w) {
  const double l = w.length(), c = 0.5 * l;
  double dev = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    for (std::size_t m = 0; m < w.size(); ++m) {
      auto f = [&](double x) { return w.value(n, x) * w.value(m, x); };
      const double overlap = gauss_legendre(f, 0.0, l, 200);
      const double dip = gauss_legendre([&](double x) { return f(x) * (x - c); }, 0.0, l, 200);
      const double kin = gauss_legendre([&](double x) { return w.derivative(n, x) * w.derivative(m, x); }, 0.0, l,
                                        200) * units::hbar * units::hbar / (2.0 * w.mass());
      dev = std::max({dev, std::abs(overlap - (n == m ? 1.0 : 0.0)), std::abs(dip - w.dipole(n, m)),
                      std::abs(kin - (n == m ? w.energy(n) : 0.0)) / w.energy(0)});
    }
  }
  return dev;
}

double oscillator_quadrature(const OscillatorBasis& o) {
  const auto count = o.size() + 1;
  double dev = 0.0;
  for (std::size_t k = 0; k < o.size(); ++k) {
    for (std::size_t j = 0; j < o.size(); ++j) {
      auto f = [&](double q) {
        const auto psi = o.values(q, count);
        return psi(Eigen::Index(k)) * psi(Eigen::Index(j));
      };
      const double overlap = gauss_legendre(f, -20.0, 20.0, 400);
      const double qel = gauss_legendre([&](double q) { return q * f(q); }, -20.0, 20.0, 400);
      dev = std::max({dev, std::abs(overlap - (k == j ? 1.0 : 0.0)), std::abs(qel - o.q_element(k, j))});
    }
  }
  return dev;
}

double pointer_quadrature(const PointerBasis& p) {
  // trapezoid on a periodic grid is exact for these trigonometric products
  const int n = 4 * static_cast<int>(p.size()) + 8;
  const double h = p.period() / n;
  double dev = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    for (std::size_t b = 0; b < p.size(); ++b) {
      std::complex<double> overlap = 0.0, mom = 0.0;
      for (int i = 0; i < n; ++i) {
        const double y = p.domain_min() + h * i;
        const auto fa = std::conj(p.value(a, y));
        const auto fb = p.value(b, y);
        overlap += fa * fb * h;
        mom += fa * fb * h * p.momentum(b);  // -i hbar d/dy of a plane wave
      }
      const double want = a == b ? 1.0 : 0.0;
      dev = std::max({dev, std::abs(overlap - want), std::abs(mom - want * p.momentum(a)) / units::hbar});
    }
  }
  return dev;
}

double derivative_check(const MultiIndexSpace& space, const Bases& bases, std::mt19937_64& rng, int points) {
  const Eigen::VectorXcd c = random_vector(static_cast<Eigen::Index>(space.size()), rng);
  constexpr int kinds = 14;
  double err[kinds] = {}, ref[kinds] = {};
  using Pick = std::function<cplx(const FieldEval&)>;
  const Pick value = [](const FieldEval& e) { return e.value; };
  struct Kind {
    int coord;
    Pick of;
    cplx FieldEval::*analytic;
  };
  const Kind table[kinds] = {
      {0, value, &FieldEval::d_x1},
      {1, value, &FieldEval::d_x2},
      {2, value, &FieldEval::d_q},
      {3, value, &FieldEval::d_y},
      {4, value, &FieldEval::d_z},
      {0, [](const FieldEval& e) { return e.d_x1; }, &FieldEval::d2_x1x1},
      {1, [](const FieldEval& e) { return e.d_x2; }, &FieldEval::d2_x2x2},
      {2, [](const FieldEval& e) { return e.d_q; }, &FieldEval::d2_qq},
      {3, [](const FieldEval& e) { return e.d_y; }, &FieldEval::d2_yy},
      {4, [](const FieldEval& e) { return e.d_z; }, &FieldEval::d2_zz},
      {0, [](const FieldEval& e) { return e.d_y; }, &FieldEval::d2_y_x1},
      {1, [](const FieldEval& e) { return e.d_z; }, &FieldEval::d2_z_x2},
      {0, [](const FieldEval& e) { return e.d2_y_x1; }, &FieldEval::d3_y_x1x1},
      {1, [](const FieldEval& e) { return e.d2_z_x2; }, &FieldEval::d3_z_x2x2},
  };
  const double steps[5] = {1e-3, 1e-3, 1e-3, 1e-2, 1e-2};
  for (int i = 0; i < points; ++i) {
    const ConfigPoint p = random_point(bases, rng);
    const FieldEval f = evaluate(c, space, bases, p);
    for (int k = 0; k < kinds; ++k) {
      const int axis = table[k].coord;
      const cplx fd = central_difference(
          [&](double u) {
            Vector5d v = p.vector();
            v(axis) = u;
            return table[k].of(evaluate(c, space, bases, ConfigPoint::from_vector(v)));
          },
          p.vector()(axis), steps[axis]);
      const cplx an = f.*(table[k].analytic);
      err[k] = std::max(err[k], std::abs(fd - an));
      ref[k] = std::max(ref[k], std::abs(an));
    }
  }
  double worst = 0.0;
  for (int k = 0; k < kinds; ++k) {
    // a derivative that vanishes identically (collapsed pointers) is checked absolutely
    worst = std::max(worst, ref[k] > 0.0 ? err[k] / ref[k] : err[k]);
  }
  return worst;
}

double continuity_check(const ScenarioConfig& cfg, const MultiIndexSpace& space, const Bases& bases,
                        std::mt19937_64& rng, int points) {
  const Eigen::VectorXcd c = random_vector(static_cast<Eigen::Index>(space.size()), rng);
  const double mu = cfg.measurement_enabled ? cfg.meas_strength : 0.0;
  const double steps[5] = {1e-3, 1e-3, 1e-3, 5e-2, 5e-2};
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const ConfigPoint p = random_point(bases, rng);
    const FieldEval f = evaluate(c, space, bases, p);
    const cplx dphi = cplx(0.0, -1.0 / units::hbar) * hamiltonian_action(f, p, cfg, bases, mu);
    const double drho = 2.0 * std::real(std::conj(f.value) * dphi);
    double div = 0.0, scale = std::abs(drho);
    for (int k = 0; k < 5; ++k) {
      const double d = central_difference(
          [&](double u) {
            Vector5d v = p.vector();
            v(k) = u;
            const FieldEval g = evaluate(c, space, bases, ConfigPoint::from_vector(v));
            return g.density() * velocity_from_field(g, bases, mu)(k);
          },
          p.vector()(k), steps[k]);
      div += d;
      scale += std::abs(d);
    }
    if (scale > 0.0) worst = std::max(worst, std::abs(drho + div) / scale);
  }
  return worst;
}

}  // namespace

std::vector<OracleCheck> run_oracle_battery(const ScenarioConfig& cfg, const VerifyOptions& options) {
  std::vector<OracleCheck> out;
  std::mt19937_64 rng(options.seed);
  AssemblyOptions assembly;
  assembly.corrupt_coupling_sign = options.corrupt_coupling_sign;

  ScenarioConfig small = cfg;
  small.measurement_enabled = false;
  const MultiIndexSpace small_space = build_space(small);
  const Bases small_bases = make_bases(small);
  const HamiltonianTerms small_terms = assemble(small, small_space, small_bases, assembly);
  const Eigen::MatrixXd dense = dense_matrix(small_terms, 0.0);
  const double scale = dense.cwiseAbs().maxCoeff();
  out.push_back(check("hermiticity (dense, " + std::to_string(small_space.size()) + " states)",
                      (dense - dense.transpose()).cwiseAbs().maxCoeff() / scale, 1e-14));
  const Eigen::VectorXcd c = random_vector(dense.rows(), rng);
  const Eigen::VectorXcd dense_hc = dense.cast<cplx>() * c;
  out.push_back(check("dense vs matrix-free product", (dense_hc - apply(small_terms, c, 0.0)).cwiseAbs().maxCoeff() / scale,
                      1e-14));

  const MultiIndexSpace space = build_space(cfg);
  const Bases bases = make_bases(cfg);
  const HamiltonianTerms terms = assemble(cfg, space, bases, assembly);
  const double mu = cfg.measurement_enabled ? cfg.meas_strength : 0.0;
  const Eigen::VectorXcd u = random_vector(terms.size(), rng), v = random_vector(terms.size(), rng);
  const Eigen::VectorXcd hu = apply(terms, u, mu), hv = apply(terms, v, mu);
  const double norm_scale = std::max(hu.norm(), hv.norm());
  out.push_back(check("hermiticity (matrix-free, " + std::to_string(space.size()) + " states)",
                      std::abs(u.dot(hv) - hu.dot(v)) / norm_scale, 1e-13));

  out.push_back(check("well matrix elements by quadrature", well_quadrature(bases.well), 1e-10));
  out.push_back(check("oscillator matrix elements by quadrature", oscillator_quadrature(bases.photon), 1e-10));
  out.push_back(check("pointer matrix elements by quadrature", pointer_quadrature(bases.pointer), 1e-10));

  const LadderCheck ladder = ladder_hamiltonian_check(bases.photon);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(ladder.commutator.rows(), ladder.commutator.cols());
  expected(expected.rows() - 1, expected.cols() - 1) = -static_cast<double>(bases.photon.size() - 1);
  out.push_back(check("ladder-operator field Hamiltonian (exact)",
                      ladder.max_abs_deviation + (ladder.commutator - expected).cwiseAbs().maxCoeff(), 0.0));

  out.push_back(check("analytic vs finite-difference derivatives",
                      derivative_check(space, bases, rng, options.derivative_points), 1e-6));
  out.push_back(check("continuity residual (" + std::to_string(options.continuity_points) + " points)",
                      continuity_check(cfg, space, bases, rng, options.continuity_points), 1e-5));
  return out;
}

void print_oracle_table(std::ostream& out, const std::vector<OracleCheck>& checks) {
  char line[160];
  for (const auto& c : checks) {
    std::snprintf(line, sizeof line, "%-4s %-48s %11.3e <= %8.1e\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                  c.value, c.tolerance);
    out << line;
  }
}

}  // namespace qedbohm
