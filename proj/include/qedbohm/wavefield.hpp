#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <stdexcept>

#include "qedbohm/evolution.hpp"
#include "qedbohm/hamiltonian.hpp"

namespace qedbohm {

using cplx = std::complex<double>;

struct ConfigPoint {
  double x1 = 0.0;  // nm
  double x2 = 0.0;  // nm
  double q = 0.0;   // dimensionless mode amplitude
  double y = 0.0;   // nm
  double z = 0.0;   // nm

  Eigen::Matrix<double, 5, 1> vector() const { return {x1, x2, q, y, z}; }
  static ConfigPoint from_vector(const Eigen::Matrix<double, 5, 1>& v) { return {v(0), v(1), v(2), v(3), v(4)}; }
};

class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DegenerateSliceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Phi and the partial derivatives used by the velocity field and the
/// pointwise Schroedinger operator.
struct FieldEval {
  cplx value;
  cplx d_x1, d_x2, d_q, d_y, d_z;
  cplx d2_x1x1, d2_x2x2, d2_qq, d2_yy, d2_zz;
  cplx d2_y_x1, d2_z_x2;        // d_y d_x1, d_z d_x2
  cplx d3_y_x1x1, d3_z_x2x2;    // d_y d_x1^2, d_z d_x2^2

  double density() const { return std::norm(value); }
};

bool in_domain(const Bases& bases, const ConfigPoint& p);

/// Analytic evaluation of Phi(p) = sum c_{nmkls} phi_n(x1) phi_m(x2) psi_k(q) phi_l(y) phi_s(z).
FieldEval evaluate(const Eigen::VectorXcd& c, const MultiIndexSpace& space, const Bases& bases,
                   const ConfigPoint& p);

/// Evaluator that keeps per-coordinate factor tables between calls.
class FieldEvaluator {
 public:
  FieldEvaluator(const MultiIndexSpace& space, const Bases& bases);

  FieldEval operator()(const Eigen::VectorXcd& c, const ConfigPoint& p);

  const MultiIndexSpace& space() const { return *space_; }
  const Bases& bases() const { return *bases_; }

 private:
  struct RealFactor {
    double key = std::numeric_limits<double>::quiet_NaN();
    Eigen::ArrayXd f, d1, d2;
  };
  struct PointerFactor {
    double key = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXcd f, d1, d2;
    Eigen::MatrixX3cd stack;  // [f, d1, d2]
  };
  void update_well(RealFactor& w, double x);
  void update_photon(double q);
  void update_pointer(PointerFactor& p, double y);

  const MultiIndexSpace* space_;
  const Bases* bases_;
  RealFactor x1_, x2_, q_;
  PointerFactor y_, z_;
  Eigen::MatrixX3cd w_;
};

/// (H Phi)(p) for the pointwise Hamiltonian of the model: well kinetic terms,
/// oscillator, alpha q (x1 + x2 - L), pointer kinetic terms and
/// mu(t) P_y (K_x1 - E0) + mu(t) P_z (K_x2 - E0).
cplx hamiltonian_action(const FieldEval& f, const ConfigPoint& p, const ScenarioConfig& cfg, const Bases& bases,
                        double mu);

struct ConditionalState {
  Eigen::VectorXcd coefficients;  // over (n, m, k) blocks, unit norm
  double raw_norm = 0.0;          // norm before normalization
};

/// Coefficients of Phi(., y, z) in the matter basis.
ConditionalState conditional_coefficients(const Eigen::VectorXcd& c, const MultiIndexSpace& space,
                                          const Bases& bases, double y, double z);

enum class Subsystem { x1, x2, field };

/// Expectation of the free Hamiltonian of one subsystem in a normalized conditional state.
double conditional_energy(const ConditionalState& cond, const MultiIndexSpace& space, const Bases& bases,
                          Subsystem which);

/// Populations |c_{nmk}|^2 of a conditional state.
Eigen::VectorXd conditional_populations(const ConditionalState& cond);

}  // namespace qedbohm
