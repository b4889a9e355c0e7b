#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qedbohm/hamiltonian.hpp"

namespace qedbohm {

struct CoefficientState {
  double t = 0.0;
  Eigen::VectorXcd c;
};

/// Snapshots at uniform cadence starting from the initial time.
struct CoefficientSeries {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;
  double cadence = 0.0;
  double step = 0.0;            // integrator step actually used
  double max_norm_drift = 0.0;  // max | ||c||^2 - ||c(0)||^2 |

  std::size_t size() const { return times.size(); }
  CoefficientState at(std::size_t i) const { return {times.at(i), states.at(i)}; }
  /// Index of the snapshot closest to t.
  std::size_t nearest(double t) const;
};

/// Measurement strength mu(t) and its running integral from t = 0.
struct MuSchedule {
  std::function<double(double)> value;
  std::function<double(double)> integral;

  static MuSchedule none();
  static MuSchedule from_config(const ScenarioConfig& cfg);
};

class NormDriftError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialSpec {
  std::string ket = "001";  // levels of electron 1, electron 2, photon
  double sigma_modes = 1.0;
  int center_y = 0;
  int center_z = 0;
};

InitialSpec default_initial_spec(const ScenarioConfig& cfg);

/// Product state |nmk> (x) packet_y (x) packet_z.
CoefficientState initial_state(const MultiIndexSpace& space, const Bases& bases, const InitialSpec& spec);

struct EvolveOptions {
  double dt = 0.0;          // requested step; the step is shrunk to divide the cadence
  double cadence = 0.0;     // snapshot spacing; defaults to dt
  double abort_drift = 1e-6;
};

/// Integrates i hbar dc/dt = H(t) c with classical RK4; no renormalization.
/// Integrates backwards when t_end < state.t.
CoefficientSeries evolve(const HamiltonianTerms& terms, const CoefficientState& state, double t_end,
                         const MuSchedule& mu, const EvolveOptions& options);

/// dc/dt at (t, c).
Eigen::VectorXcd time_derivative(const HamiltonianTerms& terms, const Eigen::VectorXcd& c, double mu);

/// Coefficients between snapshots: linear interpolation in the frame rotating
/// with the diagonal part of H, exact at the snapshots.
class SeriesInterpolator {
 public:
  SeriesInterpolator(const CoefficientSeries& series, const HamiltonianTerms& terms, MuSchedule mu);

  Eigen::VectorXcd operator()(double t) const;
  /// Snapshot index if t coincides with a stored time (to 1e-9 of the cadence), else -1.
  long exact_index(double t) const;
  const CoefficientSeries& series() const { return *series_; }

 private:
  Eigen::VectorXcd rotate(const Eigen::VectorXcd& c, double t, double sign) const;

  const CoefficientSeries* series_;
  const HamiltonianTerms* terms_;
  MuSchedule mu_;
};

/// Sum over pointer indices of |c_{nmkls}|^2.
double population(const CoefficientState& state, const MultiIndexSpace& space, std::size_t n, std::size_t m,
                  std::size_t k);
/// Populations of all (n, m, k) blocks, indexed by MultiIndexSpace::block.
Eigen::VectorXd block_populations(const Eigen::VectorXcd& c, const MultiIndexSpace& space);
double even_sector_probability(const Eigen::VectorXcd& c, const MultiIndexSpace& space);

struct EnergyBreakdown {
  double x1 = 0.0;           // sum_n E_n P(n)
  double x2 = 0.0;
  double field = 0.0;        // sum_k E_k P(k)
  double pointers = 0.0;     // pointer kinetic energy
  double interaction = 0.0;  // <c|V|c>
  double measurement = 0.0;  // mu <c|H_meas|c>
  double total = 0.0;        // <c|H|c>
};

EnergyBreakdown energies(const Eigen::VectorXcd& c, const MultiIndexSpace& space, const Bases& bases,
                         const HamiltonianTerms& terms, double mu);

}  // namespace qedbohm
