#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qedbohm/bohmian.hpp"
#include "qedbohm/evolution.hpp"

namespace qedbohm {

/// "nmk" label of a matter block.
std::string ket_label(std::size_t n, std::size_t m, std::size_t k);
std::vector<std::string> block_labels(const MultiIndexSpace& space);

struct UnconditionalSeries {
  std::vector<double> times;
  std::vector<std::string> labels;  // one per matter block
  Eigen::MatrixXd populations;      // time x block
  std::vector<EnergyBreakdown> energies;
  std::vector<double> norm;
  std::vector<double> even_probability;
  double rabi_period = std::numeric_limits<double>::quiet_NaN();
  double max_closure_error = 0.0;     // max |sum_blocks p - 1|
  double max_energy_drift = 0.0;      // max |E_total(t) - E_total(0)|
  double max_even_probability = 0.0;
};

/// First return of p to within `band` of 1 after it has left that band,
/// refined to the parabolic peak inside the return window. NaN if none.
double detect_rabi_period(const std::vector<double>& times, const Eigen::VectorXd& p, double band = 0.02);

UnconditionalSeries unconditional_series(const CoefficientSeries& series, const MultiIndexSpace& space,
                                         const Bases& bases, const HamiltonianTerms& terms, const MuSchedule& mu);

/// Block populations at the stored time closest to t.
Eigen::VectorXd populations_at(const UnconditionalSeries& s, double t);

struct ConditionalSeries {
  std::size_t traj_id = 0;
  Branch branch = Branch::unresolved;
  std::vector<double> times, y, z;
  Eigen::MatrixXd populations;  // time x block, conditional
  std::vector<double> e_x1, e_x2, e_field;
  std::vector<double> e_interaction;  // residual <V> in the conditional state
  double final_population = 0.0;      // |c_100|^2 (Y) or |c_010|^2 (Z) at the end
  double final_energy = 0.0;          // <H_x1> (Y) or <H_x2> (Z) at the end
  bool target_met = false;            // >= 0.95 and within 0.01 eV of E1
  double pre_measurement_deviation = 0.0;  // vs unconditional, t < t0 - 3 sigma
};

inline constexpr double kCollapsedPopulation = 0.95;
inline constexpr double kEnergyTolerance = 0.01;  // eV

/// Conditional state along one resolved trajectory; rejects unresolved ones.
ConditionalSeries conditional_series(const Ensemble& ensemble, const SeriesInterpolator& coefficients,
                                     const MultiIndexSpace& space, const Bases& bases,
                                     const HamiltonianTerms& terms, const ScenarioConfig& cfg,
                                     std::size_t traj_id);

/// First non-aborted trajectory of a branch.
std::optional<std::size_t> first_in_branch(const Ensemble& ensemble, Branch branch);

struct BornSummary {
  std::size_t n_total = 0, n_y = 0, n_z = 0, n_unresolved = 0, n_aborted = 0, n_both = 0;
  std::size_t n_resolved = 0;
  double y_fraction = 0.0;   // n_y / n_resolved
  double z_fraction = 0.0;
  double y_sigma = 0.0;      // binomial standard error of y_fraction at the expected probability
  double t_meas = 0.0;
  double p100 = 0.0, p010 = 0.0;  // unconditional populations at t_meas
  double expected_y = 0.0;        // p100 / (p100 + p010)
  bool consistent = false;        // |y_fraction - expected_y| <= 3 y_sigma
};

/// Branch fractions against the populations at measurement onset.
BornSummary born_summary(const Ensemble& ensemble, const Eigen::VectorXcd& c_meas, double t_meas,
                         const MultiIndexSpace& space, std::size_t min_resolved = 100);

/// Onset of the measurement window, t0 - 3 sigma_mu.
double measurement_onset(const ScenarioConfig& cfg);
/// End of the measurement window, t0 + 3 sigma_mu.
double measurement_end(const ScenarioConfig& cfg);

struct EquivarianceRow {
  Coordinate coord = Coordinate::x1;
  double t = 0.0;
  KsResult ks;
};

std::vector<EquivarianceRow> equivariance_table(const Ensemble& ensemble, const std::vector<double>& times,
                                                const SeriesInterpolator& coefficients,
                                                const MultiIndexSpace& space, const Bases& bases);

/// Histogram of the ensemble against the bin-averaged |Phi|^2 marginal.
struct MarginalComparison {
  Coordinate coord = Coordinate::x1;
  double t = 0.0;
  Eigen::VectorXd centers, histogram, density;
};

MarginalComparison marginal_comparison(const Ensemble& ensemble, double t, const Eigen::VectorXcd& c,
                                       const MultiIndexSpace& space, const Bases& bases, Coordinate coord,
                                       std::size_t bins = 60);

/// |Phi| on an (x1, x2) grid at the remaining coordinates of a trajectory point.
struct Slice {
  double t = 0.0;
  ConfigPoint at;
  Eigen::VectorXd x1, x2;
  Eigen::MatrixXd magnitude;  // x1 x x2
};

Slice slice_x1x2(const Eigen::VectorXcd& c, const MultiIndexSpace& space, const Bases& bases, double t,
                 const ConfigPoint& at, std::size_t grid = 41);

// Comma-separated exports. Numbers use the shortest round-trip form.
std::string format_number(double v);
void write_populations_csv(std::ostream& out, const UnconditionalSeries& s);
void write_energies_csv(std::ostream& out, const UnconditionalSeries& s);
void write_trajectories_csv(std::ostream& out, const Ensemble& ensemble);
void write_conditional_csv(std::ostream& out, const ConditionalSeries& s, const std::vector<std::string>& labels);
void write_equivariance_csv(std::ostream& out, const std::vector<EquivarianceRow>& rows);
void write_marginals_csv(std::ostream& out, const std::vector<MarginalComparison>& rows);
void write_slices_csv(std::ostream& out, const std::vector<std::pair<Branch, Slice>>& slices);

struct BranchReport {
  BornSummary born;
  double ks[5] = {0, 0, 0, 0, 0};
  double ks_critical = 0.0;
  double threshold = 0.0;
  PointerScales scales;
};

/// `key = value` summary of a measured ensemble.
void write_branch_summary(std::ostream& out, const BranchReport& r);

}  // namespace qedbohm
