#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qedbohm/observables.hpp"
#include "qedbohm/verify.hpp"

namespace qedbohm {

/// Everything assembled from one validated configuration.
struct Model {
  ScenarioConfig cfg;
  MultiIndexSpace space;
  Bases bases;
  HamiltonianTerms terms;
  MuSchedule mu;

  explicit Model(const ScenarioConfig& c);
};

/// Trajectory step, output cadence and KS times for a run.
struct TrajectoryPlan {
  double t_end = 0.0;
  double dt = 0.0;
  double output_cadence = 0.0;
  std::vector<double> check_times;  // equivariance checks
  double marginal_time = 0.0;       // histogram export
};

/// Unmeasured: up to one Rabi period on a step dividing T_R / 200, checks at
/// T_R/4, T_R/2, T_R. Measured: up to T_sim with dt_traj, check at T_sim.
TrajectoryPlan trajectory_plan(const ScenarioConfig& cfg, double rabi_period);

struct RunResult {
  std::unique_ptr<Model> model;
  std::unique_ptr<CoefficientSeries> series;
  std::unique_ptr<SeriesInterpolator> coefficients;
  UnconditionalSeries unconditional;
  CorrectionReport corrections;
  TrajectoryPlan plan;
  std::optional<Ensemble> ensemble;
  std::vector<EquivarianceRow> equivariance;
  std::vector<MarginalComparison> marginals;
  std::optional<BranchReport> branches;
  std::vector<ConditionalSeries> exemplars;  // first Y, first Z when present
  std::vector<std::pair<Branch, Slice>> slices;
  std::vector<std::pair<std::string, double>> timings;  // stage, seconds

  double abort_fraction() const;
};

inline constexpr double kMaxAbortFraction = 0.05;

/// assemble -> evolve -> observables -> (n_trajectories > 0) ensemble and
/// branch analysis. Throws NormDriftError on excess norm drift.
RunResult run_pipeline(const ScenarioConfig& cfg, std::ostream* log = nullptr);

/// Writes every data file of a run into `dir`; returns the file names.
std::vector<std::string> write_outputs(const RunResult& r, const std::filesystem::path& dir);

struct RunOptions {
  std::vector<std::string> overrides;  // key=value
  std::optional<std::uint64_t> seed;
  bool no_measure = false;
};

/// Exit codes: 0 success, 1 invalid input, 2 runtime invariant failure.
int cmd_run(const std::filesystem::path& scenario, const std::filesystem::path& out_dir, const RunOptions& options,
            std::ostream& log, std::ostream& err);
int cmd_plot(const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err);
/// Empty scenario path runs the battery on the default configuration.
int cmd_verify(const std::filesystem::path& scenario, const VerifyOptions& options, std::ostream& log,
               std::ostream& err);

/// Minimal reader for the comma-separated exports.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool has(const std::string& column) const;
  std::vector<double> numbers(const std::string& column) const;
  std::vector<std::string> strings(const std::string& column) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace qedbohm
