#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qedbohm/evolution.hpp"
#include "qedbohm/wavefield.hpp"

namespace qedbohm {

using Vector5d = Eigen::Matrix<double, 5, 1>;

enum class Coordinate { x1 = 0, x2 = 1, q = 2, y = 3, z = 4 };

const char* coordinate_name(Coordinate c);
inline constexpr Coordinate kAllCoordinates[] = {Coordinate::x1, Coordinate::x2, Coordinate::q, Coordinate::y,
                                                 Coordinate::z};

/// Per-index stream seed: splitmix64 applied to master seed and index.
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index);

/// One-dimensional density tabulated on a uniform grid, with its CDF.
class MarginalTable {
 public:
  MarginalTable(double lo, double hi, Eigen::VectorXd density);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const Eigen::VectorXd& grid() const { return grid_; }
  const Eigen::VectorXd& density() const { return density_; }  // normalized
  /// Cumulative probability at x (clamped to [0, 1]).
  double cdf(double x) const;
  /// Inverse CDF by linear interpolation.
  double quantile(double u) const;

 private:
  double lo_, hi_, step_;
  Eigen::VectorXd grid_, density_, cdf_;
};

inline constexpr std::size_t kMarginalGrid = 1u << 14;

/// Coordinate range used for tabulation.
std::pair<double, double> coordinate_range(const Bases& bases, Coordinate coord);

/// Marginal of |Phi|^2 along one coordinate, from the reduced one-factor density matrix.
MarginalTable marginal(const Eigen::VectorXcd& c, const MultiIndexSpace& space, const Bases& bases,
                       Coordinate coord, std::size_t grid = kMarginalGrid);

/// Reduced density matrix of one factor (well levels, photon levels or pointer modes).
Eigen::MatrixXcd reduced_density(const Eigen::VectorXcd& c, const MultiIndexSpace& space, Coordinate coord);

/// True if every single-factor reduced state is pure (to 1e-10).
bool is_product_state(const Eigen::VectorXcd& c, const MultiIndexSpace& space);

/// Independent draws from |Phi(., 0)|^2 for a product state, one coordinate at a time.
std::vector<ConfigPoint> sample_initial(const Eigen::VectorXcd& c, const MultiIndexSpace& space,
                                        const Bases& bases, std::size_t n, std::uint64_t seed);

/// Guidance velocity field with the density floored at rho_floor.
Vector5d velocity_from_field(const FieldEval& f, const Bases& bases, double mu, double rho_floor = 0.0);

Vector5d velocity(const Eigen::VectorXcd& c, const MultiIndexSpace& space, const Bases& bases,
                  const ConfigPoint& p, double mu);

enum class Branch { y, z, unresolved };
const char* branch_name(Branch b);

struct BranchRule {
  double threshold_y = 0.0;  // nm
  double threshold_z = 0.0;  // nm
};

/// Pointer displacement scales of a measured run.
struct PointerScales {
  double sigma0 = 0.0;           // initial packet width [nm]
  double shift_full = 0.0;       // (E1 - E0) * integral of mu over [0, T_sim] [nm]
  double shift_half = 0.0;       // (E1 - E0) * integral of mu over [t0, T_sim] [nm]
  double five_sigma = 0.0;       // 5 sigma0 [nm]
};

PointerScales pointer_scales(const ScenarioConfig& cfg, const Bases& bases);

/// Displaced when the pointer moved more than half the full-window shift.
BranchRule default_branch_rule(const ScenarioConfig& cfg, const Bases& bases);

struct Trajectory {
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<ConfigPoint> points;
  Branch branch = Branch::unresolved;
  bool both_displaced = false;
  bool aborted = false;
  std::string diagnostic;
  std::size_t regularized_steps = 0;  // steps evaluated with the floored density
  std::size_t halvings = 0;           // extra sub-steps taken near nodes
};

struct PropagateOptions {
  double dt = 0.1;                   // fs
  double output_cadence = 0.0;       // fs, multiple of dt; 0 = every step
  double node_fraction = 1e-12;      // floor relative to the running max density
  int max_halvings = 8;
  bool measurement = false;          // classify branches at the end
  BranchRule rule;
  bool freeze = false;               // v = 0 (test hook)
};

Trajectory propagate(const SeriesInterpolator& coefficients, const MultiIndexSpace& space, const Bases& bases,
                     const ConfigPoint& start, double t_end, const MuSchedule& mu, const PropagateOptions& options,
                     std::uint64_t seed = 0);

Branch classify(const ConfigPoint& start, const ConfigPoint& end, const BranchRule& rule, bool* both = nullptr);

struct Ensemble {
  std::vector<Trajectory> trajectories;
  std::uint64_t master_seed = 0;
  std::string config_hash;
  std::size_t n_aborted = 0;
  std::size_t n_y = 0, n_z = 0, n_unresolved = 0, n_both = 0;
};

/// Worker count: hardware concurrency, capped by QEDBOHM_THREADS when set.
unsigned worker_count();

Ensemble run_ensemble(const SeriesInterpolator& coefficients, const MultiIndexSpace& space, const Bases& bases,
                      double t_end, const MuSchedule& mu, const PropagateOptions& options, std::size_t n,
                      std::uint64_t master_seed, unsigned threads = 0);

struct KsResult {
  double distance = 0.0;
  double critical = 0.0;  // 1.36 / sqrt(n)
  bool pass = false;
};

/// Sup distance between the empirical CDF of `samples` and the marginal of |Phi|^2.
KsResult ks_statistic(std::vector<double> samples, const MarginalTable& table);

/// Compares the ensemble positions at time t with the marginal of c along one coordinate.
KsResult equivariance_check(const Ensemble& ensemble, double t, const Eigen::VectorXcd& c,
                            const MultiIndexSpace& space, const Bases& bases, Coordinate coord);

double coordinate_of(const ConfigPoint& p, Coordinate coord);

}  // namespace qedbohm
