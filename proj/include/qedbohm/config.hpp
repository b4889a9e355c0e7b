#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace qedbohm {

/// Raised for malformed scenario files, unknown keys and hard validation errors.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All physical and numerical parameters of a run, in eV / fs / nm.
///
/// Defaults reproduce the two-electron, one-mode cavity with pointer
/// apparatus used throughout the scenario files.
struct ScenarioConfig {
  double well_length = 16.0;               // nm
  double effective_mass_ratio = 0.042;     // m_e / m0
  double cavity_omega = 0.1594;            // rad/fs
  double coupling_alpha = 6.24e-3;         // eV/nm
  std::size_t n_electron_levels = 2;
  std::size_t n_photon_levels = 2;
  std::size_t pointer_truncation = 10;     // modes l = -L..L
  double pointer_box_length = 1000.0;      // nm
  double pointer_mass_ratio = 1.0;         // m_y / m_e
  double pointer_packet_width_modes = 3.1622776601683795;
  double meas_strength = 200.0;            // nm/eV/fs
  double meas_center_time = 57.4915;       // fs
  double meas_width = 2.0;                 // fs
  double sim_duration = 460.0;             // fs
  double dt_coeff = 0.0575;                // fs
  double dt_traj = 0.115;                  // fs
  std::size_t n_trajectories = 1000;
  std::uint64_t rng_seed = 20240601;
  bool measurement_enabled = true;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Electron effective mass [eV fs^2/nm^2].
double electron_mass(const ScenarioConfig& cfg);
/// Pointer mass [eV fs^2/nm^2].
double pointer_mass(const ScenarioConfig& cfg);
/// Lowest two well levels [eV]; the gap E1 - E0 is the resonance target.
double well_level(const ScenarioConfig& cfg, std::size_t n);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  double resonance_detuning = 0.0;  // |E1 - E0 - hbar w| / (hbar w)
  bool resonance_flagged = false;

  double pointer_width0 = 0.0;      // sigma_0 ~ L_y / (2 pi sigma_k) [nm]
  double pointer_width_end = 0.0;   // sigma(T_sim) [nm]
  double dispersion_time = 0.0;     // tau_d = 2 m_y sigma_0^2 / hbar [fs]
  double spreading_scale = 0.0;     // sqrt(hbar T_sim / 2 m_e) [nm]
  double box_to_width = 0.0;        // L_y / sigma(T_sim)
  double width_to_spreading = 0.0;  // sigma(T_sim) / sqrt(hbar T_sim / 2 m_e)
  bool stability_flagged = false;

  bool ok() const { return errors.empty(); }
};

inline constexpr double kResonanceTolerance = 0.01;
inline constexpr double kHierarchyRatio = 10.0;

/// Pure consistency check. Hard errors for non-positive or non-finite
/// parameters; resonance and pointer-stability findings are warnings.
ValidationReport validate(const ScenarioConfig& cfg);

struct RabiEstimate {
  double omega = 0.0;   // rad/fs
  double period = 0.0;  // fs
};

/// Collective two-electron Rabi frequency 2 sqrt(2) (alpha/hbar) |<0|x|1>| |<0|q|1>|.
RabiEstimate rabi_estimate(const ScenarioConfig& cfg);

// Scenario files: `key = value` lines, `#` comments, keys named as the fields above.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::filesystem::path& path);
/// Applies a single `key=value` override; unknown keys throw ConfigError.
void apply_override(ScenarioConfig& cfg, const std::string& assignment);
void set_field(ScenarioConfig& cfg, const std::string& key, const std::string& value);
/// Canonical text form (all keys, fixed order, round-trip precision).
std::string to_text(const ScenarioConfig& cfg);
std::vector<std::string> field_names();

}  // namespace qedbohm
