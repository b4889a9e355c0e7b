#include "qedbohm/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <variant>

#include "qedbohm/basis.hpp"
#include "qedbohm/units.hpp"

namespace qedbohm {

namespace {

static_assert(std::is_same_v<std::size_t, std::uint64_t>,
              "rng_seed shares the size_t field slot");

using FieldPtr =
    std::variant<double ScenarioConfig::*, std::size_t ScenarioConfig::*, bool ScenarioConfig::*>;

struct FieldEntry {
  const char* name;
  FieldPtr ptr;
};

const std::vector<FieldEntry>& field_table() {
  static const std::vector<FieldEntry> table = {
      {"well_length", &ScenarioConfig::well_length},
      {"effective_mass_ratio", &ScenarioConfig::effective_mass_ratio},
      {"cavity_omega", &ScenarioConfig::cavity_omega},
      {"coupling_alpha", &ScenarioConfig::coupling_alpha},
      {"n_electron_levels", &ScenarioConfig::n_electron_levels},
      {"n_photon_levels", &ScenarioConfig::n_photon_levels},
      {"pointer_truncation", &ScenarioConfig::pointer_truncation},
      {"pointer_box_length", &ScenarioConfig::pointer_box_length},
      {"pointer_mass_ratio", &ScenarioConfig::pointer_mass_ratio},
      {"pointer_packet_width_modes", &ScenarioConfig::pointer_packet_width_modes},
      {"meas_strength", &ScenarioConfig::meas_strength},
      {"meas_center_time", &ScenarioConfig::meas_center_time},
      {"meas_width", &ScenarioConfig::meas_width},
      {"sim_duration", &ScenarioConfig::sim_duration},
      {"dt_coeff", &ScenarioConfig::dt_coeff},
      {"dt_traj", &ScenarioConfig::dt_traj},
      {"n_trajectories", &ScenarioConfig::n_trajectories},
      {"rng_seed", &ScenarioConfig::rng_seed},
      {"measurement_enabled", &ScenarioConfig::measurement_enabled},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_integer(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (!text.empty() && text.front() == '-') {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + text + "'");
  }
  auto [p, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || p != end) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  }
  if (used != text.size()) {
    throw ConfigError("key '" + key + "': trailing characters in '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + text + "'");
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

double electron_mass(const ScenarioConfig& cfg) { return cfg.effective_mass_ratio * units::m0; }

double pointer_mass(const ScenarioConfig& cfg) { return cfg.pointer_mass_ratio * electron_mass(cfg); }

double well_level(const ScenarioConfig& cfg, std::size_t n) {
  const double k = static_cast<double>(n + 1) * units::pi / cfg.well_length;
  return units::hbar * units::hbar * k * k / (2.0 * electron_mass(cfg));
}

ValidationReport validate(const ScenarioConfig& cfg) {
  ValidationReport report;
  auto require_positive = [&](const char* name, double v) {
    if (!positive_finite(v)) {
      std::ostringstream os;
      os << name << " must be positive and finite (got " << v << ")";
      report.errors.push_back(os.str());
    }
  };
  require_positive("well_length", cfg.well_length);
  require_positive("effective_mass_ratio", cfg.effective_mass_ratio);
  require_positive("cavity_omega", cfg.cavity_omega);
  require_positive("coupling_alpha", cfg.coupling_alpha);
  require_positive("pointer_box_length", cfg.pointer_box_length);
  require_positive("pointer_mass_ratio", cfg.pointer_mass_ratio);
  require_positive("pointer_packet_width_modes", cfg.pointer_packet_width_modes);
  require_positive("meas_strength", cfg.meas_strength);
  require_positive("meas_center_time", cfg.meas_center_time);
  require_positive("meas_width", cfg.meas_width);
  require_positive("sim_duration", cfg.sim_duration);
  require_positive("dt_coeff", cfg.dt_coeff);
  require_positive("dt_traj", cfg.dt_traj);

  auto require_count = [&](const char* name, std::size_t v) {
    if (v == 0) report.errors.push_back(std::string(name) + " must be at least 1");
  };
  require_count("n_electron_levels", cfg.n_electron_levels);
  require_count("n_photon_levels", cfg.n_photon_levels);
  require_count("pointer_truncation", cfg.pointer_truncation);
  require_count("n_trajectories", cfg.n_trajectories);

  if (positive_finite(cfg.dt_coeff) && positive_finite(cfg.dt_traj) && cfg.dt_coeff > cfg.dt_traj) {
    report.errors.push_back("dt_coeff must not exceed dt_traj");
  }
  if (positive_finite(cfg.dt_traj) && positive_finite(cfg.sim_duration) &&
      cfg.dt_traj > cfg.sim_duration) {
    report.errors.push_back("dt_traj must not exceed sim_duration");
  }
  if (!report.ok()) return report;

  const double hbar = units::hbar;
  const double photon = hbar * cfg.cavity_omega;
  const double gap = well_level(cfg, 1) - well_level(cfg, 0);
  report.resonance_detuning = std::abs(gap - photon) / photon;
  if (report.resonance_detuning > kResonanceTolerance) {
    report.resonance_flagged = true;
    std::ostringstream os;
    os << "resonance detuning " << 100.0 * report.resonance_detuning
       << "% of hbar*omega exceeds " << 100.0 * kResonanceTolerance << "%";
    report.warnings.push_back(os.str());
  }

  const double my = pointer_mass(cfg);
  const double me = electron_mass(cfg);
  const double sigma0 =
      cfg.pointer_box_length / (2.0 * units::pi * cfg.pointer_packet_width_modes);
  report.pointer_width0 = sigma0;
  report.dispersion_time = 2.0 * my * sigma0 * sigma0 / hbar;
  const double spread = cfg.sim_duration / report.dispersion_time;
  report.pointer_width_end = sigma0 * std::sqrt(1.0 + spread * spread);
  report.spreading_scale = std::sqrt(hbar * cfg.sim_duration / (2.0 * me));
  report.box_to_width = cfg.pointer_box_length / report.pointer_width_end;
  report.width_to_spreading = report.pointer_width_end / report.spreading_scale;
  if (cfg.measurement_enabled &&
      (report.box_to_width < kHierarchyRatio || report.width_to_spreading < kHierarchyRatio)) {
    report.stability_flagged = true;
    std::ostringstream os;
    os << "pointer hierarchy L/sigma = " << report.box_to_width
       << ", sigma/sqrt(hbar T/2m) = " << report.width_to_spreading << " (want >= "
       << kHierarchyRatio << ")";
    report.warnings.push_back(os.str());
  }
  return report;
}

RabiEstimate rabi_estimate(const ScenarioConfig& cfg) {
  const WellBasis well(cfg.well_length, electron_mass(cfg), std::max<std::size_t>(2, cfg.n_electron_levels));
  const OscillatorBasis osc(cfg.cavity_omega, std::max<std::size_t>(2, cfg.n_photon_levels));
  const double g = cfg.coupling_alpha / units::hbar * std::abs(well.dipole(0, 1)) *
                   std::abs(osc.q_element(0, 1));
  RabiEstimate r;
  r.omega = 2.0 * std::sqrt(2.0) * g;
  r.period = 2.0 * units::pi / r.omega;
  return r;
}

std::vector<std::string> field_names() {
  std::vector<std::string> names;
  for (const auto& f : field_table()) names.emplace_back(f.name);
  return names;
}

void set_field(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : field_table()) {
    if (key != f.name) continue;
    std::visit(
        [&](auto ptr) {
          using Member = std::remove_reference_t<decltype(cfg.*ptr)>;
          if constexpr (std::is_same_v<Member, double>) {
            cfg.*ptr = parse_real(key, value);
          } else if constexpr (std::is_same_v<Member, bool>) {
            cfg.*ptr = parse_bool(key, value);
          } else {
            cfg.*ptr = parse_integer<Member>(key, value);
          }
        },
        f.ptr);
    return;
  }
  throw ConfigError("unknown key '" + key + "'");
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  set_field(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

ScenarioConfig parse_scenario(std::istream& in) {
  ScenarioConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      set_field(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  return parse_scenario(in);
}

std::string to_text(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& f : field_table()) {
    os << f.name << " = ";
    std::visit(
        [&](auto ptr) {
          using Member = std::remove_reference_t<decltype(cfg.*ptr)>;
          if constexpr (std::is_same_v<Member, bool>) {
            os << (cfg.*ptr ? "true" : "false");
          } else {
            os << cfg.*ptr;
          }
        },
        f.ptr);
    os << '\n';
  }
  return os.str();
}

}  // namespace qedbohm
