#pragma once

// Internal unit system: energies in eV, times in fs, lengths in nm.

namespace qedbohm::units {

/// Reduced Planck constant [eV fs].
inline constexpr double hbar = 0.6582119569;

/// Electron rest energy [eV] and speed of light [nm/fs].
inline constexpr double electron_rest_energy = 510998.95;
inline constexpr double speed_of_light = 299.792458;

/// Electron rest mass [eV fs^2 / nm^2].
inline constexpr double m0 = electron_rest_energy / (speed_of_light * speed_of_light);

inline constexpr double pi = 3.14159265358979323846;

}  // namespace qedbohm::units
