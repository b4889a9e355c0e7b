#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "qedbohm/config.hpp"

namespace qedbohm {

struct OracleCheck {
  std::string name;
  double value = 0.0;      // measured deviation
  double tolerance = 0.0;  // pass when value <= tolerance
  bool pass = false;
};

struct VerifyOptions {
  bool corrupt_coupling_sign = false;  // fault hook
  std::uint64_t seed = 1;
  int derivative_points = 20;
  int continuity_points = 100;
};

/// Oracle battery: Hermiticity and dense equivalence on the 8-state space,
/// matrix-free Hermiticity on the scenario space, quadrature matrix elements,
/// exact ladder identity, finite-difference derivatives, continuity residual.
std::vector<OracleCheck> run_oracle_battery(const ScenarioConfig& cfg, const VerifyOptions& options = {});

void print_oracle_table(std::ostream& out, const std::vector<OracleCheck>& checks);

}  // namespace qedbohm
