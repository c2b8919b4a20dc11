#pragma once

// Scenario dispatch. Parameters per scenario (defaults in brackets):
//
// micromaser-* (shared): n_ex [10], theta_over_pi [1], t_j [0], u_b [0] or
//   u_b_over_t_j, eta [0], beta [0], n_max [12, 0 = automatic], dt [1e-3],
//   t_max [50], steady_tol [1e-8], sample_interval [0.1]
// micromaser-sweep: sweep_variable [theta_over_pi | u_b_over_t_j], values (grid)
// micromaser-phase: phase_interval [0.5], phase_grid [64], stop_at_steady_state [false]
// passage-time: n_pairs [500], fraction [0.05], initial [both], detuning [0],
//   points [2000], t_end [auto], outputs [passage], meannb_tau_max [3],
//   meannb_points [301], population_tau [...], potential_points [241]
// counting: model [bec], mode [evolution | gap-sweep], detuning [0], times (grid);
//   bec: n_max_pairs [30]; nfg/bcs: modes [10], mu [0.1]; bcs: v [0.03];
//   gap-sweep: v_values (grid), target_n [1e-3]
// momentum: models [bec, bcs], atoms [1e5]; bec: scattering_length [0.1],
//   temperature [0.1], bec_p_max [100], bec_points [200]; fermions: kf_a [0.5],
//   a_osc [5], fermi_p_max [2.2], fermi_points [200]
//
// Grids are arrays or {"from", "to", "points", "log"} objects.

#include "config.hpp"
#include "csv.hpp"

#include <string>
#include <vector>

namespace molsim::cli {

struct PointStatus {
  std::string key;
  bool ok = true;
  bool converged = true;
  std::string error;
};

struct ScenarioResult {
  std::vector<CsvTable> tables;
  std::vector<PointStatus> points;
  Json resolved = Json::object();  // effective parameters
  Json summary = Json::object();
};

/// Checks params for the scenario and returns the effective values.
/// Throws ConfigError.
Json validate_params(Scenario scenario, const Json& params);

ScenarioResult run_scenario(const ScenarioConfig& cfg, unsigned workers);

}  // namespace molsim::cli
