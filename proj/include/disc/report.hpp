#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "disc/core.hpp"

namespace disc {

struct FailEvent {
  long step = 0;
  int dim_w = 0;
  int n_alive = 0;
};

/// Invariant measurements collected while a walk runs. Tolerances are applied
/// by the caller; the engine only records worst cases.
struct WalkDiagnostics {
  double max_flat_drift = 0.0;       ///< max |<w, dx>| over blocked row vectors
  double max_energy_increase = 0.0;  ///< max per-step increase of Y on E-blocked rows
  double max_norm_gap = 0.0;         ///< max |  |x|^2 - t  |
  long frozen_violations = 0;        ///< steps that moved a frozen coordinate
  long truncated_steps = 0;          ///< steps shortened to stop at the cube boundary
  double max_si_excess = -1e300;     ///< max over re-solves of ratio - factor (when checked)
  long si_checks = 0;
  long forced_resolves = 0;
  long unit_norm_violations = 0;     ///< samples with | |v| - 1 | > 1e-9
};

struct RunReport {
  std::string algo;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::string mode;
  Coloring coloring;
  double disc_max = 0.0;
  Eigen::VectorXd disc_per_row;
  bool include_per_row = false;
  std::vector<FailEvent> fail_events;
  long steps = 0;
  long resolves = 0;
  double wallclock_ms = 0.0;
  long freeze_count = 0;
  double final_time = 0.0;
  WalkDiagnostics diagnostics;
  /// Algorithm-specific counters (per scale, per level, per class, ...).
  std::map<std::string, std::vector<double>> extras;

  bool failed() const { return !fail_events.empty(); }
};

}  // namespace disc
