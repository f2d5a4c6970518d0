#pragma once

#include <string>
#include <vector>

#include "latbound/torus.hpp"

namespace latbound {

/// One fiber of a quasimomentum scan.
struct BandRow {
  TorusPoint quasimomentum;
  bool ok = false;
  std::string status = "ok";
  double energy = 0.0;
  double tau_bottom = 0.0;
  double tau_top = 0.0;
  /// Spectrum of the free fiber, [E_min, E_max].
  Interval free_band;
  /// Distance from `energy` to the essential spectrum of the fiber.
  double gap = 0.0;
};

struct BandReport {
  double mu = 0.0;
  int d = 1;
  int n = 0;
  std::vector<BandRow> rows;
  /// [min energy, max energy] over successful rows.
  Interval band;
  /// Minimum of BandRow::gap over successful rows.
  double min_gap = 0.0;
  bool isolated = false;
  bool all_ok = false;
};

/// Fills band, min_gap, isolated and all_ok from the rows.
void summarize(BandReport& report);

}  // namespace latbound
