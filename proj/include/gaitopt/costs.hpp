#pragma once

#include "gaitopt/sim.hpp"

namespace gaitopt {

inline constexpr double kFallCostBase = 100.0;
// Sized so the transport term stays within about [0, 1] for 30 s walking
// episodes, well under the fall cliff.
inline constexpr double kDefaultTorqueNorm = 3000.0;

struct TrialCost {
  double cost = 0;
  bool fell = false;
  double x_fall = 0;
  double speed_error = 0;  // mean per-step |v_avg - v_tgt|
  double c_tr = 0;
};

// Fall: 100 - distance covered. Walk: mean per-step absolute speed error
// against the profile.
TrialCost cost_hardware(const EpisodeResult& episode, const SpeedProfile& profile);

// Same fall branch; the walk branch adds summed |GRF moment| time-integrals
// normalized by torque_norm_const.
TrialCost cost_simulation(const EpisodeResult& episode, const SpeedProfile& profile,
                          double torque_norm_const);

}  // namespace gaitopt
