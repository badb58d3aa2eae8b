#include "gaitopt/costs.hpp"

#include <cmath>

namespace gaitopt {

namespace {

double mean_speed_error(const EpisodeResult& episode, const SpeedProfile& profile) {
  if (episode.steps.empty()) return profile.first_speed();  // stood still
  double err = 0;
  for (std::size_t i = 0; i < episode.steps.size(); ++i)
    err += std::abs(episode.steps[i].avg_speed -
                    profile.speed_for_step(static_cast<int>(i)));
  return err / static_cast<double>(episode.steps.size());
}

}  // namespace

TrialCost cost_hardware(const EpisodeResult& episode, const SpeedProfile& profile) {
  TrialCost c;
  c.fell = episode.fell;
  c.x_fall = episode.x_fall;
  c.speed_error = mean_speed_error(episode, profile);
  c.cost = episode.fell ? kFallCostBase - episode.x_fall : c.speed_error;
  return c;
}

TrialCost cost_simulation(const EpisodeResult& episode, const SpeedProfile& profile,
                          double torque_norm_const) {
  if (!(torque_norm_const > 0))
    throw InvalidArgument("cost_simulation: torque_norm_const must be positive");
  TrialCost c = cost_hardware(episode, profile);
  double torque_sum = 0;
  for (const auto& step : episode.steps) torque_sum += step.torque_abs_sum;
  c.c_tr = torque_sum / torque_norm_const;
  if (!c.fell) c.cost = c.speed_error + c.c_tr;
  return c;
}

}  // namespace gaitopt
