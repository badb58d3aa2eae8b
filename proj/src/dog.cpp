#include "gaitopt/dog.hpp"

#include <cmath>

namespace gaitopt {

StepMetricValues step_metrics(const StepRecord& record, const DogThresholds& thresholds) {
  if (!(record.duration > 0)) throw InvalidArgument("step_metrics: duration must be positive");
  StepMetricValues m;
  m.m1 = record.max_leg_retraction > thresholds.retraction_min ? 1 : 0;
  m.m2 = std::abs(record.com_height_end - record.com_height_start) < thresholds.com_height_tol
             ? 1
             : 0;
  m.m3 = std::abs(record.trunk_lean_end - record.trunk_lean_start) < thresholds.trunk_lean_tol
             ? 1
             : 0;
  m.m4 = record.avg_speed;
  return m;
}

GaitScore episode_score(const EpisodeResult& episode, const DogThresholds& thresholds) {
  if (!(episode.t_max > 0)) throw InvalidArgument("episode_score: t_max must be positive");
  GaitScore score;
  score.per_step.reserve(episode.steps.size());
  for (const auto& step : episode.steps) {
    const StepMetricValues m = step_metrics(step, thresholds);
    score.per_step.push_back(m);
    score.score_total += m.m1 + m.m2 + m.m3 + m.m4;
    if (step.duration < thresholds.chatter_step_time) score.chattered = true;
  }
  double fraction = episode.t_sim / episode.t_max;
  if (fraction < 0) fraction = 0;
  if (fraction > 1) fraction = 1;
  score.time_fraction = fraction;
  score.phi = score.score_total * score.time_fraction;
  return score;
}

}  // namespace gaitopt
