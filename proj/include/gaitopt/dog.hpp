#pragma once

#include <vector>

#include "gaitopt/sim.hpp"

namespace gaitopt {

struct DogThresholds {
  double retraction_min = 0.03;    // m
  double com_height_tol = 0.05;    // m
  double trunk_lean_tol = 0.1;     // rad
  double chatter_step_time = 0.1;  // s
};

struct StepMetricValues {
  int m1 = 0;     // swing leg retracted enough
  int m2 = 0;     // CoM height held across the step
  int m3 = 0;     // trunk lean held across the step
  double m4 = 0;  // average speed, not binarized
};

struct GaitScore {
  double phi = 0;
  double score_total = 0;
  double time_fraction = 0;
  std::vector<StepMetricValues> per_step;
  bool chattered = false;  // diagnostic; chatter is handled by time scaling
};

StepMetricValues step_metrics(const StepRecord& record, const DogThresholds& thresholds);

GaitScore episode_score(const EpisodeResult& episode, const DogThresholds& thresholds);

}  // namespace gaitopt
