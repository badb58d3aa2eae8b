#pragma once

#include <string>
#include <vector>

#include "gaitopt/bo.hpp"
#include "gaitopt/config.hpp"
#include "gaitopt/costs.hpp"

namespace gaitopt {

struct TrialRecord {
  int run = 0;
  std::string arm;
  int trial = 0;
  double cost = 0;
  double best_so_far = 0;
  bool fell = false;
  double phi_sim = 0;
};

struct ArmSummary {
  std::string arm;
  int n_runs = 0;
  int n_walking_runs = 0;
  double success_rate = 0;  // runs with at least one walking trial
  double median_trials_to_first_walk = 0;  // censored runs count as trials+1
  double mean_best_cost = 0;
  double best_cost_ci_lo = 0, best_cost_ci_hi = 0;
  double mean_best_walking_cost = 0;  // over walking runs only
  double walking_ci_lo = 0, walking_ci_hi = 0;
};

struct CampaignReport {
  std::vector<std::string> arm_order;
  int n_runs = 0;
  int trials_per_run = 0;
  std::vector<TrialRecord> trials;
  std::vector<ArmSummary> summaries;
  std::vector<std::string> failed_runs;
};

// Full-length episode on the evaluation model; phi_eval comes from scoring
// the first short_sim_seconds of the same episode with the table's
// thresholds, so the mismatch signal needs no extra rollouts.
Objective make_pseudo_hw_objective(const SpeedProfile& profile, const ModelParams& eval_model,
                                   double t_max, CostKind cost_kind, double torque_norm,
                                   double short_sim_seconds, const DogThresholds& thresholds);

// Loads the table (fingerprint-checked against the nominal model and the
// configured thresholds), then runs every (arm, run) cell: the evaluation
// model of run r is perturb_model(mass_scale * nominal, perturb, base_seed + r),
// shared across arms for paired comparison. Failed runs are excluded and
// listed in the report.
CampaignReport run_campaign(const CampaignConfig& config);
CampaignReport run_campaign(const CampaignConfig& config, const ScoreTable& table);

std::vector<ArmSummary> summarize_trials(const std::vector<TrialRecord>& trials,
                                         const std::vector<std::string>& arm_order,
                                         int trials_per_run);

// trials.csv plus summary.json / summary.csv under out_dir.
void emit_report(const CampaignReport& report, const std::string& out_dir, bool csv,
                 bool json);

std::vector<TrialRecord> load_trials_csv(const std::string& path);

struct CorrelatePoint {
  double phi = 0;
  double cost = 0;
  bool fell = false;
};

// Random controllers scored two ways: short-sim behavior score and
// full-length simulation cost on the nominal model.
std::vector<CorrelatePoint> correlate_sample(const ParamBounds& bounds,
                                             const FiveDFixture& fixture, int n,
                                             std::uint64_t seed, const ModelParams& model,
                                             const SpeedProfile& profile, double t_max,
                                             double sim_seconds, double table_speed,
                                             const DogThresholds& thresholds,
                                             double torque_norm, int n_threads);

void save_correlate_csv(const std::vector<CorrelatePoint>& points, const std::string& path);

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);
double median_of(std::vector<double> values);
struct MeanCi {
  double mean = 0, lo = 0, hi = 0;
};
MeanCi mean_ci95(const std::vector<double>& values);

}  // namespace gaitopt
