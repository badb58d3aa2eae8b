#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gaitopt/gp.hpp"
#include "gaitopt/random.hpp"
#include "gaitopt/tablegen.hpp"

namespace gaitopt {

enum class ArmKind { SE, DoG, DoGAdjusted, Random };

const char* arm_name(ArmKind arm);
ArmKind parse_arm(const std::string& name);

struct Candidate {
  int index = 0;
  ControllerParams params;
  double phi = 0;
  Eigen::VectorXd features;  // kernel-space coordinates
};

struct TrialOutcome {
  double cost = 0;
  bool fell = false;
  double phi_eval = 0;  // behavior score measured on the evaluation machine
  double x_fall = 0;
  double speed_error = 0;
  double c_tr = 0;
};

struct BoEntry {
  int trial = 0;  // 1-based
  int candidate_index = 0;
  ControllerParams params;
  double phi_sim = 0;
  double cost = 0;
  bool fell = false;
  double posterior_best = 0;  // best observed cost so far
};

struct BoHistory {
  ArmKind kernel = ArmKind::DoG;
  std::uint64_t seed = 0;
  std::vector<BoEntry> entries;
};

// Expected improvement under the minimization convention.
double expected_improvement(double mean, double variance, double best_cost);

// Argmax of EI over candidates not yet evaluated; ties break toward the
// lowest candidate index. With an empty history the pick is uniform random.
// Throws Exhausted when every candidate has been evaluated.
const Candidate& propose_next(const GpModel& gp, const std::vector<Candidate>& candidates,
                              const BoHistory& history, Rng& first_pick_rng);

using Objective = std::function<TrialOutcome(const ControllerParams& params, int trial)>;

struct BoConfig {
  Hyperparams se_hyper;
  Hyperparams dog_hyper;
  Hyperparams adjusted_hyper;
  Hyperparams mismatch_hyper;
  bool refit_se = true;    // learn SE hyperparameters every trial
  bool refit_dog = false;  // fixed hyperparameters work well for the score kernels
};

// Scale-aware defaults derived from the score spread of the table.
BoConfig default_bo_config(const ScoreTable& table);

std::vector<Candidate> make_candidates(const ScoreTable& table);

// The optimization loop: propose, evaluate, update the mismatch model (for
// the adjusted kernel), refit, repeat. Deterministic per seed. Objective
// failures are recorded as falls at the maximum cost.
BoHistory run_bo(const Objective& objective, const ScoreTable& table, ArmKind arm,
                 int n_trials, std::uint64_t seed, const BoConfig& config,
                 MismatchModel* mismatch = nullptr);

}  // namespace gaitopt
