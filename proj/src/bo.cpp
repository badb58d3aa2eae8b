#include "gaitopt/bo.hpp"

#include <algorithm>
#include <cmath>

namespace gaitopt {

const char* arm_name(ArmKind arm) {
  switch (arm) {
    case ArmKind::SE: return "se";
    case ArmKind::DoG: return "dog";
    case ArmKind::DoGAdjusted: return "dog-adj";
    case ArmKind::Random: return "random";
  }
  return "?";
}

ArmKind parse_arm(const std::string& name) {
  if (name == "se") return ArmKind::SE;
  if (name == "dog") return ArmKind::DoG;
  if (name == "dog-adj") return ArmKind::DoGAdjusted;
  if (name == "random") return ArmKind::Random;
  throw ConfigError("unknown kernel/arm '" + name + "'");
}

namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

KernelKind arm_kernel(ArmKind arm) {
  switch (arm) {
    case ArmKind::SE: return KernelKind::SE;
    case ArmKind::DoG: return KernelKind::DoG;
    case ArmKind::DoGAdjusted: return KernelKind::DoGAdjusted;
    case ArmKind::Random: break;
  }
  throw InvalidArgument("random arm has no kernel");
}

}  // namespace

double expected_improvement(double mean, double variance, double best_cost) {
  if (variance < 0) throw InvalidArgument("expected_improvement: negative variance");
  const double improvement = best_cost - mean;
  if (variance == 0) return std::max(improvement, 0.0);
  const double sigma = std::sqrt(variance);
  const double z = improvement / sigma;
  return improvement * normal_cdf(z) + sigma * normal_pdf(z);
}

const Candidate& propose_next(const GpModel& gp, const std::vector<Candidate>& candidates,
                              const BoHistory& history, Rng& first_pick_rng) {
  if (candidates.empty()) throw InvalidArgument("propose_next: empty candidate set");

  std::vector<char> evaluated(candidates.size(), 0);
  for (const auto& e : history.entries)
    if (e.candidate_index >= 0 && e.candidate_index < static_cast<int>(candidates.size()))
      evaluated[static_cast<std::size_t>(e.candidate_index)] = 1;

  if (history.entries.empty())
    return candidates[static_cast<std::size_t>(
        first_pick_rng.uniform_int(static_cast<int>(candidates.size())))];

  double best_cost = history.entries.front().cost;
  for (const auto& e : history.entries) best_cost = std::min(best_cost, e.cost);

  int best_index = -1;
  double best_ei = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (evaluated[i]) continue;
    const Posterior p = gp.posterior(candidates[i].features);
    const double ei = expected_improvement(p.mean, p.variance, best_cost);
    if (ei > best_ei) {
      best_ei = ei;
      best_index = static_cast<int>(i);
    }
  }
  if (best_index < 0) throw Exhausted("propose_next: all candidates evaluated");
  return candidates[static_cast<std::size_t>(best_index)];
}

BoConfig default_bo_config(const ScoreTable& table) {
  BoConfig cfg;
  const double phi_range =
      std::max(table.phi.maxCoeff() - table.phi.minCoeff(), 1.0);

  const int d = table.schema.dim();
  // Pilot cost samples on walking/falling mixes spread over roughly [0, 100];
  // the variance of such a sample, measured once during bring-up, is frozen
  // here as the fixed signal variance.
  const double pilot_cost_variance = 2500.0;
  cfg.se_hyper = Hyperparams::make(pilot_cost_variance,
                                   Eigen::VectorXd::Constant(d, 0.3), 1e-2,
                                   HyperMode::Learned);
  cfg.dog_hyper = Hyperparams::make(
      pilot_cost_variance, Eigen::VectorXd::Constant(1, 0.1 * phi_range), 1e-2,
      HyperMode::Fixed);
  cfg.adjusted_hyper = Hyperparams::make(
      pilot_cost_variance, Eigen::VectorXd::Constant(2, 0.1 * phi_range), 1e-2,
      HyperMode::Fixed);
  const double mismatch_scale = 0.25 * phi_range;
  cfg.mismatch_hyper = Hyperparams::make(mismatch_scale * mismatch_scale,
                                         Eigen::VectorXd::Constant(d, 0.3), 1e-2,
                                         HyperMode::Fixed);
  return cfg;
}

std::vector<Candidate> make_candidates(const ScoreTable& table) {
  std::vector<Candidate> out;
  out.reserve(static_cast<std::size_t>(table.rows()));
  for (int i = 0; i < table.rows(); ++i) {
    Candidate c;
    c.index = i;
    c.params = ControllerParams::from_active(table.params.row(i), table.schema.variant,
                                             table.fixture);
    c.phi = table.phi[i];
    out.push_back(std::move(c));
  }
  return out;
}

BoHistory run_bo(const Objective& objective, const ScoreTable& table, ArmKind arm,
                 int n_trials, std::uint64_t seed, const BoConfig& config,
                 MismatchModel* mismatch) {
  if (n_trials < 1) throw InvalidArgument("run_bo: n_trials must be >= 1");
  if (table.rows() < 1) throw InvalidArgument("run_bo: empty table");

  BoHistory history;
  history.kernel = arm;
  history.seed = seed;
  Rng rng(mix_seed(seed, 0xb0b0));

  std::vector<Candidate> candidates = make_candidates(table);

  std::optional<MismatchModel> local_mismatch;
  MismatchModel* mm = mismatch;
  if (arm == ArmKind::DoGAdjusted && mm == nullptr) {
    local_mismatch.emplace(table.schema, config.mismatch_hyper);
    mm = &*local_mismatch;
  }

  const auto refresh_features = [&] {
    if (arm == ArmKind::Random) return;
    for (auto& c : candidates) {
      switch (arm) {
        case ArmKind::SE:
          c.features = normalize_params(table.schema, c.params.active_values());
          break;
        case ArmKind::DoG:
          c.features = Eigen::VectorXd::Constant(1, c.phi);
          break;
        case ArmKind::DoGAdjusted: {
          Eigen::VectorXd f(2);
          f << c.phi, mm->predict(c.params);
          c.features = f;
          break;
        }
        case ArmKind::Random: break;
      }
    }
  };
  refresh_features();

  // random baseline: a seeded shuffle prefix, evaluated in order
  std::vector<int> random_order;
  if (arm == ArmKind::Random) {
    random_order.resize(candidates.size());
    for (std::size_t i = 0; i < random_order.size(); ++i) random_order[i] = static_cast<int>(i);
    for (std::size_t i = random_order.size(); i > 1; --i)
      std::swap(random_order[i - 1],
                random_order[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)))]);
  }

  Hyperparams hyper = arm == ArmKind::SE        ? config.se_hyper
                      : arm == ArmKind::DoG     ? config.dog_hyper
                      : arm == ArmKind::DoGAdjusted ? config.adjusted_hyper
                                                  : config.dog_hyper;

  Eigen::MatrixXd train_x(0, arm == ArmKind::Random ? 1 : candidates.front().features.size());
  Eigen::VectorXd train_y(0);
  GpModel gp;  // empty prior until the first observation

  double best_cost = std::numeric_limits<double>::infinity();
  for (int trial = 1; trial <= n_trials; ++trial) {
    int pick;
    if (arm == ArmKind::Random) {
      if (trial > static_cast<int>(random_order.size()))
        throw Exhausted("run_bo: random baseline exhausted the table");
      pick = random_order[static_cast<std::size_t>(trial - 1)];
    } else {
      pick = propose_next(gp, candidates, history, rng).index;
    }
    const Candidate& chosen = candidates[static_cast<std::size_t>(pick)];

    TrialOutcome outcome;
    try {
      outcome = objective(chosen.params, trial);
    } catch (...) {
      outcome = TrialOutcome{100.0, true, 0.0, 0.0, 0.0, 0.0};
    }

    best_cost = std::min(best_cost, outcome.cost);
    BoEntry entry;
    entry.trial = trial;
    entry.candidate_index = pick;
    entry.params = chosen.params;
    entry.phi_sim = chosen.phi;
    entry.cost = outcome.cost;
    entry.fell = outcome.fell;
    entry.posterior_best = best_cost;
    history.entries.push_back(entry);

    if (trial == n_trials) break;
    if (arm == ArmKind::Random) continue;

    if (arm == ArmKind::DoGAdjusted) {
      mm->observe(chosen.params, chosen.phi - outcome.phi_eval);
      refresh_features();
    }

    const int n = static_cast<int>(history.entries.size());
    train_x.resize(n, candidates.front().features.size());
    train_y.resize(n);
    for (int i = 0; i < n; ++i) {
      train_x.row(i) =
          candidates[static_cast<std::size_t>(history.entries[static_cast<std::size_t>(i)].candidate_index)]
              .features;
      train_y[i] = history.entries[static_cast<std::size_t>(i)].cost;
    }

    const bool refit = arm == ArmKind::SE ? config.refit_se : config.refit_dog;
    if (refit && n >= 2) {
      Hyperparams learned = hyper;
      learned.mode = HyperMode::Learned;
      hyper = fit_hyperparams(train_x, train_y, arm_kernel(arm), learned,
                              mix_seed(seed, static_cast<std::uint64_t>(trial)))
                  .hyper;
    }
    gp = GpModel::fit(arm_kernel(arm), train_x, train_y, hyper);
  }
  return history;
}

}  // namespace gaitopt
