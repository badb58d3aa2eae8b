#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "gaitopt/campaign.hpp"
#include "gaitopt/config.hpp"

using namespace gaitopt;

namespace {

int run_tablegen(const std::string& bounds_path, const std::string& fixture_path, int n,
                 std::uint64_t seed, double sim_seconds, double target_speed,
                 const std::string& scheme, int threads, const std::string& out_path) {
  ParamBounds bounds =
      bounds_path.empty() ? default_bounds(Variant::NineD) : load_bounds(bounds_path);
  FiveDFixture fixture =
      fixture_path.empty() ? default_five_d_fixture() : load_fixture(fixture_path);
  TableMeta meta;
  meta.scheme = parse_scheme(scheme);
  meta.seed = seed;
  meta.sim_seconds = sim_seconds;
  meta.target_speed = target_speed;
  const Eigen::MatrixXd grid = sample_grid(bounds, n, seed, meta.scheme);
  const ScoreTable table = build_table(grid, bounds, fixture, ModelParams{}, meta, threads);
  save_table(table, out_path);
  std::printf("table: %d rows (%d failed), phi in [%g, %g], written to %s\n", table.rows(),
              table.meta.failed_rows, table.phi.minCoeff(), table.phi.maxCoeff(),
              out_path.c_str());
  return 0;
}

int run_optimize(const std::string& table_path, const std::string& kernel, int trials,
                 std::uint64_t seed, double perturb, double mass_scale,
                 const std::string& profile_path, const std::string& cost,
                 double t_max, const std::string& out_path) {
  const ScoreTable table = load_table(table_path);
  const SpeedProfile profile = load_profile(profile_path);
  const CostKind cost_kind = parse_cost_kind(cost);

  ModelParams eval_model;
  eval_model.trunk_mass *= mass_scale;
  if (perturb > 0) eval_model = perturb_model(eval_model, perturb, mix_seed(seed, 0xa11ce));

  const Objective objective =
      make_pseudo_hw_objective(profile, eval_model, t_max, cost_kind, kDefaultTorqueNorm,
                               table.meta.sim_seconds, table.meta.thresholds);
  const BoHistory history = run_bo(objective, table, parse_arm(kernel), trials, seed,
                                   default_bo_config(table));

  std::printf("trial,cost,best_so_far,fell,phi_sim\n");
  for (const auto& e : history.entries)
    std::printf("%d,%g,%g,%d,%g\n", e.trial, e.cost, e.posterior_best, e.fell ? 1 : 0,
                e.phi_sim);
  if (!out_path.empty()) {
    CampaignReport report;
    report.arm_order = {kernel};
    report.n_runs = 1;
    report.trials_per_run = trials;
    for (const auto& e : history.entries)
      report.trials.push_back(
          {0, kernel, e.trial, e.cost, e.posterior_best, e.fell, e.phi_sim});
    report.summaries = summarize_trials(report.trials, report.arm_order, trials);
    emit_report(report, out_path, true, true);
  }
  return 0;
}

int run_correlate(int n, std::uint64_t seed, const std::string& profile_path, double t_max,
                  double sim_seconds, double target_speed, int threads,
                  const std::string& out_path) {
  const SpeedProfile profile =
      profile_path.empty() ? updown_profile() : load_profile(profile_path);
  const auto points =
      correlate_sample(default_bounds(Variant::NineD), default_five_d_fixture(), n, seed,
                       ModelParams{}, profile, t_max, sim_seconds, target_speed,
                       DogThresholds{}, kDefaultTorqueNorm, threads);
  save_correlate_csv(points, out_path);
  std::vector<double> phis, costs;
  int walked = 0;
  for (const auto& p : points) {
    phis.push_back(p.phi);
    costs.push_back(p.cost);
    if (!p.fell) ++walked;
  }
  std::printf("n=%d walk_rate=%.3f spearman(phi,cost)=%.3f -> %s\n", n,
              static_cast<double>(walked) / n, spearman_correlation(phis, costs),
              out_path.c_str());
  return 0;
}

int run_report(const std::string& in_dir, const std::string& format) {
  const auto trials = load_trials_csv(in_dir + "/trials.csv");
  std::vector<std::string> arms;
  int trials_per_run = 0;
  for (const auto& t : trials) {
    if (std::find(arms.begin(), arms.end(), t.arm) == arms.end()) arms.push_back(t.arm);
    trials_per_run = std::max(trials_per_run, t.trial);
  }
  CampaignReport report;
  report.arm_order = arms;
  report.trials = trials;
  report.trials_per_run = trials_per_run;
  report.summaries = summarize_trials(trials, arms, trials_per_run);
  emit_report(report, in_dir, format == "csv", format == "json");
  std::printf("summary.%s written under %s\n", format.c_str(), in_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"controller tuning with behavior-informed kernels"};
  app.require_subcommand(1);

  // tablegen
  auto* tg = app.add_subcommand("tablegen", "precompute behavior scores over a grid");
  std::string tg_bounds, tg_fixture, tg_scheme = "sobol", tg_out;
  int tg_n = 1000, tg_threads = 2;
  std::uint64_t tg_seed = 1;
  double tg_sim_seconds = 3.5, tg_speed = 0.5;
  tg->add_option("--bounds", tg_bounds, "bounds file (default: built-in 9-D box)");
  tg->add_option("--fixture", tg_fixture, "frozen-parameter file for the 5-D variant");
  tg->add_option("--n", tg_n, "grid size")->required();
  tg->add_option("--seed", tg_seed, "generator seed");
  tg->add_option("--sim-seconds", tg_sim_seconds, "short simulation length");
  tg->add_option("--target-speed", tg_speed, "constant target speed");
  tg->add_option("--scheme", tg_scheme, "sobol|uniform");
  tg->add_option("--threads", tg_threads, "worker threads");
  tg->add_option("--out", tg_out, "output table path")->required();

  // optimize
  auto* opt = app.add_subcommand("optimize", "single optimization run against a table");
  std::string opt_table, opt_kernel = "dog", opt_profile, opt_cost = "sim", opt_out;
  int opt_trials = 20;
  std::uint64_t opt_seed = 1;
  double opt_perturb = 0.15, opt_mass_scale = 1.0, opt_tmax = 30.0;
  opt->add_option("--table", opt_table, "score table path")->required();
  opt->add_option("--kernel", opt_kernel, "se|dog|dog-adj|random");
  opt->add_option("--trials", opt_trials, "trial budget");
  opt->add_option("--seed", opt_seed, "run seed");
  opt->add_option("--perturb", opt_perturb, "evaluation model perturbation magnitude");
  opt->add_option("--mass-scale", opt_mass_scale, "deterministic trunk-mass factor");
  opt->add_option("--profile", opt_profile, "speed profile file")->required();
  opt->add_option("--cost", opt_cost, "hw|sim");
  opt->add_option("--t-max", opt_tmax, "evaluation episode length");
  opt->add_option("--out", opt_out, "optional report directory");

  // campaign
  auto* camp = app.add_subcommand("campaign", "multi-run kernel comparison");
  std::string camp_config;
  camp->add_option("--config", camp_config, "campaign config file")->required();

  // correlate
  auto* corr = app.add_subcommand("correlate", "score-vs-cost sample for plotting");
  std::string corr_profile, corr_out;
  int corr_n = 1000, corr_threads = 2;
  std::uint64_t corr_seed = 1;
  double corr_tmax = 30.0, corr_sim_seconds = 3.5, corr_speed = 0.5;
  corr->add_option("--n", corr_n, "sample size");
  corr->add_option("--seed", corr_seed, "sample seed");
  corr->add_option("--profile", corr_profile, "cost profile file (default: built-in)");
  corr->add_option("--t-max", corr_tmax, "cost episode length");
  corr->add_option("--sim-seconds", corr_sim_seconds, "short simulation length");
  corr->add_option("--target-speed", corr_speed, "short simulation target speed");
  corr->add_option("--threads", corr_threads, "worker threads");
  corr->add_option("--out", corr_out, "output csv path")->required();

  // report
  auto* rep = app.add_subcommand("report", "recompute summaries from trials.csv");
  std::string rep_in, rep_format = "json";
  rep->add_option("--in", rep_in, "directory holding trials.csv")->required();
  rep->add_option("--format", rep_format, "csv|json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tg->parsed())
      return run_tablegen(tg_bounds, tg_fixture, tg_n, tg_seed, tg_sim_seconds, tg_speed,
                          tg_scheme, tg_threads, tg_out);
    if (opt->parsed())
      return run_optimize(opt_table, opt_kernel, opt_trials, opt_seed, opt_perturb,
                          opt_mass_scale, opt_profile, opt_cost, opt_tmax, opt_out);
    if (camp->parsed()) {
      const CampaignConfig config = CampaignConfig::load(camp_config);
      const CampaignReport report = run_campaign(config);
      emit_report(report, config.out_dir, true, true);
      for (const auto& s : report.summaries)
        std::printf("%-8s success=%.2f median_ttfw=%.1f mean_best_walk_cost=%.4f\n",
                    s.arm.c_str(), s.success_rate, s.median_trials_to_first_walk,
                    s.mean_best_walking_cost);
      if (!report.failed_runs.empty())
        std::fprintf(stderr, "%zu run(s) failed and were excluded\n",
                     report.failed_runs.size());
      return 0;
    }
    if (corr->parsed())
      return run_correlate(corr_n, corr_seed, corr_profile, corr_tmax, corr_sim_seconds,
                           corr_speed, corr_threads, corr_out);
    if (rep->parsed()) {
      if (rep_format != "csv" && rep_format != "json")
        throw ConfigError("--format must be csv or json");
      return run_report(rep_in, rep_format);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return 2;
  } catch (const VersionError& e) {
    std::fprintf(stderr, "version error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 2;
  } catch (const NumericalFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
