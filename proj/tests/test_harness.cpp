#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gaitopt/campaign.hpp"
#include "gaitopt/config.hpp"
#include "gaitopt/random.hpp"

using namespace gaitopt;

namespace {

std::string temp_dir(const char* name) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EpisodeResult walked_episode(const std::vector<double>& speeds) {
  EpisodeResult ep;
  ep.t_max = 30;
  ep.t_sim = 10;
  ep.fell = false;
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    StepRecord r;
    r.step_index = static_cast<int>(i);
    r.duration = 0.3;
    r.avg_speed = speeds[i];
    r.torque_abs_sum = 40.0;
    ep.steps.push_back(r);
    ep.per_step_speeds.push_back(speeds[i]);
  }
  return ep;
}

ScoreTable tiny_table(int rows, double sim_seconds) {
  TableMeta meta;
  meta.scheme = GridScheme::Sobol;
  meta.seed = 3;
  meta.sim_seconds = sim_seconds;
  meta.target_speed = 0.5;
  const ParamBounds bounds = default_bounds(Variant::NineD);
  const Eigen::MatrixXd grid = sample_grid(bounds, rows, 3, GridScheme::Sobol);
  return build_table(grid, bounds, default_five_d_fixture(), ModelParams{}, meta, 2);
}

}  // namespace

TEST_CASE("hardware cost") {
  SpeedProfile profile{{{0.4, 50}}};
  SUBCASE("fall branch pays the lost distance") {
    EpisodeResult ep;
    ep.t_max = 30;
    ep.t_sim = 4;
    ep.fell = true;
    ep.x_fall = 2.0;
    const TrialCost c = cost_hardware(ep, profile);
    CHECK(c.cost == doctest::Approx(98.0));
    CHECK(c.fell);
  }
  SUBCASE("perfect tracking is free") {
    const TrialCost c = cost_hardware(walked_episode(std::vector<double>(10, 0.4)), profile);
    CHECK(c.cost == doctest::Approx(0.0));
  }
  SUBCASE("constant offset costs the offset") {
    const TrialCost c = cost_hardware(walked_episode(std::vector<double>(10, 0.5)), profile);
    CHECK(c.cost == doctest::Approx(0.1));
  }
}

TEST_CASE("simulation cost adds the transport term") {
  SpeedProfile profile{{{0.4, 50}}};
  const EpisodeResult ep = walked_episode(std::vector<double>(10, 0.4));

  SUBCASE("fall branch matches the hardware cost") {
    EpisodeResult fall;
    fall.t_max = 30;
    fall.t_sim = 2;
    fall.fell = true;
    fall.x_fall = 7.5;
    CHECK(cost_simulation(fall, profile, 3000.0).cost ==
          cost_hardware(fall, profile).cost);
  }
  SUBCASE("zero torque means zero transport cost") {
    EpisodeResult quiet = ep;
    for (auto& s : quiet.steps) s.torque_abs_sum = 0;
    const TrialCost c = cost_simulation(quiet, profile, 3000.0);
    CHECK(c.c_tr == 0.0);
    CHECK(c.cost == doctest::Approx(0.0));
  }
  SUBCASE("doubling the normalizer halves the transport term") {
    const TrialCost a = cost_simulation(ep, profile, 3000.0);
    const TrialCost b = cost_simulation(ep, profile, 6000.0);
    CHECK(a.c_tr == doctest::Approx(2.0 * b.c_tr));
    CHECK(a.c_tr == doctest::Approx(10 * 40.0 / 3000.0));
  }
  SUBCASE("normalizer must be positive") {
    CHECK_THROWS_AS(cost_simulation(ep, profile, 0.0), InvalidArgument);
  }
}

TEST_CASE("profile and config parsing") {
  SUBCASE("profile text") {
    const SpeedProfile p =
        parse_profile_text("# demo\nsegment = 0.4, 15\nsegment = 1.0, 15\n");
    REQUIRE(p.segments.size() == 2);
    CHECK(p.segments[0].speed == 0.4);
    CHECK(p.segments[1].steps == 15);
  }
  SUBCASE("malformed lines are config errors") {
    CHECK_THROWS_AS(parse_profile_text("segment = 0.4\n"), ConfigError);
    CHECK_THROWS_AS(parse_profile_text("segment = 0.4, 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_profile_text("nonsense\n"), ConfigError);
    CHECK_THROWS_AS(parse_profile_text("# only comments\n"), ConfigError);
  }
  SUBCASE("shipped profiles parse") {
    const std::string dir = GAITOPT_DATA_DIR;
    CHECK(load_profile(dir + "/profile_easy.cfg").total_steps() == 30);
    CHECK(load_profile(dir + "/profile_updown.cfg").total_steps() == 50);
    CHECK(load_profile(dir + "/profile_stepdown.cfg").total_steps() == 50);
  }
}

TEST_CASE("campaign plumbing on a tiny problem") {
  const ScoreTable table = tiny_table(128, 3.5);
  const std::string table_path = temp_dir("gaitopt_hn") + "/table.tbl";
  save_table(table, table_path);

  CampaignConfig cfg;
  cfg.arms = {ArmKind::DoG, ArmKind::Random};
  cfg.n_runs = 3;
  cfg.trials_per_run = 4;
  cfg.base_seed = 9;
  cfg.perturb_magnitude = 0.15;
  cfg.table_path = table_path;
  cfg.cost_kind = CostKind::Simulation;
  cfg.t_max = 10.0;
  cfg.profile = easy_profile();
  cfg.n_threads = 2;

  const CampaignReport report = run_campaign(cfg);

  SUBCASE("row count is runs times trials per arm") {
    CHECK(report.trials.size() == 2u * 3u * 4u);
    CHECK(report.failed_runs.empty());
  }
  SUBCASE("summaries recompute exactly from the trial rows") {
    const auto dir = temp_dir("gaitopt_hn_out");
    emit_report(report, dir, true, true);
    const auto rows = load_trials_csv(dir + "/trials.csv");
    CHECK(rows.size() == report.trials.size());
    const auto summaries = summarize_trials(rows, report.arm_order, cfg.trials_per_run);
    REQUIRE(summaries.size() == report.summaries.size());
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      CHECK(summaries[i].success_rate == report.summaries[i].success_rate);
      CHECK(summaries[i].mean_best_cost == report.summaries[i].mean_best_cost);
      CHECK(summaries[i].median_trials_to_first_walk ==
            report.summaries[i].median_trials_to_first_walk);
    }
  }
  SUBCASE("single run and single trial degenerate correctly") {
    CampaignConfig one = cfg;
    one.arms = {ArmKind::Random};
    one.n_runs = 1;
    one.trials_per_run = 1;
    const CampaignReport r = run_campaign(one);
    REQUIRE(r.trials.size() == 1);
    REQUIRE(r.summaries.size() == 1);
    CHECK(r.summaries[0].mean_best_cost == r.trials[0].cost);
    CHECK(r.summaries[0].n_runs == 1);
  }
}

TEST_CASE("campaign rejects incompatible tables") {
  const ScoreTable table = tiny_table(64, 3.5);
  const std::string table_path = temp_dir("gaitopt_hn2") + "/table.tbl";
  save_table(table, table_path);

  CampaignConfig cfg;
  cfg.arms = {ArmKind::Random};
  cfg.n_runs = 1;
  cfg.trials_per_run = 1;
  cfg.table_path = table_path;
  cfg.profile = easy_profile();

  SUBCASE("threshold mismatch") {
    cfg.thresholds.retraction_min = 0.07;  // table was built with 0.03
    CHECK_THROWS_AS(run_campaign(cfg), VersionError);
  }
  SUBCASE("variant mismatch") {
    cfg.variant = Variant::FiveD;
    CHECK_THROWS_AS(run_campaign(cfg), VersionError);
  }
}

TEST_CASE("campaign reruns are byte-identical") {
  const ScoreTable table = tiny_table(128, 3.5);
  const std::string table_path = temp_dir("gaitopt_hn3") + "/table.tbl";
  save_table(table, table_path);

  CampaignConfig cfg;
  cfg.arms = {ArmKind::DoG, ArmKind::SE};
  cfg.n_runs = 2;
  cfg.trials_per_run = 3;
  cfg.base_seed = 77;
  cfg.table_path = table_path;
  cfg.profile = easy_profile();
  cfg.t_max = 8.0;
  cfg.n_threads = 2;

  const auto dir_a = temp_dir("gaitopt_rep_a");
  const auto dir_b = temp_dir("gaitopt_rep_b");
  emit_report(run_campaign(cfg), dir_a, true, true);
  emit_report(run_campaign(cfg), dir_b, true, true);
  CHECK(slurp(dir_a + "/trials.csv") == slurp(dir_b + "/trials.csv"));
  CHECK(slurp(dir_a + "/summary.json") == slurp(dir_b + "/summary.json"));
  CHECK(slurp(dir_a + "/summary.csv") == slurp(dir_b + "/summary.csv"));
}

TEST_CASE("random draws walk the easy profile at the expected rate") {
  // brute-force check of the shipped search box on the nominal model
  const ParamBounds bounds = default_bounds(Variant::NineD);
  const ModelParams model;
  const SpeedProfile profile = easy_profile();
  Rng rng(99);
  const int n = 1000;
  int walked = 0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v(9);
    for (int j = 0; j < 9; ++j) v[j] = rng.uniform(bounds.lo[j], bounds.hi[j]);
    const ControllerParams p = ControllerParams::from_active(v, Variant::NineD);
    const EpisodeResult ep =
        run_episode(p, profile, model, 30.0, make_initial_state(p, model, 0.4));
    if (!ep.fell) ++walked;
  }
  const double rate = static_cast<double>(walked) / n;
  CHECK(rate >= 0.15);
  CHECK(rate <= 0.40);
}

TEST_CASE("exactly one cost branch applies per episode") {
  SpeedProfile profile{{{0.4, 50}}};
  Rng rng(61);
  for (int i = 0; i < 200; ++i) {
    EpisodeResult ep = walked_episode({rng.uniform(0, 1), rng.uniform(0, 1)});
    ep.fell = rng.uniform01() < 0.5;
    ep.x_fall = rng.uniform(0, 20);
    const TrialCost hw = cost_hardware(ep, profile);
    const TrialCost sim = cost_simulation(ep, profile, 3000.0);
    if (ep.fell) {
      CHECK(hw.cost == kFallCostBase - ep.x_fall);
      CHECK(sim.cost == hw.cost);
      // the fall cliff dominates any plausible walking cost
      CHECK(hw.cost > 10.0);
    } else {
      CHECK(hw.cost == hw.speed_error);
      CHECK(sim.cost == sim.speed_error + sim.c_tr);
      CHECK(sim.cost < 10.0);
    }
  }
}

TEST_CASE("statistics helpers") {
  SUBCASE("spearman on a monotone relation") {
    std::vector<double> a{1, 2, 3, 4, 5};
    std::vector<double> b{10, 20, 30, 40, 50};
    CHECK(spearman_correlation(a, b) == doctest::Approx(1.0));
    std::vector<double> c{50, 40, 30, 20, 10};
    CHECK(spearman_correlation(a, c) == doctest::Approx(-1.0));
  }
  SUBCASE("spearman handles ties via average ranks") {
    std::vector<double> a{1, 1, 2, 3};
    std::vector<double> b{5, 5, 6, 7};
    CHECK(spearman_correlation(a, b) == doctest::Approx(1.0));
  }
  SUBCASE("median") {
    CHECK(median_of({3, 1, 2}) == 2);
    CHECK(median_of({4, 1, 2, 3}) == 2.5);
  }
  SUBCASE("confidence interval brackets the mean") {
    const MeanCi ci = mean_ci95({1, 2, 3, 4, 5});
    CHECK(ci.mean == doctest::Approx(3.0));
    CHECK(ci.lo < 3.0);
    CHECK(ci.hi > 3.0);
  }
}
