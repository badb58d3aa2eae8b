#include "gaitopt/campaign.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "gaitopt/parallel.hpp"
#include "gaitopt/random.hpp"

namespace gaitopt {

namespace {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

Objective make_pseudo_hw_objective(const SpeedProfile& profile, const ModelParams& eval_model,
                                   double t_max, CostKind cost_kind, double torque_norm,
                                   double short_sim_seconds, const DogThresholds& thresholds) {
  return [=](const ControllerParams& params, int) -> TrialOutcome {
    const RobotState init = make_initial_state(params, eval_model, profile.first_speed());
    const EpisodeResult episode = run_episode(params, profile, eval_model, t_max, init);
    const TrialCost tc = cost_kind == CostKind::Hardware
                             ? cost_hardware(episode, profile)
                             : cost_simulation(episode, profile, torque_norm);
    TrialOutcome out;
    out.cost = tc.cost;
    out.fell = tc.fell;
    out.x_fall = tc.x_fall;
    out.speed_error = tc.speed_error;
    out.c_tr = tc.c_tr;
    out.phi_eval = episode_score(truncate_episode(episode, short_sim_seconds), thresholds).phi;
    return out;
  };
}

CampaignReport run_campaign(const CampaignConfig& config) {
  return run_campaign(config, load_table(config.table_path));
}

CampaignReport run_campaign(const CampaignConfig& config, const ScoreTable& table) {
  config.validate();
  const ModelParams nominal;
  const std::string expected = model_fingerprint(nominal, config.thresholds);
  if (table.meta.model_fingerprint != expected)
    throw VersionError(
        "campaign: table fingerprint mismatch (different model or thresholds)");
  if (table.schema.variant != config.variant)
    throw VersionError("campaign: table variant does not match the campaign variant");

  const double short_sim =
      config.short_sim_override > 0 ? config.short_sim_override : table.meta.sim_seconds;
  const BoConfig bo_config = default_bo_config(table);

  CampaignReport report;
  report.n_runs = config.n_runs;
  report.trials_per_run = config.trials_per_run;
  for (ArmKind arm : config.arms) report.arm_order.push_back(arm_name(arm));

  const int cells = static_cast<int>(config.arms.size()) * config.n_runs;
  std::vector<std::vector<TrialRecord>> cell_trials(static_cast<std::size_t>(cells));
  std::vector<std::string> cell_errors(static_cast<std::size_t>(cells));

  parallel_for(cells, config.n_threads, [&](int cell) {
    const int arm_index = cell / config.n_runs;
    const int run = cell % config.n_runs;
    const ArmKind arm = config.arms[static_cast<std::size_t>(arm_index)];
    try {
      ModelParams eval_model = nominal;
      eval_model.trunk_mass *= config.mass_scale;
      if (config.perturb_magnitude > 0)
        eval_model = perturb_model(eval_model, config.perturb_magnitude,
                                   mix_seed(config.base_seed, static_cast<std::uint64_t>(run)));
      const Objective objective =
          make_pseudo_hw_objective(config.profile, eval_model, config.t_max, config.cost_kind,
                                   config.torque_norm, short_sim, config.thresholds);
      const std::uint64_t bo_seed =
          mix_seed(config.base_seed,
                   0x1000 + static_cast<std::uint64_t>(arm_index) * 7919 +
                       static_cast<std::uint64_t>(run));
      const BoHistory history =
          run_bo(objective, table, arm, config.trials_per_run, bo_seed, bo_config);
      auto& records = cell_trials[static_cast<std::size_t>(cell)];
      records.reserve(history.entries.size());
      for (const auto& e : history.entries) {
        TrialRecord r;
        r.run = run;
        r.arm = arm_name(arm);
        r.trial = e.trial;
        r.cost = e.cost;
        r.best_so_far = e.posterior_best;
        r.fell = e.fell;
        r.phi_sim = e.phi_sim;
        records.push_back(r);
      }
    } catch (const std::exception& e) {
      cell_errors[static_cast<std::size_t>(cell)] =
          std::string(arm_name(arm)) + "/run" + std::to_string(run) + ": " + e.what();
    }
  });

  for (int cell = 0; cell < cells; ++cell) {
    if (!cell_errors[static_cast<std::size_t>(cell)].empty()) {
      report.failed_runs.push_back(cell_errors[static_cast<std::size_t>(cell)]);
      continue;
    }
    for (const auto& r : cell_trials[static_cast<std::size_t>(cell)])
      report.trials.push_back(r);
  }
  report.summaries = summarize_trials(report.trials, report.arm_order, config.trials_per_run);
  return report;
}

std::vector<ArmSummary> summarize_trials(const std::vector<TrialRecord>& trials,
                                         const std::vector<std::string>& arm_order,
                                         int trials_per_run) {
  std::vector<ArmSummary> out;
  for (const std::string& arm : arm_order) {
    ArmSummary s;
    s.arm = arm;

    // group by run
    std::vector<int> runs;
    for (const auto& t : trials)
      if (t.arm == arm && std::find(runs.begin(), runs.end(), t.run) == runs.end())
        runs.push_back(t.run);
    std::sort(runs.begin(), runs.end());

    std::vector<double> best_costs, best_walking_costs, first_walk;
    for (int run : runs) {
      double best = std::numeric_limits<double>::infinity();
      double best_walking = std::numeric_limits<double>::infinity();
      int first = trials_per_run + 1;  // censored
      for (const auto& t : trials) {
        if (t.arm != arm || t.run != run) continue;
        best = std::min(best, t.cost);
        if (!t.fell) {
          best_walking = std::min(best_walking, t.cost);
          first = std::min(first, t.trial);
        }
      }
      best_costs.push_back(best);
      first_walk.push_back(static_cast<double>(first));
      if (std::isfinite(best_walking)) best_walking_costs.push_back(best_walking);
    }

    s.n_runs = static_cast<int>(runs.size());
    s.n_walking_runs = static_cast<int>(best_walking_costs.size());
    s.success_rate = runs.empty() ? 0.0
                                  : static_cast<double>(s.n_walking_runs) /
                                        static_cast<double>(runs.size());
    s.median_trials_to_first_walk = first_walk.empty() ? 0.0 : median_of(first_walk);
    const MeanCi all = mean_ci95(best_costs);
    s.mean_best_cost = all.mean;
    s.best_cost_ci_lo = all.lo;
    s.best_cost_ci_hi = all.hi;
    const MeanCi walk = mean_ci95(best_walking_costs);
    s.mean_best_walking_cost = walk.mean;
    s.walking_ci_lo = walk.lo;
    s.walking_ci_hi = walk.hi;
    out.push_back(s);
  }
  return out;
}

namespace {

nlohmann::ordered_json summary_json(const CampaignReport& report) {
  nlohmann::ordered_json root;
  root["n_runs"] = report.n_runs;
  root["trials_per_run"] = report.trials_per_run;
  nlohmann::ordered_json arms = nlohmann::ordered_json::array();
  for (const auto& s : report.summaries) {
    nlohmann::ordered_json a;
    a["kernel"] = s.arm;
    a["n_runs"] = s.n_runs;
    a["n_walking_runs"] = s.n_walking_runs;
    a["success_rate"] = s.success_rate;
    a["median_trials_to_first_walk"] = s.median_trials_to_first_walk;
    a["mean_best_cost"] = s.mean_best_cost;
    a["best_cost_ci95"] = {s.best_cost_ci_lo, s.best_cost_ci_hi};
    a["mean_best_walking_cost"] = s.mean_best_walking_cost;
    a["walking_cost_ci95"] = {s.walking_ci_lo, s.walking_ci_hi};
    arms.push_back(a);
  }
  root["arms"] = arms;
  root["failed_runs"] = report.failed_runs;
  return root;
}

}  // namespace

void emit_report(const CampaignReport& report, const std::string& out_dir, bool csv,
                 bool json) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("emit_report: cannot create '" + out_dir + "'");

  {
    const std::string path = out_dir + "/trials.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_report: cannot open '" + path + "'");
    out << "run,kernel,trial,cost,best_so_far,fell,phi_sim\n";
    for (const std::string& arm : report.arm_order)
      for (const auto& t : report.trials) {
        if (t.arm != arm) continue;
        out << t.run << ',' << t.arm << ',' << t.trial << ',' << format_double(t.cost) << ','
            << format_double(t.best_so_far) << ',' << (t.fell ? 1 : 0) << ','
            << format_double(t.phi_sim) << '\n';
      }
    if (!out) throw IoError("emit_report: write failed for '" + path + "'");
  }

  if (json) {
    const std::string path = out_dir + "/summary.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_report: cannot open '" + path + "'");
    out << summary_json(report).dump(2) << '\n';
  }
  if (csv) {
    const std::string path = out_dir + "/summary.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("emit_report: cannot open '" + path + "'");
    out << "kernel,n_runs,n_walking_runs,success_rate,median_trials_to_first_walk,"
           "mean_best_cost,best_cost_ci_lo,best_cost_ci_hi,mean_best_walking_cost,"
           "walking_ci_lo,walking_ci_hi\n";
    for (const auto& s : report.summaries)
      out << s.arm << ',' << s.n_runs << ',' << s.n_walking_runs << ','
          << format_double(s.success_rate) << ','
          << format_double(s.median_trials_to_first_walk) << ','
          << format_double(s.mean_best_cost) << ',' << format_double(s.best_cost_ci_lo) << ','
          << format_double(s.best_cost_ci_hi) << ',' << format_double(s.mean_best_walking_cost)
          << ',' << format_double(s.walking_ci_lo) << ',' << format_double(s.walking_ci_hi)
          << '\n';
  }
}

std::vector<TrialRecord> load_trials_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_trials_csv: cannot open '" + path + "'");
  std::vector<TrialRecord> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;  // header
    }
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        parts.push_back(line.substr(start));
        break;
      }
      parts.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (parts.size() != 7) throw FormatError("load_trials_csv: bad column count");
    TrialRecord t;
    t.run = std::stoi(parts[0]);
    t.arm = parts[1];
    t.trial = std::stoi(parts[2]);
    t.cost = std::stod(parts[3]);
    t.best_so_far = std::stod(parts[4]);
    t.fell = parts[5] == "1";
    t.phi_sim = std::stod(parts[6]);
    out.push_back(t);
  }
  return out;
}

std::vector<CorrelatePoint> correlate_sample(const ParamBounds& bounds,
                                             const FiveDFixture& fixture, int n,
                                             std::uint64_t seed, const ModelParams& model,
                                             const SpeedProfile& profile, double t_max,
                                             double sim_seconds, double table_speed,
                                             const DogThresholds& thresholds,
                                             double torque_norm, int n_threads) {
  if (n < 1) throw InvalidArgument("correlate_sample: n must be >= 1");
  const Eigen::MatrixXd grid = sample_grid(bounds, n, seed, GridScheme::UniformRandom);
  std::vector<CorrelatePoint> out(static_cast<std::size_t>(n));
  const SpeedProfile short_profile{{{table_speed, 1000000}}};
  parallel_for(n, n_threads, [&](int i) {
    const ControllerParams p =
        ControllerParams::from_active(grid.row(i), bounds.variant, fixture);
    const EpisodeResult short_ep = run_episode(
        p, short_profile, model, sim_seconds, make_initial_state(p, model, table_speed));
    const EpisodeResult long_ep = run_episode(
        p, profile, model, t_max, make_initial_state(p, model, profile.first_speed()));
    out[static_cast<std::size_t>(i)].phi = episode_score(short_ep, thresholds).phi;
    out[static_cast<std::size_t>(i)].cost = cost_simulation(long_ep, profile, torque_norm).cost;
    out[static_cast<std::size_t>(i)].fell = long_ep.fell;
  });
  return out;
}

void save_correlate_csv(const std::vector<CorrelatePoint>& points, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_correlate_csv: cannot open '" + path + "'");
  out << "phi,cost,fell\n";
  for (const auto& p : points)
    out << format_double(p.phi) << ',' << format_double(p.cost) << ',' << (p.fell ? 1 : 0)
        << '\n';
}

namespace {

std::vector<double> fractional_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank, 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw InvalidArgument("spearman_correlation: need two same-length samples");
  const std::vector<double> ra = fractional_ranks(a);
  const std::vector<double> rb = fractional_ranks(b);
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0 || db == 0) return 0;
  return num / std::sqrt(da * db);
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median_of: empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

MeanCi mean_ci95(const std::vector<double>& values) {
  MeanCi out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  double mean = 0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  var = values.size() > 1 ? var / (n - 1) : 0.0;
  const double half = 1.96 * std::sqrt(var / n);
  out.mean = mean;
  out.lo = mean - half;
  out.hi = mean + half;
  return out;
}

}  // namespace gaitopt
