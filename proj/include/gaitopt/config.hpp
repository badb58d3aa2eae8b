#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gaitopt/bo.hpp"
#include "gaitopt/controller.hpp"
#include "gaitopt/dog.hpp"

namespace gaitopt {

// '#'-commented text of `key: value` (or `key = value`) lines; repeated keys
// are kept in order.
struct KeyValues {
  std::vector<std::pair<std::string, std::string>> items;

  static KeyValues parse_file(const std::string& path);
  static KeyValues parse_text(const std::string& text);

  const std::string* find(const std::string& key) const;
  std::vector<std::string> all(const std::string& key) const;
  std::string get(const std::string& key) const;  // ConfigError when missing
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int_or(const std::string& key, int fallback) const;
};

// Profile files hold `segment = <speed_mps>, <steps>` lines.
SpeedProfile load_profile(const std::string& path);
SpeedProfile parse_profile_text(const std::string& text);

FiveDFixture load_fixture(const std::string& path);

// Bounds files hold a `variant:` line plus `name = lo, hi` lines.
ParamBounds load_bounds(const std::string& path);

SpeedProfile easy_profile();    // 0.4 m/s for 30 steps
SpeedProfile updown_profile();  // 0.4 - 0.6 - 1.0 - 0.6 - 0.2, 10 steps each
SpeedProfile step_down_profile();  // 0.4 - 1.0 - 0.2 - 0, the short-campaign profile

enum class CostKind { Hardware, Simulation };

struct CampaignConfig {
  Variant variant = Variant::NineD;
  SpeedProfile profile = updown_profile();
  std::vector<ArmKind> arms = {ArmKind::DoG, ArmKind::SE};
  int n_runs = 50;
  int trials_per_run = 20;
  std::uint64_t base_seed = 1;
  double perturb_magnitude = 0.15;
  double mass_scale = 1.0;  // deterministic trunk-mass factor on the evaluation model
  std::string table_path;
  CostKind cost_kind = CostKind::Simulation;
  double t_max = 30.0;
  std::string out_dir = "campaign_out";
  double torque_norm = 3000.0;
  double short_sim_override = 0;  // 0: use the table's sim_seconds
  DogThresholds thresholds;
  int n_threads = 2;

  static CampaignConfig load(const std::string& path);
  void validate() const;
};

CostKind parse_cost_kind(const std::string& name);
const char* cost_kind_name(CostKind kind);

}  // namespace gaitopt
