#include "gaitopt/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace gaitopt {

namespace {

std::string trim(std::string s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  return s;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(trim(part));
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value '" + s + "' for " + what);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

KeyValues KeyValues::parse_text(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t sep = line.find_first_of(":=");
    if (sep == std::string::npos)
      throw ConfigError("expected 'key: value', got '" + line + "'");
    kv.items.emplace_back(trim(line.substr(0, sep)), trim(line.substr(sep + 1)));
  }
  return kv;
}

KeyValues KeyValues::parse_file(const std::string& path) {
  return parse_text(read_file(path));
}

const std::string* KeyValues::find(const std::string& key) const {
  for (const auto& [k, v] : items)
    if (k == key) return &v;
  return nullptr;
}

std::vector<std::string> KeyValues::all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : items)
    if (k == key) out.push_back(v);
  return out;
}

std::string KeyValues::get(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ConfigError("missing required key '" + key + "'");
  return *v;
}

std::string KeyValues::get_or(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double KeyValues::get_double_or(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v ? to_double(*v, key) : fallback;
}

int KeyValues::get_int_or(const std::string& key, int fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  return static_cast<int>(to_double(*v, key));
}

SpeedProfile parse_profile_text(const std::string& text) {
  const KeyValues kv = KeyValues::parse_text(text);
  SpeedProfile profile;
  for (const auto& value : kv.all("segment")) {
    const auto parts = split_commas(value);
    if (parts.size() != 2)
      throw ConfigError("segment needs '<speed_mps>, <steps>', got '" + value + "'");
    SpeedSegment seg;
    seg.speed = to_double(parts[0], "segment speed");
    seg.steps = static_cast<int>(to_double(parts[1], "segment steps"));
    if (seg.steps < 1) throw ConfigError("segment steps must be >= 1");
    if (seg.speed < 0) throw ConfigError("segment speed must be >= 0");
    profile.segments.push_back(seg);
  }
  if (profile.segments.empty()) throw ConfigError("profile has no segments");
  return profile;
}

SpeedProfile load_profile(const std::string& path) {
  return parse_profile_text(read_file(path));
}

FiveDFixture load_fixture(const std::string& path) {
  const KeyValues kv = KeyValues::parse_file(path);
  FiveDFixture fx;
  fx.pitch_des = kv.get_double_or("pitch_des", fx.pitch_des);
  fx.kp_height = kv.get_double_or("kp_height", fx.kp_height);
  fx.kd_height = kv.get_double_or("kd_height", fx.kd_height);
  fx.height_des = kv.get_double_or("height_des", fx.height_des);
  return fx;
}

ParamBounds load_bounds(const std::string& path) {
  const KeyValues kv = KeyValues::parse_file(path);
  const std::string variant = kv.get_or("variant", "9d");
  ParamBounds b = default_bounds(variant == "5d" ? Variant::FiveD : Variant::NineD);
  for (int i = 0; i < b.dim(); ++i) {
    const std::string* v = kv.find(b.names[static_cast<std::size_t>(i)]);
    if (!v) continue;
    const auto parts = split_commas(*v);
    if (parts.size() != 2)
      throw ConfigError("bounds for '" + b.names[static_cast<std::size_t>(i)] +
                        "' need '<lo>, <hi>'");
    b.lo[i] = to_double(parts[0], "bound lo");
    b.hi[i] = to_double(parts[1], "bound hi");
  }
  try {
    b.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return b;
}

SpeedProfile easy_profile() { return SpeedProfile{{{0.4, 30}}}; }

SpeedProfile updown_profile() {
  return SpeedProfile{{{0.4, 10}, {0.6, 10}, {1.0, 10}, {0.6, 10}, {0.2, 10}}};
}

SpeedProfile step_down_profile() {
  return SpeedProfile{{{0.4, 15}, {1.0, 15}, {0.2, 15}, {0.0, 5}}};
}

CostKind parse_cost_kind(const std::string& name) {
  if (name == "hw") return CostKind::Hardware;
  if (name == "sim") return CostKind::Simulation;
  throw ConfigError("unknown cost kind '" + name + "'; expected hw|sim");
}

const char* cost_kind_name(CostKind kind) {
  return kind == CostKind::Hardware ? "hw" : "sim";
}

CampaignConfig CampaignConfig::load(const std::string& path) {
  const KeyValues kv = KeyValues::parse_file(path);
  CampaignConfig cfg;
  cfg.variant = kv.get_or("variant", "9d") == "5d" ? Variant::FiveD : Variant::NineD;
  if (const std::string* p = kv.find("profile")) cfg.profile = load_profile(*p);
  cfg.arms.clear();
  for (const auto& name : split_commas(kv.get_or("kernels", "dog,se")))
    cfg.arms.push_back(parse_arm(name));
  cfg.n_runs = kv.get_int_or("n_runs", cfg.n_runs);
  cfg.trials_per_run = kv.get_int_or("trials_per_run", cfg.trials_per_run);
  cfg.base_seed = static_cast<std::uint64_t>(kv.get_double_or("seed", 1));
  cfg.perturb_magnitude = kv.get_double_or("perturb", cfg.perturb_magnitude);
  cfg.mass_scale = kv.get_double_or("mass_scale", cfg.mass_scale);
  cfg.table_path = kv.get("table");
  cfg.cost_kind = parse_cost_kind(kv.get_or("cost", "sim"));
  cfg.t_max = kv.get_double_or("t_max", cfg.t_max);
  cfg.out_dir = kv.get_or("out", cfg.out_dir);
  cfg.torque_norm = kv.get_double_or("torque_norm", cfg.torque_norm);
  cfg.short_sim_override = kv.get_double_or("short_sim_seconds", 0);
  cfg.thresholds.retraction_min =
      kv.get_double_or("retraction_min", cfg.thresholds.retraction_min);
  cfg.thresholds.com_height_tol =
      kv.get_double_or("com_height_tol", cfg.thresholds.com_height_tol);
  cfg.thresholds.trunk_lean_tol =
      kv.get_double_or("trunk_lean_tol", cfg.thresholds.trunk_lean_tol);
  cfg.thresholds.chatter_step_time =
      kv.get_double_or("chatter_step_time", cfg.thresholds.chatter_step_time);
  cfg.n_threads = kv.get_int_or("threads", cfg.n_threads);
  cfg.validate();
  return cfg;
}

void CampaignConfig::validate() const {
  if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
  if (trials_per_run < 1) throw ConfigError("trials_per_run must be >= 1");
  if (perturb_magnitude < 0 || perturb_magnitude >= 1)
    throw ConfigError("perturb must be in [0, 1)");
  if (!(mass_scale > 0)) throw ConfigError("mass_scale must be positive");
  if (!(t_max > 0)) throw ConfigError("t_max must be positive");
  if (!(torque_norm > 0)) throw ConfigError("torque_norm must be positive");
  if (arms.empty()) throw ConfigError("kernels list is empty");
  if (table_path.empty()) throw ConfigError("table path is required");
  if (profile.segments.empty()) throw ConfigError("profile has no segments");
}

}  // namespace gaitopt
