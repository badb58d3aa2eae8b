#include "gaitopt/tablegen.hpp"

#include <array>
#include <atomic>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "gaitopt/parallel.hpp"
#include "gaitopt/random.hpp"

namespace gaitopt {

namespace {

// Primitive polynomials and initial direction numbers (Joe-Kuo), dimensions
// 2..10; dimension 1 is the van der Corput sequence.
struct SobolRow {
  int s;
  std::uint32_t a;
  std::array<std::uint32_t, 5> m;
};

constexpr SobolRow kSobolRows[] = {
    {1, 0, {1, 0, 0, 0, 0}},   // dim 2
    {2, 1, {1, 3, 0, 0, 0}},   // dim 3
    {3, 1, {1, 3, 1, 0, 0}},   // dim 4
    {3, 2, {1, 1, 1, 0, 0}},   // dim 5
    {4, 1, {1, 1, 3, 3, 0}},   // dim 6
    {4, 4, {1, 3, 5, 13, 0}},  // dim 7
    {5, 2, {1, 1, 5, 5, 17}},  // dim 8
    {5, 4, {1, 1, 5, 5, 5}},   // dim 9
    {5, 7, {1, 1, 7, 11, 19}}, // dim 10
};

int rightmost_zero_bit(std::uint64_t v) {
  int c = 0;
  while (v & 1u) {
    v >>= 1;
    ++c;
  }
  return c;  // 0-based
}

}  // namespace

SobolSequence::SobolSequence(int dim, std::uint64_t seed) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim)
    throw InvalidArgument("SobolSequence: dimension must be in [1, 10]");
  direction_.resize(static_cast<std::size_t>(dim));
  state_.assign(static_cast<std::size_t>(dim), 0);
  shift_.assign(static_cast<std::size_t>(dim), 0);

  for (int j = 0; j < dim; ++j) {
    auto& v = direction_[static_cast<std::size_t>(j)];
    if (j == 0) {
      for (int k = 0; k < 32; ++k) v[static_cast<std::size_t>(k)] = 1u << (31 - k);
      continue;
    }
    const SobolRow& row = kSobolRows[j - 1];
    const int s = row.s;
    std::array<std::uint32_t, 33> m{};
    for (int k = 1; k <= s; ++k) m[static_cast<std::size_t>(k)] = row.m[static_cast<std::size_t>(k - 1)];
    for (int k = s + 1; k <= 32; ++k) {
      std::uint32_t value = m[static_cast<std::size_t>(k - s)] ^ (m[static_cast<std::size_t>(k - s)] << s);
      for (int i = 1; i < s; ++i)
        if ((row.a >> (s - 1 - i)) & 1u) value ^= m[static_cast<std::size_t>(k - i)] << i;
      m[static_cast<std::size_t>(k)] = value;
    }
    for (int k = 1; k <= 32; ++k)
      v[static_cast<std::size_t>(k - 1)] = m[static_cast<std::size_t>(k)] << (32 - k);
  }

  if (seed != 0) {
    Rng rng(seed);
    for (int j = 0; j < dim; ++j)
      shift_[static_cast<std::size_t>(j)] = static_cast<std::uint32_t>(rng.next_u64() >> 32);
  }
}

Eigen::VectorXd SobolSequence::next() {
  Eigen::VectorXd out(dim_);
  if (index_ > 0) {
    const int c = rightmost_zero_bit(index_ - 1);
    for (int j = 0; j < dim_; ++j)
      state_[static_cast<std::size_t>(j)] ^= direction_[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
  }
  for (int j = 0; j < dim_; ++j) {
    const std::uint32_t bits = state_[static_cast<std::size_t>(j)] ^ shift_[static_cast<std::size_t>(j)];
    out[j] = static_cast<double>(bits) * 0x1.0p-32;
  }
  ++index_;
  return out;
}

Eigen::MatrixXd sample_grid(const ParamBounds& bounds, int n, std::uint64_t seed,
                            GridScheme scheme) {
  bounds.validate();
  if (n < 1) throw InvalidArgument("sample_grid: n must be >= 1");
  const int d = bounds.dim();
  Eigen::MatrixXd grid(n, d);
  const Eigen::VectorXd span = bounds.hi - bounds.lo;
  if (scheme == GridScheme::Sobol) {
    SobolSequence sobol(d, seed);
    for (int i = 0; i < n; ++i)
      grid.row(i) = (bounds.lo + span.cwiseProduct(sobol.next())).transpose();
  } else {
    Rng rng(seed);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) grid(i, j) = bounds.lo[j] + span[j] * rng.uniform01();
  }
  return grid;
}

namespace {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError("table: bad numeric field '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join_doubles(const Eigen::VectorXd& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

const char* scheme_name(GridScheme scheme) {
  return scheme == GridScheme::Sobol ? "sobol" : "uniform";
}

GridScheme parse_scheme(const std::string& name) {
  if (name == "sobol") return GridScheme::Sobol;
  if (name == "uniform") return GridScheme::UniformRandom;
  throw FormatError("unknown grid scheme '" + name + "'");
}

std::string model_fingerprint(const ModelParams& model, const DogThresholds& thresholds) {
  std::string canon;
  for (double v : {model.trunk_mass, model.trunk_inertia, model.com_to_pelvis_offset,
                   model.leg_max_length, model.gravity, model.friction_coeff, model.control_dt,
                   thresholds.retraction_min, thresholds.com_height_tol,
                   thresholds.trunk_lean_tol, thresholds.chatter_step_time}) {
    canon += format_double(v);
    canon += '|';
  }
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx",
                static_cast<unsigned long long>(fnv1a(canon)));
  return std::string(buf.data());
}

ScoreTable build_table(const Eigen::MatrixXd& grid, const ParamBounds& schema,
                       const FiveDFixture& fixture, const ModelParams& model, TableMeta meta,
                       int n_threads) {
  schema.validate();
  model.validate();
  if (!(meta.sim_seconds > 0))
    throw InvalidArgument("build_table: sim_seconds must be positive");
  if (grid.cols() != schema.dim())
    throw InvalidArgument("build_table: grid dimension mismatch");

  const int n = static_cast<int>(grid.rows());
  ScoreTable table;
  table.schema = schema;
  table.fixture = fixture;
  table.params = grid;
  table.phi.setZero(n);
  table.time_fraction.setZero(n);
  table.metric_sums.setZero(n, 4);
  meta.model_fingerprint = model_fingerprint(model, meta.thresholds);
  table.meta = meta;

  const SpeedProfile profile{{{meta.target_speed, 1000000}}};
  std::atomic<int> failed{0};
  parallel_for(n, n_threads, [&](int i) {
    try {
      const ControllerParams p =
          ControllerParams::from_active(grid.row(i), schema.variant, fixture);
      const RobotState init = make_initial_state(p, model, meta.target_speed);
      const EpisodeResult ep = run_episode(p, profile, model, meta.sim_seconds, init);
      const GaitScore score = episode_score(ep, meta.thresholds);
      table.phi[i] = score.phi;
      table.time_fraction[i] = score.time_fraction;
      for (const auto& m : score.per_step) {
        table.metric_sums(i, 0) += m.m1;
        table.metric_sums(i, 1) += m.m2;
        table.metric_sums(i, 2) += m.m3;
        table.metric_sums(i, 3) += m.m4;
      }
    } catch (...) {
      table.phi[i] = 0;
      table.time_fraction[i] = 0;
      table.metric_sums.row(i).setZero();
      failed.fetch_add(1);
    }
  });
  table.meta.failed_rows = failed.load();
  return table;
}

void save_table(const ScoreTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_table: cannot open '" + path + "'");
  const int d = table.schema.dim();
  out << "# gaitopt score table\n";
  out << "# schema_version: " << table.meta.schema_version << "\n";
  out << "# variant: " << (table.schema.variant == Variant::FiveD ? "5d" : "9d") << "\n";
  out << "# param_names: ";
  for (int j = 0; j < d; ++j) out << (j ? "," : "") << table.schema.names[static_cast<std::size_t>(j)];
  out << "\n";
  out << "# bounds_lo: " << join_doubles(table.schema.lo) << "\n";
  out << "# bounds_hi: " << join_doubles(table.schema.hi) << "\n";
  out << "# fixture: " << format_double(table.fixture.pitch_des) << ","
      << format_double(table.fixture.kp_height) << "," << format_double(table.fixture.kd_height)
      << "," << format_double(table.fixture.height_des) << "\n";
  out << "# scheme: " << scheme_name(table.meta.scheme) << "\n";
  out << "# seed: " << table.meta.seed << "\n";
  out << "# sim_seconds: " << format_double(table.meta.sim_seconds) << "\n";
  out << "# target_speed: " << format_double(table.meta.target_speed) << "\n";
  out << "# thresholds: " << format_double(table.meta.thresholds.retraction_min) << ","
      << format_double(table.meta.thresholds.com_height_tol) << ","
      << format_double(table.meta.thresholds.trunk_lean_tol) << ","
      << format_double(table.meta.thresholds.chatter_step_time) << "\n";
  out << "# model_fingerprint: " << table.meta.model_fingerprint << "\n";
  out << "# failed_rows: " << table.meta.failed_rows << "\n";
  out << "# rows: " << table.rows() << "\n";
  out << "# columns: params[" << d << "],phi,time_fraction,m1_sum,m2_sum,m3_sum,m4_sum\n";
  for (int i = 0; i < table.rows(); ++i) {
    out << join_doubles(table.params.row(i));
    out << ',' << format_double(table.phi[i]);
    out << ',' << format_double(table.time_fraction[i]);
    for (int k = 0; k < 4; ++k) out << ',' << format_double(table.metric_sums(i, k));
    out << '\n';
  }
  if (!out) throw IoError("save_table: write failed for '" + path + "'");
}

ScoreTable load_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_table: cannot open '" + path + "'");

  std::vector<std::pair<std::string, std::string>> header;
  std::string line;
  std::vector<std::string> data_lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::size_t colon = line.find(':');
      if (colon == std::string::npos) continue;  // title line
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      const auto trim = [](std::string& s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
      };
      trim(key);
      trim(value);
      header.emplace_back(key, value);
    } else {
      data_lines.push_back(line);
    }
  }

  const auto get = [&](const std::string& key) -> std::string {
    for (const auto& [k, v] : header)
      if (k == key) return v;
    throw FormatError("load_table: missing header key '" + key + "'");
  };

  const int version = static_cast<int>(parse_double(get("schema_version")));
  if (version != 1) throw VersionError("load_table: unsupported schema_version");

  ScoreTable table;
  table.meta.schema_version = version;
  const std::string variant = get("variant");
  if (variant == "5d")
    table.schema.variant = Variant::FiveD;
  else if (variant == "9d")
    table.schema.variant = Variant::NineD;
  else
    throw FormatError("load_table: unknown variant '" + variant + "'");

  table.schema.names = split(get("param_names"), ',');
  const int d = table.schema.dim();
  const auto parse_vec = [&](const std::string& key, int expected) {
    const auto parts = split(get(key), ',');
    if (static_cast<int>(parts.size()) != expected)
      throw FormatError("load_table: bad field count in '" + key + "'");
    Eigen::VectorXd v(expected);
    for (int i = 0; i < expected; ++i) v[i] = parse_double(parts[static_cast<std::size_t>(i)]);
    return v;
  };
  table.schema.lo = parse_vec("bounds_lo", d);
  table.schema.hi = parse_vec("bounds_hi", d);
  table.schema.validate();
  const Eigen::VectorXd fx = parse_vec("fixture", 4);
  table.fixture = {fx[0], fx[1], fx[2], fx[3]};
  table.meta.scheme = parse_scheme(get("scheme"));
  table.meta.seed = static_cast<std::uint64_t>(std::stoull(get("seed")));
  table.meta.sim_seconds = parse_double(get("sim_seconds"));
  table.meta.target_speed = parse_double(get("target_speed"));
  const Eigen::VectorXd thr = parse_vec("thresholds", 4);
  table.meta.thresholds = {thr[0], thr[1], thr[2], thr[3]};
  table.meta.model_fingerprint = get("model_fingerprint");
  table.meta.failed_rows = static_cast<int>(parse_double(get("failed_rows")));

  const int rows = static_cast<int>(parse_double(get("rows")));
  if (rows != static_cast<int>(data_lines.size()))
    throw FormatError("load_table: row count mismatch");

  table.params.resize(rows, d);
  table.phi.resize(rows);
  table.time_fraction.resize(rows);
  table.metric_sums.resize(rows, 4);
  for (int i = 0; i < rows; ++i) {
    const auto parts = split(data_lines[static_cast<std::size_t>(i)], ',');
    if (static_cast<int>(parts.size()) != d + 6)
      throw FormatError("load_table: bad column count in data row");
    for (int j = 0; j < d; ++j) table.params(i, j) = parse_double(parts[static_cast<std::size_t>(j)]);
    table.phi[i] = parse_double(parts[static_cast<std::size_t>(d)]);
    table.time_fraction[i] = parse_double(parts[static_cast<std::size_t>(d + 1)]);
    for (int k = 0; k < 4; ++k)
      table.metric_sums(i, k) = parse_double(parts[static_cast<std::size_t>(d + 2 + k)]);
    for (int j = 0; j < d; ++j)
      if (table.params(i, j) < table.schema.lo[j] || table.params(i, j) > table.schema.hi[j])
        throw FormatError("load_table: parameter outside schema bounds");
  }
  return table;
}

bool tables_equal(const ScoreTable& a, const ScoreTable& b) {
  return a.schema.names == b.schema.names && a.schema.variant == b.schema.variant &&
         a.schema.lo == b.schema.lo && a.schema.hi == b.schema.hi &&
         a.params == b.params && a.phi == b.phi && a.time_fraction == b.time_fraction &&
         a.metric_sums == b.metric_sums &&
         a.meta.model_fingerprint == b.meta.model_fingerprint &&
         a.meta.seed == b.meta.seed && a.meta.sim_seconds == b.meta.sim_seconds &&
         a.meta.target_speed == b.meta.target_speed &&
         a.meta.failed_rows == b.meta.failed_rows && a.meta.scheme == b.meta.scheme;
}

}  // namespace gaitopt
