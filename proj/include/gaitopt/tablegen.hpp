#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "gaitopt/controller.hpp"
#include "gaitopt/dog.hpp"
#include "gaitopt/sim.hpp"

namespace gaitopt {

enum class GridScheme { Sobol, UniformRandom };

// Low-discrepancy Sobol points in [0,1)^dim, Gray-code construction with an
// optional seeded digital shift. Supports up to 10 dimensions.
class SobolSequence {
 public:
  SobolSequence(int dim, std::uint64_t seed);
  Eigen::VectorXd next();

  static constexpr int kMaxDim = 10;

 private:
  int dim_;
  std::uint64_t index_ = 0;
  std::vector<std::array<std::uint32_t, 32>> direction_;
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
};

struct TableMeta {
  int schema_version = 1;
  GridScheme scheme = GridScheme::Sobol;
  std::uint64_t seed = 0;
  double sim_seconds = 3.5;
  double target_speed = 0.5;
  DogThresholds thresholds;
  std::string model_fingerprint;
  int failed_rows = 0;
};

// Precomputed behavior scores over a parameter grid; the BO candidate set.
struct ScoreTable {
  ParamBounds schema;
  FiveDFixture fixture;  // meaningful for the five-parameter variant
  Eigen::MatrixXd params;       // rows x dim
  Eigen::VectorXd phi;          // rows
  Eigen::VectorXd time_fraction;
  Eigen::MatrixXd metric_sums;  // rows x 4, unscaled per-metric column sums
  TableMeta meta;

  int rows() const { return static_cast<int>(params.rows()); }
};

Eigen::MatrixXd sample_grid(const ParamBounds& bounds, int n, std::uint64_t seed,
                            GridScheme scheme);

std::string model_fingerprint(const ModelParams& model, const DogThresholds& thresholds);

// One short episode per grid row at the meta's constant target speed on the
// given (unperturbed) model. Row order is the grid order regardless of the
// number of workers.
ScoreTable build_table(const Eigen::MatrixXd& grid, const ParamBounds& schema,
                       const FiveDFixture& fixture, const ModelParams& model, TableMeta meta,
                       int n_threads);

void save_table(const ScoreTable& table, const std::string& path);
ScoreTable load_table(const std::string& path);

bool tables_equal(const ScoreTable& a, const ScoreTable& b);

const char* scheme_name(GridScheme scheme);
GridScheme parse_scheme(const std::string& name);

}  // namespace gaitopt
