#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "gaitopt/controller.hpp"
#include "gaitopt/errors.hpp"

namespace gaitopt {

enum class KernelKind { SE, DoG, DoGAdjusted };
enum class HyperMode { Fixed, Learned };

struct Hyperparams {
  double signal_variance = 1.0;
  Eigen::VectorXd length_scales;  // one per feature dimension
  double noise_variance = 1e-2;
  HyperMode mode = HyperMode::Fixed;

  static Hyperparams make(double signal, const Eigen::VectorXd& scales, double noise,
                          HyperMode mode = HyperMode::Fixed);
  void validate() const;
};

// Expected feature dimension of each kernel: the full parameter vector for
// SE, the scalar behavior score for DoG, and [score, predicted mismatch] for
// the adjusted kernel.
int kernel_feature_dim(KernelKind kind, int param_dim);

// Squared-exponential form in the kernel's feature space.
double kernel_eval(KernelKind kind, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                   const Hyperparams& hyper);

// Gram matrix over rows of X (points x features).
Eigen::MatrixXd gram_matrix(KernelKind kind, const Eigen::MatrixXd& X,
                            const Hyperparams& hyper);

// Lower Cholesky factor of A, escalating diagonal jitter 1e-10..1e-6 on
// failure. Returns the factor and the jitter that was needed.
struct CholeskyResult {
  Eigen::MatrixXd L;
  double jitter = 0;
};
CholeskyResult cholesky_with_jitter(const Eigen::MatrixXd& A);

struct Posterior {
  double mean = 0;
  double variance = 0;
};

// Zero-mean GP regression model. Immutable once fitted; safe for concurrent
// posterior queries.
class GpModel {
 public:
  static GpModel fit(KernelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Hyperparams& hyper);

  Posterior posterior(const Eigen::VectorXd& query) const;
  double log_marginal_likelihood() const;

  KernelKind kind() const { return kind_; }
  const Hyperparams& hyper() const { return hyper_; }
  const Eigen::MatrixXd& train_inputs() const { return X_; }
  const Eigen::VectorXd& train_targets() const { return y_; }
  int size() const { return static_cast<int>(X_.rows()); }

 private:
  KernelKind kind_ = KernelKind::SE;
  Hyperparams hyper_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd L_;      // chol(K + noise I)
  Eigen::VectorXd alpha_;  // (K + noise I)^-1 y
};

struct HyperFit {
  Hyperparams hyper;
  bool converged = true;
};

// Maximizes the log marginal likelihood with a seeded multi-start
// Nelder-Mead in log space; Fixed-mode initial values pass through
// untouched. Bounds scale with the data: length scales relative to the input
// range per dimension, signal variance relative to the target variance.
HyperFit fit_hyperparams(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, KernelKind kind,
                         const Hyperparams& initial, std::uint64_t seed);

// GP over normalized controller parameters predicting the gap between the
// short-simulation score and the score observed on the evaluation machine.
// With no observations the predicted mismatch is zero everywhere.
class MismatchModel {
 public:
  MismatchModel(ParamBounds bounds, Hyperparams hyper);

  double predict(const ControllerParams& params) const;
  void observe(const ControllerParams& params, double difference);
  int observation_count() const { return static_cast<int>(X_.rows()); }
  const ParamBounds& bounds() const { return bounds_; }

 private:
  ParamBounds bounds_;
  Hyperparams hyper_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd d_;
  std::optional<GpModel> gp_;
};

MismatchModel update_mismatch(MismatchModel model, const ControllerParams& x, double phi_sim,
                              double phi_hw);

}  // namespace gaitopt
