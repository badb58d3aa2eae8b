#include "gaitopt/gp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gaitopt/random.hpp"

namespace gaitopt {

Hyperparams Hyperparams::make(double signal, const Eigen::VectorXd& scales, double noise,
                              HyperMode mode) {
  Hyperparams h;
  h.signal_variance = signal;
  h.length_scales = scales;
  h.noise_variance = noise;
  h.mode = mode;
  h.validate();
  return h;
}

void Hyperparams::validate() const {
  if (!(signal_variance > 0) || !(noise_variance > 0))
    throw InvalidArgument("Hyperparams: variances must be strictly positive");
  if (length_scales.size() == 0 || (length_scales.array() <= 0).any())
    throw InvalidArgument("Hyperparams: length scales must be strictly positive");
}

int kernel_feature_dim(KernelKind kind, int param_dim) {
  switch (kind) {
    case KernelKind::SE: return param_dim;
    case KernelKind::DoG: return 1;
    case KernelKind::DoGAdjusted: return 2;
  }
  return param_dim;
}

double kernel_eval(KernelKind kind, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                   const Hyperparams& hyper) {
  const int dim = static_cast<int>(hyper.length_scales.size());
  if (kind == KernelKind::DoG && dim != 1)
    throw InvalidArgument("kernel_eval: DoG kernel is one-dimensional");
  if (kind == KernelKind::DoGAdjusted && dim != 2)
    throw InvalidArgument("kernel_eval: adjusted kernel is two-dimensional");
  if (a.size() != dim || b.size() != dim)
    throw InvalidArgument("kernel_eval: input dimension mismatch");
  const double q = (a - b).cwiseQuotient(hyper.length_scales).squaredNorm();
  return hyper.signal_variance * std::exp(-0.5 * q);
}

Eigen::MatrixXd gram_matrix(KernelKind kind, const Eigen::MatrixXd& X,
                            const Hyperparams& hyper) {
  const int n = static_cast<int>(X.rows());
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = hyper.signal_variance;
    for (int j = 0; j < i; ++j) {
      const double k = kernel_eval(kind, X.row(i), X.row(j), hyper);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

CholeskyResult cholesky_with_jitter(const Eigen::MatrixXd& A) {
  static const double ladder[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
  for (double jitter : ladder) {
    Eigen::MatrixXd B = A;
    if (jitter > 0) B.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() == Eigen::Success)
      return {Eigen::MatrixXd(llt.matrixL()), jitter};
  }
  throw NumericalFailure("cholesky_with_jitter: matrix not PSD after max jitter");
}

GpModel GpModel::fit(KernelKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Hyperparams& hyper) {
  hyper.validate();
  if (X.rows() != y.size()) throw InvalidArgument("GpModel::fit: row count mismatch");
  if (X.rows() > 0 && X.cols() != hyper.length_scales.size())
    throw InvalidArgument("GpModel::fit: feature dimension mismatch");
  GpModel m;
  m.kind_ = kind;
  m.hyper_ = hyper;
  m.X_ = X;
  m.y_ = y;
  const int n = static_cast<int>(X.rows());
  if (n > 0) {
    Eigen::MatrixXd K = gram_matrix(kind, X, hyper);
    K.diagonal().array() += hyper.noise_variance;
    m.L_ = cholesky_with_jitter(K).L;
    m.alpha_ = m.L_.transpose().triangularView<Eigen::Upper>().solve(
        m.L_.triangularView<Eigen::Lower>().solve(y));
  }
  return m;
}

Posterior GpModel::posterior(const Eigen::VectorXd& query) const {
  const int n = size();
  if (n == 0) return {0.0, hyper_.signal_variance + hyper_.noise_variance};
  Eigen::VectorXd k_star(n);
  for (int i = 0; i < n; ++i) k_star[i] = kernel_eval(kind_, X_.row(i), query, hyper_);
  const Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(k_star);
  Posterior p;
  p.mean = k_star.dot(alpha_);
  p.variance = std::max(0.0, hyper_.signal_variance - v.squaredNorm());
  return p;
}

double GpModel::log_marginal_likelihood() const {
  const int n = size();
  if (n == 0) return 0.0;
  double log_det = 0;
  for (int i = 0; i < n; ++i) log_det += std::log(L_(i, i));
  return -0.5 * y_.dot(alpha_) - log_det - 0.5 * n * std::log(2.0 * M_PI);
}

namespace {

struct LogBox {
  Eigen::VectorXd lo, hi;  // natural-log bounds per coordinate
};

// coordinates: [log sigma_k^2, log l_1 .. log l_D, log sigma_n^2]
LogBox hyper_box(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const int d = static_cast<int>(X.cols());
  const int n = static_cast<int>(X.rows());
  const double mean_y = y.mean();
  const double var_y = (y.array() - mean_y).square().sum() / std::max(1, n - 1);
  const double ms_y = y.array().square().mean();
  LogBox box;
  box.lo.resize(d + 2);
  box.hi.resize(d + 2);
  box.lo[0] = std::log(1e-9 + 1e-3 * var_y);
  box.hi[0] = std::log(1e-9 + 1e3 * var_y);
  for (int j = 0; j < d; ++j) {
    const double range = std::max(X.col(j).maxCoeff() - X.col(j).minCoeff(), 1e-6);
    box.lo[1 + j] = std::log(1e-3 * range);
    box.hi[1 + j] = std::log(1e3 * range);
  }
  box.lo[d + 1] = std::log(1e-9 + 1e-6 * ms_y);
  box.hi[d + 1] = std::log(1e-9 + 10.0 * ms_y);
  return box;
}

Hyperparams decode(const Eigen::VectorXd& p, HyperMode mode) {
  const int d = static_cast<int>(p.size()) - 2;
  Hyperparams h;
  h.signal_variance = std::exp(p[0]);
  h.length_scales = p.segment(1, d).array().exp();
  h.noise_variance = std::exp(p[d + 1]);
  h.mode = mode;
  return h;
}

double lml_objective(const Eigen::VectorXd& p, const LogBox& box, KernelKind kind,
                     const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Eigen::VectorXd clamped = p.cwiseMax(box.lo).cwiseMin(box.hi);
  const double penalty = (p - clamped).squaredNorm();
  try {
    GpModel m = GpModel::fit(kind, X, y, decode(clamped, HyperMode::Learned));
    const double lml = m.log_marginal_likelihood();
    if (!std::isfinite(lml)) return -std::numeric_limits<double>::infinity();
    return lml - 10.0 * penalty;
  } catch (const NumericalFailure&) {
    return -std::numeric_limits<double>::infinity();
  }
}

// minimal Nelder-Mead maximizer
template <typename F>
std::pair<Eigen::VectorXd, double> nelder_mead(const F& f, const Eigen::VectorXd& x0,
                                               double step, int max_iter) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  for (int i = 1; i <= n; ++i) xs[i][i - 1] += step;
  for (int i = 0; i <= n; ++i) fs[i] = f(xs[i]);

  auto order = [&] {
    for (int i = 1; i <= n; ++i)
      for (int j = i; j > 0 && fs[j] > fs[j - 1]; --j) {
        std::swap(fs[j], fs[j - 1]);
        std::swap(xs[j], xs[j - 1]);
      }
  };
  order();

  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += xs[i];
    centroid /= n;

    Eigen::VectorXd xr = centroid + (centroid - xs[n]);
    double fr = f(xr);
    if (fr > fs[0]) {
      Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[n]);
      double fe = f(xe);
      if (fe > fr) {
        xs[n] = xe;
        fs[n] = fe;
      } else {
        xs[n] = xr;
        fs[n] = fr;
      }
    } else if (fr > fs[n - 1]) {
      xs[n] = xr;
      fs[n] = fr;
    } else {
      Eigen::VectorXd xc = centroid + 0.5 * (xs[n] - centroid);
      double fc = f(xc);
      if (fc > fs[n]) {
        xs[n] = xc;
        fs[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
          fs[i] = f(xs[i]);
        }
      }
    }
    order();
    if (std::abs(fs[0] - fs[n]) < 1e-8 * (1.0 + std::abs(fs[0]))) break;
  }
  return {xs[0], fs[0]};
}

}  // namespace

HyperFit fit_hyperparams(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, KernelKind kind,
                         const Hyperparams& initial, std::uint64_t seed) {
  if (initial.mode == HyperMode::Fixed) return {initial, true};
  if (X.rows() < 2) throw InvalidArgument("fit_hyperparams: need at least 2 points");

  const int d = static_cast<int>(X.cols());
  const LogBox box = hyper_box(X, y);
  auto objective = [&](const Eigen::VectorXd& p) { return lml_objective(p, box, kind, X, y); };

  // data-informed start plus seeded log-uniform restarts
  const double mean_y = y.mean();
  const double var_y =
      (y.array() - mean_y).square().sum() / std::max<int>(1, static_cast<int>(y.size()) - 1);
  Eigen::VectorXd start0(d + 2);
  start0[0] = std::log(std::max(var_y, 1e-8));
  for (int j = 0; j < d; ++j) {
    const double range = std::max(X.col(j).maxCoeff() - X.col(j).minCoeff(), 1e-6);
    start0[1 + j] = std::log(0.5 * range);
  }
  start0[d + 1] = std::log(std::max(1e-8, 1e-2 * var_y + 1e-9));
  start0 = start0.cwiseMax(box.lo).cwiseMin(box.hi);

  // structured starts cover the smooth, rough, and noise-dominated basins;
  // the rest are seeded log-uniform restarts
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(start0);
  {
    Eigen::VectorXd smooth = start0;
    for (int j = 0; j < d; ++j) smooth[1 + j] = std::min(smooth[1 + j] + std::log(6.0), box.hi[1 + j]);
    smooth[d + 1] = box.lo[d + 1];
    starts.push_back(smooth);

    Eigen::VectorXd rough = start0;
    for (int j = 0; j < d; ++j) rough[1 + j] = std::max(rough[1 + j] - std::log(10.0), box.lo[1 + j]);
    starts.push_back(rough);

    Eigen::VectorXd noisy = start0;
    noisy[0] = box.lo[0];
    noisy[d + 1] = box.hi[d + 1];
    starts.push_back(noisy);
  }
  constexpr int kStarts = 8;
  Rng rng(mix_seed(seed, 0x68706172));
  while (static_cast<int>(starts.size()) < kStarts) {
    Eigen::VectorXd x0(d + 2);
    for (int i = 0; i < d + 2; ++i) x0[i] = rng.uniform(box.lo[i], box.hi[i]);
    starts.push_back(x0);
  }
  Eigen::VectorXd best_x = start0;
  double best_f = -std::numeric_limits<double>::infinity();
  bool any_finite = false;
  for (const auto& x0 : starts) {
    auto [x, fx] = nelder_mead(objective, x0, 0.7, 60 * (d + 2));
    if (std::isfinite(fx)) any_finite = true;
    if (fx > best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  Hyperparams h = decode(best_x.cwiseMax(box.lo).cwiseMin(box.hi), HyperMode::Learned);
  return {h, any_finite};
}

MismatchModel::MismatchModel(ParamBounds bounds, Hyperparams hyper)
    : bounds_(std::move(bounds)), hyper_(std::move(hyper)) {
  bounds_.validate();
  hyper_.validate();
  if (hyper_.length_scales.size() != bounds_.dim())
    throw InvalidArgument("MismatchModel: length scales must match parameter dimension");
  X_.resize(0, bounds_.dim());
  d_.resize(0);
}

double MismatchModel::predict(const ControllerParams& params) const {
  if (!gp_) return 0.0;  // prior mismatch is zero
  return gp_->posterior(normalize_params(bounds_, params.active_values())).mean;
}

void MismatchModel::observe(const ControllerParams& params, double difference) {
  const Eigen::VectorXd x = normalize_params(bounds_, params.active_values());
  X_.conservativeResize(X_.rows() + 1, Eigen::NoChange);
  X_.row(X_.rows() - 1) = x;
  d_.conservativeResize(d_.size() + 1);
  d_[d_.size() - 1] = difference;
  gp_ = GpModel::fit(KernelKind::SE, X_, d_, hyper_);
}

MismatchModel update_mismatch(MismatchModel model, const ControllerParams& x, double phi_sim,
                              double phi_hw) {
  model.observe(x, phi_sim - phi_hw);
  return model;
}

}  // namespace gaitopt
