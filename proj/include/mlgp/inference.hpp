#pragma once

#include <array>
#include <cstdint>
#include <functional>

#include "mlgp/likelihood.hpp"
#include "mlgp/posterior.hpp"

namespace mlgp {

struct LogNormalPrior {
  double log_mean = 0.0;
  double log_sd = 1.0;
};

/// Independent log-normal priors over the five positive parameters.
struct PriorSpec {
  LogNormalPrior mu_variance;
  LogNormalPrior mu_lengthscale;
  LogNormalPrior eta_variance;
  LogNormalPrior eta_lengthscale;
  LogNormalPrior noise_sd;
};

/// Parameter order used everywhere a Theta is a flat vector:
/// (mu_variance, mu_lengthscale, eta_variance, eta_lengthscale, noise_sd).
constexpr int kNumParams = 5;

HyperParams theta_from_vector(const Eigen::VectorXd& params,
                              KernelFamily mu_family,
                              KernelFamily eta_family);
Eigen::VectorXd theta_to_vector(const HyperParams& theta);

double log_prior_density(const Eigen::VectorXd& params, const PriorSpec& prior);

/// log-likelihood + log-prior; -infinity on numerical failure so the chain
/// rejects instead of aborting.
double log_posterior(const HyperParams& theta, const RegularDataset& data,
                     const PriorSpec& prior);
double log_posterior(const HyperParams& theta, const PartialDataset& data,
                     const PriorSpec& prior);

struct RwmConfig {
  int n_warmup = 1000;
  int n_keep = 1000;
  std::array<double, kNumParams> step_sizes{0.15, 0.15, 0.15, 0.15, 0.15};
  std::uint64_t seed = 0;
  KernelFamily mu_family = KernelFamily::SquaredExponential;
  KernelFamily eta_family = KernelFamily::SquaredExponential;
};

struct Chain {
  std::vector<HyperParams> samples;
  std::vector<double> log_posts;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  int n_warmup = 0;
  int n_keep = 0;
};

/// Generic random-walk Metropolis driver on an unconstrained vector.
/// Warm-up rescales all step sizes by a common factor every 50 iterations
/// towards acceptance in [0.2, 0.4]; steps freeze afterwards.
/// acceptance_rate counts the kept phase only.
struct RwmResult {
  Eigen::MatrixXd samples;  // n_keep x dim
  Eigen::VectorXd log_targets;
  double acceptance_rate = 0.0;
};

RwmResult rwm_sample(const std::function<double(const Eigen::VectorXd&)>& log_target,
                     const Eigen::VectorXd& init, const Eigen::VectorXd& steps,
                     int n_warmup, int n_keep, std::uint64_t seed);

/// Gaussian random walk on log Theta; initialization at the prior log-means.
Chain run_rwm(const RegularDataset& data, const PriorSpec& prior,
              const RwmConfig& config);
Chain run_rwm(const PartialDataset& data, const PriorSpec& prior,
              const RwmConfig& config);

/// Split-Rhat of one scalar chain (two halves as pseudo-chains).
double split_rhat(const Eigen::VectorXd& x);

/// One functional draw per retained Theta sample, each through the
/// design-appropriate exact conditional posterior. Samples whose posterior
/// construction fails numerically are skipped and counted, never replaced.
struct FitPredictResult {
  Chain chain;
  PosteriorDraws draws;
  int n_skipped = 0;
};

FitPredictResult fit_and_predict(const RegularDataset& data,
                                 const PriorSpec& prior,
                                 const Eigen::VectorXd& t_pred,
                                 const RwmConfig& config);
FitPredictResult fit_and_predict(const PartialDataset& data,
                                 const PriorSpec& prior,
                                 const Eigen::VectorXd& t_pred,
                                 const RwmConfig& config);

}  // namespace mlgp
