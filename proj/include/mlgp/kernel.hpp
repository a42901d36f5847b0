#pragma once

#include <Eigen/Dense>
#include <string>

namespace mlgp {

enum class KernelFamily { SquaredExponential, Matern32 };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// A stationary covariance function on the real line.
///
/// variance is the output scale k(t, t); lengthscale is in units of time.
/// variance == 0 is accepted so degenerate priors can be built in tests;
/// fitting code never produces it (parameters live on the log scale there).
struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  double variance = 1.0;
  double lengthscale = 1.0;

  KernelSpec() = default;
  KernelSpec(KernelFamily family, double variance, double lengthscale);
};

/// Full parameter vector Theta: mean-GP kernel, deviation-GP kernel, noise SD.
/// noise_sd == 0 is accepted for the same test-builder reason as a zero
/// kernel variance.
struct HyperParams {
  KernelSpec mu_kernel;
  KernelSpec eta_kernel;
  double noise_sd = 0.1;

  HyperParams() = default;
  HyperParams(KernelSpec mu_kernel, KernelSpec eta_kernel, double noise_sd);
};

double eval_kernel(const KernelSpec& spec, double s, double t) noexcept;

/// |s| x |t| matrix with entries eval_kernel(spec, s_i, t_j).
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::VectorXd& s,
                     const Eigen::VectorXd& t);

}  // namespace mlgp
