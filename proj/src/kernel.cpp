#include "mlgp/kernel.hpp"

#include <cmath>

#include "mlgp/errors.hpp"

namespace mlgp {

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential:
      return "squared_exponential";
    case KernelFamily::Matern32:
      return "matern32";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "squared_exponential" || name == "se")
    return KernelFamily::SquaredExponential;
  if (name == "matern32") return KernelFamily::Matern32;
  throw InvalidInput("unknown kernel family: " + name);
}

KernelSpec::KernelSpec(KernelFamily family_in, double variance_in,
                       double lengthscale_in)
    : family(family_in), variance(variance_in), lengthscale(lengthscale_in) {
  if (!(variance >= 0.0) || !std::isfinite(variance))
    throw InvalidInput("kernel variance must be finite and >= 0");
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
    throw InvalidInput("kernel lengthscale must be finite and > 0");
}

HyperParams::HyperParams(KernelSpec mu_kernel_in, KernelSpec eta_kernel_in,
                         double noise_sd_in)
    : mu_kernel(mu_kernel_in), eta_kernel(eta_kernel_in), noise_sd(noise_sd_in) {
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
    throw InvalidInput("noise_sd must be finite and >= 0");
}

double eval_kernel(const KernelSpec& spec, double s, double t) noexcept {
  const double r = std::abs(s - t);
  switch (spec.family) {
    case KernelFamily::SquaredExponential: {
      const double z = r / spec.lengthscale;
      return spec.variance * std::exp(-0.5 * z * z);
    }
    case KernelFamily::Matern32: {
      const double z = std::sqrt(3.0) * r / spec.lengthscale;
      return spec.variance * (1.0 + z) * std::exp(-z);
    }
  }
  return 0.0;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::VectorXd& s,
                     const Eigen::VectorXd& t) {
  if (s.size() == 0 || t.size() == 0)
    throw InvalidInput("gram: empty input grid");
  Eigen::MatrixXd k(s.size(), t.size());
  for (Eigen::Index j = 0; j < t.size(); ++j)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      k(i, j) = eval_kernel(spec, s(i), t(j));
  return k;
}

}  // namespace mlgp
