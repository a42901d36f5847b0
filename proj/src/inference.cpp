#include "mlgp/inference.hpp"

#include <cmath>
#include <limits>

#include "mlgp/errors.hpp"
#include "mlgp/rng.hpp"

namespace mlgp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

double lognormal_logpdf(double x, const LogNormalPrior& prior) {
  if (!(x > 0.0)) return kNegInf;
  const double z = (std::log(x) - prior.log_mean) / prior.log_sd;
  return -std::log(x) - std::log(prior.log_sd) - 0.5 * kLog2Pi - 0.5 * z * z;
}

std::array<LogNormalPrior, kNumParams> prior_list(const PriorSpec& prior) {
  return {prior.mu_variance, prior.mu_lengthscale, prior.eta_variance,
          prior.eta_lengthscale, prior.noise_sd};
}

}  // namespace

HyperParams theta_from_vector(const Eigen::VectorXd& params,
                              KernelFamily mu_family,
                              KernelFamily eta_family) {
  if (params.size() != kNumParams)
    throw InvalidInput("theta_from_vector: expected 5 parameters");
  return HyperParams(KernelSpec(mu_family, params(0), params(1)),
                     KernelSpec(eta_family, params(2), params(3)), params(4));
}

Eigen::VectorXd theta_to_vector(const HyperParams& theta) {
  Eigen::VectorXd v(kNumParams);
  v << theta.mu_kernel.variance, theta.mu_kernel.lengthscale,
      theta.eta_kernel.variance, theta.eta_kernel.lengthscale, theta.noise_sd;
  return v;
}

double log_prior_density(const Eigen::VectorXd& params,
                         const PriorSpec& prior) {
  if (params.size() != kNumParams)
    throw InvalidInput("log_prior_density: expected 5 parameters");
  const auto priors = prior_list(prior);
  double total = 0.0;
  for (int i = 0; i < kNumParams; ++i)
    total += lognormal_logpdf(params(i), priors[i]);
  return total;
}

namespace {

template <typename Dataset>
double log_posterior_impl(const HyperParams& theta, const Dataset& data,
                          const PriorSpec& prior) {
  const double lp = log_prior_density(theta_to_vector(theta), prior);
  if (!std::isfinite(lp)) return kNegInf;
  try {
    if constexpr (std::is_same_v<Dataset, RegularDataset>)
      return loglik_regular(theta, data).value + lp;
    else
      return loglik_partial(theta, data).value + lp;
  } catch (const NotPositiveDefinite&) {
    return kNegInf;
  } catch (const Overflow&) {
    return kNegInf;
  }
}

}  // namespace

double log_posterior(const HyperParams& theta, const RegularDataset& data,
                     const PriorSpec& prior) {
  return log_posterior_impl(theta, data, prior);
}

double log_posterior(const HyperParams& theta, const PartialDataset& data,
                     const PriorSpec& prior) {
  return log_posterior_impl(theta, data, prior);
}

RwmResult rwm_sample(
    const std::function<double(const Eigen::VectorXd&)>& log_target,
    const Eigen::VectorXd& init, const Eigen::VectorXd& steps, int n_warmup,
    int n_keep, std::uint64_t seed) {
  if (n_keep < 1) throw InvalidInput("rwm_sample: n_keep >= 1 required");
  if (steps.size() != init.size())
    throw InvalidInput("rwm_sample: step size dimension mismatch");

  Rng rng(seed);
  const Eigen::Index dim = init.size();
  Eigen::VectorXd x = init;
  double lp = log_target(x);

  RwmResult out;
  out.samples.resize(n_keep, dim);
  out.log_targets.resize(n_keep);

  double scale = 1.0;
  int window_accepts = 0, window_size = 0;
  int kept_accepts = 0;
  const int total = n_warmup + n_keep;
  for (int iter = 0; iter < total; ++iter) {
    const bool warming = iter < n_warmup;
    Eigen::VectorXd proposal = x;
    for (Eigen::Index k = 0; k < dim; ++k)
      proposal(k) += scale * steps(k) * rng.normal();
    const double lp_prop = log_target(proposal);
    // The uniform is always drawn so the kept phase does not depend on how
    // many warm-up proposals were accepted deterministically.
    const double u = rng.uniform();
    bool accept = false;
    if (lp_prop > kNegInf) {
      accept = lp_prop >= lp || std::log(u) < lp_prop - lp;
    }
    if (accept) {
      x = proposal;
      lp = lp_prop;
    }

    if (warming) {
      ++window_size;
      window_accepts += accept ? 1 : 0;
      if (window_size == 50) {
        const double rate = static_cast<double>(window_accepts) / window_size;
        if (rate < 0.2)
          scale *= 0.7;
        else if (rate > 0.4)
          scale *= 1.4;
        window_accepts = 0;
        window_size = 0;
      }
    } else {
      const int k = iter - n_warmup;
      out.samples.row(k) = x.transpose();
      out.log_targets(k) = lp;
      kept_accepts += accept ? 1 : 0;
    }
  }
  out.acceptance_rate = static_cast<double>(kept_accepts) / n_keep;
  return out;
}

namespace {

template <typename Dataset>
Chain run_rwm_impl(const Dataset& data, const PriorSpec& prior,
                   const RwmConfig& config) {
  const auto priors = prior_list(prior);
  Eigen::VectorXd init(kNumParams), steps(kNumParams);
  for (int i = 0; i < kNumParams; ++i) {
    init(i) = priors[i].log_mean;
    steps(i) = config.step_sizes[i];
  }
  auto log_target = [&](const Eigen::VectorXd& log_params) {
    const Eigen::VectorXd params = log_params.array().exp();
    const HyperParams theta =
        theta_from_vector(params, config.mu_family, config.eta_family);
    // Log-normal prior on params plus the log Jacobian of exp equals a
    // normal density on log params up to a constant.
    double lp = log_posterior(theta, data, prior);
    if (!std::isfinite(lp)) return kNegInf;
    return lp + log_params.sum();
  };

  const RwmResult result = rwm_sample(log_target, init, steps, config.n_warmup,
                                      config.n_keep, config.seed);
  Chain chain;
  chain.seed = config.seed;
  chain.n_warmup = config.n_warmup;
  chain.n_keep = config.n_keep;
  chain.acceptance_rate = result.acceptance_rate;
  chain.samples.reserve(config.n_keep);
  chain.log_posts.assign(result.log_targets.data(),
                         result.log_targets.data() + config.n_keep);
  for (int k = 0; k < config.n_keep; ++k) {
    const Eigen::VectorXd params = result.samples.row(k).array().exp();
    chain.samples.push_back(
        theta_from_vector(params, config.mu_family, config.eta_family));
  }
  return chain;
}

}  // namespace

Chain run_rwm(const RegularDataset& data, const PriorSpec& prior,
              const RwmConfig& config) {
  return run_rwm_impl(data, prior, config);
}

Chain run_rwm(const PartialDataset& data, const PriorSpec& prior,
              const RwmConfig& config) {
  return run_rwm_impl(data, prior, config);
}

double split_rhat(const Eigen::VectorXd& x) {
  const Eigen::Index m = x.size() / 2;
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::VectorXd a = x.head(m), b = x.segment(m, m);
  const double ma = a.mean(), mb = b.mean();
  const double va = (a.array() - ma).square().sum() / (m - 1);
  const double vb = (b.array() - mb).square().sum() / (m - 1);
  const double w = 0.5 * (va + vb);
  const double mean_all = 0.5 * (ma + mb);
  const double bvar =
      m * ((ma - mean_all) * (ma - mean_all) + (mb - mean_all) * (mb - mean_all));
  const double var_plus = (m - 1.0) / m * w + bvar / m;
  if (!(w > 0.0)) return 1.0;
  return std::sqrt(var_plus / w);
}

namespace {

template <typename Dataset>
FitPredictResult fit_and_predict_impl(const Dataset& data,
                                      const PriorSpec& prior,
                                      const Eigen::VectorXd& t_pred,
                                      const RwmConfig& config) {
  FitPredictResult out;
  out.chain = run_rwm(data, prior, config);
  const int n = static_cast<int>(data.n_functions());
  const Eigen::Index j_p = t_pred.size();
  const int n_samples = static_cast<int>(out.chain.samples.size());

  out.draws.t_pred = t_pred;
  out.draws.n_functions = n;
  std::vector<Eigen::VectorXd> mu_rows;
  std::vector<std::vector<Eigen::VectorXd>> eta_rows(n);
  mu_rows.reserve(n_samples);

  for (int k = 0; k < n_samples; ++k) {
    const HyperParams& theta = out.chain.samples[k];
    try {
      PosteriorDraws one;
      const std::uint64_t draw_seed = Rng::derive(config.seed, k + 1);
      if constexpr (std::is_same_v<Dataset, RegularDataset>) {
        const GaussianPosterior mu_post =
            posterior_mu_regular(theta, data, t_pred);
        const GaussianPosterior eta_post =
            posterior_eta_regular(theta, data, t_pred);
        one = sample_f(mu_post, eta_post, 1, draw_seed);
      } else {
        const GaussianPosterior joint =
            posterior_joint_partial(theta, data, t_pred);
        one = sample_f(joint, 1, draw_seed);
      }
      mu_rows.push_back(one.mu.row(0));
      for (int i = 0; i < n; ++i) eta_rows[i].push_back(one.eta[i].row(0));
    } catch (const NotPositiveDefinite&) {
      ++out.n_skipped;
    } catch (const Overflow&) {
      ++out.n_skipped;
    }
  }

  const int kept = static_cast<int>(mu_rows.size());
  out.draws.mu.resize(kept, j_p);
  out.draws.eta.assign(n, Eigen::MatrixXd(kept, j_p));
  for (int k = 0; k < kept; ++k) {
    out.draws.mu.row(k) = mu_rows[k];
    for (int i = 0; i < n; ++i) out.draws.eta[i].row(k) = eta_rows[i][k];
  }
  return out;
}

}  // namespace

FitPredictResult fit_and_predict(const RegularDataset& data,
                                 const PriorSpec& prior,
                                 const Eigen::VectorXd& t_pred,
                                 const RwmConfig& config) {
  return fit_and_predict_impl(data, prior, t_pred, config);
}

FitPredictResult fit_and_predict(const PartialDataset& data,
                                 const PriorSpec& prior,
                                 const Eigen::VectorXd& t_pred,
                                 const RwmConfig& config) {
  return fit_and_predict_impl(data, prior, t_pred, config);
}

}  // namespace mlgp
