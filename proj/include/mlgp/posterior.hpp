#pragma once

#include <cstdint>
#include <vector>

#include "mlgp/linalg.hpp"
#include "mlgp/model.hpp"

namespace mlgp {

enum class TargetKind { Mu, Eta };

/// Identifies one coordinate of a posterior vector: which function (1-based
/// for eta, 0 for mu) at which index of the prediction grid.
struct CoordLabel {
  TargetKind kind = TargetKind::Mu;
  int function_index = 0;
  Eigen::Index time_index = 0;
};

/// A Gaussian posterior over some subset of {mu, eta_1..eta_n} on a
/// prediction grid, as mean plus lower-triangular factor of the covariance.
/// Coordinates are ordered (each explicit eta over t_pred in grid order,
/// then mu over t_pred when present).
struct GaussianPosterior {
  std::vector<CoordLabel> labels;
  Eigen::VectorXd t_pred;
  Eigen::VectorXd mean;
  LowerTriangular cov_chol;
  std::vector<int> represented_etas;  // ascending function indices
  bool includes_mu = false;
  int n_functions = 0;

  Eigen::MatrixXd covariance() const;  // cov_chol * cov_chol^T
  /// Rows of the coordinate vector belonging to eta_i / to mu.
  Eigen::Index eta_offset(int function_index) const;
  Eigen::Index mu_offset() const;
};

struct PosteriorTargets {
  std::vector<int> eta_indices;  // 1-based, ascending
  bool include_mu = true;
};

/// Dense conditioning oracle: builds the joint covariance of the requested
/// targets and the data from the model cross-covariances and conditions on y.
GaussianPosterior posterior_naive(const HyperParams& theta,
                                  const RegularDataset& data,
                                  const Eigen::VectorXd& t_pred,
                                  const PosteriorTargets& targets);
GaussianPosterior posterior_naive(const HyperParams& theta,
                                  const PartialDataset& data,
                                  const Eigen::VectorXd& t_pred,
                                  const PosteriorTargets& targets);

/// Regular design, mean function: only chol(Sigma_1) is needed.
GaussianPosterior posterior_mu_regular(const HyperParams& theta,
                                       const RegularDataset& data,
                                       const Eigen::VectorXd& t_pred);

/// How the (n-1) J_p eta covariance gets factored: the iterative block
/// algorithm, or a plain dense Cholesky of the assembled matrix (the
/// "intermediary efficient" backend of the benchmarks).
enum class EtaFactorization { IterativeBlock, Dense };

/// Regular design, explicit posterior of eta_1..eta_{n-1}; eta_n is a
/// reconstruction, never represented (its rows are linearly dependent).
GaussianPosterior posterior_eta_regular(
    const HyperParams& theta, const RegularDataset& data,
    const Eigen::VectorXd& t_pred,
    EtaFactorization method = EtaFactorization::IterativeBlock);

/// Partial design: joint posterior of (eta_1..eta_{n-1}, mu); the factor is
/// built by the iterative block algorithm on the regular part, one extension
/// for the irregular rows and one for the mu rows.
GaussianPosterior posterior_joint_partial(
    const HyperParams& theta, const PartialDataset& data,
    const Eigen::VectorXd& t_pred,
    EtaFactorization method = EtaFactorization::IterativeBlock);

/// Draws of mu and every eta_i (the dropped eta_n is the negated sum), each
/// n_draws x J_p; f_i = mu + eta_i.
struct PosteriorDraws {
  Eigen::VectorXd t_pred;
  int n_functions = 0;
  Eigen::MatrixXd mu;
  std::vector<Eigen::MatrixXd> eta;

  Eigen::MatrixXd f(int function_index) const;  // 1-based
};

/// Joint posterior sampling (partial design, or any posterior carrying both
/// mu and the explicit etas).
PosteriorDraws sample_f(const GaussianPosterior& joint, int n_draws,
                        std::uint64_t seed);

/// Regular design: mu and eta posteriors are independent, so draws combine.
PosteriorDraws sample_f(const GaussianPosterior& mu_posterior,
                        const GaussianPosterior& eta_posterior, int n_draws,
                        std::uint64_t seed);

struct CredibleBand {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Analytic band from the marginal normal quantiles of each coordinate.
CredibleBand credible_band(const GaussianPosterior& posterior, double level);
/// Empirical band: per-column quantiles of a draws matrix (n_draws x k).
CredibleBand credible_band(const Eigen::MatrixXd& draws, double level);

/// Inverse standard normal CDF (Newton on erfc, full double precision).
double normal_quantile(double p);

}  // namespace mlgp
