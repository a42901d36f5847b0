#pragma once

#include "mlgp/model.hpp"

namespace mlgp {

/// log p(y | Theta) with its pieces: value = -0.5 (constant + logdet + quad_form),
/// constant = N log(2 pi). jitter_used is the largest diagonal shift any
/// internal factorization needed (0 in the normal case).
struct LogLikResult {
  double value = 0.0;
  double logdet = 0.0;
  double quad_form = 0.0;
  double constant = 0.0;
  double jitter_used = 0.0;
};

/// Dense baseline: one Cholesky of the full N x N covariance.
LogLikResult loglik_naive(const HyperParams& theta, const RegularDataset& data);
LogLikResult loglik_naive(const HyperParams& theta, const PartialDataset& data);

/// Regular design: two J x J factorizations (Sigma_0, Sigma_1);
/// log|Sigma| = (n-1) log|Sigma_0| + log|Sigma_1| and the quadratic form goes
/// through the vec identity, never forming the full covariance.
LogLikResult loglik_regular(const HyperParams& theta,
                            const RegularDataset& data);

/// Partial design: factorizations of A_0, A_1 (J_a x J_a) and the Schur
/// complement S only. n_b == 0 routes to the regular formulas (log|S| = 0).
LogLikResult loglik_partial(const HyperParams& theta,
                            const PartialDataset& data);

}  // namespace mlgp
