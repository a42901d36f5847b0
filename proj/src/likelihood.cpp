#include "mlgp/likelihood.hpp"

#include <cmath>

#include "mlgp/errors.hpp"
#include "mlgp/linalg.hpp"

namespace mlgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

LogLikResult assemble(double n_obs, double logdet, double quad, double jitter) {
  LogLikResult r;
  r.constant = n_obs * kLog2Pi;
  r.logdet = logdet;
  r.quad_form = quad;
  r.jitter_used = jitter;
  r.value = -0.5 * (r.constant + r.logdet + r.quad_form);
  return r;
}

LogLikResult naive_from_cov(const Eigen::MatrixXd& sigma,
                            const Eigen::VectorXd& y) {
  const LowerTriangular l = cholesky(sigma, {}, "Sigma");
  const Eigen::VectorXd alpha = solve_lower(l, y);
  return assemble(static_cast<double>(y.size()), chol_logdet(l),
                  alpha.squaredNorm(), l.jitter());
}

// Shared core of the regular formulas; loglik_partial reuses it for n_b == 0.
LogLikResult regular_core(const HyperParams& theta, const Eigen::VectorXd& t,
                          const Eigen::MatrixXd& y_mat, int n) {
  const RegularCovBlocks blocks = regular_cov_blocks(theta, t, n);
  const LowerTriangular l0 = cholesky(blocks.sigma0, {}, "Sigma0");
  const LowerTriangular l1 = cholesky(blocks.sigma1, {}, "Sigma1");
  const double logdet = (n - 1) * chol_logdet(l0) + chol_logdet(l1);

  // Sigma^{-1} y = vec(Sigma0^{-1} Y + 1/n (Sigma1^{-1} - Sigma0^{-1}) Y 1_{n,n})
  const Eigen::VectorXd row_sums = y_mat.rowwise().sum();
  const Eigen::VectorXd beta =
      solve_spd(l1, row_sums) - solve_spd(l0, row_sums);
  Eigen::MatrixXd siy = solve_spd(l0, y_mat);
  siy.colwise() += beta / n;
  const double quad = (y_mat.array() * siy.array()).sum();

  return assemble(static_cast<double>(y_mat.size()), logdet, quad,
                  std::max(l0.jitter(), l1.jitter()));
}

}  // namespace

LogLikResult loglik_naive(const HyperParams& theta, const RegularDataset& data) {
  return naive_from_cov(naive_full_cov(theta, data), data.stacked_y());
}

LogLikResult loglik_naive(const HyperParams& theta, const PartialDataset& data) {
  return naive_from_cov(naive_full_cov(theta, data), data.stacked_y());
}

LogLikResult loglik_regular(const HyperParams& theta,
                            const RegularDataset& data) {
  return regular_core(theta, data.t, data.y,
                      static_cast<int>(data.n_functions()));
}

LogLikResult loglik_partial(const HyperParams& theta,
                            const PartialDataset& data) {
  const int n_a = static_cast<int>(data.n_regular());
  const int n = static_cast<int>(data.n_functions());
  if (data.n_irregular() == 0)
    return regular_core(theta, data.t_a, data.y_a, n);

  const PartialCovBlocks blocks = partial_cov_blocks(theta, data);
  const LowerTriangular l0 = cholesky(blocks.a0, {}, "A0");
  const LowerTriangular l1 = cholesky(blocks.a1, {}, "A1");
  const LowerTriangular ls = cholesky(blocks.s, {}, "S");
  const double logdet =
      (n_a - 1) * chol_logdet(l0) + chol_logdet(l1) + chol_logdet(ls);

  // A^{-1} y^a through the vec identity.
  const Eigen::VectorXd row_sums = data.y_a.rowwise().sum();
  const Eigen::VectorXd beta =
      solve_spd(l1, row_sums) - solve_spd(l0, row_sums);
  Eigen::MatrixXd ai_ya = solve_spd(l0, data.y_a);
  ai_ya.colwise() += beta / n_a;

  // P2 y = S^{-1}(y^b - C A^{-1} y^a), with C A^{-1} y^a = (C^b)^T A_1^{-1} Y^a 1.
  Eigen::VectorXd y_b(data.n_obs() - data.t_a.size() * n_a);
  Eigen::Index pos = 0;
  for (const auto& series : data.irregular) {
    y_b.segment(pos, series.y.size()) = series.y;
    pos += series.y.size();
  }
  const Eigen::VectorXd ca_ya =
      blocks.cb.transpose() * solve_spd(l1, row_sums);
  const Eigen::VectorXd p2y = solve_spd(ls, (y_b - ca_ya).eval());

  // P1 y = A^{-1} y^a - (1 (x) A_1^{-1} C^b) P2 y; same correction per column.
  const Eigen::VectorXd corr = solve_spd(l1, (blocks.cb * p2y).eval());
  Eigen::MatrixXd p1y = ai_ya;
  p1y.colwise() -= corr;

  const double quad =
      (data.y_a.array() * p1y.array()).sum() + y_b.dot(p2y);
  const double jitter = std::max({l0.jitter(), l1.jitter(), ls.jitter(),
                                  blocks.jitter});
  return assemble(static_cast<double>(data.n_obs()), logdet, quad, jitter);
}

}  // namespace mlgp
