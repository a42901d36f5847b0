#include <doctest.h>

#include <cmath>

#include "mlgp/errors.hpp"
#include "mlgp/posterior.hpp"
#include "test_helpers.hpp"

using namespace mlgp;
using namespace mlgp::testing;

namespace {

PosteriorTargets just_mu() { return PosteriorTargets{{}, true}; }

PosteriorTargets etas_up_to(int count, bool mu) {
  PosteriorTargets t;
  for (int i = 1; i <= count; ++i) t.eta_indices.push_back(i);
  t.include_mu = mu;
  return t;
}

PartialSim random_partial(Rng& rng, const HyperParams& theta, int n_a, int j_a,
                          const std::vector<int>& j_b, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> t_b;
  for (int j : j_b) t_b.push_back(random_grid(rng, j));
  return simulate_partial(theta, random_grid(rng, j_a), n_a, t_b, seed);
}

// Sub-block of a posterior covariance belonging to (row target, col target).
Eigen::MatrixXd cov_block(const GaussianPosterior& post, Eigen::Index row_off,
                          Eigen::Index col_off) {
  const Eigen::Index j_p = post.t_pred.size();
  return post.covariance().block(row_off, col_off, j_p, j_p);
}

}  // namespace

TEST_CASE("naive posterior recovers the prior under uninformative data") {
  Rng rng(103);
  const HyperParams theta(
      KernelSpec(KernelFamily::SquaredExponential, 1.3, 0.5),
      KernelSpec(KernelFamily::SquaredExponential, 0.6, 0.4), 1e6);
  const RegularSim sim = simulate_regular(theta, random_grid(rng, 5), 3, 31);
  const Eigen::VectorXd t_pred = random_grid(rng, 4);
  const GaussianPosterior post =
      posterior_naive(theta, sim.data, t_pred, etas_up_to(2, true));
  CHECK(post.mean.cwiseAbs().maxCoeff() <= 1e-3 * std::sqrt(1.3));
}

TEST_CASE("naive posterior mean approaches the column average when noiseless") {
  Rng rng(107);
  const HyperParams theta(
      KernelSpec(KernelFamily::SquaredExponential, 1.0, 0.5),
      KernelSpec(KernelFamily::SquaredExponential, 0.0, 0.4), 1e-6);
  const Eigen::VectorXd t = random_grid(rng, 5);
  const RegularSim sim = simulate_regular(theta, t, 3, 37);
  const GaussianPosterior post =
      posterior_naive(theta, sim.data, t, just_mu());
  const Eigen::VectorXd avg = sim.data.y.rowwise().mean();
  CHECK((post.mean - avg).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("two-stage conditioning equals one-stage conditioning") {
  // Conditions the naive posterior against plain Gaussian algebra applied in
  // two stages: first half the observations, then the rest.
  Rng rng(109);
  const HyperParams theta = random_theta(rng);
  const int n = 3, j = 4, j_p = 2;
  const RegularSim sim = simulate_regular(theta, random_grid(rng, j), n, 41);
  const Eigen::VectorXd t_pred = random_grid(rng, j_p);

  const GaussianPosterior post =
      posterior_naive(theta, sim.data, t_pred, etas_up_to(n - 1, true));
  const Eigen::Index dim = post.mean.size();

  // Joint covariance over (targets, y) from the same model quantities.
  const Eigen::MatrixXd sigma = naive_full_cov(theta, sim.data);
  const Eigen::Index n_obs = sigma.rows();
  Eigen::MatrixXd joint(dim + n_obs, dim + n_obs);
  const Eigen::MatrixXd xi = xi_matrix(n);
  const Eigen::MatrixXd k_ee = gram(theta.eta_kernel, t_pred, t_pred);
  joint.setZero();
  for (int a = 0; a < n - 1; ++a)
    for (int b = 0; b < n - 1; ++b)
      joint.block(a * j_p, b * j_p, j_p, j_p) = xi(a, b) * k_ee;
  joint.block((n - 1) * j_p, (n - 1) * j_p, j_p, j_p) =
      gram(theta.mu_kernel, t_pred, t_pred);
  for (int fn = 0; fn < n; ++fn) {
    for (int a = 0; a < n - 1; ++a)
      joint.block(dim + fn * j, a * j_p, j, j_p) =
          xi(fn, a) * gram(theta.eta_kernel, sim.data.t, t_pred);
    joint.block(dim + fn * j, (n - 1) * j_p, j, j_p) =
        gram(theta.mu_kernel, sim.data.t, t_pred);
  }
  joint.block(dim, dim, n_obs, n_obs) = sigma;
  joint.triangularView<Eigen::StrictlyUpper>() =
      joint.transpose().triangularView<Eigen::StrictlyUpper>();

  // Stage 1: condition everything on the first half of y.
  const Eigen::VectorXd y = sim.data.stacked_y();
  const Eigen::Index h = n_obs / 2;
  auto condition = [](const Eigen::MatrixXd& cov, const Eigen::VectorXd& mean,
                      Eigen::Index keep, Eigen::Index drop,
                      const Eigen::VectorXd& observed) {
    const Eigen::MatrixXd kk = cov.topLeftCorner(keep, keep);
    const Eigen::MatrixXd kd = cov.topRightCorner(keep, drop);
    const Eigen::MatrixXd dd = cov.bottomRightCorner(drop, drop);
    const Eigen::MatrixXd gain = kd * dd.fullPivLu().inverse();
    return std::make_pair(
        Eigen::VectorXd(mean.head(keep) +
                        gain * (observed - mean.tail(drop))),
        Eigen::MatrixXd(kk - gain * kd.transpose()));
  };

  // Reorder so the conditioned-on block sits at the back.
  const Eigen::Index keep1 = dim + h;
  Eigen::MatrixXd cov1(keep1 + (n_obs - h), keep1 + (n_obs - h));
  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < dim + h; ++i) order.push_back(i);
  for (Eigen::Index i = dim + h; i < dim + n_obs; ++i) order.push_back(i);
  // order is already (targets, y_first_half, y_second_half): condition on the
  // SECOND half first, then on the first half.
  auto [mean_s1, cov_s1] =
      condition(joint, Eigen::VectorXd::Zero(dim + n_obs), dim + h, n_obs - h,
                y.tail(n_obs - h));
  auto [mean_s2, cov_s2] = condition(cov_s1, mean_s1, dim, h, y.head(h));

  CHECK((mean_s2 - post.mean).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(max_abs_diff(cov_s2, post.covariance()) < 1e-8);
}

TEST_CASE("regular mu posterior against the oracle and basic limits") {
  Rng rng(113);
  const HyperParams degenerate(
      KernelSpec(KernelFamily::SquaredExponential, 0.0, 0.5),
      KernelSpec(KernelFamily::SquaredExponential, 0.5, 0.4), 0.3);
  const RegularSim dsim = simulate_regular(degenerate, random_grid(rng, 4), 3, 5);
  const Eigen::VectorXd t_pred = random_grid(rng, 3);
  const GaussianPosterior dpost =
      posterior_mu_regular(degenerate, dsim.data, t_pred);
  CHECK(dpost.mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(dpost.covariance().cwiseAbs().maxCoeff() < 1e-9);

  for (int trial = 0; trial < 10; ++trial) {
    const HyperParams theta = random_theta(rng);
    const int n = 2 + static_cast<int>(rng.uniform() * 4);
    const int j = 1 + static_cast<int>(rng.uniform() * 6);
    const RegularSim sim =
        simulate_regular(theta, random_grid(rng, j), n, 40 + trial);
    const Eigen::VectorXd pred = random_grid(rng, 1 + trial % 4);
    const GaussianPosterior eff = posterior_mu_regular(theta, sim.data, pred);
    const GaussianPosterior oracle =
        posterior_naive(theta, sim.data, pred, just_mu());
    CHECK((eff.mean - oracle.mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(max_abs_diff(eff.covariance(), oracle.covariance()) < 1e-8);
    // Conditioning cannot inflate the marginal variances.
    const Eigen::MatrixXd prior = gram(theta.mu_kernel, pred, pred);
    const Eigen::MatrixXd cov = eff.covariance();
    for (Eigen::Index k = 0; k < pred.size(); ++k)
      CHECK(cov(k, k) <= prior(k, k) + 1e-10);
  }
}

TEST_CASE("regular eta posterior matches the oracle block by block") {
  Rng rng(127);
  const HyperParams degenerate(
      KernelSpec(KernelFamily::SquaredExponential, 0.7, 0.5),
      KernelSpec(KernelFamily::SquaredExponential, 0.0, 0.4), 0.3);
  const RegularSim dsim = simulate_regular(degenerate, random_grid(rng, 4), 3, 5);
  const GaussianPosterior dpost =
      posterior_eta_regular(degenerate, dsim.data, random_grid(rng, 3));
  CHECK(dpost.mean.cwiseAbs().maxCoeff() == 0.0);
  CHECK(dpost.covariance().cwiseAbs().maxCoeff() < 1e-9);

  for (int trial = 0; trial < 10; ++trial) {
    const HyperParams theta = random_theta(rng);
    const int n = 2 + static_cast<int>(rng.uniform() * 4);
    const int j = 2 + static_cast<int>(rng.uniform() * 5);
    const int j_p = 1 + static_cast<int>(rng.uniform() * 4);
    const RegularSim sim =
        simulate_regular(theta, random_grid(rng, j), n, 50 + trial);
    const Eigen::VectorXd pred = random_grid(rng, j_p);
    const GaussianPosterior eff = posterior_eta_regular(theta, sim.data, pred);
    const GaussianPosterior oracle =
        posterior_naive(theta, sim.data, pred, etas_up_to(n - 1, false));
    CHECK((eff.mean - oracle.mean).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(max_abs_diff(eff.covariance(), oracle.covariance()) < 1e-8);

    // The reconstructed eta_n closes the pointwise sum.
    Eigen::VectorXd total = Eigen::VectorXd::Zero(pred.size());
    for (int i = 0; i < n - 1; ++i)
      total += eff.mean.segment(i * pred.size(), pred.size());
    const GaussianPosterior with_n =
        posterior_naive(theta, sim.data, pred, etas_up_to(n, false));
    const Eigen::VectorXd etan =
        with_n.mean.segment((n - 1) * pred.size(), pred.size());
    CHECK((total + etan).cwiseAbs().maxCoeff() < 1e-8);

    // Dense factorization carries the same distribution.
    const GaussianPosterior dense =
        posterior_eta_regular(theta, sim.data, pred, EtaFactorization::Dense);
    CHECK(max_abs_diff(dense.covariance(), eff.covariance()) < 1e-9);
  }
}

TEST_CASE("regular design: mu and eta are independent a posteriori") {
  Rng rng(131);
  for (int trial = 0; trial < 10; ++trial) {
    const HyperParams theta = random_theta(rng);
    const int n = 2 + static_cast<int>(rng.uniform() * 4);
    const RegularSim sim =
        simulate_regular(theta, random_grid(rng, 4), n, 60 + trial);
    const Eigen::VectorXd pred = random_grid(rng, 3);
    const GaussianPosterior joint =
        posterior_naive(theta, sim.data, pred, etas_up_to(n - 1, true));
    const Eigen::MatrixXd cross = joint.covariance().block(
        joint.mu_offset(), 0, pred.size(), (n - 1) * pred.size());
    CHECK(cross.cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("partial joint posterior equals the oracle (including cross terms)") {
  Rng rng(137);
  struct Case {
    int n_a;
    std::vector<int> j_b;
    int j_a, j_p;
  };
  const std::vector<Case> cases = {
      {1, {3, 4}, 4, 2}, {2, {3}, 4, 2}, {3, {2, 3, 2}, 3, 3}, {2, {5}, 5, 4}};
  int seed = 0;
  for (const auto& c : cases) {
    for (int trial = 0; trial < 4; ++trial) {
      const HyperParams theta = random_theta(rng);
      const PartialSim sim =
          random_partial(rng, theta, c.n_a, c.j_a, c.j_b, 70 + 13 * seed++);
      const int n = static_cast<int>(sim.data.n_functions());
      const Eigen::VectorXd pred = random_grid(rng, c.j_p);
      const GaussianPosterior eff =
          posterior_joint_partial(theta, sim.data, pred);
      const GaussianPosterior oracle =
          posterior_naive(theta, sim.data, pred, etas_up_to(n - 1, true));
      CHECK((eff.mean - oracle.mean).cwiseAbs().maxCoeff() < 1e-7);
      CHECK(max_abs_diff(eff.covariance(), oracle.covariance()) < 1e-7);

      const GaussianPosterior dense = posterior_joint_partial(
          theta, sim.data, pred, EtaFactorization::Dense);
      CHECK(max_abs_diff(dense.covariance(), eff.covariance()) < 1e-9);
    }
  }
}

TEST_CASE("partial joint with n_b = 0 reduces to the regular design") {
  Rng rng(139);
  const HyperParams theta = random_theta(rng);
  const RegularSim reg = simulate_regular(theta, random_grid(rng, 5), 3, 91);
  const PartialDataset partial(reg.data.t, reg.data.y, {});
  const Eigen::VectorXd pred = random_grid(rng, 3);

  const GaussianPosterior joint = posterior_joint_partial(theta, partial, pred);
  const GaussianPosterior mu_post = posterior_mu_regular(theta, reg.data, pred);
  const GaussianPosterior eta_post =
      posterior_eta_regular(theta, reg.data, pred);

  CHECK((joint.mean.tail(pred.size()) - mu_post.mean).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK((joint.mean.head(eta_post.mean.size()) - eta_post.mean)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  const Eigen::MatrixXd cross = joint.covariance().block(
      joint.mu_offset(), 0, pred.size(), eta_post.mean.size());
  CHECK(cross.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("sampling: degenerate covariance, zero sum, determinism") {
  Rng rng(149);
  const HyperParams theta = random_theta(rng);
  const RegularSim sim = simulate_regular(theta, random_grid(rng, 4), 3, 17);
  const Eigen::VectorXd pred = random_grid(rng, 3);
  GaussianPosterior joint = posterior_joint_partial(
      theta, PartialDataset(sim.data.t, sim.data.y, {}), pred);

  // Zero covariance: every draw is the mean.
  GaussianPosterior frozen = joint;
  frozen.cov_chol = LowerTriangular::from_raw(
      Eigen::MatrixXd::Zero(joint.mean.size(), joint.mean.size()));
  const PosteriorDraws fixed = sample_f(frozen, 4, 3);
  for (int d = 0; d < 4; ++d) {
    CHECK((fixed.mu.row(d).transpose() - joint.mean.tail(pred.size()))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  const PosteriorDraws draws = sample_f(joint, 20, 5);
  for (int d = 0; d < 20; ++d) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(pred.size());
    for (int i = 0; i < 3; ++i) total += draws.eta[i].row(d).transpose();
    CHECK(total.cwiseAbs().maxCoeff() < 1e-9);
  }

  const PosteriorDraws again = sample_f(joint, 20, 5);
  CHECK(max_abs_diff(draws.mu, again.mu) == 0.0);

  // Missing targets are rejected.
  GaussianPosterior eta_only = posterior_eta_regular(theta, sim.data, pred);
  CHECK_THROWS_AS(sample_f(eta_only, 2, 1), InvalidInput);
}

TEST_CASE("sampled moments agree with the posterior (Monte Carlo)") {
  Rng rng(151);
  const HyperParams theta = random_theta(rng);
  const RegularSim sim = simulate_regular(theta, random_grid(rng, 4), 2, 19);
  const Eigen::VectorXd pred = random_grid(rng, 2);
  const GaussianPosterior mu_post = posterior_mu_regular(theta, sim.data, pred);
  const GaussianPosterior eta_post =
      posterior_eta_regular(theta, sim.data, pred);
  const int m = 50000;
  const PosteriorDraws draws = sample_f(mu_post, eta_post, m, 23);

  const Eigen::MatrixXd mu_cov = mu_post.covariance();
  for (Eigen::Index k = 0; k < pred.size(); ++k) {
    const double mean_k = draws.mu.col(k).mean();
    const double sd = std::sqrt(mu_cov(k, k));
    CHECK(std::abs(mean_k - mu_post.mean(k)) < 5.0 * sd / std::sqrt(double(m)));
    const double var_k =
        (draws.mu.col(k).array() - mean_k).square().sum() / (m - 1);
    CHECK(std::abs(var_k - mu_cov(k, k)) <
          5.0 * mu_cov(k, k) * std::sqrt(2.0 / (m - 1)));
  }
}

TEST_CASE("credible bands") {
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-9));
  CHECK_THROWS_AS(normal_quantile(0.0), InvalidInput);

  GaussianPosterior post;
  post.t_pred = Eigen::VectorXd::Zero(2);
  post.mean = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(2, 2);
  l(0, 0) = 1.0;  // sd 1 at the first point, 0 at the second
  post.cov_chol = LowerTriangular::from_raw(l);
  const CredibleBand band = credible_band(post, 0.9);
  CHECK(band.lower(0) == doctest::Approx(-1.6449).epsilon(1e-3));
  CHECK(band.upper(0) == doctest::Approx(1.6449).epsilon(1e-3));
  CHECK(band.lower(1) == 0.0);
  CHECK(band.upper(1) == 0.0);
  CHECK_THROWS_AS(credible_band(post, 1.0), InvalidInput);

  Rng rng(157);
  const Eigen::MatrixXd draws = rng.normal_matrix(50000, 1);
  const CredibleBand emp = credible_band(draws, 0.9);
  CHECK(std::abs(emp.lower(0) + 1.6449) < 0.05);
  CHECK(std::abs(emp.upper(0) - 1.6449) < 0.05);
}
