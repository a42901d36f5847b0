#include <doctest.h>

#include <cmath>

#include "mlgp/likelihood.hpp"
#include "mlgp/linalg.hpp"
#include "test_helpers.hpp"

using namespace mlgp;
using namespace mlgp::testing;

namespace {

RegularDataset tiny_regular() {
  Eigen::VectorXd t(1);
  t << 0.0;
  Eigen::MatrixXd y(1, 2);
  y << 0.0, 0.0;
  return RegularDataset(t, y);
}

const HyperParams kUnit(KernelSpec(KernelFamily::SquaredExponential, 1.0, 1.0),
                        KernelSpec(KernelFamily::SquaredExponential, 1.0, 1.0),
                        1.0);

PartialSim random_partial(Rng& rng, const HyperParams& theta, int n_a, int j_a,
                          const std::vector<int>& j_b, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> t_b;
  for (int j : j_b) t_b.push_back(random_grid(rng, j));
  return simulate_partial(theta, random_grid(rng, j_a), n_a, t_b, seed);
}

}  // namespace

TEST_CASE("naive likelihood closed form on the smallest case") {
  const RegularDataset data = tiny_regular();
  const LogLikResult r = loglik_naive(kUnit, data);
  // Sigma = diag(3, 3), y = 0.
  const double expected = -0.5 * (2.0 * std::log(2.0 * M_PI) + 2.0 * std::log(3.0));
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r.quad_form == 0.0);
  CHECK(loglik_regular(kUnit, data).value ==
        doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("quadratic form scales as y squared, logdet does not move") {
  Rng rng(61);
  const HyperParams theta = random_theta(rng);
  const RegularSim sim = simulate_regular(theta, random_grid(rng, 6), 3, 21);
  const LogLikResult base = loglik_naive(theta, sim.data);
  const RegularDataset doubled(sim.data.t, 2.0 * sim.data.y);
  const LogLikResult scaled = loglik_naive(theta, doubled);
  CHECK(scaled.quad_form == doctest::Approx(4.0 * base.quad_form).epsilon(1e-12));
  CHECK(scaled.logdet == base.logdet);
}

TEST_CASE("result decomposition invariant") {
  Rng rng(67);
  const HyperParams theta = random_theta(rng);
  const RegularSim sim = simulate_regular(theta, random_grid(rng, 5), 4, 3);
  for (const LogLikResult& r :
       {loglik_naive(theta, sim.data), loglik_regular(theta, sim.data)}) {
    CHECK(r.value ==
          doctest::Approx(-0.5 * (r.constant + r.logdet + r.quad_form))
              .epsilon(1e-12));
    CHECK(r.constant ==
          doctest::Approx(sim.data.y.size() * std::log(2.0 * M_PI)));
  }
}

TEST_CASE("identical columns reduce the quadratic form to the mean term") {
  Rng rng(71);
  const HyperParams theta = random_theta(rng);
  const Eigen::VectorXd t = random_grid(rng, 5);
  const int n = 4;
  const Eigen::VectorXd shared = rng.normal_vector(5);
  Eigen::MatrixXd y(5, n);
  for (int i = 0; i < n; ++i) y.col(i) = shared;
  const RegularDataset data(t, y);

  const LogLikResult eff = loglik_regular(theta, data);
  CHECK(rel_diff(eff.value, loglik_naive(theta, data).value) < 1e-10);

  const RegularCovBlocks blocks = regular_cov_blocks(theta, t, n);
  const Eigen::VectorXd s1y = solve_spd(cholesky(blocks.sigma1), shared);
  CHECK(eff.quad_form == doctest::Approx(n * shared.dot(s1y)).epsilon(1e-10));
}

TEST_CASE("regular efficient equals naive on random instances") {
  Rng rng(73);
  for (int trial = 0; trial < 25; ++trial) {
    const HyperParams theta = random_theta(
        rng, trial % 3 == 0 ? KernelFamily::Matern32
                            : KernelFamily::SquaredExponential);
    const int n = 2 + static_cast<int>(rng.uniform() * 5);
    const int j = 2 + static_cast<int>(rng.uniform() * 7);
    const RegularSim sim =
        simulate_regular(theta, random_grid(rng, j), n, 500 + trial);
    const double naive = loglik_naive(theta, sim.data).value;
    const double eff = loglik_regular(theta, sim.data).value;
    CHECK(std::abs(eff - naive) <= 1e-8 * std::max(1.0, std::abs(naive)));
  }
}

TEST_CASE("determinant identity against the LU oracle") {
  Rng rng(79);
  for (int trial = 0; trial < 10; ++trial) {
    const HyperParams theta = random_theta(rng);
    const int n = 2 + static_cast<int>(rng.uniform() * 4);
    const int j = 2 + static_cast<int>(rng.uniform() * 6);
    const RegularSim sim =
        simulate_regular(theta, random_grid(rng, j), n, 600 + trial);
    const RegularCovBlocks blocks = regular_cov_blocks(theta, sim.data.t, n);
    const double split = (n - 1) * chol_logdet(cholesky(blocks.sigma0)) +
                         chol_logdet(cholesky(blocks.sigma1));
    const double dense = lu_logdet(naive_full_cov(theta, sim.data));
    CHECK(rel_diff(split, dense) < 1e-8);
  }
}

TEST_CASE("partial with no irregular functions routes to the regular path") {
  Rng rng(83);
  const HyperParams theta = random_theta(rng);
  const RegularSim sim = simulate_regular(theta, random_grid(rng, 6), 3, 7);
  const PartialDataset partial(sim.data.t, sim.data.y, {});
  const LogLikResult a = loglik_partial(theta, partial);
  const LogLikResult b = loglik_regular(theta, sim.data);
  CHECK(a.value == b.value);
  CHECK(a.logdet == b.logdet);
}

TEST_CASE("completely irregular design (n_a = 1) equals naive") {
  Rng rng(89);
  for (int trial = 0; trial < 8; ++trial) {
    const HyperParams theta = random_theta(rng);
    const PartialSim sim = random_partial(rng, theta, 1, 4, {3, 5}, 700 + trial);
    const double naive = loglik_naive(theta, sim.data).value;
    const double eff = loglik_partial(theta, sim.data).value;
    CHECK(std::abs(eff - naive) <= 1e-8 * std::max(1.0, std::abs(naive)));
  }
}

TEST_CASE("partial efficient equals naive on random instances") {
  Rng rng(97);
  for (int trial = 0; trial < 25; ++trial) {
    const HyperParams theta = random_theta(
        rng, trial % 4 == 0 ? KernelFamily::Matern32
                            : KernelFamily::SquaredExponential);
    const int n_a = 1 + static_cast<int>(rng.uniform() * 3);
    const int n_b = static_cast<int>(rng.uniform() * 4);
    if (n_a + n_b < 2) continue;
    std::vector<int> j_b(n_b);
    for (auto& j : j_b) j = 2 + static_cast<int>(rng.uniform() * 4);
    const int j_a = 2 + static_cast<int>(rng.uniform() * 4);
    const PartialSim sim = random_partial(rng, theta, n_a, j_a, j_b, 800 + trial);
    const double naive = loglik_naive(theta, sim.data).value;
    const double eff = loglik_partial(theta, sim.data).value;
    CHECK(std::abs(eff - naive) <= 1e-8 * std::max(1.0, std::abs(naive)));
  }
}

TEST_CASE("partial determinant identity") {
  Rng rng(101);
  for (int trial = 0; trial < 8; ++trial) {
    const HyperParams theta = random_theta(rng);
    const PartialSim sim = random_partial(rng, theta, 3, 5, {3, 4}, 900 + trial);
    const PartialCovBlocks blocks = partial_cov_blocks(theta, sim.data);
    const double split = 2 * chol_logdet(cholesky(blocks.a0)) +
                         chol_logdet(cholesky(blocks.a1)) +
                         chol_logdet(cholesky(blocks.s));
    const double dense = lu_logdet(naive_full_cov(theta, sim.data));
    CHECK(rel_diff(split, dense) < 1e-8);
  }
}
