#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mlgp/errors.hpp"
#include "mlgp/linalg.hpp"
#include "mlgp/model.hpp"
#include "test_helpers.hpp"

using namespace mlgp;
using namespace mlgp::testing;

TEST_CASE("xi and omega") {
  const Eigen::MatrixXd xi2 = xi_matrix(2);
  CHECK(xi2(0, 0) == 1.0);
  CHECK(xi2(0, 1) == -1.0);
  CHECK(xi2(1, 0) == -1.0);

  const Eigen::MatrixXd xi3 = xi_matrix(3);
  CHECK(xi3(0, 1) == doctest::Approx(-0.5));
  CHECK(max_abs_diff(omega_matrix(3) * omega_matrix(3), xi3) < 1e-12);

  for (int n = 2; n <= 100; ++n) {
    const Eigen::MatrixXd omega = omega_matrix(n);
    CHECK(max_abs_diff(omega * omega, xi_matrix(n)) < 1e-10);
    CHECK((Eigen::RowVectorXd::Ones(n) * omega).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(xi_matrix(n).rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  }

  CHECK_THROWS_AS(xi_matrix(1), InvalidInput);
  CHECK_THROWS_AS(omega_matrix(1), InvalidInput);
}

TEST_CASE("dataset construction rules") {
  Eigen::VectorXd t(3);
  t << 0.5, 0.1, 0.9;
  Eigen::MatrixXd y(3, 2);
  y << 1, 2, 3, 4, 5, 6;
  const RegularDataset data(t, y);
  CHECK(data.t(0) == 0.1);
  CHECK(data.t(2) == 0.9);
  CHECK(data.y(0, 0) == 3);  // row followed its time point
  CHECK(data.y(0, 1) == 4);

  CHECK_THROWS_AS(RegularDataset(t, Eigen::MatrixXd::Zero(3, 1)), InvalidInput);
  Eigen::VectorXd dup(2);
  dup << 0.3, 0.3;
  CHECK_THROWS_AS(RegularDataset(dup, Eigen::MatrixXd::Zero(2, 2)), InvalidInput);

  Eigen::VectorXd ta(2);
  ta << 0, 1;
  CHECK_THROWS_AS(PartialDataset(ta, Eigen::MatrixXd::Zero(2, 1), {}),
                  InvalidInput);  // n = 1
  CHECK_NOTHROW(PartialDataset(
      ta, Eigen::MatrixXd::Zero(2, 1),
      {IrregularSeries{Eigen::VectorXd::Constant(1, 0.5),
                       Eigen::VectorXd::Zero(1)}}));
}

TEST_CASE("simulation is deterministic and honors the zero-sum constraint") {
  const HyperParams theta(KernelSpec(KernelFamily::SquaredExponential, 1.0, 0.4),
                          KernelSpec(KernelFamily::SquaredExponential, 0.5, 0.3),
                          0.1);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(12, 0.0, 1.0);
  const RegularSim sim1 = simulate_regular(theta, t, 4, 99);
  const RegularSim sim2 = simulate_regular(theta, t, 4, 99);
  CHECK(max_abs_diff(sim1.data.y, sim2.data.y) == 0.0);
  const RegularSim sim3 = simulate_regular(theta, t, 4, 100);
  CHECK(max_abs_diff(sim1.data.y, sim3.data.y) > 0.0);

  CHECK(sim1.truth.eta.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(simulate_regular(theta, t, 1, 0), InvalidInput);
}

TEST_CASE("degenerate simulation collapses to the mean") {
  const HyperParams theta(KernelSpec(KernelFamily::SquaredExponential, 1.0, 0.4),
                          KernelSpec(KernelFamily::SquaredExponential, 0.0, 0.3),
                          0.0);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(6, 0.0, 1.0);
  const RegularSim sim = simulate_regular(theta, t, 3, 5);
  for (int i = 0; i < 3; ++i)
    CHECK(max_abs_diff(sim.data.y.col(i), sim.truth.mu) == 0.0);
}

TEST_CASE("deviation draws reproduce the Prop-1 covariance at one point") {
  const double v = 0.8;
  const HyperParams theta(KernelSpec(KernelFamily::SquaredExponential, 0.0, 1.0),
                          KernelSpec(KernelFamily::SquaredExponential, v, 1.0),
                          0.0);
  Eigen::VectorXd t0(1);
  t0 << 0.3;
  const int m = 10000;
  double sum = 0.0, sum_sq = 0.0;
  for (int rep = 0; rep < m; ++rep) {
    const RegularSim sim = simulate_regular(theta, t0, 3, 1000 + rep);
    const double e1 = sim.truth.eta(0, 0);
    sum += e1;
    sum_sq += e1 * e1;
  }
  const double mean = sum / m;
  const double var = sum_sq / m - mean * mean;
  // xi_ii K(t0, t0) = v; 5 standard errors of a sample variance.
  const double se = v * std::sqrt(2.0 / (m - 1));
  CHECK(std::abs(var - v) < 5 * se);
}

TEST_CASE("partial simulation with no irregular functions equals regular") {
  const HyperParams theta(KernelSpec(KernelFamily::SquaredExponential, 1.0, 0.4),
                          KernelSpec(KernelFamily::SquaredExponential, 0.5, 0.3),
                          0.2);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(9, 0.0, 1.0);
  const RegularSim reg = simulate_regular(theta, t, 3, 42);
  const PartialSim part = simulate_partial(theta, t, 3, {}, 42);
  CHECK(max_abs_diff(reg.data.y, part.data.y_a) == 0.0);
  CHECK(max_abs_diff(reg.truth.mu, part.truth.mu) == 0.0);
}

TEST_CASE("partial simulation zero sum on the union grid") {
  Rng rng(5);
  const HyperParams theta = random_theta(rng);
  const Eigen::VectorXd t_a = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
  const std::vector<Eigen::VectorXd> t_b{random_grid(rng, 3),
                                         random_grid(rng, 4)};
  const PartialSim sim = simulate_partial(theta, t_a, 2, t_b, 8);
  CHECK(sim.truth.eta.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
  CHECK(sim.data.n_functions() == 4);
  CHECK(sim.data.n_obs() == 2 * 5 + 3 + 4);

  // Noiseless, no deviations: shared points carry mu exactly.
  const HyperParams flat(KernelSpec(KernelFamily::SquaredExponential, 1.0, 0.4),
                         KernelSpec(KernelFamily::SquaredExponential, 0.0, 0.3),
                         0.0);
  const PartialSim noiseless = simulate_partial(flat, t_a, 2, {t_a}, 9);
  CHECK(max_abs_diff(noiseless.data.y_a.col(0), noiseless.data.y_a.col(1)) ==
        0.0);
  CHECK(max_abs_diff(noiseless.data.y_a.col(0),
                     noiseless.data.irregular[0].y) == 0.0);
}

TEST_CASE("regular covariance blocks") {
  Rng rng(31);
  const Eigen::VectorXd t = random_grid(rng, 6);

  const HyperParams no_eta(KernelSpec(KernelFamily::SquaredExponential, 1.0, 0.4),
                           KernelSpec(KernelFamily::SquaredExponential, 0.0, 0.3),
                           0.3);
  const RegularCovBlocks zero = regular_cov_blocks(no_eta, t, 3);
  CHECK(max_abs_diff(zero.sigma0, 0.09 * Eigen::MatrixXd::Identity(6, 6)) <
        1e-15);

  const HyperParams theta = random_theta(rng);
  const RegularCovBlocks two = regular_cov_blocks(theta, t, 2);
  const Eigen::MatrixXd expected =
      2.0 * gram(theta.eta_kernel, t, t) +
      theta.noise_sd * theta.noise_sd * Eigen::MatrixXd::Identity(6, 6);
  CHECK(max_abs_diff(two.sigma0, expected) < 1e-14);
}

TEST_CASE("block assembly equals the naive covariance") {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const HyperParams theta = random_theta(rng);
    const int n = 2 + static_cast<int>(rng.uniform() * 4);
    const int j = 2 + static_cast<int>(rng.uniform() * 5);
    const Eigen::VectorXd t = random_grid(rng, j);
    const RegularSim sim = simulate_regular(theta, t, n, 100 + trial);

    const RegularCovBlocks blocks = regular_cov_blocks(theta, t, n);
    // H = (Sigma_1 - Sigma_0)/n recovers the off-diagonal block.
    const Eigen::MatrixXd h = (blocks.sigma1 - blocks.sigma0) / n;
    Eigen::MatrixXd assembled(n * j, n * j);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        assembled.block(r * j, c * j, j, j) =
            (r == c) ? Eigen::MatrixXd(blocks.sigma0 + h) : h;
    CHECK(max_abs_diff(assembled, naive_full_cov(theta, sim.data)) < 1e-12);
  }
}

TEST_CASE("naive covariance in the two-function single-point case") {
  const HyperParams theta(KernelSpec(KernelFamily::SquaredExponential, 1.0, 1.0),
                          KernelSpec(KernelFamily::SquaredExponential, 1.0, 1.0),
                          1.0);
  Eigen::VectorXd t(1);
  t << 0.0;
  Eigen::MatrixXd y(1, 2);
  y << 0.1, -0.1;
  const Eigen::MatrixXd cov = naive_full_cov(theta, RegularDataset(t, y));
  Eigen::MatrixXd expected(2, 2);
  expected << 3, 0, 0, 3;
  CHECK(max_abs_diff(cov, expected) < 1e-15);
}

TEST_CASE("partial naive covariance degenerates to regular") {
  Rng rng(43);
  const HyperParams theta = random_theta(rng);
  const Eigen::VectorXd t = random_grid(rng, 4);
  const RegularSim sim = simulate_regular(theta, t, 3, 77);
  const PartialDataset partial(sim.data.t, sim.data.y, {});
  CHECK(max_abs_diff(naive_full_cov(theta, sim.data),
                     naive_full_cov(theta, partial)) == 0.0);
  const Eigen::MatrixXd full = naive_full_cov(theta, partial);
  CHECK(max_abs_diff(full, full.transpose()) == 0.0);
}

TEST_CASE("partial covariance blocks produce an SPD Schur complement") {
  Rng rng(47);
  const HyperParams theta = random_theta(rng);
  const Eigen::VectorXd t_a = random_grid(rng, 5);
  const std::vector<Eigen::VectorXd> t_b{random_grid(rng, 3),
                                         random_grid(rng, 4)};
  const PartialCovBlocks blocks = partial_cov_blocks(theta, t_a, 3, t_b);
  CHECK(blocks.s.rows() == 7);
  CHECK_NOTHROW(cholesky(blocks.s));
  CHECK(blocks.b_offsets.back() == 7);
}

TEST_CASE("dataset CSV round trip") {
  Rng rng(53);
  const HyperParams theta = random_theta(rng);
  const Eigen::VectorXd t = random_grid(rng, 7);
  const RegularSim sim = simulate_regular(theta, t, 3, 11);

  std::stringstream buf;
  write_dataset_csv(buf, sim.data);
  const RegularDataset back = read_regular_csv(buf);
  CHECK(max_abs_diff(back.y, sim.data.y) == 0.0);
  CHECK((back.t - sim.data.t).cwiseAbs().maxCoeff() == 0.0);

  const PartialSim psim =
      simulate_partial(theta, t, 2, {random_grid(rng, 4)}, 12);
  std::stringstream pbuf;
  write_dataset_csv(pbuf, psim.data);
  const PartialDataset pback = read_partial_csv(pbuf, {1, 2});
  CHECK(max_abs_diff(pback.y_a, psim.data.y_a) == 0.0);
  CHECK((pback.irregular[0].y - psim.data.irregular[0].y).cwiseAbs().maxCoeff() ==
        0.0);

  // Reading a genuinely partial file as regular names the problem.
  std::stringstream pbuf2;
  write_dataset_csv(pbuf2, psim.data);
  CHECK_THROWS_AS(read_regular_csv(pbuf2), InvalidInput);
}
