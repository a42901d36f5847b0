#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mlgp/kernel.hpp"

namespace mlgp {

/// n functions observed on one shared grid t; column i of y is y_i(t).
/// Rows are sorted by t on construction. Duplicate points within the grid are
/// rejected; n == 1 is rejected because the zero-sum constraint makes the
/// deviations degenerate and the closed forms divide by n - 1.
struct RegularDataset {
  Eigen::VectorXd t;
  Eigen::MatrixXd y;

  RegularDataset(Eigen::VectorXd t_in, Eigen::MatrixXd y_in);

  Eigen::Index n_points() const { return t.size(); }
  Eigen::Index n_functions() const { return y.cols(); }
  Eigen::VectorXd stacked_y() const;
};

struct IrregularSeries {
  Eigen::VectorXd t;
  Eigen::VectorXd y;
};

/// n_a functions share the grid t_a (column i of y_a); the remaining n_b
/// functions carry individual grids. Function numbering is regular block
/// first: functions 1..n_a, then n_a+1..n.
struct PartialDataset {
  Eigen::VectorXd t_a;
  Eigen::MatrixXd y_a;
  std::vector<IrregularSeries> irregular;

  PartialDataset(Eigen::VectorXd t_a_in, Eigen::MatrixXd y_a_in,
                 std::vector<IrregularSeries> irregular_in);

  Eigen::Index n_regular() const { return y_a.cols(); }
  Eigen::Index n_irregular() const {
    return static_cast<Eigen::Index>(irregular.size());
  }
  Eigen::Index n_functions() const { return n_regular() + n_irregular(); }
  Eigen::Index n_obs() const;
  /// (y^a stacked function by function, then each irregular series).
  Eigen::VectorXd stacked_y() const;
  /// Irregular grids concatenated in function order (the paper's t^b).
  Eigen::VectorXd stacked_tb() const;
};

/// Cross-covariance matrix of the deviations: diag 1, off-diag -1/(n-1).
Eigen::MatrixXd xi_matrix(int n);
/// Symmetric square root of Xi; Omega^2 = Xi and 1^T Omega = 0.
Eigen::MatrixXd omega_matrix(int n);

struct RegularTruth {
  Eigen::VectorXd mu;   // mu(t)
  Eigen::MatrixXd eta;  // J x n, column i = eta_i(t)
};

struct RegularSim {
  RegularDataset data;
  RegularTruth truth;
};

struct PartialTruth {
  Eigen::VectorXd t_union;  // sorted distinct points across all grids
  Eigen::VectorXd mu;
  Eigen::MatrixXd eta;  // |t_union| x n
};

struct PartialSim {
  PartialDataset data;
  PartialTruth truth;
};

/// Forward simulation of the model: mu from its GP prior, deviations as
/// chol(K_eta) Z Omega^T so the zero-sum constraint holds pointwise, plus
/// iid Gaussian noise. Deterministic per seed.
RegularSim simulate_regular(const HyperParams& theta, const Eigen::VectorXd& t,
                            int n, std::uint64_t seed);

/// Same generative path on the union of all grids, then restricted. With an
/// empty t_b list this reproduces simulate_regular draw for draw.
PartialSim simulate_partial(const HyperParams& theta,
                            const Eigen::VectorXd& t_a, int n_a,
                            const std::vector<Eigen::VectorXd>& t_b,
                            std::uint64_t seed);

/// Sigma_0 = n/(n-1) K_eta(t,t) + sigma^2 I, Sigma_1 = n K_mu(t,t) + sigma^2 I.
struct RegularCovBlocks {
  Eigen::MatrixXd sigma0;
  Eigen::MatrixXd sigma1;
};

RegularCovBlocks regular_cov_blocks(const HyperParams& theta,
                                    const Eigen::VectorXd& t, int n);

/// Partial-design blocks. cb is the paper's C^b = K_mu(t_a, t_b)
/// - 1/(n-1) K_eta(t_a, t_b); b the irregular-block covariance; s the Schur
/// complement B - n_a (C^b)^T A_1^{-1} C^b computed through chol(A_1).
/// b_offsets locates each irregular function inside the stacked t_b axis.
struct PartialCovBlocks {
  Eigen::MatrixXd a0;
  Eigen::MatrixXd a1;
  Eigen::MatrixXd cb;
  Eigen::MatrixXd b;
  Eigen::MatrixXd s;
  std::vector<Eigen::Index> b_offsets;
  double jitter = 0.0;
};

PartialCovBlocks partial_cov_blocks(const HyperParams& theta,
                                    const Eigen::VectorXd& t_a, int n_a,
                                    const std::vector<Eigen::VectorXd>& t_b);
PartialCovBlocks partial_cov_blocks(const HyperParams& theta,
                                    const PartialDataset& data);

/// Dense N x N covariance of the stacked observation vector, assembled block
/// by block from Var[y_i] and Cov[y_i, y_j]. This is the oracle every
/// efficient path is checked against.
Eigen::MatrixXd naive_full_cov(const HyperParams& theta,
                               const RegularDataset& data);
Eigen::MatrixXd naive_full_cov(const HyperParams& theta,
                               const PartialDataset& data);

/// Dataset CSV schema: header "function_id,t,y", function_id 1-based.
void write_dataset_csv(std::ostream& out, const RegularDataset& data);
void write_dataset_csv(std::ostream& out, const PartialDataset& data);
RegularDataset read_regular_csv(std::istream& in);
/// regular_ids selects the shared-grid functions; they become functions
/// 1..n_a in file-id order, the rest follow in file-id order.
PartialDataset read_partial_csv(std::istream& in,
                                const std::vector<int>& regular_ids);

}  // namespace mlgp
