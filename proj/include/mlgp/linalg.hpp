#pragma once

#include <Eigen/Dense>
#include <array>

namespace mlgp {

/// Diagonal-shift retry ladder used when a Cholesky factorization fails.
///
/// Each rung adds delta * scale to the diagonal, where scale is the mean of
/// the diagonal (or 1 when the diagonal is identically zero, so that
/// degenerate zero covariances still factor to a negligible multiple of I).
struct JitterPolicy {
  std::array<double, 3> ladder{1e-10, 1e-8, 1e-6};
  bool enabled = true;

  static JitterPolicy none() { return JitterPolicy{{0, 0, 0}, false}; }
};

/// Lower-triangular Cholesky factor with the jitter that was applied to the
/// factored matrix (0 when none was needed).
class LowerTriangular {
 public:
  LowerTriangular() = default;

  /// Wraps a matrix as-is; only the lower triangle is kept. No positivity
  /// check, so degenerate factors (e.g. all zeros) can be built for sampling
  /// tests. cholesky() is the checked path.
  static LowerTriangular from_raw(Eigen::MatrixXd l, double jitter = 0.0);

  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double jitter() const { return jitter_; }

 private:
  Eigen::MatrixXd m_;
  double jitter_ = 0.0;
};

/// chol(A) for symmetric positive definite A, with the jitter ladder.
/// Throws NotPositiveDefinite when the ladder is exhausted; the label is used
/// in the error message to name the failing matrix.
LowerTriangular cholesky(const Eigen::MatrixXd& a,
                         const JitterPolicy& policy = {},
                         const char* label = "matrix");

/// log |L L^T| = 2 sum_i log L_ii.
double chol_logdet(const LowerTriangular& l);

/// Forward substitution: X with L X = B.
Eigen::MatrixXd solve_lower(const LowerTriangular& l, const Eigen::MatrixXd& b);

/// (L L^T)^{-1} B via two triangular solves; never forms the inverse.
Eigen::MatrixXd solve_spd(const LowerTriangular& l, const Eigen::MatrixXd& b);

/// Column-stacking vec and its inverse.
Eigen::VectorXd vec(const Eigen::MatrixXd& m);
Eigen::MatrixXd unvec(const Eigen::VectorXd& v, Eigen::Index rows,
                      Eigen::Index cols);

/// Symmetric block matrix I_n (x) (V - W) + 1_{n,n} (x) W: every diagonal
/// block equals V and every off-diagonal block equals W.
struct EqualBlockCov {
  Eigen::Index n_blocks = 0;
  Eigen::MatrixXd v;
  Eigen::MatrixXd w;
};

Eigen::MatrixXd assemble_equal_block(const EqualBlockCov& cov);

/// Cholesky factor of an equal-block covariance by the iterative block
/// factorization. Step i reuses the previous step's triangular solve and
/// cached Schur factor, so only one J x J solve, one J x J product and one
/// J x J factorization happen per step; the sub-diagonal of the factor has
/// constant block columns and is filled by copy.
LowerTriangular block_cholesky_equal(const EqualBlockCov& cov);

/// Extends a known factor chol(A) = l_a to the factor of [[A, C^T], [C, B]]
/// via C (chol A)^{-T} and the Cholesky of the Schur complement B - C A^{-1} C^T.
/// c has one row per appended coordinate; b is the appended diagonal block.
LowerTriangular block_cholesky_extend(const LowerTriangular& l_a,
                                      const Eigen::MatrixXd& c,
                                      const Eigen::MatrixXd& b,
                                      const char* label = "extension");

}  // namespace mlgp
