#include "mlgp/linalg.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "mlgp/errors.hpp"

namespace mlgp {

LowerTriangular LowerTriangular::from_raw(Eigen::MatrixXd l, double jitter) {
  if (l.rows() != l.cols())
    throw InvalidInput("LowerTriangular: matrix must be square");
  LowerTriangular out;
  out.m_ = l.triangularView<Eigen::Lower>();
  out.jitter_ = jitter;
  return out;
}

namespace {

// LLT attempt without any jitter; true on success.
bool try_llt(const Eigen::MatrixXd& a, Eigen::MatrixXd& l) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return false;
  l = llt.matrixL();
  // Guard against a silent zero pivot (Eigen accepts some PSD inputs).
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) return false;
  return true;
}

}  // namespace

LowerTriangular cholesky(const Eigen::MatrixXd& a, const JitterPolicy& policy,
                         const char* label) {
  if (a.rows() != a.cols())
    throw InvalidInput(std::string("cholesky: non-square input for ") + label);
  const Eigen::Index n = a.rows();
  if (n == 0) return LowerTriangular::from_raw(Eigen::MatrixXd(0, 0));
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale > 0.0) {
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale)
      throw InvalidInput(std::string("cholesky: input not symmetric for ") +
                         label);
  }

  Eigen::MatrixXd l;
  if (try_llt(a, l)) return LowerTriangular::from_raw(std::move(l));

  if (policy.enabled) {
    double diag_mean = a.diagonal().mean();
    if (!(diag_mean > 0.0)) diag_mean = 1.0;
    for (double delta : policy.ladder) {
      const double jitter = delta * diag_mean;
      Eigen::MatrixXd shifted = a;
      shifted.diagonal().array() += jitter;
      if (try_llt(shifted, l))
        return LowerTriangular::from_raw(std::move(l), jitter);
    }
  }
  throw NotPositiveDefinite(std::string("cholesky failed for ") + label);
}

double chol_logdet(const LowerTriangular& l) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.dim(); ++i) s += std::log(l.matrix()(i, i));
  return 2.0 * s;
}

Eigen::MatrixXd solve_lower(const LowerTriangular& l, const Eigen::MatrixXd& b) {
  if (l.dim() != b.rows())
    throw InvalidInput("solve_lower: dimension mismatch");
  Eigen::MatrixXd x =
      l.matrix().triangularView<Eigen::Lower>().solve(b);
  if (!x.allFinite()) throw Overflow("solve_lower: non-finite result");
  return x;
}

Eigen::MatrixXd solve_spd(const LowerTriangular& l, const Eigen::MatrixXd& b) {
  // M \ b = [(L \ b)^T / L]^T: forward then back substitution.
  Eigen::MatrixXd x = solve_lower(l, b);
  x = l.matrix().transpose().triangularView<Eigen::Upper>().solve(x);
  if (!x.allFinite()) throw Overflow("solve_spd: non-finite result");
  return x;
}

Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd unvec(const Eigen::VectorXd& v, Eigen::Index rows,
                      Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw InvalidInput("unvec: length does not match rows * cols");
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

Eigen::MatrixXd assemble_equal_block(const EqualBlockCov& cov) {
  const Eigen::Index j = cov.v.rows();
  const Eigen::Index n = cov.n_blocks;
  Eigen::MatrixXd full(n * j, n * j);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      full.block(r * j, c * j, j, j) = (r == c) ? cov.v : cov.w;
  return full;
}

LowerTriangular block_cholesky_equal(const EqualBlockCov& cov) {
  if (cov.n_blocks < 1)
    throw InvalidInput("block_cholesky_equal: n_blocks must be >= 1");
  if (cov.v.rows() != cov.v.cols() || cov.w.rows() != cov.w.cols() ||
      cov.v.rows() != cov.w.rows())
    throw InvalidInput("block_cholesky_equal: V and W must be square and equal-sized");

  const Eigen::Index j = cov.v.rows();
  const Eigen::Index n = cov.n_blocks;
  const Eigen::MatrixXd v = 0.5 * (cov.v + cov.v.transpose());
  const Eigen::MatrixXd w = 0.5 * (cov.w + cov.w.transpose());

  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n * j, n * j);
  double max_jitter = 0.0;

  LowerTriangular schur_chol = cholesky(v, {}, "block_cholesky_equal step 1");
  max_jitter = schur_chol.jitter();
  l.topLeftCorner(j, j) = schur_chol.matrix();

  // Invariant entering step i: schur_chol = chol(S_{i-1}) and
  // d = x^T x for x = chol(M_{i-1}) \ (1 (x) W), reused from step i-1.
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(j, j);
  for (Eigen::Index i = 2; i <= n; ++i) {
    const Eigen::MatrixXd x2 = solve_lower(schur_chol, w - d);
    d += x2.transpose() * x2;
    const Eigen::MatrixXd schur = v - d;
    try {
      schur_chol = cholesky(schur, {},
                            "block_cholesky_equal Schur complement");
    } catch (const NotPositiveDefinite&) {
      throw NotPositiveDefinite(
          "block_cholesky_equal: Schur complement failed at step " +
          std::to_string(i));
    }
    max_jitter = std::max(max_jitter, schur_chol.jitter());
    // x2^T is the constant block column below the (i-1)-th diagonal block.
    const Eigen::MatrixXd x2t = x2.transpose();
    for (Eigen::Index r = i; r <= n; ++r)
      l.block((r - 1) * j, (i - 2) * j, j, j) = x2t;
    l.block((i - 1) * j, (i - 1) * j, j, j) = schur_chol.matrix();
  }
  return LowerTriangular::from_raw(std::move(l), max_jitter);
}

LowerTriangular block_cholesky_extend(const LowerTriangular& l_a,
                                      const Eigen::MatrixXd& c,
                                      const Eigen::MatrixXd& b,
                                      const char* label) {
  if (c.cols() != l_a.dim())
    throw InvalidInput("block_cholesky_extend: C has wrong column count");
  if (b.rows() != b.cols() || b.rows() != c.rows())
    throw InvalidInput("block_cholesky_extend: B must be square with rows(C) rows");

  const Eigen::Index m = l_a.dim();
  const Eigen::Index p = c.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m + p, m + p);
  l.topLeftCorner(m, m) = l_a.matrix();
  if (p == 0) return LowerTriangular::from_raw(std::move(l), l_a.jitter());

  const Eigen::MatrixXd x = solve_lower(l_a, c.transpose());  // m x p
  Eigen::MatrixXd schur = b - x.transpose() * x;
  schur = 0.5 * (schur + schur.transpose());
  const LowerTriangular schur_chol = cholesky(schur, {}, label);
  l.block(m, 0, p, m) = x.transpose();
  l.block(m, m, p, p) = schur_chol.matrix();
  return LowerTriangular::from_raw(std::move(l),
                                   std::max(l_a.jitter(), schur_chol.jitter()));
}

}  // namespace mlgp
