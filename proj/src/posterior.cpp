#include "mlgp/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mlgp/errors.hpp"
#include "mlgp/rng.hpp"

namespace mlgp {

Eigen::MatrixXd GaussianPosterior::covariance() const {
  const auto& l = cov_chol.matrix();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(l.rows(), l.rows());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(l);
  return cov.selfadjointView<Eigen::Lower>();
}

Eigen::Index GaussianPosterior::eta_offset(int function_index) const {
  const auto it = std::find(represented_etas.begin(), represented_etas.end(),
                            function_index);
  if (it == represented_etas.end())
    throw InvalidInput("posterior does not represent eta_" +
                       std::to_string(function_index));
  return (it - represented_etas.begin()) * t_pred.size();
}

Eigen::Index GaussianPosterior::mu_offset() const {
  if (!includes_mu) throw InvalidInput("posterior does not include mu");
  return static_cast<Eigen::Index>(represented_etas.size()) * t_pred.size();
}

namespace {

std::vector<CoordLabel> make_labels(const std::vector<int>& etas,
                                    bool include_mu, Eigen::Index j_p) {
  std::vector<CoordLabel> labels;
  labels.reserve((etas.size() + (include_mu ? 1 : 0)) * j_p);
  for (int fi : etas)
    for (Eigen::Index k = 0; k < j_p; ++k)
      labels.push_back({TargetKind::Eta, fi, k});
  if (include_mu)
    for (Eigen::Index k = 0; k < j_p; ++k)
      labels.push_back({TargetKind::Mu, 0, k});
  return labels;
}

// Per-function view of a dataset: grid and observation vector of each
// function, plus the stacked observation vector.
struct FlatData {
  std::vector<Eigen::VectorXd> grids;
  std::vector<Eigen::VectorXd> values;
  int n = 0;

  Eigen::Index n_obs() const {
    Eigen::Index total = 0;
    for (const auto& g : grids) total += g.size();
    return total;
  }
};

FlatData flatten(const RegularDataset& data) {
  FlatData flat;
  flat.n = static_cast<int>(data.n_functions());
  for (int i = 0; i < flat.n; ++i) {
    flat.grids.push_back(data.t);
    flat.values.push_back(data.y.col(i));
  }
  return flat;
}

FlatData flatten(const PartialDataset& data) {
  FlatData flat;
  flat.n = static_cast<int>(data.n_functions());
  for (Eigen::Index i = 0; i < data.n_regular(); ++i) {
    flat.grids.push_back(data.t_a);
    flat.values.push_back(data.y_a.col(i));
  }
  for (const auto& series : data.irregular) {
    flat.grids.push_back(series.t);
    flat.values.push_back(series.y);
  }
  return flat;
}

// Dense conditioning of (targets | y) from the model cross-covariances.
GaussianPosterior naive_core(const HyperParams& theta, const FlatData& flat,
                             const Eigen::MatrixXd& sigma_yy,
                             const Eigen::VectorXd& t_pred,
                             const PosteriorTargets& targets) {
  if (t_pred.size() == 0) throw InvalidInput("posterior: empty t_pred");
  const int n = flat.n;
  std::vector<int> etas = targets.eta_indices;
  std::sort(etas.begin(), etas.end());
  etas.erase(std::unique(etas.begin(), etas.end()), etas.end());
  for (int fi : etas)
    if (fi < 1 || fi > n)
      throw InvalidInput("posterior target eta index out of range");
  if (etas.empty() && !targets.include_mu)
    throw InvalidInput("posterior: no targets requested");

  const Eigen::Index j_p = t_pred.size();
  const Eigen::Index n_eta = static_cast<Eigen::Index>(etas.size());
  const Eigen::Index dim = n_eta * j_p + (targets.include_mu ? j_p : 0);
  const Eigen::Index n_obs = flat.n_obs();
  const Eigen::MatrixXd xi = xi_matrix(n);
  const Eigen::MatrixXd k_ee = gram(theta.eta_kernel, t_pred, t_pred);

  // Prior covariance of the targets (mu and eta are a priori independent).
  Eigen::MatrixXd prior = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index a = 0; a < n_eta; ++a)
    for (Eigen::Index b = 0; b < n_eta; ++b)
      prior.block(a * j_p, b * j_p, j_p, j_p) =
          xi(etas[a] - 1, etas[b] - 1) * k_ee;
  if (targets.include_mu)
    prior.block(n_eta * j_p, n_eta * j_p, j_p, j_p) =
        gram(theta.mu_kernel, t_pred, t_pred);

  // Cross-covariance with the stacked observations, stored transposed
  // (n_obs x dim) so the triangular solve can run in place.
  Eigen::MatrixXd c_yt(n_obs, dim);
  Eigen::VectorXd y(n_obs);
  Eigen::Index row = 0;
  for (int fn = 0; fn < n; ++fn) {
    const Eigen::Index sz = flat.grids[fn].size();
    for (Eigen::Index a = 0; a < n_eta; ++a)
      c_yt.block(row, a * j_p, sz, j_p) =
          xi(fn, etas[a] - 1) *
          gram(theta.eta_kernel, flat.grids[fn], t_pred);
    if (targets.include_mu)
      c_yt.block(row, n_eta * j_p, sz, j_p) =
          gram(theta.mu_kernel, flat.grids[fn], t_pred);
    y.segment(row, sz) = flat.values[fn];
    row += sz;
  }

  const LowerTriangular l = cholesky(sigma_yy, {}, "Sigma");
  l.matrix().triangularView<Eigen::Lower>().solveInPlace(c_yt);
  const Eigen::VectorXd alpha = solve_lower(l, y);

  GaussianPosterior post;
  post.t_pred = t_pred;
  post.mean = c_yt.transpose() * alpha;
  Eigen::MatrixXd cov = prior;
  cov.selfadjointView<Eigen::Lower>().rankUpdate(c_yt.transpose(), -1.0);
  cov = cov.selfadjointView<Eigen::Lower>();
  post.cov_chol = cholesky(cov, {}, "naive posterior covariance");
  post.labels = make_labels(etas, targets.include_mu, j_p);
  post.represented_etas = std::move(etas);
  post.includes_mu = targets.include_mu;
  post.n_functions = n;
  return post;
}

}  // namespace

GaussianPosterior posterior_naive(const HyperParams& theta,
                                  const RegularDataset& data,
                                  const Eigen::VectorXd& t_pred,
                                  const PosteriorTargets& targets) {
  return naive_core(theta, flatten(data), naive_full_cov(theta, data), t_pred,
                    targets);
}

GaussianPosterior posterior_naive(const HyperParams& theta,
                                  const PartialDataset& data,
                                  const Eigen::VectorXd& t_pred,
                                  const PosteriorTargets& targets) {
  return naive_core(theta, flatten(data), naive_full_cov(theta, data), t_pred,
                    targets);
}

GaussianPosterior posterior_mu_regular(const HyperParams& theta,
                                       const RegularDataset& data,
                                       const Eigen::VectorXd& t_pred) {
  if (t_pred.size() == 0) throw InvalidInput("posterior: empty t_pred");
  const int n = static_cast<int>(data.n_functions());
  const RegularCovBlocks blocks = regular_cov_blocks(theta, data.t, n);
  const LowerTriangular l1 = cholesky(blocks.sigma1, {}, "Sigma1");

  const Eigen::MatrixXd k_m = gram(theta.mu_kernel, t_pred, data.t);
  const Eigen::VectorXd row_sums = data.y.rowwise().sum();

  GaussianPosterior post;
  post.t_pred = t_pred;
  post.mean = k_m * solve_spd(l1, row_sums);
  Eigen::MatrixXd cov = gram(theta.mu_kernel, t_pred, t_pred) -
                        n * (k_m * solve_spd(l1, k_m.transpose()));
  cov = 0.5 * (cov + cov.transpose());
  post.cov_chol = cholesky(cov, {}, "mu posterior covariance");
  post.labels = make_labels({}, true, t_pred.size());
  post.includes_mu = true;
  post.n_functions = n;
  return post;
}

namespace {

// Diagonal/off-diagonal blocks of the regular-design eta' posterior
// covariance (the appendix's V and W).
struct EtaBlocks {
  Eigen::MatrixXd v;
  Eigen::MatrixXd w;
};

EtaBlocks regular_eta_vw(const Eigen::MatrixXd& k_ee, const Eigen::MatrixXd& q,
                         int n) {
  const double c = static_cast<double>(n) / (n - 1);
  EtaBlocks out;
  out.w = (c * q - k_ee) / (n - 1);
  out.v = out.w + c * (k_ee - c * q);
  return out;
}

LowerTriangular factor_equal_block(const EqualBlockCov& cov,
                                   EtaFactorization method) {
  if (method == EtaFactorization::IterativeBlock)
    return block_cholesky_equal(cov);
  return cholesky(assemble_equal_block(cov), {}, "eta posterior covariance");
}

}  // namespace

GaussianPosterior posterior_eta_regular(const HyperParams& theta,
                                        const RegularDataset& data,
                                        const Eigen::VectorXd& t_pred,
                                        EtaFactorization method) {
  if (t_pred.size() == 0) throw InvalidInput("posterior: empty t_pred");
  const int n = static_cast<int>(data.n_functions());
  const Eigen::Index j_p = t_pred.size();
  const RegularCovBlocks blocks = regular_cov_blocks(theta, data.t, n);
  const LowerTriangular l0 = cholesky(blocks.sigma0, {}, "Sigma0");

  const Eigen::MatrixXd k_e = gram(theta.eta_kernel, t_pred, data.t);
  const Eigen::MatrixXd k_ee = gram(theta.eta_kernel, t_pred, t_pred);
  const Eigen::MatrixXd ea = k_e * solve_spd(l0, data.y);  // J_p x n
  const Eigen::VectorXd r = ea.rowwise().sum();
  const Eigen::MatrixXd q = k_e * solve_spd(l0, k_e.transpose());

  GaussianPosterior post;
  post.t_pred = t_pred;
  post.mean.resize((n - 1) * j_p);
  for (int i = 0; i < n - 1; ++i)
    post.mean.segment(i * j_p, j_p) = (n * ea.col(i) - r) / (n - 1);

  const EtaBlocks vw = regular_eta_vw(k_ee, q, n);
  post.cov_chol = factor_equal_block(
      EqualBlockCov{n - 1, vw.v, vw.w}, method);

  post.represented_etas.resize(n - 1);
  std::iota(post.represented_etas.begin(), post.represented_etas.end(), 1);
  post.labels = make_labels(post.represented_etas, false, j_p);
  post.includes_mu = false;
  post.n_functions = n;
  return post;
}

GaussianPosterior posterior_joint_partial(const HyperParams& theta,
                                          const PartialDataset& data,
                                          const Eigen::VectorXd& t_pred,
                                          EtaFactorization method) {
  if (t_pred.size() == 0) throw InvalidInput("posterior: empty t_pred");
  const int n_a = static_cast<int>(data.n_regular());
  const int n_b = static_cast<int>(data.n_irregular());
  const int n = n_a + n_b;
  const Eigen::Index j_p = t_pred.size();
  const double inv = 1.0 / (n - 1);
  const double c1 = static_cast<double>(n) * inv;

  if (n_b == 0) {
    // Degenerate partial design: posterior independence holds, so the joint
    // is block diagonal over (eta', mu) with the regular-design moments.
    const RegularDataset reg(data.t_a, data.y_a);
    GaussianPosterior eta = posterior_eta_regular(theta, reg, t_pred, method);
    GaussianPosterior mu = posterior_mu_regular(theta, reg, t_pred);
    GaussianPosterior post;
    post.t_pred = t_pred;
    post.mean.resize(eta.mean.size() + j_p);
    post.mean << eta.mean, mu.mean;
    post.cov_chol = block_cholesky_extend(
        eta.cov_chol, Eigen::MatrixXd::Zero(j_p, eta.mean.size()),
        mu.covariance(), "joint posterior mu block");
    post.represented_etas = eta.represented_etas;
    post.includes_mu = true;
    post.n_functions = n;
    post.labels = make_labels(post.represented_etas, true, j_p);
    return post;
  }

  const PartialCovBlocks blocks = partial_cov_blocks(theta, data);
  const LowerTriangular l0 = cholesky(blocks.a0, {}, "A0");
  const LowerTriangular l1 = cholesky(blocks.a1, {}, "A1");
  const LowerTriangular ls = cholesky(blocks.s, {}, "S");

  const Eigen::VectorXd t_b = data.stacked_tb();
  const Eigen::MatrixXd k_ma = gram(theta.mu_kernel, t_pred, data.t_a);
  const Eigen::MatrixXd k_mb = gram(theta.mu_kernel, t_pred, t_b);
  const Eigen::MatrixXd k_mm = gram(theta.mu_kernel, t_pred, t_pred);
  const Eigen::MatrixXd e_a = gram(theta.eta_kernel, t_pred, data.t_a);
  const Eigen::MatrixXd e_b = gram(theta.eta_kernel, t_pred, t_b);
  const Eigen::MatrixXd k_ee = gram(theta.eta_kernel, t_pred, t_pred);

  // --- P1 y and P2 y (identical algebra to the likelihood path) ---
  const Eigen::VectorXd row_sums = data.y_a.rowwise().sum();
  const Eigen::VectorXd beta =
      solve_spd(l1, row_sums) - solve_spd(l0, row_sums);
  Eigen::MatrixXd ai_ya = solve_spd(l0, data.y_a);
  ai_ya.colwise() += beta / n_a;

  Eigen::VectorXd y_b(t_b.size());
  {
    Eigen::Index pos = 0;
    for (const auto& series : data.irregular) {
      y_b.segment(pos, series.y.size()) = series.y;
      pos += series.y.size();
    }
  }
  const Eigen::VectorXd ca_ya =
      blocks.cb.transpose() * solve_spd(l1, row_sums);
  const Eigen::VectorXd p2y = solve_spd(ls, (y_b - ca_ya).eval());
  Eigen::MatrixXd ma = ai_ya;  // unvec(P1 y), J_a x n_a
  const Eigen::VectorXd corr = solve_spd(l1, (blocks.cb * p2y).eval());
  ma.colwise() -= corr;
  const Eigen::VectorXd r_a = ma.rowwise().sum();

  // --- posterior means ---
  const Eigen::VectorXd mu_mean = k_ma * r_a + k_mb * p2y;

  const Eigen::MatrixXd ea_ma = e_a * ma;        // J_p x n_a
  const Eigen::VectorXd ea_ra = e_a * r_a;       // J_p
  const Eigen::VectorXd eb_p2 = e_b * p2y;       // J_p
  Eigen::MatrixXd eta_mean(j_p, n);              // all n functions
  for (int i = 0; i < n_a; ++i)
    eta_mean.col(i) = inv * (n * ea_ma.col(i) - ea_ra - eb_p2);
  // C^{eta_b, y_b}: row block i pairs eta_{n_a+i} with every irregular series.
  Eigen::MatrixXd c_byb(n_b * j_p, t_b.size());
  for (int i = 0; i < n_b; ++i)
    for (int k = 0; k < n_b; ++k) {
      const Eigen::Index ok = blocks.b_offsets[k];
      const Eigen::Index jk = blocks.b_offsets[k + 1] - ok;
      c_byb.block(i * j_p, ok, j_p, jk) =
          (i == k ? 1.0 : -inv) * e_b.middleCols(ok, jk);
    }
  const Eigen::VectorXd cbyb_p2 = c_byb * p2y;  // n_b J_p
  for (int i = 0; i < n_b; ++i)
    eta_mean.col(n_a + i) = -inv * ea_ra + cbyb_p2.segment(i * j_p, j_p);

  // --- covariance building blocks ---
  const Eigen::MatrixXd q0 = e_a * solve_spd(l0, e_a.transpose());
  const Eigen::MatrixXd q1 = e_a * solve_spd(l1, e_a.transpose());
  const Eigen::MatrixXd f = solve_spd(l1, blocks.cb);   // A_1^{-1} C^b
  const Eigen::MatrixXd g = e_a * f;                    // J_p x sum(J_b)
  const Eigen::MatrixXd sg = solve_spd(ls, g.transpose());
  const Eigen::MatrixXd seb = solve_spd(ls, e_b.transpose());
  const Eigen::MatrixXd r_mat = g * sg;
  const Eigen::MatrixXd t_mat = g * seb;
  const Eigen::MatrixXd u_mat = e_b * seb;
  const Eigen::MatrixXd gb = c_byb * sg;   // n_b J_p x J_p
  const Eigen::MatrixXd ub = c_byb * seb;  // n_b J_p x J_p
  const Eigen::MatrixXd z5 = c_byb * solve_spd(ls, c_byb.transpose());

  const double inv2 = inv * inv;
  // Regular-regular part: equal diagonal and off-diagonal blocks.
  const Eigen::MatrixXd v_minus_w = c1 * (k_ee - c1 * q0);
  Eigen::MatrixXd w = -inv * k_ee + (double(n) * n / n_a) * inv2 * q0 -
                      (double(n_b) * n_b / n_a) * inv2 * q1 -
                      (double(n_b) * n_b) * inv2 * r_mat -
                      n_b * inv2 * (t_mat + t_mat.transpose()) - inv2 * u_mat;
  w = 0.5 * (w + w.transpose());
  const Eigen::MatrixXd v = v_minus_w + w;

  // Regular-irregular column block (identical for every regular function).
  const Eigen::MatrixXd cross_common =
      -inv * k_ee + n_b * inv2 * q1 + (double(n_a) * n_b) * inv2 * r_mat +
      n_a * inv2 * t_mat;
  Eigen::MatrixXd z_col(n_b * j_p, j_p);  // rows: irregular i, vs any regular
  for (int i = 0; i < n_b; ++i)
    z_col.middleRows(i * j_p, j_p) = cross_common +
                                     (double(n_b) * inv) * gb.middleRows(i * j_p, j_p) +
                                     inv * ub.middleRows(i * j_p, j_p);

  // Irregular-irregular blocks.
  auto sigma22_block = [&](int i, int k) {
    Eigen::MatrixXd blk = -inv * k_ee - n_a * inv2 * q1 -
                          (double(n_a) * n_a) * inv2 * r_mat -
                          (n_a * inv) * (gb.middleRows(k * j_p, j_p).transpose() +
                                         gb.middleRows(i * j_p, j_p)) -
                          z5.block(i * j_p, k * j_p, j_p, j_p);
    if (i == k) blk += c1 * k_ee;
    return blk;
  };

  // mu posterior covariance.
  const Eigen::MatrixXd x1m = solve_spd(l1, k_ma.transpose());
  const Eigen::MatrixXd hm = k_ma * f;  // K_mu(t~, t_a) A_1^{-1} C^b
  const Eigen::MatrixXd shm = solve_spd(ls, hm.transpose());
  const Eigen::MatrixXd skmb = solve_spd(ls, k_mb.transpose());
  Eigen::MatrixXd mu_cov = k_mm - n_a * (k_ma * x1m) -
                           (double(n_a) * n_a) * (hm * shm) +
                           n_a * (hm * skmb) + n_a * (k_mb * shm) -
                           k_mb * skmb;
  mu_cov = 0.5 * (mu_cov + mu_cov.transpose());

  // Cross-covariance of mu with the etas: (-C^{mu,a} P_1 - C^{mu,b} P_2) C^{y,eta}.
  const Eigen::MatrixXd sf = solve_spd(ls, f.transpose());  // S^{-1}(C^b)^T A_1^{-1}
  const Eigen::MatrixXd omega_a =
      -x1m.transpose() - n_a * (hm * sf) + k_mb * sf;  // J_p x J_a
  const Eigen::MatrixXd omega_a_ea = omega_a * e_a.transpose();  // J_p x J_p
  const Eigen::MatrixXd omega_b_eb =
      n_a * (hm * seb) - k_mb * seb;                // omega_b K_eta(t_b, t~)
  const Eigen::MatrixXd omega_b_cbyb =
      (n_a * (c_byb * shm) - c_byb * skmb).transpose();  // J_p x n_b J_p

  // mu-eta cross block per function.
  const Eigen::MatrixXd cross_mu_eta_reg =
      (double(n_b) * inv) * omega_a_ea - inv * omega_b_eb;  // any regular i
  auto cross_mu_eta_irr = [&](int i) {
    return (-n_a * inv) * omega_a_ea +
           omega_b_cbyb.middleCols(i * j_p, j_p);
  };

  // --- assemble the explicit-coordinate posterior (eta_1..eta_{n-1}, mu) ---
  const int e_irr = n_b - 1;  // eta_n is the last irregular function
  const Eigen::Index eta_dim = (n_a + e_irr) * j_p;

  GaussianPosterior post;
  post.t_pred = t_pred;
  post.mean.resize(eta_dim + j_p);
  for (int i = 0; i < n_a + e_irr; ++i)
    post.mean.segment(i * j_p, j_p) = eta_mean.col(i);
  post.mean.tail(j_p) = mu_mean;

  if (method == EtaFactorization::IterativeBlock) {
    LowerTriangular l_reg =
        block_cholesky_equal(EqualBlockCov{n_a, v, w});
    LowerTriangular l_eta = l_reg;
    if (e_irr > 0) {
      Eigen::MatrixXd c2(e_irr * j_p, n_a * j_p);
      for (int i = 0; i < e_irr; ++i)
        for (int k = 0; k < n_a; ++k)
          c2.block(i * j_p, k * j_p, j_p, j_p) = z_col.middleRows(i * j_p, j_p);
      Eigen::MatrixXd b2(e_irr * j_p, e_irr * j_p);
      for (int i = 0; i < e_irr; ++i)
        for (int k = 0; k < e_irr; ++k)
          b2.block(i * j_p, k * j_p, j_p, j_p) = sigma22_block(i, k);
      b2 = 0.5 * (b2 + b2.transpose());
      l_eta = block_cholesky_extend(l_reg, c2, b2,
                                    "joint posterior irregular block");
    }
    Eigen::MatrixXd c3(j_p, eta_dim);
    for (int k = 0; k < n_a; ++k) c3.middleCols(k * j_p, j_p) = cross_mu_eta_reg;
    for (int i = 0; i < e_irr; ++i)
      c3.middleCols((n_a + i) * j_p, j_p) = cross_mu_eta_irr(i);
    post.cov_chol = block_cholesky_extend(l_eta, c3, mu_cov,
                                          "joint posterior mu block");
  } else {
    // Dense assembly of the same blocks, single large factorization.
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(eta_dim + j_p, eta_dim + j_p);
    for (int rblk = 0; rblk < n_a; ++rblk)
      for (int cblk = 0; cblk < n_a; ++cblk)
        cov.block(rblk * j_p, cblk * j_p, j_p, j_p) = (rblk == cblk) ? v : w;
    for (int i = 0; i < e_irr; ++i)
      for (int k = 0; k < n_a; ++k) {
        cov.block((n_a + i) * j_p, k * j_p, j_p, j_p) =
            z_col.middleRows(i * j_p, j_p);
        cov.block(k * j_p, (n_a + i) * j_p, j_p, j_p) =
            z_col.middleRows(i * j_p, j_p).transpose();
      }
    for (int i = 0; i < e_irr; ++i)
      for (int k = 0; k < e_irr; ++k)
        cov.block((n_a + i) * j_p, (n_a + k) * j_p, j_p, j_p) =
            sigma22_block(i, k);
    for (int k = 0; k < n_a; ++k) {
      cov.block(eta_dim, k * j_p, j_p, j_p) = cross_mu_eta_reg;
      cov.block(k * j_p, eta_dim, j_p, j_p) = cross_mu_eta_reg.transpose();
    }
    for (int i = 0; i < e_irr; ++i) {
      cov.block(eta_dim, (n_a + i) * j_p, j_p, j_p) = cross_mu_eta_irr(i);
      cov.block((n_a + i) * j_p, eta_dim, j_p, j_p) =
          cross_mu_eta_irr(i).transpose();
    }
    cov.block(eta_dim, eta_dim, j_p, j_p) = mu_cov;
    cov = 0.5 * (cov + cov.transpose());
    post.cov_chol = cholesky(cov, {}, "joint posterior covariance");
  }

  post.represented_etas.resize(n - 1);
  std::iota(post.represented_etas.begin(), post.represented_etas.end(), 1);
  post.includes_mu = true;
  post.n_functions = n;
  post.labels = make_labels(post.represented_etas, true, j_p);
  return post;
}

Eigen::MatrixXd PosteriorDraws::f(int function_index) const {
  if (function_index < 1 || function_index > n_functions)
    throw InvalidInput("f: function index out of range");
  return mu + eta[function_index - 1];
}

namespace {

void check_full_eta_set(const GaussianPosterior& post) {
  const int n = post.n_functions;
  if (static_cast<int>(post.represented_etas.size()) != n - 1)
    throw InvalidInput("sample_f: posterior must represent eta_1..eta_{n-1}");
  for (int i = 0; i < n - 1; ++i)
    if (post.represented_etas[i] != i + 1)
      throw InvalidInput("sample_f: posterior must represent eta_1..eta_{n-1}");
}

PosteriorDraws init_draws(const Eigen::VectorXd& t_pred, int n, int n_draws) {
  PosteriorDraws draws;
  draws.t_pred = t_pred;
  draws.n_functions = n;
  draws.mu.resize(n_draws, t_pred.size());
  draws.eta.assign(n, Eigen::MatrixXd(n_draws, t_pred.size()));
  return draws;
}

// Fills eta_1..eta_{n-1} from the coordinate vector and reconstructs eta_n
// as the negated sum.
void scatter_etas(PosteriorDraws& draws, const Eigen::VectorXd& x, int draw,
                  Eigen::Index j_p, int n) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(j_p);
  for (int i = 0; i < n - 1; ++i) {
    const Eigen::VectorXd etai = x.segment(i * j_p, j_p);
    draws.eta[i].row(draw) = etai.transpose();
    total += etai;
  }
  draws.eta[n - 1].row(draw) = -total.transpose();
}

}  // namespace

PosteriorDraws sample_f(const GaussianPosterior& joint, int n_draws,
                        std::uint64_t seed) {
  if (n_draws < 1) throw InvalidInput("sample_f: n_draws >= 1 required");
  if (!joint.includes_mu)
    throw InvalidInput("sample_f: joint posterior must include mu");
  check_full_eta_set(joint);

  const Eigen::Index j_p = joint.t_pred.size();
  const int n = joint.n_functions;
  Rng rng(seed);
  PosteriorDraws draws = init_draws(joint.t_pred, n, n_draws);
  const auto& l = joint.cov_chol.matrix();
  for (int d = 0; d < n_draws; ++d) {
    const Eigen::VectorXd z = rng.normal_vector(joint.mean.size());
    const Eigen::VectorXd x =
        joint.mean + l.triangularView<Eigen::Lower>() * z;
    scatter_etas(draws, x, d, j_p, n);
    draws.mu.row(d) = x.tail(j_p).transpose();
  }
  return draws;
}

PosteriorDraws sample_f(const GaussianPosterior& mu_posterior,
                        const GaussianPosterior& eta_posterior, int n_draws,
                        std::uint64_t seed) {
  if (n_draws < 1) throw InvalidInput("sample_f: n_draws >= 1 required");
  if (!mu_posterior.includes_mu)
    throw InvalidInput("sample_f: first posterior must include mu");
  check_full_eta_set(eta_posterior);
  if (mu_posterior.t_pred != eta_posterior.t_pred)
    throw InvalidInput("sample_f: posteriors use different prediction grids");

  const Eigen::Index j_p = mu_posterior.t_pred.size();
  const int n = eta_posterior.n_functions;
  Rng rng(seed);
  PosteriorDraws draws = init_draws(mu_posterior.t_pred, n, n_draws);
  const auto& l_mu = mu_posterior.cov_chol.matrix();
  const auto& l_eta = eta_posterior.cov_chol.matrix();
  for (int d = 0; d < n_draws; ++d) {
    const Eigen::VectorXd z_mu = rng.normal_vector(j_p);
    draws.mu.row(d) = (mu_posterior.mean.tail(j_p) +
                       l_mu.triangularView<Eigen::Lower>() * z_mu)
                          .transpose();
    const Eigen::VectorXd z_eta = rng.normal_vector(eta_posterior.mean.size());
    const Eigen::VectorXd x =
        eta_posterior.mean + l_eta.triangularView<Eigen::Lower>() * z_eta;
    scatter_etas(draws, x, d, j_p, n);
  }
  return draws;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InvalidInput("normal_quantile: p must be in (0, 1)");
  // Acklam's rational approximation, then one Halley refinement via erfc.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (std::abs(x) > 8.0) return x;  // refinement would overflow; 1e-9 is enough
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

CredibleBand credible_band(const GaussianPosterior& posterior, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw InvalidInput("credible_band: level must be in (0, 1)");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const auto& l = posterior.cov_chol.matrix();
  CredibleBand band;
  band.lower.resize(posterior.mean.size());
  band.upper.resize(posterior.mean.size());
  for (Eigen::Index k = 0; k < posterior.mean.size(); ++k) {
    const double sd = l.row(k).head(k + 1).norm();
    band.lower(k) = posterior.mean(k) - z * sd;
    band.upper(k) = posterior.mean(k) + z * sd;
  }
  return band;
}

CredibleBand credible_band(const Eigen::MatrixXd& draws, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw InvalidInput("credible_band: level must be in (0, 1)");
  if (draws.rows() < 1) throw InvalidInput("credible_band: no draws");
  auto quantile = [](std::vector<double>& col, double q) {
    const double pos = q * (col.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, col.size() - 1);
    std::nth_element(col.begin(), col.begin() + lo, col.end());
    const double vlo = col[lo];
    std::nth_element(col.begin(), col.begin() + hi, col.end());
    return vlo + (pos - lo) * (col[hi] - vlo);
  };
  CredibleBand band;
  band.lower.resize(draws.cols());
  band.upper.resize(draws.cols());
  for (Eigen::Index k = 0; k < draws.cols(); ++k) {
    std::vector<double> col(draws.col(k).data(),
                            draws.col(k).data() + draws.rows());
    band.lower(k) = quantile(col, 0.5 * (1.0 - level));
    band.upper(k) = quantile(col, 0.5 * (1.0 + level));
  }
  return band;
}

}  // namespace mlgp
