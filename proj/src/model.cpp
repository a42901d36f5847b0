#include "mlgp/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mlgp/errors.hpp"
#include "mlgp/linalg.hpp"
#include "mlgp/rng.hpp"

namespace mlgp {

namespace {

// Sorts grid points ascending, applies the same permutation to the rows of
// values, and rejects duplicates within the grid.
void sort_grid(Eigen::VectorXd& t, Eigen::MatrixXd& values, const char* what) {
  const Eigen::Index j = t.size();
  std::vector<Eigen::Index> order(j);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return t(a) < t(b); });
  Eigen::VectorXd ts(j);
  Eigen::MatrixXd vs(values.rows(), values.cols());
  for (Eigen::Index i = 0; i < j; ++i) {
    ts(i) = t(order[i]);
    vs.row(i) = values.row(order[i]);
  }
  for (Eigen::Index i = 1; i < j; ++i)
    if (!(ts(i) > ts(i - 1)))
      throw InvalidInput(std::string(what) + ": duplicate time points within one grid");
  t = std::move(ts);
  values = std::move(vs);
}

}  // namespace

RegularDataset::RegularDataset(Eigen::VectorXd t_in, Eigen::MatrixXd y_in)
    : t(std::move(t_in)), y(std::move(y_in)) {
  if (t.size() < 1) throw InvalidInput("RegularDataset: empty grid");
  if (y.rows() != t.size())
    throw InvalidInput("RegularDataset: y must have one row per time point");
  if (y.cols() < 2)
    throw InvalidInput(
        "RegularDataset: n >= 2 functions required (a single function makes "
        "the zero-sum deviations degenerate)");
  sort_grid(t, y, "RegularDataset");
}

Eigen::VectorXd RegularDataset::stacked_y() const { return vec(y); }

PartialDataset::PartialDataset(Eigen::VectorXd t_a_in, Eigen::MatrixXd y_a_in,
                               std::vector<IrregularSeries> irregular_in)
    : t_a(std::move(t_a_in)), y_a(std::move(y_a_in)),
      irregular(std::move(irregular_in)) {
  if (t_a.size() < 1) throw InvalidInput("PartialDataset: empty shared grid");
  if (y_a.rows() != t_a.size())
    throw InvalidInput("PartialDataset: y_a must have one row per time point");
  if (y_a.cols() < 1)
    throw InvalidInput("PartialDataset: n_a >= 1 required");
  if (n_functions() < 2)
    throw InvalidInput("PartialDataset: n >= 2 functions required");
  sort_grid(t_a, y_a, "PartialDataset");
  for (auto& series : irregular) {
    if (series.t.size() < 1)
      throw InvalidInput("PartialDataset: empty irregular grid");
    if (series.y.size() != series.t.size())
      throw InvalidInput("PartialDataset: irregular grid/value length mismatch");
    Eigen::MatrixXd y1 = series.y;
    sort_grid(series.t, y1, "PartialDataset");
    series.y = y1;
  }
}

Eigen::Index PartialDataset::n_obs() const {
  Eigen::Index n = t_a.size() * n_regular();
  for (const auto& series : irregular) n += series.t.size();
  return n;
}

Eigen::VectorXd PartialDataset::stacked_y() const {
  Eigen::VectorXd out(n_obs());
  Eigen::Index pos = t_a.size() * n_regular();
  out.head(pos) = vec(y_a);
  for (const auto& series : irregular) {
    out.segment(pos, series.y.size()) = series.y;
    pos += series.y.size();
  }
  return out;
}

Eigen::VectorXd PartialDataset::stacked_tb() const {
  Eigen::Index total = 0;
  for (const auto& series : irregular) total += series.t.size();
  Eigen::VectorXd out(total);
  Eigen::Index pos = 0;
  for (const auto& series : irregular) {
    out.segment(pos, series.t.size()) = series.t;
    pos += series.t.size();
  }
  return out;
}

Eigen::MatrixXd xi_matrix(int n) {
  if (n < 2) throw InvalidInput("xi_matrix: n >= 2 required");
  Eigen::MatrixXd xi =
      Eigen::MatrixXd::Constant(n, n, -1.0 / (n - 1));
  xi.diagonal().setOnes();
  return xi;
}

Eigen::MatrixXd omega_matrix(int n) {
  if (n < 2) throw InvalidInput("omega_matrix: n >= 2 required");
  const double off = -1.0 / std::sqrt(static_cast<double>(n) * (n - 1));
  Eigen::MatrixXd omega = Eigen::MatrixXd::Constant(n, n, off);
  omega.diagonal().setConstant(std::sqrt((n - 1.0) / n));
  return omega;
}

namespace {

// chol(K(grid, grid)) z for a column or matrix of standard normals; a zero
// variance kernel yields exact zeros (z is still consumed by the caller, so
// the draw path does not depend on Theta).
Eigen::MatrixXd gp_transform(const KernelSpec& spec, const Eigen::VectorXd& grid,
                             const Eigen::MatrixXd& z) {
  if (spec.variance == 0.0) return Eigen::MatrixXd::Zero(z.rows(), z.cols());
  const LowerTriangular l = cholesky(gram(spec, grid, grid), {}, "prior gram");
  return l.matrix().triangularView<Eigen::Lower>() * z;
}

struct GridDraw {
  Eigen::VectorXd mu;   // on the union grid
  Eigen::MatrixXd eta;  // |union| x n
};

GridDraw draw_latents(const HyperParams& theta, const Eigen::VectorXd& grid,
                      int n, Rng& rng) {
  const Eigen::Index j = grid.size();
  GridDraw out;
  out.mu = gp_transform(theta.mu_kernel, grid, rng.normal_matrix(j, 1));
  // eta = chol(K_eta) Z Omega^T imposes the exact pointwise zero sum.
  const Eigen::MatrixXd z = rng.normal_matrix(j, n);
  out.eta = gp_transform(theta.eta_kernel, grid, z) *
            omega_matrix(n).transpose();
  return out;
}

}  // namespace

RegularSim simulate_regular(const HyperParams& theta, const Eigen::VectorXd& t,
                            int n, std::uint64_t seed) {
  if (n < 2) throw InvalidInput("simulate_regular: n >= 2 required");
  if (t.size() < 1) throw InvalidInput("simulate_regular: empty grid");
  Rng rng(seed);
  const GridDraw latents = draw_latents(theta, t, n, rng);
  Eigen::MatrixXd y = latents.eta;
  y.colwise() += latents.mu;
  y += theta.noise_sd * rng.normal_matrix(t.size(), n);
  return RegularSim{RegularDataset(t, y),
                    RegularTruth{latents.mu, latents.eta}};
}

PartialSim simulate_partial(const HyperParams& theta,
                            const Eigen::VectorXd& t_a, int n_a,
                            const std::vector<Eigen::VectorXd>& t_b,
                            std::uint64_t seed) {
  const int n = n_a + static_cast<int>(t_b.size());
  if (n_a < 1) throw InvalidInput("simulate_partial: n_a >= 1 required");
  if (n < 2) throw InvalidInput("simulate_partial: n >= 2 required");

  // Union grid: sorted distinct points of all grids.
  std::vector<double> points(t_a.data(), t_a.data() + t_a.size());
  for (const auto& g : t_b)
    points.insert(points.end(), g.data(), g.data() + g.size());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  Eigen::VectorXd t_union =
      Eigen::Map<const Eigen::VectorXd>(points.data(), points.size());

  auto locate = [&](double x) {
    const auto it = std::lower_bound(points.begin(), points.end(), x);
    return static_cast<Eigen::Index>(it - points.begin());
  };

  Rng rng(seed);
  const GridDraw latents = draw_latents(theta, t_union, n, rng);

  Eigen::MatrixXd y_a(t_a.size(), n_a);
  for (Eigen::Index r = 0; r < t_a.size(); ++r) {
    const Eigen::Index u = locate(t_a(r));
    for (int i = 0; i < n_a; ++i)
      y_a(r, i) = latents.mu(u) + latents.eta(u, i);
  }
  y_a += theta.noise_sd * rng.normal_matrix(t_a.size(), n_a);

  std::vector<IrregularSeries> irregular;
  irregular.reserve(t_b.size());
  for (std::size_t k = 0; k < t_b.size(); ++k) {
    const int fn = n_a + static_cast<int>(k);
    Eigen::VectorXd yk(t_b[k].size());
    for (Eigen::Index r = 0; r < t_b[k].size(); ++r) {
      const Eigen::Index u = locate(t_b[k](r));
      yk(r) = latents.mu(u) + latents.eta(u, fn);
    }
    yk += theta.noise_sd * rng.normal_matrix(t_b[k].size(), 1);
    irregular.push_back(IrregularSeries{t_b[k], yk});
  }

  return PartialSim{PartialDataset(t_a, y_a, std::move(irregular)),
                    PartialTruth{t_union, latents.mu, latents.eta}};
}

RegularCovBlocks regular_cov_blocks(const HyperParams& theta,
                                    const Eigen::VectorXd& t, int n) {
  if (n < 2) throw InvalidInput("regular_cov_blocks: n >= 2 required");
  const Eigen::Index j = t.size();
  const double ratio = static_cast<double>(n) / (n - 1);
  const double s2 = theta.noise_sd * theta.noise_sd;
  RegularCovBlocks blocks;
  blocks.sigma0 = ratio * gram(theta.eta_kernel, t, t);
  blocks.sigma0.diagonal().array() += s2;
  blocks.sigma1 = static_cast<double>(n) * gram(theta.mu_kernel, t, t);
  blocks.sigma1.diagonal().array() += s2;
  return blocks;
}

PartialCovBlocks partial_cov_blocks(const HyperParams& theta,
                                    const Eigen::VectorXd& t_a, int n_a,
                                    const std::vector<Eigen::VectorXd>& t_b) {
  const int n_b = static_cast<int>(t_b.size());
  const int n = n_a + n_b;
  if (n_a < 1) throw InvalidInput("partial_cov_blocks: n_a >= 1 required");
  if (n < 2) throw InvalidInput("partial_cov_blocks: n >= 2 required");
  const double s2 = theta.noise_sd * theta.noise_sd;
  const double inv_nm1 = 1.0 / (n - 1);

  PartialCovBlocks blocks;
  blocks.a0 = (n * inv_nm1) * gram(theta.eta_kernel, t_a, t_a);
  blocks.a0.diagonal().array() += s2;
  blocks.a1 = static_cast<double>(n_a) * gram(theta.mu_kernel, t_a, t_a) +
              (n_b * inv_nm1) * gram(theta.eta_kernel, t_a, t_a);
  blocks.a1.diagonal().array() += s2;

  Eigen::Index total_b = 0;
  blocks.b_offsets.assign(1, 0);
  for (const auto& g : t_b) {
    total_b += g.size();
    blocks.b_offsets.push_back(total_b);
  }
  blocks.cb.resize(t_a.size(), total_b);
  blocks.b.resize(total_b, total_b);
  for (int i = 0; i < n_b; ++i) {
    const Eigen::Index oi = blocks.b_offsets[i];
    const Eigen::Index ji = t_b[i].size();
    blocks.cb.block(0, oi, t_a.size(), ji) =
        gram(theta.mu_kernel, t_a, t_b[i]) -
        inv_nm1 * gram(theta.eta_kernel, t_a, t_b[i]);
    for (int k = 0; k < n_b; ++k) {
      const Eigen::Index ok = blocks.b_offsets[k];
      const Eigen::Index jk = t_b[k].size();
      Eigen::MatrixXd blk;
      if (i == k) {
        blk = gram(theta.mu_kernel, t_b[i], t_b[i]) +
              gram(theta.eta_kernel, t_b[i], t_b[i]);
        blk.diagonal().array() += s2;
      } else {
        blk = gram(theta.mu_kernel, t_b[i], t_b[k]) -
              inv_nm1 * gram(theta.eta_kernel, t_b[i], t_b[k]);
      }
      blocks.b.block(oi, ok, ji, jk) = blk;
    }
  }

  if (total_b > 0) {
    const LowerTriangular l1 = cholesky(blocks.a1, {}, "A1");
    blocks.jitter = l1.jitter();
    blocks.s = blocks.b -
               n_a * (blocks.cb.transpose() * solve_spd(l1, blocks.cb));
    blocks.s = 0.5 * (blocks.s + blocks.s.transpose());
  } else {
    blocks.s.resize(0, 0);
  }
  return blocks;
}

PartialCovBlocks partial_cov_blocks(const HyperParams& theta,
                                    const PartialDataset& data) {
  std::vector<Eigen::VectorXd> t_b;
  t_b.reserve(data.irregular.size());
  for (const auto& series : data.irregular) t_b.push_back(series.t);
  return partial_cov_blocks(theta, data.t_a, static_cast<int>(data.n_regular()),
                            t_b);
}

Eigen::MatrixXd naive_full_cov(const HyperParams& theta,
                               const RegularDataset& data) {
  const Eigen::Index j = data.n_points();
  const int n = static_cast<int>(data.n_functions());
  const double s2 = theta.noise_sd * theta.noise_sd;
  const Eigen::MatrixXd km = gram(theta.mu_kernel, data.t, data.t);
  const Eigen::MatrixXd ke = gram(theta.eta_kernel, data.t, data.t);
  Eigen::MatrixXd var_block = km + ke;
  var_block.diagonal().array() += s2;
  const Eigen::MatrixXd cov_block = km - ke / (n - 1);
  Eigen::MatrixXd full(n * j, n * j);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      full.block(r * j, c * j, j, j) = (r == c) ? var_block : cov_block;
  return full;
}

Eigen::MatrixXd naive_full_cov(const HyperParams& theta,
                               const PartialDataset& data) {
  const int n = static_cast<int>(data.n_functions());
  const double s2 = theta.noise_sd * theta.noise_sd;
  const double inv_nm1 = 1.0 / (n - 1);

  std::vector<const Eigen::VectorXd*> grids;
  for (Eigen::Index i = 0; i < data.n_regular(); ++i) grids.push_back(&data.t_a);
  for (const auto& series : data.irregular) grids.push_back(&series.t);

  std::vector<Eigen::Index> offsets(1, 0);
  for (const auto* g : grids) offsets.push_back(offsets.back() + g->size());

  Eigen::MatrixXd full(offsets.back(), offsets.back());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      Eigen::MatrixXd blk;
      if (r == c) {
        blk = gram(theta.mu_kernel, *grids[r], *grids[c]) +
              gram(theta.eta_kernel, *grids[r], *grids[c]);
        blk.diagonal().array() += s2;
      } else {
        blk = gram(theta.mu_kernel, *grids[r], *grids[c]) -
              inv_nm1 * gram(theta.eta_kernel, *grids[r], *grids[c]);
      }
      full.block(offsets[r], offsets[c], grids[r]->size(), grids[c]->size()) =
          blk;
    }
  }
  return full;
}

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_rows(std::ostream& out, int function_id, const Eigen::VectorXd& t,
                const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < t.size(); ++i)
    out << function_id << ',' << format_double(t(i)) << ','
        << format_double(y(i)) << '\n';
}

struct RawSeries {
  std::vector<double> t;
  std::vector<double> y;
};

std::map<int, RawSeries> read_series(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw InvalidInput("dataset CSV: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "function_id,t,y")
    throw InvalidInput("dataset CSV: expected header 'function_id,t,y'");
  std::map<int, RawSeries> series;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    int id;
    double t, y;
    try {
      std::getline(row, field, ',');
      id = std::stoi(field);
      std::getline(row, field, ',');
      t = std::stod(field);
      std::getline(row, field, ',');
      y = std::stod(field);
    } catch (const std::exception&) {
      throw InvalidInput("dataset CSV: malformed row at line " +
                         std::to_string(lineno));
    }
    series[id].t.push_back(t);
    series[id].y.push_back(y);
  }
  if (series.empty()) throw InvalidInput("dataset CSV: no data rows");
  return series;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

}  // namespace

void write_dataset_csv(std::ostream& out, const RegularDataset& data) {
  out << "function_id,t,y\n";
  for (Eigen::Index i = 0; i < data.n_functions(); ++i)
    write_rows(out, static_cast<int>(i) + 1, data.t, data.y.col(i));
}

void write_dataset_csv(std::ostream& out, const PartialDataset& data) {
  out << "function_id,t,y\n";
  for (Eigen::Index i = 0; i < data.n_regular(); ++i)
    write_rows(out, static_cast<int>(i) + 1, data.t_a, data.y_a.col(i));
  int id = static_cast<int>(data.n_regular()) + 1;
  for (const auto& series : data.irregular)
    write_rows(out, id++, series.t, series.y);
}

RegularDataset read_regular_csv(std::istream& in) {
  const auto series = read_series(in);
  const auto& first = series.begin()->second;
  Eigen::VectorXd t = to_vector(first.t);
  Eigen::MatrixXd y(t.size(), series.size());
  Eigen::Index col = 0;
  for (const auto& [id, s] : series) {
    if (to_vector(s.t) != t)
      throw InvalidInput(
          "regular dataset: function " + std::to_string(id) +
          " is not on the shared grid (declare the design as partial)");
    y.col(col++) = to_vector(s.y);
  }
  return RegularDataset(std::move(t), std::move(y));
}

PartialDataset read_partial_csv(std::istream& in,
                                const std::vector<int>& regular_ids) {
  if (regular_ids.empty())
    throw InvalidInput("partial dataset: regular_function_ids must be declared");
  auto series = read_series(in);
  std::vector<int> reg_sorted = regular_ids;
  std::sort(reg_sorted.begin(), reg_sorted.end());
  reg_sorted.erase(std::unique(reg_sorted.begin(), reg_sorted.end()),
                   reg_sorted.end());

  Eigen::VectorXd t_a;
  Eigen::MatrixXd y_a;
  Eigen::Index col = 0;
  for (int id : reg_sorted) {
    const auto it = series.find(id);
    if (it == series.end())
      throw InvalidInput("partial dataset: regular function id " +
                         std::to_string(id) + " not present in the file");
    if (col == 0) {
      t_a = to_vector(it->second.t);
      y_a.resize(t_a.size(), static_cast<Eigen::Index>(reg_sorted.size()));
    } else if (to_vector(it->second.t) != t_a) {
      throw InvalidInput("partial dataset: regular function id " +
                         std::to_string(id) + " is not on the shared grid");
    }
    y_a.col(col++) = to_vector(it->second.y);
  }

  std::vector<IrregularSeries> irregular;
  for (const auto& [id, s] : series) {
    if (std::binary_search(reg_sorted.begin(), reg_sorted.end(), id)) continue;
    irregular.push_back(IrregularSeries{to_vector(s.t), to_vector(s.y)});
  }
  return PartialDataset(std::move(t_a), std::move(y_a), std::move(irregular));
}

}  // namespace mlgp
