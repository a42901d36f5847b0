// Command-line front end: simulate, loglik, posterior, fit, bench.
//
// Every subcommand is driven by one JSON config file plus a few overriding
// flags (--backend, --seed, --out). Output files are reproducible byte for
// byte for a fixed config and seed; only the loglik JSON and the bench CSV
// carry wall-clock fields.
//
// Exit codes: 0 ok, 2 config/user error, 3 numerical failure.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numeric>
#include <optional>
#include <sstream>

#include "mlgp/bench.hpp"
#include "mlgp/errors.hpp"
#include "mlgp/inference.hpp"
#include "mlgp/likelihood.hpp"
#include "mlgp/model.hpp"
#include "mlgp/posterior.hpp"
#include "mlgp/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mlgp;

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file: " + path);
  json config;
  try {
    in >> config;
  } catch (const json::parse_error& e) {
    throw InvalidInput("config is not valid JSON: " + std::string(e.what()));
  }
  return config;
}

KernelSpec kernel_from_config(const json& k, const std::string& prefix) {
  const auto family = kernel_family_from_string(
      k.value(prefix + "_family", std::string("squared_exponential")));
  if (!k.contains(prefix + "_variance") || !k.contains(prefix + "_lengthscale"))
    throw InvalidInput("config kernel block needs " + prefix + "_variance and " +
                       prefix + "_lengthscale");
  return KernelSpec(family, k.at(prefix + "_variance").get<double>(),
                    k.at(prefix + "_lengthscale").get<double>());
}

HyperParams theta_from_config(const json& config) {
  if (!config.contains("kernel"))
    throw InvalidInput("config needs a 'kernel' block");
  const json& k = config.at("kernel");
  if (!k.contains("noise_sd"))
    throw InvalidInput("config kernel block needs noise_sd");
  return HyperParams(kernel_from_config(k, "mu"), kernel_from_config(k, "eta"),
                     k.at("noise_sd").get<double>());
}

Eigen::VectorXd grid_from_config(const json& spec, const char* what) {
  if (spec.is_array()) {
    std::vector<double> pts = spec.get<std::vector<double>>();
    if (pts.empty()) throw InvalidInput(std::string(what) + ": empty grid");
    return Eigen::Map<const Eigen::VectorXd>(pts.data(), pts.size());
  }
  if (!spec.contains("min") || !spec.contains("max") || !spec.contains("count"))
    throw InvalidInput(std::string(what) +
                       ": expected an array or {min, max, count}");
  const int count = spec.at("count").get<int>();
  const double lo = spec.at("min").get<double>();
  const double hi = spec.at("max").get<double>();
  if (count < 1) throw InvalidInput(std::string(what) + ": count >= 1");
  if (count == 1) return Eigen::VectorXd::Constant(1, lo);
  return Eigen::VectorXd::LinSpaced(count, lo, hi);
}

std::string design_of(const json& config) {
  const std::string design = config.value("design", std::string());
  if (design != "regular" && design != "partial")
    throw InvalidInput("config 'design' must be \"regular\" or \"partial\"");
  return design;
}

std::uint64_t seed_of(const json& config, std::optional<std::uint64_t> cli_seed) {
  if (cli_seed) return *cli_seed;
  return config.value("seed", std::uint64_t{0});
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw InvalidInput("cannot write output file: " + (dir / name).string());
  return out;
}

RegularDataset load_regular(const json& config) {
  const std::string path = config.value("data", std::string());
  if (path.empty()) throw InvalidInput("config needs 'data' (dataset CSV path)");
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open data file: " + path);
  return read_regular_csv(in);
}

PartialDataset load_partial(const json& config) {
  const std::string path = config.value("data", std::string());
  if (path.empty()) throw InvalidInput("config needs 'data' (dataset CSV path)");
  if (!config.contains("regular_function_ids"))
    throw InvalidInput(
        "partial design requires 'regular_function_ids' in the config (the "
        "design is declared, never inferred)");
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open data file: " + path);
  return read_partial_csv(in,
                          config.at("regular_function_ids").get<std::vector<int>>());
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const json& config, const fs::path& out_dir,
                 std::optional<std::uint64_t> cli_seed) {
  const HyperParams theta = theta_from_config(config);
  const std::uint64_t seed = seed_of(config, cli_seed);
  const std::string design = design_of(config);
  if (!config.contains("grid") && !config.contains("t"))
    throw InvalidInput("simulate: config needs 'grid' or 't'");
  const Eigen::VectorXd t = grid_from_config(
      config.contains("grid") ? config.at("grid") : config.at("t"), "grid");

  auto write_truth = [&](const Eigen::VectorXd& grid, const Eigen::VectorXd& mu,
                         const Eigen::MatrixXd& eta) {
    std::ofstream truth = open_out(out_dir, "truth.csv");
    truth << "target,t,value\n";
    for (Eigen::Index k = 0; k < grid.size(); ++k)
      truth << "mu," << format_double(grid(k)) << ',' << format_double(mu(k))
            << '\n';
    for (Eigen::Index i = 0; i < eta.cols(); ++i)
      for (Eigen::Index k = 0; k < grid.size(); ++k)
        truth << "eta" << (i + 1) << ',' << format_double(grid(k)) << ','
              << format_double(eta(k, i)) << '\n';
  };

  if (design == "regular") {
    const int n = config.value("n", 0);
    const RegularSim sim = simulate_regular(theta, t, n, seed);
    std::ofstream data = open_out(out_dir, "dataset.csv");
    write_dataset_csv(data, sim.data);
    write_truth(sim.data.t, sim.truth.mu, sim.truth.eta);
  } else {
    const int n_a = config.value("n_a", 0);
    std::vector<Eigen::VectorXd> t_b;
    if (config.contains("irregular")) {
      Rng grid_rng(Rng::derive(seed, 0xA1B2));
      const double lo = t.minCoeff(), hi = t.maxCoeff();
      for (const json& spec : config.at("irregular")) {
        if (spec.contains("t")) {
          t_b.push_back(grid_from_config(spec.at("t"), "irregular.t"));
        } else if (spec.contains("count")) {
          const int count = spec.at("count").get<int>();
          if (count < 1) throw InvalidInput("irregular.count >= 1");
          std::vector<double> pts(count);
          for (auto& p : pts) p = lo + (hi - lo) * grid_rng.uniform();
          std::sort(pts.begin(), pts.end());
          t_b.push_back(Eigen::Map<const Eigen::VectorXd>(pts.data(), count));
        } else {
          throw InvalidInput("irregular entries need 't' or 'count'");
        }
      }
    }
    const PartialSim sim = simulate_partial(theta, t, n_a, t_b, seed);
    std::ofstream data = open_out(out_dir, "dataset.csv");
    write_dataset_csv(data, sim.data);
    write_truth(sim.truth.t_union, sim.truth.mu, sim.truth.eta);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// loglik

int cmd_loglik(const json& config, const fs::path& out_dir,
               const std::string& backend_flag,
               std::optional<std::uint64_t> cli_seed) {
  (void)cli_seed;
  const HyperParams theta = theta_from_config(config);
  const std::string design = design_of(config);
  const std::string backend =
      backend_flag.empty() ? config.value("backend", std::string("efficient"))
                           : backend_flag;
  if (backend != "naive" && backend != "efficient")
    throw InvalidInput("loglik backend must be naive or efficient");

  LogLikResult result;
  const auto start = std::chrono::steady_clock::now();
  if (design == "regular") {
    const RegularDataset data = load_regular(config);
    result = backend == "naive" ? loglik_naive(theta, data)
                                : loglik_regular(theta, data);
  } else {
    const PartialDataset data = load_partial(config);
    result = backend == "naive" ? loglik_naive(theta, data)
                                : loglik_partial(theta, data);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  json out;
  out["value"] = result.value;
  out["logdet"] = result.logdet;
  out["quad_form"] = result.quad_form;
  out["jitter_used"] = result.jitter_used;
  out["backend"] = backend;
  out["seconds"] = seconds;
  std::cout << out.dump(2) << std::endl;
  std::ofstream file = open_out(out_dir, "loglik.json");
  file << out.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// posterior

// Mean and standard deviation of mu, every eta_i and every f_i, assembled
// from a joint posterior over (eta_1..eta_{n-1}, mu); eta_n is the negated
// sum, so its moments come from column sums of the covariance.
struct MarginalSummary {
  Eigen::VectorXd mu_mean, mu_sd;
  std::vector<Eigen::VectorXd> eta_mean, eta_sd, f_mean, f_sd;
};

MarginalSummary summarize_joint(const GaussianPosterior& joint) {
  const Eigen::Index j_p = joint.t_pred.size();
  const int n = joint.n_functions;
  const Eigen::MatrixXd cov = joint.covariance();
  const Eigen::Index mu_off = joint.mu_offset();

  MarginalSummary out;
  out.mu_mean = joint.mean.segment(mu_off, j_p);
  out.mu_sd = cov.diagonal().segment(mu_off, j_p).cwiseMax(0.0).cwiseSqrt();
  out.eta_mean.resize(n);
  out.eta_sd.assign(n, Eigen::VectorXd(j_p));
  out.f_mean.resize(n);
  out.f_sd.assign(n, Eigen::VectorXd(j_p));

  Eigen::VectorXd etan_mean = Eigen::VectorXd::Zero(j_p);
  for (int i = 0; i < n - 1; ++i) {
    const Eigen::Index off = joint.eta_offset(i + 1);
    out.eta_mean[i] = joint.mean.segment(off, j_p);
    etan_mean -= out.eta_mean[i];
    for (Eigen::Index k = 0; k < j_p; ++k) {
      const double ve = cov(off + k, off + k);
      const double cme = cov(mu_off + k, off + k);
      const double vm = cov(mu_off + k, mu_off + k);
      out.eta_sd[i](k) = std::sqrt(std::max(0.0, ve));
      out.f_sd[i](k) = std::sqrt(std::max(0.0, vm + ve + 2.0 * cme));
    }
    out.f_mean[i] = out.mu_mean + out.eta_mean[i];
  }
  // eta_n = -sum of the explicit etas.
  out.eta_mean[n - 1] = etan_mean;
  out.f_mean[n - 1] = out.mu_mean + etan_mean;
  for (Eigen::Index k = 0; k < j_p; ++k) {
    double ve = 0.0, cme = 0.0;
    for (int a = 0; a < n - 1; ++a) {
      const Eigen::Index oa = joint.eta_offset(a + 1) + k;
      cme -= cov(mu_off + k, oa);
      for (int b = 0; b < n - 1; ++b)
        ve += cov(oa, joint.eta_offset(b + 1) + k);
    }
    const double vm = cov(mu_off + k, mu_off + k);
    out.eta_sd[n - 1](k) = std::sqrt(std::max(0.0, ve));
    out.f_sd[n - 1](k) = std::sqrt(std::max(0.0, vm + ve + 2.0 * cme));
  }
  return out;
}

void write_draws_csv(std::ostream& out, const PosteriorDraws& draws) {
  out << "draw_id,target,t,value\n";
  const Eigen::Index j_p = draws.t_pred.size();
  for (Eigen::Index d = 0; d < draws.mu.rows(); ++d) {
    for (Eigen::Index k = 0; k < j_p; ++k)
      out << (d + 1) << ",mu," << format_double(draws.t_pred(k)) << ','
          << format_double(draws.mu(d, k)) << '\n';
    for (int i = 0; i < draws.n_functions; ++i)
      for (Eigen::Index k = 0; k < j_p; ++k)
        out << (d + 1) << ",eta" << (i + 1) << ','
            << format_double(draws.t_pred(k)) << ','
            << format_double(draws.eta[i](d, k)) << '\n';
    for (int i = 0; i < draws.n_functions; ++i)
      for (Eigen::Index k = 0; k < j_p; ++k)
        out << (d + 1) << ",f" << (i + 1) << ','
            << format_double(draws.t_pred(k)) << ','
            << format_double(draws.mu(d, k) + draws.eta[i](d, k)) << '\n';
  }
}

void write_bands_csv(std::ostream& out, const Eigen::VectorXd& t_pred,
                     const MarginalSummary& marg, double level) {
  const double z = normal_quantile(0.5 * (1.0 + level));
  out << "target,t,lower,upper\n";
  auto rows = [&](const std::string& name, const Eigen::VectorXd& mean,
                  const Eigen::VectorXd& sd) {
    for (Eigen::Index k = 0; k < t_pred.size(); ++k)
      out << name << ',' << format_double(t_pred(k)) << ','
          << format_double(mean(k) - z * sd(k)) << ','
          << format_double(mean(k) + z * sd(k)) << '\n';
  };
  rows("mu", marg.mu_mean, marg.mu_sd);
  for (std::size_t i = 0; i < marg.eta_mean.size(); ++i)
    rows("eta" + std::to_string(i + 1), marg.eta_mean[i], marg.eta_sd[i]);
  for (std::size_t i = 0; i < marg.f_mean.size(); ++i)
    rows("f" + std::to_string(i + 1), marg.f_mean[i], marg.f_sd[i]);
}

PosteriorTargets all_targets(int n) {
  PosteriorTargets targets;
  targets.eta_indices.resize(n - 1);
  std::iota(targets.eta_indices.begin(), targets.eta_indices.end(), 1);
  targets.include_mu = true;
  return targets;
}

int cmd_posterior(const json& config, const fs::path& out_dir,
                  const std::string& backend_flag,
                  std::optional<std::uint64_t> cli_seed) {
  const HyperParams theta = theta_from_config(config);
  const std::string design = design_of(config);
  const std::uint64_t seed = seed_of(config, cli_seed);
  const std::string backend =
      backend_flag.empty() ? config.value("backend", std::string("efficient"))
                           : backend_flag;
  if (backend != "naive" && backend != "efficient" && backend != "intermediary")
    throw InvalidInput("posterior backend must be naive, efficient or intermediary");
  if (!config.contains("t_pred"))
    throw InvalidInput("posterior: config needs 't_pred'");
  const Eigen::VectorXd t_pred = grid_from_config(config.at("t_pred"), "t_pred");
  const int n_draws = config.value("n_draws", 100);
  const double level = config.value("level", 0.9);

  const EtaFactorization method = backend == "intermediary"
                                      ? EtaFactorization::Dense
                                      : EtaFactorization::IterativeBlock;

  GaussianPosterior joint;
  PosteriorDraws draws;
  if (design == "regular") {
    const RegularDataset data = load_regular(config);
    const int n = static_cast<int>(data.n_functions());
    if (backend == "naive") {
      joint = posterior_naive(theta, data, t_pred, all_targets(n));
      draws = sample_f(joint, n_draws, seed);
    } else {
      const GaussianPosterior mu_post = posterior_mu_regular(theta, data, t_pred);
      const GaussianPosterior eta_post =
          posterior_eta_regular(theta, data, t_pred, method);
      draws = sample_f(mu_post, eta_post, n_draws, seed);
      // Independent blocks; assemble the joint factor for the band summary.
      joint = eta_post;
      joint.includes_mu = true;
      joint.mean.conservativeResize(eta_post.mean.size() + t_pred.size());
      joint.mean.tail(t_pred.size()) = mu_post.mean;
      joint.cov_chol = block_cholesky_extend(
          eta_post.cov_chol,
          Eigen::MatrixXd::Zero(t_pred.size(), eta_post.mean.size()),
          mu_post.covariance(), "joint band factor");
      joint.labels = eta_post.labels;
    }
  } else {
    const PartialDataset data = load_partial(config);
    const int n = static_cast<int>(data.n_functions());
    if (backend == "naive") {
      joint = posterior_naive(theta, data, t_pred, all_targets(n));
      draws = sample_f(joint, n_draws, seed);
    } else {
      joint = posterior_joint_partial(theta, data, t_pred, method);
      draws = sample_f(joint, n_draws, seed);
    }
  }

  std::ofstream draws_file = open_out(out_dir, "draws.csv");
  write_draws_csv(draws_file, draws);
  std::ofstream bands_file = open_out(out_dir, "bands.csv");
  write_bands_csv(bands_file, t_pred, summarize_joint(joint), level);
  return 0;
}

// ---------------------------------------------------------------------------
// fit

LogNormalPrior prior_entry(const json& prior, const char* name) {
  if (!prior.contains(name)) return LogNormalPrior{};
  const json& p = prior.at(name);
  LogNormalPrior out;
  out.log_mean = p.value("log_mean", 0.0);
  out.log_sd = p.value("log_sd", 1.0);
  if (!(out.log_sd > 0)) throw InvalidInput("prior log_sd must be > 0");
  return out;
}

int cmd_fit(const json& config, const fs::path& out_dir,
            std::optional<std::uint64_t> cli_seed) {
  const std::string design = design_of(config);
  const json prior_block = config.value("prior", json::object());
  PriorSpec prior;
  prior.mu_variance = prior_entry(prior_block, "mu_variance");
  prior.mu_lengthscale = prior_entry(prior_block, "mu_lengthscale");
  prior.eta_variance = prior_entry(prior_block, "eta_variance");
  prior.eta_lengthscale = prior_entry(prior_block, "eta_lengthscale");
  prior.noise_sd = prior_entry(prior_block, "noise_sd");

  RwmConfig rwm;
  rwm.n_warmup = config.value("n_warmup", 1000);
  rwm.n_keep = config.value("n_keep", 1000);
  rwm.seed = seed_of(config, cli_seed);
  if (config.contains("step_sizes")) {
    const json& s = config.at("step_sizes");
    if (s.is_number()) {
      rwm.step_sizes.fill(s.get<double>());
    } else {
      const auto v = s.get<std::vector<double>>();
      if (v.size() != kNumParams)
        throw InvalidInput("step_sizes must be a scalar or 5 values");
      std::copy(v.begin(), v.end(), rwm.step_sizes.begin());
    }
  }
  if (config.contains("kernel")) {
    rwm.mu_family = kernel_family_from_string(config.at("kernel").value(
        "mu_family", std::string("squared_exponential")));
    rwm.eta_family = kernel_family_from_string(config.at("kernel").value(
        "eta_family", std::string("squared_exponential")));
  }
  if (!config.contains("t_pred"))
    throw InvalidInput("fit: config needs 't_pred'");
  const Eigen::VectorXd t_pred = grid_from_config(config.at("t_pred"), "t_pred");

  FitPredictResult result;
  if (design == "regular")
    result = fit_and_predict(load_regular(config), prior, t_pred, rwm);
  else
    result = fit_and_predict(load_partial(config), prior, t_pred, rwm);

  std::ofstream chain_file = open_out(out_dir, "chain.csv");
  chain_file << "sample,mu_variance,mu_lengthscale,eta_variance,"
                "eta_lengthscale,noise_sd,log_post\n";
  for (std::size_t k = 0; k < result.chain.samples.size(); ++k) {
    const Eigen::VectorXd v = theta_to_vector(result.chain.samples[k]);
    chain_file << (k + 1);
    for (int i = 0; i < kNumParams; ++i)
      chain_file << ',' << format_double(v(i));
    chain_file << ',' << format_double(result.chain.log_posts[k]) << '\n';
  }

  std::ofstream draws_file = open_out(out_dir, "draws.csv");
  write_draws_csv(draws_file, result.draws);

  // Convenience diagnostics on stdout; files stay timing- and diagnostic-free.
  std::cout << "acceptance_rate=" << format_double(result.chain.acceptance_rate)
            << "\nskipped_samples=" << result.n_skipped << '\n';
  const char* names[kNumParams] = {"mu_variance", "mu_lengthscale",
                                   "eta_variance", "eta_lengthscale",
                                   "noise_sd"};
  const int kept = static_cast<int>(result.chain.samples.size());
  for (int i = 0; i < kNumParams; ++i) {
    Eigen::VectorXd param(kept);
    for (int k = 0; k < kept; ++k)
      param(k) = theta_to_vector(result.chain.samples[k])(i);
    std::cout << "split_rhat_" << names[i] << '='
              << format_double(split_rhat(param)) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench(const json& config, const fs::path& out_dir,
              std::optional<std::uint64_t> cli_seed) {
  BenchPlan plan;
  plan.scenario = scenario_from_string(config.value("scenario", std::string("loglik")));
  plan.design = design_from_string(design_of(config));
  plan.replicates = config.value("replicates", 5);
  plan.seed = seed_of(config, cli_seed);
  plan.baseline_budget_seconds = config.value("baseline_budget_seconds", 120.0);
  plan.fit_warmup = config.value("fit_warmup", 100);
  plan.fit_keep = config.value("fit_keep", 100);
  if (config.contains("kernel")) plan.theta = theta_from_config(config);

  if (!config.contains("grid") || !config.at("grid").is_array() ||
      config.at("grid").empty())
    throw InvalidInput("bench: config needs a nonempty 'grid' array");
  for (const json& c : config.at("grid")) {
    BenchCell cell;
    if (c.contains("n")) {
      cell.n_a = c.at("n").get<int>();
      cell.n_b = 0;
    } else {
      cell.n_a = c.value("n_a", 0);
      cell.n_b = c.value("n_b", 0);
    }
    cell.J = c.value("J", 0);
    cell.J_p = c.value("J_p", cell.J);
    if (cell.n() < 2 || cell.J < 1)
      throw InvalidInput("bench: every cell needs n >= 2 and J >= 1");
    plan.grid.push_back(cell);
  }
  const auto backend_names = config.value(
      "backends", std::vector<std::string>{"baseline", "efficient"});
  for (const auto& name : backend_names)
    plan.backends.push_back(backend_from_string(name));

  const std::vector<BenchRecord> records = run_bench(plan);
  std::ofstream csv = open_out(out_dir, "bench.csv");
  write_bench_csv(csv, records);
  std::ofstream summary_csv = open_out(out_dir, "summary.csv");
  write_summary_csv(summary_csv, summarize(records));

  const double disc = max_check_discrepancy(records);
  std::cout << "max_check_discrepancy=" << format_double(disc) << '\n';
  if (disc > 1e-6) {
    std::cerr << "error: cross-backend check values diverge ("
              << format_double(disc) << " relative)\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact multi-level Gaussian process regression engine"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", backend;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub, bool with_backend) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory (default .)");
    sub->add_option("--seed", seed, "seed override");
    if (with_backend)
      sub->add_option("--backend", backend,
                      "backend override: naive|efficient|intermediary");
  };

  CLI::App* sim = app.add_subcommand("simulate", "draw a synthetic dataset");
  add_common(sim, false);
  CLI::App* ll = app.add_subcommand("loglik", "evaluate the log-likelihood");
  add_common(ll, true);
  CLI::App* post = app.add_subcommand("posterior",
                                      "conditional posterior draws and bands");
  add_common(post, true);
  CLI::App* fit = app.add_subcommand("fit", "MCMC over hyperparameters");
  add_common(fit, false);
  CLI::App* bench = app.add_subcommand("bench", "timing sweeps");
  add_common(bench, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const json config = load_config(config_path);
    if (sim->parsed()) return cmd_simulate(config, out_dir, seed);
    if (ll->parsed()) return cmd_loglik(config, out_dir, backend, seed);
    if (post->parsed()) return cmd_posterior(config, out_dir, backend, seed);
    if (fit->parsed()) return cmd_fit(config, out_dir, seed);
    if (bench->parsed()) return cmd_bench(config, out_dir, seed);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NotPositiveDefinite& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const Overflow& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
