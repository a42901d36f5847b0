#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlgp/kernel.hpp"

namespace mlgp {

enum class Scenario { Loglik, PosteriorDraw, FullFit };
enum class Design { Regular, Partial };
enum class Backend { Baseline, Efficient, IntermediaryEfficient };

std::string to_string(Scenario s);
std::string to_string(Design d);
std::string to_string(Backend b);
Scenario scenario_from_string(const std::string& s);
Design design_from_string(const std::string& s);
Backend backend_from_string(const std::string& s);

/// One grid cell. Regular design uses n = n_a + n_b as the function count
/// (n_b is bookkeeping only there); partial design reads both.
struct BenchCell {
  int n_a = 0;
  int n_b = 0;
  int J = 0;
  int J_p = 0;

  int n() const { return n_a + n_b; }
};

struct BenchPlan {
  Scenario scenario = Scenario::Loglik;
  Design design = Design::Regular;
  std::vector<BenchCell> grid;
  std::vector<Backend> backends;
  int replicates = 5;
  std::uint64_t seed = 0;
  /// Baseline runs predicted (by a cubic extrapolation of a small calibration
  /// factorization) or measured to exceed this are emitted as timeouts.
  double baseline_budget_seconds = 120.0;
  HyperParams theta{};  // parameters the synthetic datasets are drawn from
  /// FullFit chain lengths; ratios are the deliverable, so short chains.
  int fit_warmup = 100;
  int fit_keep = 100;
};

struct BenchRecord {
  Scenario scenario = Scenario::Loglik;
  Design design = Design::Regular;
  Backend backend = Backend::Efficient;
  int n = 0, n_a = 0, n_b = 0, J = 0, J_p = 0;
  int replicate = 0;
  std::optional<double> wall_seconds;  // absent on timeout
  double check_value = 0.0;
  bool timeout = false;
};

/// Runs every (cell, backend, replicate), one simulated dataset per cell fed
/// identically to every backend. Timed region excludes simulation and I/O.
/// check_value carries the loglik value (Loglik), the posterior-mean checksum
/// (PosteriorDraw) or the initial log-posterior (FullFit) for cross-backend
/// verification.
std::vector<BenchRecord> run_bench(const BenchPlan& plan);

struct BenchSummaryRow {
  Scenario scenario;
  Design design;
  Backend backend;
  BenchCell cell;
  double median_seconds = 0.0;
  int timed_replicates = 0;
};

struct SpeedupRow {
  Scenario scenario;
  Design design;
  BenchCell cell;
  Backend fast;
  double ratio = 0.0;  // median(baseline) / median(fast)
};

struct BenchSummary {
  std::vector<BenchSummaryRow> medians;
  std::vector<SpeedupRow> speedups;
};

BenchSummary summarize(const std::vector<BenchRecord>& records);

/// Largest relative check_value discrepancy across backends within any cell.
/// A timing table whose backends disagree is a failed run.
double max_check_discrepancy(const std::vector<BenchRecord>& records);

/// Header exactly:
/// scenario,design,backend,n,n_a,n_b,J,J_p,replicate,wall_seconds,check_value,timeout
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);
void write_summary_csv(std::ostream& out, const BenchSummary& summary);

}  // namespace mlgp
