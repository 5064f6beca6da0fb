// ─────────────────────────────────────────────────────────────────────────────
// harness — experiment configuration, disorder-replica sweeps, a Glauber
// (heat-bath) sampler for systems beyond enumeration reach, log-log scaling
// studies with bootstrap confidence intervals, and CSV/JSON result emission.
//
// Determinism contract: an instance is identified by (n, β, h, seed); every
// statistic is a pure function of that tuple.  Sweeps parallelize across
// instance seeds only, write into per-index slots, and aggregate in index
// order, so emitted bytes are identical for any worker count.
// ─────────────────────────────────────────────────────────────────────────────
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sklab/gibbs_exact.hpp"

namespace sklab::harness {

// ── configuration ────────────────────────────────────────────────────────────

enum class Command { scalar, exact, amp, spectral, sweep, scaling };

std::string command_name(Command c);
Command parse_command(const std::string& name);  // throws invalid_argument

struct ExperimentConfig {
  Command command = Command::scalar;
  std::vector<double> beta = {0.5};  // nonempty grid (singleton for module commands)
  std::vector<double> h = {0.5};     // nonempty grid
  std::vector<int> n_list = {14};    // nonempty
  int samples = 1;                   // ≥ 1 disorder replicas per grid point
  std::uint64_t seed = 1;
  int k_max = 16;
  std::string variant = "conditional";
  std::string statistic = "two_point_sq";  // scaling command
  std::string out;  // output path; empty = stdout
  int workers = 1;

  // Throws std::invalid_argument on empty grids, samples < 1, workers < 1,
  // k_max < 2, or an unknown variant name.
  void validate() const;
};

// Flat key=value file ('#' comments, blank lines ignored).  Keys: command,
// beta, h (comma-separated grids), n (single), n_list (comma-separated),
// samples, seed, k_max, variant, statistic, out, workers.  Unknown keys are
// an error.  `base` supplies defaults; later assignments win.
ExperimentConfig parse_config_text(const std::string& text,
                                   ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path,
                             ExperimentConfig base = {});

// Applies one key=value override (same keys as the config file).
void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value);

// min(requested, SKLAB_THREADS if set), floored at 1.
int effective_workers(int requested);

// ── result rows ──────────────────────────────────────────────────────────────

struct ResultRow {
  std::string experiment;
  std::string param_json;  // compact JSON of the parameter tuple
  std::string statistic;
  double value = 0.0;
  double std_error = 0.0;  // ≥ 0
  long count = 0;

  bool operator==(const ResultRow&) const = default;
};

// CSV with header `experiment,param_json,statistic,value,stderr,count`,
// RFC-style quoting (fields containing comma/quote/newline are quoted,
// embedded quotes doubled), doubles printed round-trip exactly.
void emit_csv(const std::vector<ResultRow>& rows, std::ostream& os);
std::vector<ResultRow> parse_csv(std::istream& is);  // throws on malformed
void emit_json(const std::vector<ResultRow>& rows, std::ostream& os);

// format ∈ {csv, json}; writes to `path` (throws std::runtime_error when the
// file cannot be opened).
void emit(const std::vector<ResultRow>& rows, const std::string& format,
          const std::string& path);

// ── per-instance statistics (registry) ───────────────────────────────────────

// All inputs a statistic may consume, built once per (n, β, h, seed)
// instance from exact enumeration.  The spin-0 cavity solution is computed
// on first use only.
struct StatisticContext {
  int n = 0;
  double beta = 0.0;
  double h = 0.0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd G;
  gibbs_exact::SpinSystem system;
  gibbs_exact::GibbsSolution gibbs;

  const gibbs_exact::GibbsSolution& cavity0();

 private:
  std::optional<gibbs_exact::GibbsSolution> cavity0_;
};

StatisticContext make_instance(int n, double beta, double h,
                               std::uint64_t seed);

using StatisticFn = double (*)(StatisticContext&);

// Name → function, in deterministic (sorted) iteration order:
//   energy_per_site    n^{-1}⟨H⟩
//   op_norm_M          ‖M‖_op
//   overlap_mean       1 − n^{-1} tr M
//   overlap_var        n^{-2}(‖M‖_F² + 2 mᵀMm)
//   resolvent_error    ‖M − ((1+β²)Id − βG)^{-1}‖_op
//   t12_sq_scaled      n^{-1}‖M‖_F²   (n·⟨T₁₂²⟩, the ν₁² comparand)
//   tap_residual_sq    mean over j≠0 of (M_{0j} − β(1−m_0²)Σ_k G_{0k} M^{(0)}_{kj})²
//   two_point_sq       n^{-2}‖M‖_F²
const std::map<std::string, StatisticFn>& statistic_registry();
std::vector<std::string> statistic_names();

// ── sweeps ───────────────────────────────────────────────────────────────────

struct SweepResult {
  std::vector<ResultRow> rows;  // one per (β, h, n, statistic), grid order
  int failed_instances = 0;     // instances that threw; partial results flag
};

// Evaluates every registered statistic on `samples` disorder instances (seed,
// seed+1, …) for each (β, h, n) grid point, aggregating mean and standard
// error of the mean.  Failed instances are excluded from aggregates and
// counted.  Deterministic for fixed config regardless of worker count.
SweepResult run_sweep(const ExperimentConfig& config);

// ── Glauber (heat-bath) sampler ──────────────────────────────────────────────

struct GlauberResult {
  Eigen::VectorXd m;            // time-averaged magnetization estimate
  Eigen::VectorXd m_std_error;  // batch-means standard errors
  std::vector<double> pair_corr;            // ⟨σ_i;σ_j⟩ for requested pairs
  std::vector<double> pair_corr_std_error;
  long measurement_sweeps = 0;
  int batches = 0;
};

// Probability the heat-bath kernel sets σ_site = +1 given the other spins:
// ½(1 + tanh(h_site + Σ_j J_{site,j} σ_j)).  Exposed so detailed balance is
// unit-checkable against the exact Gibbs weights.
double heat_bath_flip_probability(const gibbs_exact::SpinSystem& s,
                                  const Eigen::VectorXd& sigma, int site);

// Single-site heat-bath dynamics in fixed site order with maintained local
// fields.  `sweeps` total passes, the first `burn_in` discarded; estimates
// are time averages with standard errors from (up to) 32 batch means.
// Pre: 1 ≤ n ≤ 10⁵, sweeps > burn_in ≥ 0.
GlauberResult glauber_estimate(const gibbs_exact::SpinSystem& s, long sweeps,
                               long burn_in, std::uint64_t seed,
                               const std::vector<std::pair<int, int>>& pairs = {});

// ── scaling studies ──────────────────────────────────────────────────────────

struct ScalingResult {
  std::string statistic;
  std::vector<int> n_list;
  std::vector<double> mean;       // per n
  std::vector<double> std_error;  // per n
  double slope = 0.0;             // OLS on log(mean) vs log(n)
  double intercept = 0.0;
  double ci_lo = 0.0;  // bootstrap 95% percentile CI of the slope
  double ci_hi = 0.0;
  std::vector<ResultRow> rows;  // per-n means + slope/ci rows
};

// Evaluates one registered statistic over `samples` instances per n and fits
// the log-log decay slope, with a 1000-resample bootstrap (resampling
// instances within each n) for the CI.  Throws std::domain_error if any
// per-n mean is ≤ 0 and std::invalid_argument for unknown statistics.
ScalingResult scaling_study(const std::string& statistic,
                            const std::vector<int>& n_list, int samples,
                            double beta, double h, std::uint64_t seed,
                            int workers = 1);

}  // namespace sklab::harness
