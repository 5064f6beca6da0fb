// sklab — command-line front end for the SK correlation-matrix laboratory.
//
// Subcommands:
//   scalar    scalar theory at (β, h): fixed point q, stability margins,
//             iteration sequences — JSON
//   exact     one exactly enumerated instance: log Z, magnetization, overlap
//             statistics, operator-norm sandwich — JSON
//   amp       one iterative-solver trajectory with theory diagnostics — JSON
//   spectral  one instance's spectral report: norms, TAP Hessian edge,
//             residual decomposition — JSON
//   sweep     grid of exactly solved instances, registry statistics — CSV/JSON
//   scaling   log-log size fit of one statistic with bootstrap CI — CSV/JSON
//
// Options mirror the config-file keys; flags override file values.  Exit code
// 0 on success, 2 when a sweep had failed instances, 1 on hard errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sklab/amp.hpp"
#include "sklab/disorder.hpp"
#include "sklab/gibbs_exact.hpp"
#include "sklab/harness.hpp"
#include "sklab/scalar_rs.hpp"
#include "sklab/spectral.hpp"

namespace {

using sklab::harness::ExperimentConfig;
using sklab::harness::ResultRow;

struct FlagSet {
  std::optional<std::string> config, beta, h, n, n_list, samples, seed, kmax,
      variant, statistic, out, workers;
};

void add_common(CLI::App* cmd, FlagSet& f) {
  cmd->set_help_flag("--help", "print help and exit");  // frees -h for --h
  cmd->add_option("--config", f.config, "config file (key = value lines)");
  cmd->add_option("--beta", f.beta, "inverse temperature, comma list allowed");
  cmd->add_option("--h", f.h, "external field, comma list allowed");
  cmd->add_option("--n", f.n, "system size");
  cmd->add_option("--n-list", f.n_list, "comma list of system sizes");
  cmd->add_option("--samples", f.samples, "disorder samples per grid point");
  cmd->add_option("--seed", f.seed, "base seed; instance i uses seed + i");
  cmd->add_option("--kmax", f.kmax, "iteration count for amp");
  cmd->add_option("--variant", f.variant,
                  "amp variant: conditional | tilde | prime");
  cmd->add_option("--statistic", f.statistic,
                  "registry statistic for scaling");
  cmd->add_option("--out", f.out, "output path (default: stdout)");
  cmd->add_option("--workers", f.workers,
                  "worker threads (capped by SKLAB_THREADS)");
}

ExperimentConfig resolve(const FlagSet& f, sklab::harness::Command cmd) {
  ExperimentConfig cfg;
  if (f.config) cfg = sklab::harness::load_config(*f.config, cfg);
  cfg.command = cmd;  // the subcommand wins over any command key in the file
  const auto apply = [&](const char* key,
                         const std::optional<std::string>& v) {
    if (v) sklab::harness::apply_override(cfg, key, *v);
  };
  apply("beta", f.beta);
  apply("h", f.h);
  apply("n", f.n);
  apply("n_list", f.n_list);
  apply("samples", f.samples);
  apply("seed", f.seed);
  apply("k_max", f.kmax);
  apply("variant", f.variant);
  apply("statistic", f.statistic);
  apply("out", f.out);
  apply("workers", f.workers);
  cfg.validate();
  return cfg;
}

void write_text(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream fs(out);
  if (!fs) throw std::runtime_error("cannot write to " + out);
  fs << text << "\n";
}

std::string format_for(const std::string& out) {
  constexpr const char* kJson = ".json";
  if (out.size() >= 5 && out.compare(out.size() - 5, 5, kJson) == 0)
    return "json";
  return "csv";
}

void emit_rows(const std::vector<ResultRow>& rows, const std::string& out) {
  if (out.empty()) {
    sklab::harness::emit_csv(rows, std::cout);
    return;
  }
  sklab::harness::emit(rows, format_for(out), out);
}

// ── subcommand bodies ────────────────────────────────────────────────────────

int cmd_scalar(const ExperimentConfig& cfg) {
  const sklab::scalar_rs::ScalarTheory t = sklab::scalar_rs::compute_theory(
      {cfg.beta.front(), cfg.h.front()}, cfg.k_max);
  nlohmann::json j;
  j["beta"] = t.params.beta;
  j["h"] = t.params.h;
  j["q"] = t.q;
  j["q4"] = t.q4;
  j["at_lhs"] = t.at_lhs;
  j["at_satisfied"] = t.at_satisfied;
  j["at_plus_margin"] = t.at_plus_margin;
  j["nu1_sq"] = t.nu1_sq;
  j["nu2_sq"] = t.nu2_sq;
  j["alpha"] = t.alpha;
  j["gamma"] = t.gamma;
  j["gamma_cap_sq"] = t.gamma_cap_sq;
  if (t.truncated_at)
    j["truncated_at"] = *t.truncated_at;
  else
    j["truncated_at"] = nullptr;
  j["quadrature_order"] = t.quadrature_order;
  write_text(j.dump(2), cfg.out);
  return 0;
}

int cmd_exact(const ExperimentConfig& cfg) {
  const double beta = cfg.beta.front(), h = cfg.h.front();
  sklab::harness::StatisticContext ctx =
      sklab::harness::make_instance(cfg.n_list.front(), beta, h, cfg.seed);
  const double q = sklab::scalar_rs::solve_q({beta, h});
  const sklab::gibbs_exact::OverlapStats os =
      sklab::gibbs_exact::overlap_stats(ctx.system, q);
  const sklab::spectral::SandwichTriple sw =
      sklab::spectral::sandwich_check(ctx.gibbs);
  nlohmann::json j;
  j["n"] = ctx.n;
  j["beta"] = beta;
  j["h"] = h;
  j["seed"] = ctx.seed;
  j["log_z"] = ctx.gibbs.log_z;
  j["mean_energy"] = ctx.gibbs.mean_energy;
  j["magnetization"] = std::vector<double>(
      ctx.gibbs.magnetization.data(),
      ctx.gibbs.magnetization.data() + ctx.gibbs.magnetization.size());
  j["overlap"] = {{"q_ref", q},
                  {"mean_R", os.mean_R},
                  {"var_R", os.var_R},
                  {"exp_conc_proxy", os.exp_conc_proxy},
                  {"proxy_overflowed", os.proxy_overflowed}};
  j["sandwich"] = {{"lhs", sw.lhs}, {"mid", sw.mid}, {"rhs", sw.rhs}};
  write_text(j.dump(2), cfg.out);
  return 0;
}

int cmd_amp(const ExperimentConfig& cfg) {
  const double beta = cfg.beta.front(), h = cfg.h.front();
  sklab::amp::AmpConfig ac;
  ac.beta = beta;
  ac.h = h;
  ac.n = cfg.n_list.front();
  ac.k_max = cfg.k_max;
  ac.variant = sklab::amp::parse_variant(cfg.variant);
  ac.seed = cfg.seed;
  const sklab::amp::AmpTrajectory traj = sklab::amp::run(ac);
  const sklab::scalar_rs::ScalarTheory theory =
      sklab::scalar_rs::compute_theory({beta, h}, cfg.k_max);
  write_text(sklab::amp::trajectory_summary_json(traj, theory), cfg.out);
  return 0;
}

int cmd_spectral(const ExperimentConfig& cfg) {
  const double beta = cfg.beta.front(), h = cfg.h.front();
  sklab::harness::StatisticContext ctx =
      sklab::harness::make_instance(cfg.n_list.front(), beta, h, cfg.seed);
  const double q = sklab::scalar_rs::solve_q({beta, h});
  const sklab::spectral::SpectralReport report =
      sklab::spectral::spectral_report(ctx.system, ctx.G, q);
  write_text(sklab::spectral::to_json(report), cfg.out);
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  const sklab::harness::SweepResult res = sklab::harness::run_sweep(cfg);
  emit_rows(res.rows, cfg.out);
  if (res.failed_instances > 0) {
    std::cerr << "sweep: " << res.failed_instances
              << " instance(s) failed; their samples are missing from the "
                 "aggregates\n";
    return 2;
  }
  return 0;
}

int cmd_scaling(const ExperimentConfig& cfg) {
  const sklab::harness::ScalingResult res = sklab::harness::scaling_study(
      cfg.statistic, cfg.n_list, cfg.samples, cfg.beta.front(),
      cfg.h.front(), cfg.seed, cfg.workers);
  emit_rows(res.rows, cfg.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerics laboratory for SK correlation matrices"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);

  FlagSet flags;
  CLI::App* sub_scalar =
      app.add_subcommand("scalar", "scalar theory at one (beta, h)");
  CLI::App* sub_exact =
      app.add_subcommand("exact", "enumerate one instance exactly");
  CLI::App* sub_amp =
      app.add_subcommand("amp", "run one iterative-solver trajectory");
  CLI::App* sub_spectral =
      app.add_subcommand("spectral", "spectral report for one instance");
  CLI::App* sub_sweep =
      app.add_subcommand("sweep", "statistics over a parameter grid");
  CLI::App* sub_scaling =
      app.add_subcommand("scaling", "size-scaling fit of one statistic");
  for (CLI::App* sub : {sub_scalar, sub_exact, sub_amp, sub_spectral,
                        sub_sweep, sub_scaling})
    add_common(sub, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sub_scalar->parsed())
      return cmd_scalar(resolve(flags, sklab::harness::Command::scalar));
    if (sub_exact->parsed())
      return cmd_exact(resolve(flags, sklab::harness::Command::exact));
    if (sub_amp->parsed())
      return cmd_amp(resolve(flags, sklab::harness::Command::amp));
    if (sub_spectral->parsed())
      return cmd_spectral(resolve(flags, sklab::harness::Command::spectral));
    if (sub_sweep->parsed())
      return cmd_sweep(resolve(flags, sklab::harness::Command::sweep));
    if (sub_scaling->parsed())
      return cmd_scaling(resolve(flags, sklab::harness::Command::scaling));
  } catch (const std::exception& e) {
    std::cerr << "sklab: error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "sklab: no subcommand selected\n";
  return 1;
}
