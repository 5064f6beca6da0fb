// Acceptance gate.  Nine end-to-end checks, one line of output each:
//
//   criterion k: PASS — detail (elapsed)
//   criterion k: FAIL — detail (elapsed)
//
// Exit code 0 iff every criterion passes.  All seeds are pinned, so the
// whole run is reproducible bit for bit.  Where a runtime budget applies it
// is enforced as part of the criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "sklab/amp.hpp"
#include "sklab/disorder.hpp"
#include "sklab/gibbs_exact.hpp"
#include "sklab/harness.hpp"
#include "sklab/scalar_rs.hpp"
#include "sklab/spectral.hpp"

using namespace sklab;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Tracks the worst deviation seen for one named sub-check.
struct Worst {
  const char* name;
  double value = 0.0;
  double bound;
  void note(double v) { value = std::max(value, v); }
  bool ok() const { return value <= bound; }
};

std::string join_worst(const std::vector<Worst*>& ws) {
  std::string out;
  for (const Worst* w : ws) {
    if (!out.empty()) out += ", ";
    out += std::string(w->name) + " " + fmt(w->value) +
           (w->ok() ? "<=" : ">") + fmt(w->bound);
  }
  return out;
}

// ── criterion 1: exact identities on random instances ────────────────────────

Outcome criterion1() {
  const std::vector<double> betas = {0.3, 0.5, 0.8, 1.1, 0.0};
  const std::vector<double> hs = {0.2, 0.5, 1.0, 0.0};
  Worst w_sym{"sym", 0, 1e-12}, w_psd{"min_eig", 0, 1e-10},
      w_diag{"diag", 0, 1e-12}, w_trace{"trace", 0, 1e-10},
      w_meanR{"mean_R", 0, 1e-10}, w_mid{"middle", 0, 1e-10},
      w_order{"ordering", 0, 1e-12}, w_delta{"delta", 0, 1e-10},
      w_three{"three_term", 0, 1e-10}, w_split{"Y_split", 0, 1e-10};
  for (int inst = 0; inst < 200; ++inst) {
    const int n = 6 + inst % 9;  // 6 … 14
    const double beta = betas[inst % betas.size()];
    const double h = hs[(inst / betas.size()) % hs.size()];
    const Eigen::MatrixXd G =
        disorder::sample_coupling_only(n, 1000 + static_cast<std::uint64_t>(inst));
    const gibbs_exact::SpinSystem s = gibbs_exact::make_sk_system(G, beta, h);
    const gibbs_exact::GibbsSolution g = gibbs_exact::enumerate(s);
    const Eigen::MatrixXd& M = g.correlation;
    const Eigen::VectorXd& m = g.magnetization;

    w_sym.note((M - M.transpose()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    w_psd.note(std::max(0.0, -es.eigenvalues().minCoeff()));
    for (int i = 0; i < n; ++i)
      w_diag.note(std::abs(M(i, i) - (1.0 - m[i] * m[i])));
    w_trace.note(std::abs(M.trace() - (n - m.squaredNorm())));

    const gibbs_exact::OverlapStats st =
        gibbs_exact::overlap_stats(s, 0.3, 4.0, /*proxy_cap=*/0);
    w_meanR.note(std::abs(st.mean_R - (1.0 - M.trace() / n)));
    const double mid_direct =
        (M.squaredNorm() + 2.0 * m.dot(M * m)) / (static_cast<double>(n) * n);
    w_mid.note(std::abs(st.var_R - mid_direct));
    const spectral::SandwichTriple sw = spectral::sandwich_check(g);
    w_order.note(std::max(sw.lhs - sw.mid, sw.mid - sw.rhs));

    const int i = inst % n;
    const int j = (i + 1 + inst % (n - 1)) % n;
    const int k = (j == (i + 1) % n) ? (i + 2) % n : (i + 1) % n;
    const gibbs_exact::DeltaEps one = gibbs_exact::delta_eps(s, i, j);
    w_delta.note(std::abs(M(i, j) - (1.0 - m[i] * m[i]) * one.delta));
    if (k != i) {
      const gibbs_exact::DeltaEps two = gibbs_exact::delta_eps_pair(s, i, j, k);
      w_three.note(std::abs(M(j, k) -
                            (one.delta * M(i, k) + two.eps + m[i] * two.delta)));
    }

    const double q = scalar_rs::solve_q({beta, h});
    const spectral::ResidualSplit rs = spectral::residual_Y(s, G, q, &M);
    w_split.note(rs.split_error_fro);
  }
  const std::vector<Worst*> all = {&w_sym,   &w_psd,   &w_diag, &w_trace,
                                   &w_meanR, &w_mid,   &w_order, &w_delta,
                                   &w_three, &w_split};
  Outcome out;
  for (const Worst* w : all) out.pass = out.pass && w->ok();
  out.detail = "200 instances n<=14: " + join_worst(all);
  return out;
}

// ── criterion 2: cumulants vs finite differences and replicas ────────────────

Outcome criterion2() {
  Worst w_fd{"fd", 0, 1e-6}, w_rep{"replica", 0, 1e-9};
  bool perm_exact = true;
  const std::vector<std::tuple<int, double, double, std::uint64_t>> systems = {
      {5, 0.8, 0.3, 2001}, {6, 0.5, 0.6, 2002},
      {7, 1.2, 0.4, 2003}, {8, 0.7, 0.2, 2004}};
  for (const auto& [n, beta, h, seed] : systems) {
    const gibbs_exact::SpinSystem s = gibbs_exact::make_sk_system(
        disorder::sample_coupling_only(n, seed), beta, h);
    std::vector<std::vector<int>> queries = {
        {0}, {0, 1}, {2, 2}, {0, 1, 2}, {1, 1, 3}};
    if (n <= 7) {
      queries.push_back({0, 1, 2, 3});
      queries.push_back({0, 0, 1, 2});
      queries.push_back({1, 1, 1, 1});
    }
    for (const std::vector<int>& q : queries) {
      const double lib = gibbs_exact::cumulant(s, q);
      w_fd.note(std::abs(lib - oracles::fd_cumulant(s, q)));
      w_rep.note(std::abs(lib - gibbs_exact::cumulant_replica(s, q)));
    }
    // permutation invariance is bit-exact because indices are sorted first
    perm_exact = perm_exact &&
                 gibbs_exact::cumulant(s, {0, 1, 2}) ==
                     gibbs_exact::cumulant(s, {2, 0, 1}) &&
                 gibbs_exact::cumulant(s, {1, 1, 3}) ==
                     gibbs_exact::cumulant(s, {3, 1, 1}) &&
                 gibbs_exact::cumulant(s, {0, 2, 1, 1}) ==
                     gibbs_exact::cumulant(s, {1, 2, 1, 0});
  }
  Outcome out;
  out.pass = w_fd.ok() && w_rep.ok() && perm_exact;
  out.detail = join_worst({&w_fd, &w_rep});
  out.detail += perm_exact ? ", permutations bitwise equal"
                           : ", PERMUTATION MISMATCH";
  return out;
}

// ── criterion 3: scalar theory ───────────────────────────────────────────────

Outcome criterion3(double* elapsed_out) {
  const auto t0 = Clock::now();
  Worst w_q{"q_vs_bisection", 0, 1e-8};
  bool at_everywhere = true, margin_positive = true, seq_monotone = true;
  double min_margin = 1e300;

  // The margin value at each q′ node comes from a one-sided difference of
  // two O(1) quadratures over a step of 1e-5, so its resolution floor is
  // ~1e-9.  The limit value at q′ = q is exactly zero, and the innermost
  // Chebyshev nodes approach it (true value ~ c·(q′−q)², beneath the floor
  // when q′−q ≲ 1e-3 at the high-h corner where 1−q ≈ 0.01).  Enforce
  // nonnegativity at the floor everywhere origin-ward, and strict positivity
  // wherever the node is far enough from q that a zero would be a real
  // violation rather than the q′→q limit.
  for (int a = 0; a < 20; ++a)
    for (int b = 0; b < 20; ++b) {
      const double beta = 0.05 + 0.9 * a / 19.0;
      const double h = 0.15 + (3.0 - 0.15) * b / 19.0;
      const scalar_rs::RsParams p{beta, h};
      const double q = scalar_rs::solve_q(p);
      w_q.note(std::abs(q - oracles::solve_q_bisection(beta, h)));
      at_everywhere = at_everywhere && scalar_rs::at_condition(p).satisfied;
      const scalar_rs::AtPlusMargin mg = scalar_rs::at_plus_margin(p, 24);
      min_margin = std::min(min_margin, mg.margin);
      for (std::size_t i = 0; i < mg.grid.size(); ++i) {
        const double v = mg.values[i];
        margin_positive = margin_positive && v >= -1e-9;
        if (mg.grid[i] - q > 2e-3)
          margin_positive = margin_positive && v > 1e-9;
      }
    }

  // the margin degenerates to zero only in the q′ → q limit
  double max_margin_at_q = 0.0;
  for (const auto& [beta, h] :
       std::vector<std::pair<double, double>>{{0.3, 0.5}, {0.8, 0.5},
                                              {0.6, 2.0}}) {
    const scalar_rs::RsParams p{beta, h};
    const double q = scalar_rs::solve_q(p);
    const double delta = 1e-5;
    const double at_q = (scalar_rs::phi_functional(p, 1.0, q, q) -
                         scalar_rs::phi_functional(p, 1.0 - delta, q, q)) /
                        delta;
    max_margin_at_q = std::max(max_margin_at_q, std::abs(at_q));
  }

  const scalar_rs::BolthausenSequences seq =
      scalar_rs::bolthausen_sequences({0.8, 0.5}, 200);
  const double q85 = scalar_rs::solve_q({0.8, 0.5});
  for (std::size_t k = 1; k < seq.alpha.size(); ++k) {
    seq_monotone = seq_monotone && seq.alpha[k] >= seq.alpha[k - 1] - 1e-15 &&
                   seq.gamma_cap_sq[k] >= seq.gamma_cap_sq[k - 1] - 1e-15;
  }
  const double gamma_gap = std::abs(seq.gamma_cap_sq.back() - q85);

  Worst w_hess{"sigma_hessian_fd", 0, 1e-6};
  bool hess_negative = true;
  for (const auto& [beta, h] :
       std::vector<std::pair<double, double>>{{0.5, 0.4}, {0.8, 0.5}})
    for (double lambda_u : {0.0, 0.3}) {
      const scalar_rs::RsParams p{beta, h};
      const double x0 = 0.2, d = 1e-3;
      const scalar_rs::SigmaValue at0 = scalar_rs::sigma_variational(p, x0,
                                                                     lambda_u);
      const double fd =
          (scalar_rs::sigma_variational(p, x0 + d, lambda_u).value -
           2.0 * at0.value +
           scalar_rs::sigma_variational(p, x0 - d, lambda_u).value) /
          (d * d);
      w_hess.note(std::abs(0.5 * fd - at0.x_coef));
      hess_negative = hess_negative && at0.x_coef < 0.0;
    }

  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  *elapsed_out = elapsed;
  Outcome out;
  out.pass = w_q.ok() && at_everywhere && margin_positive &&
             max_margin_at_q <= 1e-6 && seq_monotone && gamma_gap < 1e-6 &&
             w_hess.ok() && hess_negative && elapsed < 60.0;
  std::ostringstream d;
  d << join_worst({&w_q, &w_hess}) << ", AT "
    << (at_everywhere ? "holds on grid" : "VIOLATED") << ", margin min "
    << fmt(min_margin)
    << (margin_positive ? " (positive away from q'=q, zero only toward it)"
                        : " VIOLATES nonnegativity")
    << ", margin at q'=q " << fmt(max_margin_at_q) << ", sequences "
    << (seq_monotone ? "monotone" : "NOT MONOTONE") << ", |G2_200-q| "
    << fmt(gamma_gap) << ", x^2 coeff "
    << (hess_negative ? "negative" : "NONNEGATIVE");
  out.detail = d.str();
  return out;
}

// ── criterion 4: resolvent norm and shrinking approximation error ────────────

// exact one-sided Mann–Kendall p-value for a decreasing trend on 4 points
double mk_p_decreasing(const std::vector<double>& x) {
  const auto s_stat = [](const std::vector<double>& v) {
    int s = 0;
    for (std::size_t a = 0; a < v.size(); ++a)
      for (std::size_t b = a + 1; b < v.size(); ++b)
        s += (v[b] > v[a]) - (v[b] < v[a]);
    return s;
  };
  const int observed = s_stat(x);
  std::vector<int> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  int leq = 0, total = 0;
  std::sort(idx.begin(), idx.end());
  do {
    std::vector<double> perm;
    for (int i : idx) perm.push_back(x[static_cast<std::size_t>(i)]);
    leq += s_stat(perm) <= observed;
    ++total;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return static_cast<double>(leq) / total;
}

Outcome criterion4(double* elapsed_out) {
  const auto t0 = Clock::now();
  const double beta = 0.5;
  Worst w_norm{"norm_vs_4", 0, 0.2};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int n = 4000;
    const Eigen::MatrixXd G = disorder::sample_coupling_only(n, seed);
    const Eigen::MatrixXd A =
        (1.0 + beta * beta) * Eigen::MatrixXd::Identity(n, n) - beta * G;
    const double norm = 1.0 / spectral::min_eigenvalue(A).value;
    w_norm.note(std::abs(norm - 4.0));
  }

  std::vector<double> means;
  for (int n : {8, 12, 16, 20}) {
    double acc = 0.0;
    for (int i = 0; i < 500; ++i) {
      harness::StatisticContext ctx = harness::make_instance(
          n, beta, 0.0, 9000 + static_cast<std::uint64_t>(i));
      acc += harness::statistic_registry().at("resolvent_error")(ctx);
    }
    means.push_back(acc / 500.0);
  }
  const double p = mk_p_decreasing(means);

  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  *elapsed_out = elapsed;
  Outcome out;
  out.pass = w_norm.ok() && p < 0.05 && elapsed < 600.0;
  std::ostringstream d;
  d << join_worst({&w_norm}) << " (target 4.0 +- 5%), error means";
  for (double m : means) d << " " << fmt(m);
  d << ", MK p " << fmt(p) << (p < 0.05 ? "<0.05" : ">=0.05");
  out.detail = d.str();
  return out;
}

// ── criterion 5: state evolution at n = 10^4 ─────────────────────────────────

Outcome criterion5(double* elapsed_out) {
  const auto t0 = Clock::now();
  const int n = 10000, k_max = 8;
  const double bound = 5.0 / std::sqrt(static_cast<double>(n));  // 0.05
  const scalar_rs::ScalarTheory theory =
      scalar_rs::compute_theory({0.8, 0.5}, k_max);
  Worst w_gram{"gram", 0, bound}, w_cov{"z_cov", 0, bound},
      w_w2{"W2", 0, 0.02}, w_div{"divergence", 0, 1e-2};
  bool truncated = false;
  for (std::uint64_t seed = 21; seed <= 30; ++seed) {
    const Eigen::MatrixXd G = disorder::sample_coupling_only(n, seed);
    amp::AmpConfig c;
    c.beta = 0.8;
    c.h = 0.5;
    c.n = n;
    c.k_max = k_max;
    c.seed = seed;
    c.variant = amp::Variant::conditional;
    const amp::AmpTrajectory cond = amp::run(c, G);
    c.variant = amp::Variant::tilde;
    const amp::AmpTrajectory til = amp::run(c, G);
    c.variant = amp::Variant::prime;
    const amp::AmpTrajectory pri = amp::run(c, G);
    truncated = truncated || cond.truncated || til.truncated || pri.truncated;

    for (const amp::AmpTrajectory* traj : {&cond, &til, &pri}) {
      const amp::GramDiagnostics gd = amp::gram_diagnostics(*traj, theory);
      w_gram.note(gd.max_alpha_dev);
      w_gram.note(gd.max_q_dev);
      if (traj == &cond) w_gram.note(gd.max_frame_dev);
      const amp::StateEvolutionReport se =
          amp::state_evolution_check(*traj, theory);
      w_cov.note(se.max_cov_dev);
      w_w2.note(se.w2_last);
    }
    w_div.note(amp::variant_divergence(cond, til).back());
    w_div.note(amp::variant_divergence(til, pri).back());
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  *elapsed_out = elapsed;
  Outcome out;
  out.pass = w_gram.ok() && w_cov.ok() && w_w2.ok() && w_div.ok() &&
             !truncated && elapsed < 300.0;
  out.detail = "10 seeds, 3 variants: " +
               join_worst({&w_gram, &w_cov, &w_w2, &w_div}) +
               (truncated ? ", UNEXPECTED TRUNCATION" : "");
  return out;
}

// ── criterion 6: TAP Hessian positivity ──────────────────────────────────────

Outcome criterion6(double* elapsed_out) {
  const auto t0 = Clock::now();
  const int n = 2000;
  bool ordering_ok = true;
  std::ostringstream d;
  bool pass = true;
  for (const auto& [beta, h] :
       std::vector<std::pair<double, double>>{{0.5, 0.5}, {0.9, 0.4}}) {
    const double q = scalar_rs::solve_q({beta, h});
    int positive = 0;
    double min_seen = 1e300, worst_gap = 1e300;
    for (std::uint64_t seed = 11; seed <= 20; ++seed) {
      const Eigen::MatrixXd G = disorder::sample_coupling_only(n, seed);
      amp::AmpConfig c;
      c.beta = beta;
      c.h = h;
      c.n = n;
      c.k_max = 12;
      c.seed = seed;
      c.variant = amp::Variant::conditional;
      const amp::AmpTrajectory traj = amp::run(c, G);
      spectral::TapHessianSpec spec;
      spec.v = traj.m_iters.back();  // the step-12 magnetization iterate
      spec.q = q;
      spec.beta = beta;
      spec.include_rank_one = true;
      const double with_r1 =
          spectral::min_eigenvalue(spectral::tap_hessian(spec, G)).value;
      spec.include_rank_one = false;
      const double free_r1 =
          spectral::min_eigenvalue(spectral::tap_hessian(spec, G)).value;
      positive += with_r1 > 0.0;
      min_seen = std::min(min_seen, with_r1);
      worst_gap = std::min(worst_gap, free_r1 - with_r1);
      // removing a negative-semidefinite rank-one term cannot lower the edge
      ordering_ok = ordering_ok && free_r1 >= with_r1 - 1e-9;
    }
    pass = pass && positive >= 9;
    d << "(" << beta << "," << h << "): " << positive
      << "/10 positive, min eig " << fmt(min_seen) << ", rank-one gap >= "
      << fmt(worst_gap) << "; ";
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  *elapsed_out = elapsed;
  Outcome out;
  out.pass = pass && ordering_ok && elapsed < 600.0;
  out.detail = d.str() + (ordering_ok ? "ordering holds on every instance"
                                      : "ORDERING VIOLATED");
  return out;
}

// ── criterion 7: decay slopes with bootstrap CIs ─────────────────────────────

Outcome criterion7(double* elapsed_out) {
  const auto t0 = Clock::now();
  const harness::ScalingResult two = harness::scaling_study(
      "two_point_sq", {8, 10, 12, 14, 16}, 2000, 0.6, 0.4, 500, 1);
  const harness::ScalingResult tap = harness::scaling_study(
      "tap_residual_sq", {8, 10, 12, 14, 16}, 2000, 0.6, 0.4, 500, 1);
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  *elapsed_out = elapsed;
  Outcome out;
  out.pass = two.slope <= -0.6 && two.ci_hi < 0.0 && tap.slope <= -1.5 &&
             tap.ci_hi < 0.0 && elapsed < 1200.0;
  std::ostringstream d;
  d << "two-point slope " << fmt(two.slope) << " (CI " << fmt(two.ci_lo)
    << ".." << fmt(two.ci_hi) << ", gate <=-0.6), residual slope "
    << fmt(tap.slope) << " (CI " << fmt(tap.ci_lo) << ".." << fmt(tap.ci_hi)
    << ", gate <=-1.5), 2000 samples each";
  out.detail = d.str();
  return out;
}

// ── criterion 8: finite-n norm chain ─────────────────────────────────────────

Outcome criterion8() {
  const std::vector<double> betas = {0.3, 0.5, 0.8};
  const std::vector<double> hs = {0.2, 0.5, 1.0};
  int checked = 0, skipped = 0;
  double worst_slack = 1e300;
  bool chain_ok = true;
  for (int inst = 0; inst < 200; ++inst) {
    const int n = 6 + inst % 9;
    const double beta = betas[inst % betas.size()];
    const double h = hs[(inst / betas.size()) % hs.size()];
    const Eigen::MatrixXd G =
        disorder::sample_coupling_only(n, 3000 + static_cast<std::uint64_t>(inst));
    const gibbs_exact::SpinSystem s = gibbs_exact::make_sk_system(G, beta, h);
    const gibbs_exact::GibbsSolution g = gibbs_exact::enumerate(s);
    const double q = scalar_rs::solve_q({beta, h});

    // restrict to instances where the shifted operator is positive definite
    Eigen::MatrixXd B = -beta * G;
    for (int i = 0; i < n; ++i)
      B(i, i) += 1.0 / (1.0 - g.magnetization[i] * g.magnetization[i]) +
                 beta * beta * (1.0 - q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    if (es.eigenvalues().minCoeff() <= 1e-10) {
      ++skipped;
      continue;
    }
    const double binv =
        spectral::resolvent_inverse_norm(g.magnetization, q, beta, G);
    const spectral::ResidualSplit rs =
        spectral::residual_Y(s, G, q, &g.correlation);
    const double lhs = spectral::operator_norm(g.correlation).value;
    const double rhs = binv * (1.0 + rs.op_norms.at("Y"));
    chain_ok = chain_ok && lhs <= rhs * (1.0 + 1e-12);
    worst_slack = std::min(worst_slack, rhs - lhs);
    ++checked;
  }
  Outcome out;
  out.pass = chain_ok && checked >= 150;
  std::ostringstream d;
  d << checked << " PD instances checked (" << skipped
    << " skipped), chain " << (chain_ok ? "holds" : "VIOLATED")
    << ", smallest slack " << fmt(worst_slack);
  out.detail = d.str();
  return out;
}

// ── criterion 9: worker-count determinism ────────────────────────────────────

Outcome criterion9() {
  // temporarily lift any thread cap so workers=4 really runs four workers
  std::string saved;
  bool had = false;
  if (const char* env = std::getenv("SKLAB_THREADS")) {
    saved = env;
    had = true;
    ::unsetenv("SKLAB_THREADS");
  }
  harness::ExperimentConfig c;
  c.command = harness::Command::sweep;
  c.beta = {0.4, 0.7};
  c.h = {0.3};
  c.n_list = {10};
  c.samples = 8;
  c.seed = 77;

  c.workers = 1;
  const harness::SweepResult r1 = harness::run_sweep(c);
  c.workers = 4;
  const harness::SweepResult r4 = harness::run_sweep(c);
  std::ostringstream cs1, cs4, js1, js4;
  harness::emit_csv(r1.rows, cs1);
  harness::emit_csv(r4.rows, cs4);
  harness::emit_json(r1.rows, js1);
  harness::emit_json(r4.rows, js4);
  if (had) ::setenv("SKLAB_THREADS", saved.c_str(), 1);

  Outcome out;
  out.pass = cs1.str() == cs4.str() && js1.str() == js4.str() &&
             r1.failed_instances == 0 && r4.failed_instances == 0;
  std::ostringstream d;
  d << "workers {1,4}: CSV " << (cs1.str() == cs4.str() ? "identical" : "DIFFER")
    << " (" << cs1.str().size() << " bytes), JSON "
    << (js1.str() == js4.str() ? "identical" : "DIFFER") << " ("
    << js1.str().size() << " bytes)";
  out.detail = d.str();
  return out;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int id, const Outcome& o, double elapsed) {
    std::printf("criterion %d: %s — %s (%.1fs)\n", id,
                o.pass ? "PASS" : "FAIL", o.detail.c_str(), elapsed);
    std::fflush(stdout);
    failures += !o.pass;
  };
  const auto timed = [&](int id, auto&& fn, double budget) {
    const auto t0 = Clock::now();
    Outcome o = fn();
    const double elapsed =
        std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget > 0.0 && elapsed >= budget) {
      o.pass = false;
      o.detail += " [over the " + fmt(budget) + "s budget]";
    }
    report(id, o, elapsed);
  };

  timed(1, criterion1, 60.0);
  timed(2, criterion2, 0.0);
  {
    double t = 0.0;
    const Outcome o = criterion3(&t);  // sequenced so t is filled first
    report(3, o, t);
  }
  {
    double t = 0.0;
    const Outcome o = criterion4(&t);
    report(4, o, t);
  }
  {
    double t = 0.0;
    const Outcome o = criterion5(&t);
    report(5, o, t);
  }
  {
    double t = 0.0;
    const Outcome o = criterion6(&t);
    report(6, o, t);
  }
  {
    double t = 0.0;
    const Outcome o = criterion7(&t);
    report(7, o, t);
  }
  timed(8, criterion8, 0.0);
  timed(9, criterion9, 0.0);

  if (failures > 0) {
    std::printf("acceptance: %d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("acceptance: all 9 criteria passed\n");
  return 0;
}
