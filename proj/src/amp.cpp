#include "sklab/amp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "sklab/disorder.hpp"

namespace sklab::amp {

namespace {

void validate_config(const AmpConfig& c) {
  if (c.n < 2) throw std::invalid_argument("amp: n must be at least 2");
  if (c.k_max < 2) throw std::invalid_argument("amp: k_max must be at least 2");
  if (!(c.beta >= 0.0) || !std::isfinite(c.beta))
    throw std::invalid_argument("amp: beta must be finite and non-negative");
  if (!(c.h >= 0.0) || !std::isfinite(c.h))
    throw std::invalid_argument("amp: h must be finite and non-negative");
}

Eigen::VectorXd tanh_field(double h, double beta, const Eigen::VectorXd& z) {
  return ((h + (beta * z.array()))).tanh().matrix();
}

// Γ²_{k−1} with Γ²_0 = 0 (1-based k).
double gamma_cap_sq_before(const scalar_rs::BolthausenSequences& seq, int k) {
  if (k <= 1) return 0.0;
  return seq.gamma_cap_sq[static_cast<std::size_t>(k - 2)];
}

void run_conditional(const Eigen::MatrixXd& G, AmpTrajectory& traj) {
  const AmpConfig& c = traj.config;
  const int n = c.n;
  disorder::DeflatedOperator op(G);
  traj.phi.push_back(
      Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));

  for (int k = 1; k <= c.k_max; ++k) {
    if (k >= 2) {
      // φ^{(k)}: the new direction carried by m^{(k)}
      try {
        traj.phi.push_back(
            disorder::gram_schmidt_next(traj.m_iters.back(), traj.phi));
      } catch (const std::runtime_error&) {
        traj.truncated = true;
        traj.truncated_at = k;
        return;
      }
    }
    traj.zeta.push_back(op.advance(traj.phi.back()));

    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (int s = 1; s <= k - 1; ++s)
      z += traj.sequences.gamma[static_cast<std::size_t>(s - 1)] *
           traj.zeta[static_cast<std::size_t>(s - 1)];
    const double fresh =
        std::sqrt(std::max(traj.q - gamma_cap_sq_before(traj.sequences, k), 0.0));
    z += fresh * traj.zeta.back();
    traj.z_iters.push_back(std::move(z));

    if (k < c.k_max)
      traj.m_iters.push_back(tanh_field(c.h, c.beta, traj.z_iters.back()));
  }
}

void run_direct(const Eigen::MatrixXd& G, AmpTrajectory& traj) {
  const AmpConfig& c = traj.config;
  const int n = c.n;
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);  // m^{(0)}

  for (int k = 1; k <= c.k_max; ++k) {
    const Eigen::VectorXd& cur = traj.m_iters.back();  // m^{(k)}
    const double memory =
        c.variant == Variant::tilde
            ? c.beta * (1.0 - traj.q)
            : c.beta * (1.0 - cur.squaredNorm() / static_cast<double>(n));
    Eigen::VectorXd z = G * cur - memory * prev;
    traj.z_iters.push_back(std::move(z));
    if (k < c.k_max) {
      prev = cur;
      traj.m_iters.push_back(tanh_field(c.h, c.beta, traj.z_iters.back()));
    }
  }
}

}  // namespace

// ── variant names ────────────────────────────────────────────────────────────

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::conditional: return "conditional";
    case Variant::tilde: return "tilde";
    case Variant::prime: return "prime";
  }
  throw std::invalid_argument("amp: unknown variant value");
}

Variant parse_variant(const std::string& name) {
  if (name == "conditional") return Variant::conditional;
  if (name == "tilde") return Variant::tilde;
  if (name == "prime") return Variant::prime;
  throw std::invalid_argument(
      "amp: unknown variant \"" + name +
      "\" (expected conditional, tilde, or prime)");
}

// ── trajectory ───────────────────────────────────────────────────────────────

AmpTrajectory run(const AmpConfig& config) {
  validate_config(config);
  const Eigen::MatrixXd G =
      disorder::sample_coupling_only(config.n, config.seed);
  return run(config, G);
}

AmpTrajectory run(const AmpConfig& config, const Eigen::MatrixXd& G) {
  validate_config(config);
  if (G.rows() != config.n || G.cols() != config.n)
    throw std::invalid_argument("amp: coupling matrix size mismatch");

  AmpTrajectory traj;
  traj.config = config;
  traj.q = scalar_rs::solve_q({config.beta, config.h});
  traj.sequences =
      scalar_rs::bolthausen_sequences({config.beta, config.h}, config.k_max);
  traj.m_iters.push_back(
      Eigen::VectorXd::Constant(config.n, std::sqrt(traj.q)));

  if (config.variant == Variant::conditional)
    run_conditional(G, traj);
  else
    run_direct(G, traj);

  const int K = static_cast<int>(traj.m_iters.size());
  traj.gram.resize(K, K);
  for (int a = 0; a < K; ++a)
    for (int b = 0; b <= a; ++b) {
      const double v = traj.m_iters[static_cast<std::size_t>(a)].dot(
                           traj.m_iters[static_cast<std::size_t>(b)]) /
                       static_cast<double>(config.n);
      traj.gram(a, b) = v;
      traj.gram(b, a) = v;
    }
  return traj;
}

// ── diagnostics ──────────────────────────────────────────────────────────────

namespace {

void check_theory_match(const AmpTrajectory& traj,
                        const scalar_rs::ScalarTheory& theory,
                        std::size_t min_sequence_length) {
  if (std::abs(theory.params.beta - traj.config.beta) > 1e-12 ||
      std::abs(theory.params.h - traj.config.h) > 1e-12)
    throw std::invalid_argument(
        "amp: theory evaluated at different (beta, h) than the trajectory");
  if (std::abs(theory.q - traj.q) > 1e-10)
    throw std::invalid_argument(
        "amp: theory fixed point disagrees with the trajectory beyond 1e-10");
  if (theory.alpha.size() < min_sequence_length)
    throw std::invalid_argument(
        "amp: theory sequences shorter than the trajectory");
}

}  // namespace

GramDiagnostics gram_diagnostics(const AmpTrajectory& traj,
                                 const scalar_rs::ScalarTheory& theory) {
  const int K = static_cast<int>(traj.m_iters.size());
  if (K < 3)
    throw std::invalid_argument(
        "amp: gram diagnostics need at least 3 iterates");
  check_theory_match(traj, theory, static_cast<std::size_t>(K - 1));
  const double n = static_cast<double>(traj.config.n);
  const double sqrt_n = std::sqrt(n);

  GramDiagnostics d;
  d.alpha_dev = Eigen::MatrixXd::Zero(K, K);
  d.q_dev.resize(static_cast<std::size_t>(K));
  for (int a = 0; a < K; ++a) {
    d.q_dev[static_cast<std::size_t>(a)] = std::abs(traj.gram(a, a) - theory.q);
    d.max_q_dev = std::max(d.max_q_dev, d.q_dev[static_cast<std::size_t>(a)]);
    for (int b = 0; b < K; ++b) {
      if (a == b) continue;
      const double dev = std::abs(
          traj.gram(a, b) -
          theory.alpha[static_cast<std::size_t>(std::min(a, b))]);
      d.alpha_dev(a, b) = dev;
      d.max_alpha_dev = std::max(d.max_alpha_dev, dev);
    }
  }

  if (traj.config.variant == Variant::conditional && !traj.phi.empty()) {
    d.frame_dev = Eigen::MatrixXd::Zero(K, K);
    d.zeta_m_dev = Eigen::MatrixXd::Zero(K, K);
    for (int j = 1; j <= K; ++j) {
      const Eigen::VectorXd& m = traj.m_iters[static_cast<std::size_t>(j - 1)];
      for (int s = 1; s <= j && s <= static_cast<int>(traj.phi.size()); ++s) {
        const double overlap =
            m.dot(traj.phi[static_cast<std::size_t>(s - 1)]) / sqrt_n;
        const double target =
            s < j ? theory.gamma[static_cast<std::size_t>(s - 1)]
                  : std::sqrt(std::max(
                        theory.q - gamma_cap_sq_before(traj.sequences, j), 0.0));
        const double dev = std::abs(overlap - target);
        d.frame_dev(j - 1, s - 1) = dev;
        d.max_frame_dev = std::max(d.max_frame_dev, dev);
      }
      // recorded-only: overlaps with the fresh directions vanish in the
      // limit but carry an O(n^{-1/2}) finite-size remainder
      for (int s = 1; s <= j - 2 && s <= static_cast<int>(traj.zeta.size());
           ++s) {
        const double overlap =
            traj.zeta[static_cast<std::size_t>(s - 1)].dot(m) / sqrt_n;
        const double target = traj.config.beta * (1.0 - theory.q) *
                              theory.gamma[static_cast<std::size_t>(s - 1)];
        d.zeta_m_dev(j - 1, s - 1) = std::abs(overlap - target);
      }
    }
  }
  return d;
}

StateEvolutionReport state_evolution_check(
    const AmpTrajectory& traj, const scalar_rs::ScalarTheory& theory) {
  const int Z = static_cast<int>(traj.z_iters.size());
  const int K = static_cast<int>(traj.m_iters.size());
  if (K < 2 || Z < 1)
    throw std::invalid_argument(
        "amp: state-evolution check needs at least 2 iterates");
  check_theory_match(traj, theory, static_cast<std::size_t>(Z));
  const double n = static_cast<double>(traj.config.n);

  StateEvolutionReport r;
  r.empirical_cov.resize(Z, Z);
  r.theory_cov.resize(Z, Z);
  for (int a = 0; a < Z; ++a)
    for (int b = 0; b <= a; ++b) {
      const double emp = traj.z_iters[static_cast<std::size_t>(a)].dot(
                             traj.z_iters[static_cast<std::size_t>(b)]) /
                         n;
      const double th =
          a == b ? theory.q
                 : theory.alpha[static_cast<std::size_t>(std::min(a, b))];
      r.empirical_cov(a, b) = r.empirical_cov(b, a) = emp;
      r.theory_cov(a, b) = r.theory_cov(b, a) = th;
      r.max_cov_dev = std::max(r.max_cov_dev, std::abs(emp - th));
    }

  // 1-D W2: sorted coordinates of m^{(j)} against the pushforward quantiles
  // tanh(h + β√q Φ^{-1}((i−½)/n)), identical for every j ≥ 2.
  const int ni = traj.config.n;
  std::vector<double> quantiles(static_cast<std::size_t>(ni));
  const double scale = traj.config.beta * std::sqrt(traj.q);
  for (int i = 0; i < ni; ++i)
    quantiles[static_cast<std::size_t>(i)] = std::tanh(
        traj.config.h + scale * scalar_rs::standard_normal_quantile(
                                    (i + 0.5) / static_cast<double>(ni)));
  for (int j = 2; j <= K; ++j) {
    const Eigen::VectorXd& m = traj.m_iters[static_cast<std::size_t>(j - 1)];
    std::vector<double> sorted(m.data(), m.data() + ni);
    std::sort(sorted.begin(), sorted.end());
    double acc = 0.0;
    for (int i = 0; i < ni; ++i) {
      const double diff =
          sorted[static_cast<std::size_t>(i)] - quantiles[static_cast<std::size_t>(i)];
      acc += diff * diff;
    }
    r.w2.push_back(std::sqrt(acc / n));
  }
  r.w2_last = r.w2.empty() ? 0.0 : r.w2.back();
  return r;
}

// ── cross-variant and reference comparisons ──────────────────────────────────

std::vector<double> variant_divergence(const AmpTrajectory& a,
                                       const AmpTrajectory& b) {
  if (a.config.beta != b.config.beta || a.config.h != b.config.h ||
      a.config.n != b.config.n || a.config.k_max != b.config.k_max ||
      a.config.seed != b.config.seed)
    throw std::invalid_argument(
        "amp: variant divergence requires identical (beta, h, n, k_max, seed)");
  const std::size_t K = std::min(a.m_iters.size(), b.m_iters.size());
  std::vector<double> out(K);
  for (std::size_t k = 0; k < K; ++k)
    out[k] = (a.m_iters[k] - b.m_iters[k]).squaredNorm() /
             static_cast<double>(a.config.n);
  return out;
}

double magnetization_closeness(const AmpTrajectory& traj,
                               const Eigen::VectorXd& reference, int k) {
  if (reference.size() != traj.config.n)
    throw std::invalid_argument(
        "amp: reference magnetization length mismatch");
  const int K = static_cast<int>(traj.m_iters.size());
  if (k == -1) k = K;
  if (k < 1 || k > K)
    throw std::invalid_argument("amp: iterate index out of range");
  return (reference - traj.m_iters[static_cast<std::size_t>(k - 1)])
             .squaredNorm() /
         static_cast<double>(traj.config.n);
}

// ── summary ──────────────────────────────────────────────────────────────────

std::string trajectory_summary_json(
    const AmpTrajectory& traj, const scalar_rs::ScalarTheory& theory,
    const std::map<std::string, std::vector<double>>& divergences) {
  nlohmann::json j;
  j["config"] = {{"beta", traj.config.beta},
                 {"h", traj.config.h},
                 {"n", traj.config.n},
                 {"k_max", traj.config.k_max},
                 {"variant", variant_name(traj.config.variant)},
                 {"seed", traj.config.seed}};
  j["q"] = traj.q;
  j["iterates"] = traj.m_iters.size();
  j["truncated"] = traj.truncated;
  if (traj.truncated)
    j["truncated_at"] = traj.truncated_at;
  else
    j["truncated_at"] = nullptr;

  const int K = static_cast<int>(traj.m_iters.size());
  nlohmann::json gram = nlohmann::json::array();
  for (int a = 0; a < K; ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (int b = 0; b < K; ++b) row.push_back(traj.gram(a, b));
    gram.push_back(row);
  }
  j["gram"] = gram;

  if (K >= 3) {
    const GramDiagnostics d = gram_diagnostics(traj, theory);
    nlohmann::json per_k = nlohmann::json::array();
    for (int a = 0; a < K; ++a) {
      double row_max = d.q_dev[static_cast<std::size_t>(a)];
      for (int b = 0; b < a; ++b)
        row_max = std::max(row_max, d.alpha_dev(a, b));
      per_k.push_back(row_max);
    }
    j["gram_deviation"] = {{"per_k", per_k},
                           {"max_alpha", d.max_alpha_dev},
                           {"max_q", d.max_q_dev}};
    if (traj.config.variant == Variant::conditional)
      j["gram_deviation"]["max_frame"] = d.max_frame_dev;
  }

  if (K >= 2 && !traj.z_iters.empty()) {
    const StateEvolutionReport se = state_evolution_check(traj, theory);
    j["state_evolution"] = {{"max_cov_dev", se.max_cov_dev},
                            {"w2", se.w2},
                            {"w2_last", se.w2_last}};
  }

  nlohmann::json div = nlohmann::json::object();
  for (const auto& [name, values] : divergences) div[name] = values;
  j["divergence"] = div;
  return j.dump(2);
}

}  // namespace sklab::amp
