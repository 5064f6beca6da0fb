// ─────────────────────────────────────────────────────────────────────────────
// amp — iterative construction of the TAP magnetization and its statistical
// diagnostics against the scalar theory.
//
// Starting from m^{(1)} = √q·1 (q the RS fixed point), an effective cavity
// field z^{(k+1)} is built from the coupling matrix G and mapped through
//
//   m^{(k+1)} = tanh( h·1 + β z^{(k+1)} ),
//
// in one of three equivalent-in-the-limit ways:
//
//  • conditional — the field is synthesized from the orthogonal deflation of
//    G along the frame φ^{(1)} = n^{-1/2}1, φ^{(k)} ∝ m^{(k)} ⊥ span(φ^{(<k)}):
//      z^{(k+1)} = Σ_{s<k} γ_s ζ^{(s)} + √(q − Γ²_{k−1}) ζ^{(k)},
//    with ζ^{(s)} = G^{(s)}√n φ^{(s)} the fresh Gaussian directions and
//    (γ_s, Γ²_s) the scalar recursion weights;
//
//  • tilde — plain matrix iteration with the scalar memory (Onsager) term
//      z^{(k+1)} = G m^{(k)} − β(1−q) m^{(k−1)},  m^{(0)} = 0;
//
//  • prime — same with the empirical coefficient
//      z^{(k+1)} = G m^{(k)} − β(1 − n^{-1}‖m^{(k)}‖²) m^{(k−1)}.
//
// Diagnostics compare the trajectory against the scalar predictions: the
// Gram matrix n^{-1}(m^{(j)}, m^{(s)}) against α_{j∧s} (and q on the
// diagonal), the empirical covariance of the z-fields against the
// tridiagonal-free covariance K_st = q (s=t), α_{s∧t} (s≠t), the coordinate
// marginal of m^{(k)} against the pushforward tanh(h + β√q Z) in 1-D
// Wasserstein-2 distance, and pairwise divergence between variants.
// ─────────────────────────────────────────────────────────────────────────────
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sklab/scalar_rs.hpp"

namespace sklab::amp {

// ── configuration ────────────────────────────────────────────────────────────

enum class Variant { conditional, tilde, prime };

std::string variant_name(Variant v);
// Accepts "conditional", "tilde", "prime"; throws std::invalid_argument.
Variant parse_variant(const std::string& name);

struct AmpConfig {
  double beta = 0.0;
  double h = 0.0;
  int n = 0;
  int k_max = 16;  // ≥ 2; beyond ~16 the new-direction weight √(q−Γ²) is
                   // below the scalar recursion's freeze threshold anyway
  Variant variant = Variant::conditional;
  std::uint64_t seed = 0;
};

// ── trajectory ───────────────────────────────────────────────────────────────

struct AmpTrajectory {
  AmpConfig config;
  double q = 0.0;  // RS fixed point used by the recursion
  scalar_rs::BolthausenSequences sequences;  // weights to k_max
  std::vector<Eigen::VectorXd> m_iters;  // m^{(1)}, …, m^{(K)}
  std::vector<Eigen::VectorXd> z_iters;  // z^{(2)}, …, z^{(K+1)}
  // conditional variant only (empty otherwise): the orthonormal frame and
  // the fresh directions ζ^{(s)} used to synthesize the fields.
  std::vector<Eigen::VectorXd> phi;
  std::vector<Eigen::VectorXd> zeta;
  Eigen::MatrixXd gram;  // K×K, n^{-1}(m^{(j)}, m^{(s)})
  // Frame degeneracy (m^{(k)} numerically inside the span of the previous
  // directions) stops the conditional recursion early: m_iters then holds
  // m^{(1..k)} and z_iters z^{(2..k)}.
  bool truncated = false;
  int truncated_at = 0;  // the k whose frame vector could not be built
};

// Runs the configured recursion.  The first overload samples the coupling
// matrix from (n, seed); the second reuses a caller-provided G (bitwise
// reproducibility across variants requires it to equal
// disorder::sample_coupling_only(n, seed)).  Pre: n ≥ 2, k_max ≥ 2,
// beta ≥ 0, h ≥ 0, all finite.
AmpTrajectory run(const AmpConfig& config);
AmpTrajectory run(const AmpConfig& config, const Eigen::MatrixXd& G);

// ── diagnostics against the scalar theory ────────────────────────────────────

// Deviations of the magnetization Gram matrix from its predicted limits:
// n^{-1}(m^{(j)}, m^{(s)}) → α_{j∧s} for j ≠ s and → q on the diagonal;
// for the conditional variant additionally the frame components
// n^{-1/2}(m^{(j)}, φ^{(s)}) → γ_s (s < j) and → √(q − Γ²_{j−1}) (s = j),
// and the recorded-only overlaps n^{-1/2}(ζ^{(s)}, m^{(j)}) − β(1−q)γ_s
// (s ≤ j−2), which vanish in the limit but not at finite n.
struct GramDiagnostics {
  Eigen::MatrixXd alpha_dev;  // K×K, zero diagonal
  std::vector<double> q_dev;  // per iterate
  double max_alpha_dev = 0.0;
  double max_q_dev = 0.0;
  // conditional only; empty matrices otherwise
  Eigen::MatrixXd frame_dev;   // lower triangle incl. diagonal, else 0
  Eigen::MatrixXd zeta_m_dev;  // entries (j,s), s ≤ j−2 (0-based row j−1)
  double max_frame_dev = 0.0;
};

// Pre: at least 3 iterates; theory evaluated at the same (β, h) with
// sequences at least as long as the trajectory (q agreement within 1e-10).
GramDiagnostics gram_diagnostics(const AmpTrajectory& traj,
                                 const scalar_rs::ScalarTheory& theory);

// Empirical coordinate covariance of the fields (z^{(2)}, …) against the
// predicted K, and per-iterate Wasserstein-2 distance between the coordinate
// marginal of m^{(k)} (k ≥ 2) and tanh(h + β√q Z), Z ~ N(0,1)-scaled — the
// exact 1-D coupling of sorted samples against quantiles at midpoint
// probabilities.
struct StateEvolutionReport {
  Eigen::MatrixXd empirical_cov;  // Z×Z, n^{-1}(z^{(a)}, z^{(b)})
  Eigen::MatrixXd theory_cov;     // q on the diagonal, α_{s∧t} off it
  double max_cov_dev = 0.0;
  std::vector<double> w2;  // entry j ↔ iterate m^{(j+2)}
  double w2_last = 0.0;
};

// Pre: at least 2 iterates (one synthesized field).
StateEvolutionReport state_evolution_check(const AmpTrajectory& traj,
                                           const scalar_rs::ScalarTheory& theory);

// ── cross-variant and reference comparisons ──────────────────────────────────

// Per-iterate n^{-1}‖m_a^{(k)} − m_b^{(k)}‖², k = 1 … min(K_a, K_b).
// Pre: identical (beta, h, n, k_max, seed); variants may differ.
std::vector<double> variant_divergence(const AmpTrajectory& a,
                                       const AmpTrajectory& b);

// n^{-1}‖reference − m^{(k)}‖² against an externally obtained magnetization
// (exact enumeration at small n, Monte Carlo estimate at large n).
// k is 1-based; -1 selects the last iterate.
double magnetization_closeness(const AmpTrajectory& traj,
                               const Eigen::VectorXd& reference, int k = -1);

// ── summary ──────────────────────────────────────────────────────────────────

// JSON document: config echo, per-iterate Gram deviations, field-covariance
// and W2 tables, and any caller-supplied named divergence vectors.
std::string trajectory_summary_json(
    const AmpTrajectory& traj, const scalar_rs::ScalarTheory& theory,
    const std::map<std::string, std::vector<double>>& divergences = {});

}  // namespace sklab::amp
