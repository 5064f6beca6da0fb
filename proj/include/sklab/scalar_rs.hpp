// ─────────────────────────────────────────────────────────────────────────────
// scalar_rs — replica-symmetric scalar theory for the Sherrington–Kirkpatrick
// model at inverse temperature β and external field h > 0.
//
// Everything in this module is a one-dimensional Gaussian computation: with
// Z ~ N(0,1) and the effective field  Y = h + β√q Z,
//
//   q   solves   q = E tanh²(Y)                        (RS fixed point)
//   q₄  =        E tanh⁴(Y)
//
// and the de Almeida–Thouless (AT) stability condition reads
//
//   β² E sech⁴(Y) < 1,   with  E sech⁴(Y) = 1 − 2q + q₄.
//
// Derived objects built on (q, q₄):
//
//  • the replica-bound functional
//      Φ(m, q′) = log 2 + (β²/4)(1−q′)² − (β²/4) m (q′² − q²)
//                 + (1/m) E_Z log E_{Z′} cosh^m( h + β√q Z + β√(q′−q) Z′ ),
//    whose m-derivative at m = 1 is ≤ 0 for all q′ ∈ (q, 1] exactly when the
//    system is in the stable high-temperature phase (AT⁺ margin);
//
//  • limiting variances ν₁², ν₂², ν₃² of centred overlap statistics;
//
//  • the Bolthausen sequences (α_k, γ_k, Γ_k²) driving the iterative
//    construction of the TAP solution, with
//      ψ(t) = E tanh(h+β√tZ+β√(q−t)Z′) tanh(h+β√tZ+β√(q−t)Z″),
//      α_k = ψ(α_{k−1}),  γ_k = (α_k − Γ²_{k−1}) / √(q − Γ²_{k−1}),
//      Γ_k² = Σ_{j≤k} γ_j²,  and Γ_k² ↑ q geometrically under AT;
//
//  • the state-evolution covariance K_st = q (s=t), α_{s∧t} (s≠t);
//
//  • the restricted variational function Σ_{λu}(x) controlling the
//    exponential concentration rate of the overlap, with its inner λ_x
//    optimisation solved in closed form.
//
// All Gaussian expectations use probabilists' Gauss–Hermite quadrature with
// nodes/weights from the Golub–Welsch eigendecomposition (default order 61).
// ─────────────────────────────────────────────────────────────────────────────
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace sklab::scalar_rs {

// Model parameters.  The general theory assumes beta > 0 and h > 0; beta = 0
// and h = 0 are admitted as degenerate special cases (q = tanh²h resp. q = 0)
// so the limiting checks stay expressible.
struct RsParams {
  double beta = 0.0;
  double h = 0.0;
};

// ── Gaussian quadrature ──────────────────────────────────────────────────────

// Nodes and weights of the probabilists' Gauss–Hermite rule of a given order:
// E f(Z) ≈ Σ_i w_i f(z_i) for Z ~ N(0,1).  Rules are computed once per order
// (symmetric tridiagonal Jacobi matrix, off-diagonal √k) and cached.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const QuadratureRule& gauss_hermite(int order);

// E f(Z), Z ~ N(0,1), by Gauss–Hermite quadrature.  Throws
// std::invalid_argument if order < 1; throws std::domain_error naming the
// offending node if f returns a non-finite value at any node.
double gh_expect(const std::function<double(double)>& f, int order = 61);

// Inverse CDF of the standard normal (Wichura's AS241, ~1e-15 relative
// accuracy).  p ∈ (0,1) required.  Shared by the disorder sampler and the
// Wasserstein-2 quantile coupling.
double standard_normal_quantile(double p);

// ── RS fixed point and stability ─────────────────────────────────────────────

// Solves q = E tanh²(h + β√q Z) by damped fixed-point iteration (damping 0.5,
// start q₀ = tanh² h) with a bisection fallback on q − E tanh² changing sign.
// Returns q ∈ [0,1) with |q − E tanh²| < tol.  Throws std::runtime_error
// carrying the last iterate and residual if neither stage reaches tol.
double solve_q(const RsParams& p, double tol = 1e-13, int order = 61);

// E tanh⁴(h + β√q Z) at the solved (or supplied) q.
double fourth_moment(const RsParams& p, double q, int order = 61);

// AT stability: returns lhs = β² E sech⁴(h + β√q Z) (= β²(1 − 2q + q₄)) and
// satisfied = (lhs < 1).
struct AtResult {
  double lhs = 0.0;
  bool satisfied = false;
};
AtResult at_condition(const RsParams& p, int order = 61);

// ── replica-bound functional and AT⁺ margin ──────────────────────────────────

// Φ(m, q′) as in the header comment.  Preconditions: q ≤ q′ ≤ 1 and
// 0 < m ≤ 1 + 1e-3 (the small overshoot is allowed so central finite
// differences at m = 1 stay in-domain; the expression is analytic in m).
// The inner expectation is evaluated in log space (log-sum-exp over the Z′
// rule with log cosh(x) = |x| + log1p(e^{−2|x|}) − log 2), so large m·x
// never overflows.  q is solved from params when not supplied.
double phi_functional(const RsParams& p, double m, double qprime,
                      std::optional<double> q = std::nullopt, int order = 61);

// min over a Chebyshev grid of q′ ∈ (q, 1] of  −(∂_m Φ)(1, q′), the
// derivative taken by one-sided finite difference (Φ(1) − Φ(1−δ))/δ,
// δ = 1e-5.  Positive margin on the whole grid certifies the strict
// inequality (∂_m Φ)|_{m=1} < 0 away from q′ = q; at q′ = q both Φ's
// m-dependence and the margin vanish identically.
struct AtPlusMargin {
  double margin = 0.0;        // min over the grid of −∂_mΦ
  double argmin_qprime = 0.0; // grid point attaining it
  std::vector<double> grid;   // the q′ grid used
  std::vector<double> values; // −∂_mΦ at each grid point
};
AtPlusMargin at_plus_margin(const RsParams& p, int grid_size = 64,
                            int order = 61);

// ── limiting variances of centred overlap statistics ─────────────────────────

// ν₁² = (1−2q+q₄) / (1 − β²(1−2q+q₄))
// ν₂² = (q−q₄) / [ (1 − β²(1−2q+q₄)) (1 − β²(1−4q+3q₄)) ]
// ν₃² = (q₄−q²)/(1−β²(1−4q+3q₄))
//       + β²(q₄−q²)A²/(1−β²(1−4q+3q₄)) + 2β²(2q+q²−q₄)B²/(1−β²(1−4q+3q₄))
// The constants A and B in ν₃² are caller parameters; the defaults A = ν₁,
// B = ν₂ are a non-authoritative convention (the limiting theory determines
// ν₁², ν₂² uniquely but leaves A, B to the normalisation of the two auxiliary
// fields).  Throws std::domain_error if any denominator is ≤ 0 (outside the
// validity region).
struct NuVariances {
  double nu1_sq = 0.0;
  double nu2_sq = 0.0;
  double nu3_sq = 0.0;
};
NuVariances nu_variances(const RsParams& p,
                         std::optional<double> A = std::nullopt,
                         std::optional<double> B = std::nullopt,
                         int order = 61);

// ── Bolthausen sequences and state evolution ─────────────────────────────────

// ψ(t) for 0 ≤ t ≤ q: the two inner Gaussians are conditionally independent
// given Z, so the triple quadrature factorises exactly into
// Σ_i w_i t(z_i)² with t(z) = Σ_j w_j tanh(h + β√t z + β√(q−t) z′_j).
double correlation_map_psi(const RsParams& p, double q, double t,
                           int order = 61);

// α_1 = √q γ_1 with γ_1 = E tanh(h + β√q Z); then α_k = ψ(α_{k−1}),
// γ_k = (α_k − Γ²_{k−1})/√(q − Γ²_{k−1}), Γ_k² = Σ_{j≤k} γ_j².
// When q − Γ²_{k−1} ≤ 1e-12 (or α_k < Γ²_{k−1}) the recursion is numerically
// degenerate; the sequences are frozen at their current values (γ = 0
// onward) and truncated_at records the first frozen index.
struct BolthausenSequences {
  std::vector<double> alpha;         // α_1 … α_k
  std::vector<double> gamma;         // γ_1 … γ_k
  std::vector<double> gamma_cap_sq;  // Γ_1² … Γ_k²
  std::optional<int> truncated_at;   // 1-based index of first frozen step
};
BolthausenSequences bolthausen_sequences(const RsParams& p, int k_max,
                                         int order = 61);

// State-evolution covariance of the effective Gaussians (Z_2, …, Z_{k+1}):
// K_st = q for s = t and α_{s∧t} for s ≠ t (entries are byte-identical to
// the stored sequence values).  min_eigenvalue is a PSD diagnostic.
struct SeCovariance {
  Eigen::MatrixXd K;
  double min_eigenvalue = 0.0;
};
SeCovariance se_covariance(const RsParams& p, int k, int order = 61);

// ── restricted variational function for overlap concentration ────────────────

// With C = cosh²(h+β√qZ), S = sinh²(·), M = tanh(·), D_N = C − λ_u:
//
//   Σ_{λu}(x) = −β²(1−q) − λ_u + β² E[1/D_N]
//               + x² { 2β²q − 2β⁴q E[(C+S)/D_N²] + 8β⁴q E[C·S/D_N³]
//                       − c₁(λ_u)² / E[M²/D_N] }
//   c₁(λ_u)   = β² E[1/(C·D_N)] − 2β² E[C·M²/D_N²] − 1,
//
// the x²-coefficient already containing the closed-form minimum over the
// inner multiplier λ_x:  min_{λx}{ x λx c₁ + (λx²/4)E[M²/D_N] }
// = −x² c₁²/E[M²/D_N].  Preconditions: λ_u < 1 (so D_N ≥ 1 − λ_u > 0) and
// |x| ≤ q^{-1/2}.
struct SigmaValue {
  double value = 0.0;     // Σ_{λu}(x)
  double x_coef = 0.0;    // the x² coefficient (negative under AT)
  double c1 = 0.0;        // c₁(λ_u)
};
SigmaValue sigma_variational(const RsParams& p, double x, double lambda_u,
                             int order = 61);

// ── aggregate ────────────────────────────────────────────────────────────────

struct ScalarTheory {
  RsParams params;
  double q = 0.0;
  double q4 = 0.0;
  double at_lhs = 0.0;
  bool at_satisfied = false;
  double at_plus_margin = 0.0;
  double nu1_sq = 0.0;
  double nu2_sq = 0.0;
  std::vector<double> alpha;
  std::vector<double> gamma;
  std::vector<double> gamma_cap_sq;
  std::optional<int> truncated_at;
  int quadrature_order = 61;
};

// One-stop evaluation of the scalar theory at (β, h): fixed point, AT lhs,
// AT⁺ margin (64-point grid), ν₁², ν₂², sequences to k_max.
ScalarTheory compute_theory(const RsParams& p, int k_max = 16,
                            int order = 61);

}  // namespace sklab::scalar_rs
