// ─────────────────────────────────────────────────────────────────────────────
// gibbs_exact — exact finite-n Gibbs computations by full enumeration over
// {−1,+1}^n.
//
// A spin system carries the Hamiltonian
//
//   H(σ) = Σ_{u<v} J_uv σ_u σ_v + Σ_u h_u σ_u,     ⟨f⟩ = Z^{-1} Σ_σ f e^{H},
//
// with J symmetric, zero diagonal (for the SK model J = β·g with g the
// disorder matrix; beta_scale records that β).  Exact objects computed here:
//
//  • log Z (streaming log-sum-exp over a Gray-code walk with incremental
//    energy updates), magnetizations m_i = ⟨σ_i⟩, the spin covariance
//    M_ij = ⟨σ_i σ_j⟩ − m_i m_j (M_ii = 1 − m_i², tr M = n − ‖m‖²);
//
//  • joint cumulants m_{i1…ik} = ∂_{h_{i1}}…∂_{h_{ik}} log Z via
//    moment→cumulant Möbius inversion over set partitions, and independently
//    via the replica telescoping representation
//      m_{j1…jp} = ⟨σ¹_{j1} Π_{u=1}^{p−1} Σ_{v≤u}(σ^v_{j_{u+1}} − σ^{u+1}_{j_{u+1}})⟩,
//    which factorizes over independent replicas into parity moments;
//
//  • averaged (k,p)-point functions  n^{-k} Σ_{i1…ik} m_{i1i1…ikik j1…jp}
//    (each averaged index repeated twice, summed over all of [n]^k);
//
//  • cavity and conditional measures: ⟨·⟩^{(i)} deletes spin i with fields
//    untouched; ⟨·⟩^{[i]}(s) conditions on σ_i = s, i.e. deletes the spin
//    and shifts fields h_u → h_u + J_iu·s.  The three combinations
//      δ_i f = ½f^{[i]}(+1) − ½f^{[i]}(−1),   ε_i f = ½f^{[i]}(+1) + ½f^{[i]}(−1),
//      Δ_i f = ε_i f − f^{(i)}
//    satisfy the exact finite-n identities
//      m_ij = (1 − m_i²)·δ_i m_j^{[i]}
//      m_jk = (δ_i m_j^{[i]})·m_ik + ε_i m_jk^{[i]} + m_i·(δ_i m_jk^{[i]});
//
//  • overlap statistics of R_{1,2} = n^{-1}(σ¹, σ²) over independent
//    replicas, and exact expectations of products of the centred statistics
//      T_{l,l'} = n^{-1}(σ^l − m, σ^{l'} − m),  T_l = n^{-1}(σ^l − m, m),
//      T = n^{-1}‖m‖².
// ─────────────────────────────────────────────────────────────────────────────
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sklab::gibbs_exact {

// ── domain types ─────────────────────────────────────────────────────────────

struct SpinSystem {
  int n = 0;
  Eigen::MatrixXd couplings;  // symmetric, zero diagonal (β·g for SK)
  Eigen::VectorXd fields;
  double beta_scale = 1.0;    // the β folded into couplings (metadata)

  static constexpr int kDefaultCap = 20;  // 2^20 ≈ 1M states
};

// couplings = beta·G, uniform fields h.
SpinSystem make_sk_system(const Eigen::MatrixXd& G, double beta, double h);

// Throws std::invalid_argument on asymmetric couplings, nonzero diagonal,
// or size mismatch.
void validate(const SpinSystem& s);

struct GibbsSolution {
  double log_z = 0.0;
  Eigen::VectorXd magnetization;  // m
  Eigen::MatrixXd correlation;    // M = ⟨σσᵀ⟩ − mmᵀ
  double mean_energy = 0.0;       // ⟨H⟩ (diagnostic)
};

// ── enumeration ──────────────────────────────────────────────────────────────

// Exact solution by full enumeration; requires n ≤ cap (default 20).  Larger
// systems are refused — use the harness Glauber sampler for those.
GibbsSolution enumerate(const SpinSystem& s, int cap = SpinSystem::kDefaultCap);

// ⟨Π_{t∈mask} σ_{sites[t]}⟩ for every mask ⊆ {0,…,|sites|−1}, one
// enumeration pass; |sites| ≤ 6.  Entry [0] is 1 (the normalization).
std::vector<double> parity_moments(const SpinSystem& s,
                                   const std::vector<int>& sites);

// ── cumulants and (k,p)-point functions ──────────────────────────────────────

// Joint cumulant of (σ_{i1},…,σ_{ik}); repeated indices legal (σ² = 1
// reductions happen through the exact parity moments).  |indices| ≤ 6.
// k=1 ⇒ m_i, k=2 ⇒ M_ij.
double cumulant(const SpinSystem& s, const std::vector<int>& indices);

// Same value through the replica telescoping representation (independent
// second implementation, |indices| ≤ 4).
double cumulant_replica(const SpinSystem& s, const std::vector<int>& indices);

// n^{-k} Σ_{(i1…ik) ∈ [n]^k} cumulant(i1,i1,…,ik,ik,j1,…,jp).
// Pre: 2k + |free_indices| ≤ 6.
double kp_point(const SpinSystem& s, const std::vector<int>& free_indices,
                int k);

// ── cavity / conditional measures ────────────────────────────────────────────

// (n−1)-spin system with row/column i deleted, fields untouched.
SpinSystem cavity(const SpinSystem& s, int i);

// (n−1)-spin system conditioned on σ_i = sigma_i (∈ {−1,+1}): row/column i
// deleted, fields h_u + J_iu·sigma_i.
SpinSystem conditional(const SpinSystem& s, int i, int sigma_i);

// Index of site j (≠ i) inside the (n−1)-spin subsystems above.
inline int sub_index(int j, int i) { return j < i ? j : j - 1; }

struct DeltaEps {
  double delta = 0.0;  // δ_i f
  double eps = 0.0;    // ε_i f
  double Delta = 0.0;  // Δ_i f = ε_i f − f^{(i)}
};

// f = σ_j (j ≠ i): the one-point versions δ_i m_j^{[i]}, ε_i m_j^{[i]},
// Δ_i m_j^{[i]}.
DeltaEps delta_eps(const SpinSystem& s, int i, int j);

// f = (σ_j; σ_k) covariance (j, k ≠ i): δ_i m_jk^{[i]}, ε_i m_jk^{[i]},
// Δ_i m_jk^{[i]}.
DeltaEps delta_eps_pair(const SpinSystem& s, int i, int j, int k);

// ── overlap statistics ───────────────────────────────────────────────────────

struct OverlapStats {
  double mean_R = 0.0;          // ⟨R_{1,2}⟩ = n^{-1}‖m‖²
  double var_R = 0.0;           // ⟨(R−⟨R⟩)²⟩ = n^{-2}‖M‖_F² + 2n^{-2}(m,Mm)
  double exp_conc_proxy = 0.0;  // ⟨exp(n(R−q_ref)²/K)⟩; +inf on overflow;
                                // NaN when n exceeds the pair-enumeration cap
  bool proxy_overflowed = false;
};

// mean/variance are exact closed forms at any enumerable n; the exponential
// proxy is a heavier diagnostic requiring a 4^n pair enumeration and is only
// computed for n ≤ proxy_cap.
OverlapStats overlap_stats(const SpinSystem& s, double q_ref, double K = 4.0,
                           int proxy_cap = 13);

// ── products of centred overlap statistics ───────────────────────────────────

struct TFactor {
  enum class Kind {
    pair_overlap,    // T_{l,l'} = n^{-1}(σ^l − m, σ^{l'} − m), l ≠ l'
    single_overlap,  // T_l = n^{-1}(σ^l − m, m)
    norm             // T = n^{-1}‖m‖² (deterministic)
  };
  Kind kind = Kind::norm;
  int l = 0;   // replica label (1-based)
  int lp = 0;  // second replica for pair_overlap
};

// Exact ⟨Π factors⟩ over independent replicas.  Caps: ≤ 4 factors,
// ≤ 4 distinct replicas (higher orders need centred-moment tensors beyond
// what one pass stores).
double t_statistics(const SpinSystem& s, const std::vector<TFactor>& pattern);

// ── text serialization ───────────────────────────────────────────────────────

// Header "n beta_scale", then the strict upper triangle of couplings
// row-major (one line per row), then the fields on one line; %.17g
// everywhere so the round trip is bit-exact.
std::string to_text(const SpinSystem& s);
SpinSystem from_text(const std::string& text);

}  // namespace sklab::gibbs_exact
