// ─────────────────────────────────────────────────────────────────────────────
// disorder — deterministic, seedable GOE disorder and the conditional
// orthogonal-decomposition (deflation) machinery.
//
// The pre-matrix W has zero diagonal and i.i.d. N(0, 1/n) entries off the
// diagonal, generated by a counter-based keyed stream: entry (i, j) depends
// only on (seed, i, j) — never on fill order or thread count — via a
// splitmix64-style finalizer chain mapped through the inverse normal CDF.
// The symmetric coupling matrix is G = (W + Wᵀ)/√2 (zero diagonal,
// off-diagonal variance 1/n — GOE-type, semicircle support [−2, 2]).
//
// Deflation: given an orthonormal frame φ^{(1)}, …, φ^{(k)} built up one
// vector at a time,
//
//   ζ^{(k)}   = G^{(k)} √n φ^{(k)}
//   ρ^{(k)}   = W^{(k)}φ^{(k)} ⊗ φ^{(k)} + φ^{(k)} ⊗ (W^{(k)})ᵀφ^{(k)}
//               − (W^{(k)}φ^{(k)}, φ^{(k)}) φ^{(k)} ⊗ φ^{(k)}
//   W^{(k+1)} = W^{(k)} − ρ^{(k)},   G^{(k)} = (W^{(k)} + (W^{(k)})ᵀ)/√2
//
// which zeroes the action of W^{(k+1)} on the frame in both directions:
// W^{(k+1)}φ^{(s)} = (W^{(k+1)})ᵀφ^{(s)} = G^{(k+1)}φ^{(s)} = 0, s ≤ k.
// The symmetrized correction telescopes,
//
//   ρ̄^{(k)} = n^{-1/2}[ ζ^{(k)}⊗φ^{(k)} + φ^{(k)}⊗ζ^{(k)}
//                        − (ζ^{(k)},φ^{(k)}) φ^{(k)}⊗φ^{(k)} ],
//   G = G^{(K)} + Σ_{s<K} ρ̄^{(s)},
//
// so G^{(k)}-matvecs need only G plus the stored (φ^{(s)}, ζ^{(s)}) pairs;
// DeflatedOperator provides that implicit form for large n where the dense
// W^{(k)} bookkeeping would double memory.
// ─────────────────────────────────────────────────────────────────────────────
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sklab::disorder {

// ── counter-based scalar stream ──────────────────────────────────────────────

// Uniform in (0,1), a pure function of (seed, i, j); never returns 0 or 1.
double keyed_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j);

// N(0,1) variate for key (seed, i, j): inverse normal CDF of keyed_uniform.
double keyed_gaussian(std::uint64_t seed, std::uint64_t i, std::uint64_t j);

// ── disorder sample ──────────────────────────────────────────────────────────

struct DisorderSample {
  int n = 0;
  Eigen::MatrixXd W;  // asymmetric pre-matrix, zero diagonal, N(0,1/n) entries
  Eigen::MatrixXd G;  // (W + Wᵀ)/√2, symmetric, zero diagonal
  std::uint64_t seed = 0;
};

// Full sample (both W and G).  Pre: n ≥ 2.  Bit-exact for fixed (n, seed)
// regardless of fill order or thread count.
DisorderSample sample(int n, std::uint64_t seed);

// Only the symmetric coupling matrix, entries bitwise identical to
// sample(n, seed).G, without materializing W — for large n where W is not
// needed (memory: one n×n matrix instead of two).
Eigen::MatrixXd sample_coupling_only(int n, std::uint64_t seed);

// ── conditional decomposition, dense bookkeeping ─────────────────────────────

struct ConditionalState {
  int n = 0;
  std::vector<Eigen::VectorXd> phi;   // orthonormal frame φ^{(1)}, …
  std::vector<Eigen::VectorXd> zeta;  // ζ^{(s)} = G^{(s)} √n φ^{(s)}
  Eigen::MatrixXd W_k;                // current deflated matrix W^{(k)}
  bool reorthogonalized = false;      // set if a step had to re-orthogonalize
  // k such that W_k = W^{(k)} (one past the number of absorbed frame vectors)
  int k() const { return static_cast<int>(phi.size()) + 1; }
  Eigen::MatrixXd G_k() const {
    return (W_k + W_k.transpose()) / std::sqrt(2.0);
  }
};

// W^{(1)} = W, empty frame.
ConditionalState init_conditional(const DisorderSample& d);

// Absorbs next_phi as φ^{(k)}: computes ζ^{(k)} = G^{(k)}√n φ^{(k)}, then
// W^{(k+1)} = W^{(k)} − ρ^{(k)}.  Pre: ‖next_phi‖ = 1 and orthogonality to
// the existing frame within 1e-8 (otherwise one Gram–Schmidt pass is applied
// and state.reorthogonalized is flagged; a residual that vanishes entirely
// is an error).
void deflate_step(ConditionalState& state, const Eigen::VectorXd& next_phi);

// Normalized orthogonal complement of m_next against the frame (classical
// Gram–Schmidt, two passes).  Throws std::runtime_error("frame degenerate")
// when the residual norm is ≤ 1e-12·‖m_next‖.
Eigen::VectorXd gram_schmidt_next(const Eigen::VectorXd& m_next,
                                  const std::vector<Eigen::VectorXd>& frame);

// ── conditional decomposition, implicit (large n) ────────────────────────────

// G^{(k)}-matvecs as G plus low-rank corrections; holds a reference to G
// (not owned) and the accumulated (φ, ζ, (ζ,φ)) history.
class DeflatedOperator {
 public:
  explicit DeflatedOperator(const Eigen::MatrixXd& G) : G_(&G) {}

  // y = G^{(k)} x with k = #absorbed + 1.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  // Absorbs next_phi as φ^{(k)} and returns ζ^{(k)} = G^{(k)} √n next_phi.
  Eigen::VectorXd advance(const Eigen::VectorXd& next_phi);

  int absorbed() const { return static_cast<int>(phi_.size()); }
  const std::vector<Eigen::VectorXd>& phi() const { return phi_; }
  const std::vector<Eigen::VectorXd>& zeta() const { return zeta_; }
  const std::vector<double>& zeta_phi_overlap() const { return c_; }

 private:
  const Eigen::MatrixXd* G_;
  std::vector<Eigen::VectorXd> phi_;
  std::vector<Eigen::VectorXd> zeta_;
  std::vector<double> c_;  // (ζ^{(s)}, φ^{(s)})
};

// ── binary dump (cross-language golden tests) ────────────────────────────────

// Layout: 8 magic bytes "SKLABG01", u64 n, u64 seed, then n·n row-major
// IEEE-754 doubles of G, all little-endian/native.
void write_binary(const std::string& path, const DisorderSample& d);
DisorderSample read_binary(const std::string& path);  // W left empty

}  // namespace sklab::disorder
