// ─────────────────────────────────────────────────────────────────────────────
// spectral — operator norms, extremal eigenvalues, and the spectral objects
// built from an SK spin system:
//
//  • the TAP Hessian  D_v + β²(1−q)·Id − (2β²/n)·v vᵀ − β G,
//    (D_v)_ii = 1/(1−v_i²), optionally without the rank-one term (dropping
//    it can only increase the quadratic form);
//
//  • the resolvent-type operator  B = D_m + β²(1−q)·Id − β G  and the norm
//    ‖B^{-1}‖_op (→ 1/(1−β)² at h = 0 where B = (1+β²)Id − βG and the edge
//    of βG approaches 2β);
//
//  • the residual  Y = B·M − Id  with its exact finite-n four-part split
//    Y = Y₁M + Y₂ − Y₃ − Y₄ built from cavity/conditional measures:
//      (Y₁)_ii = β²(1−q) − β Σ_j g_ij δ_i m_j^{[i]}          (diagonal)
//      (Y₂)_ik = M_ik/(1−m_i²) − β Σ_j g_ij m_jk^{(i)}        (i ≠ k)
//      (Y₃)_ik = β Σ_j g_ij Δ_i m_jk^{[i]}
//      (Y₄)_ik = β m_i Σ_j g_ij δ_i m_jk^{[i]}
//    (j runs over [n]\{i}; all rows of Y₂…Y₄ have zero diagonal);
//
//  • the overlap-concentration sandwich
//      n^{-2}‖M‖²_op ≤ ⟨(R−⟨R⟩)²⟩ ≤ n^{-1}(‖M‖²_op + 2‖M‖_op),
//    with the exact middle term n^{-2}‖M‖_F² + 2n^{-2}(m, Mm);
//
//  • the resolvent approximation error ‖M − ((1+β²)Id − βG)^{-1}‖_op for
//    zero-field systems.
//
// Extremal eigenvalues use Lanczos with full reorthogonalization and a
// deterministic seeded start (dense solvers below a size threshold), so
// every report is reproducible bit-for-bit.
// ─────────────────────────────────────────────────────────────────────────────
#pragma once

#include <map>
#include <string>

#include <Eigen/Dense>

#include "sklab/gibbs_exact.hpp"

namespace sklab::spectral {

// ── extremal estimates ───────────────────────────────────────────────────────

struct SpectralEstimate {
  double value = 0.0;
  bool converged = true;  // false when the iteration cap was hit first
  int iterations = 0;     // Lanczos steps (0 for the dense path)
};

// ‖A‖_op for any rectangular A (largest singular value).  Deterministic
// seeded start, relative tolerance tol, iteration cap; if the cap is hit the
// best value is returned with converged = false.
SpectralEstimate operator_norm(const Eigen::MatrixXd& A, double tol = 1e-8);

// Smallest eigenvalue of a symmetric matrix (checked within 1e-10 relative
// to the entry scale, then symmetrized).
SpectralEstimate min_eigenvalue(const Eigen::MatrixXd& A, double tol = 1e-8);

// ── TAP Hessian ──────────────────────────────────────────────────────────────

struct TapHessianSpec {
  Eigen::VectorXd v;  // all |v_i| < 1
  double q = 0.0;
  double beta = 0.0;
  bool include_rank_one = true;  // the −(2β²/n) v⊗v term
};

Eigen::MatrixXd tap_hessian(const TapHessianSpec& spec,
                            const Eigen::MatrixXd& G);

// ── resolvent operator ───────────────────────────────────────────────────────

// ‖(D + β²(1−q)·Id − βG)^{-1}‖_op with D_ii = 1/(1−m_i²).  Definite
// operators go through extremal eigenvalues; indefinite ones fall back to a
// dense solve (n ≤ 2000).  Throws std::domain_error when min|eigenvalue|
// < 1e-10 (near-singular), reporting the offending estimate.
double resolvent_inverse_norm(const Eigen::VectorXd& m_vec, double q,
                              double beta, const Eigen::MatrixXd& G);

// ‖M_exact − ((1+β²)Id − βG)^{-1}‖_op; meaningful for zero-field systems
// where M is asymptotically a resolvent.  Throws on a singular resolvent.
double resolvent_approx_error(const Eigen::MatrixXd& M_exact,
                              const Eigen::MatrixXd& G, double beta);

// ── residual split ───────────────────────────────────────────────────────────

struct ResidualSplit {
  Eigen::MatrixXd Y;        // B·M − Id
  Eigen::VectorXd Y1_diag;  // diagonal of Y₁
  Eigen::MatrixXd Y1M;      // Y₁·M
  Eigen::MatrixXd Y2, Y3, Y4;
  std::map<std::string, double> op_norms;   // keys Y, Y1M, Y2, Y3, Y4
  std::map<std::string, double> fro_norms;  // same keys
  double split_error_fro = 0.0;  // ‖Y − (Y₁M + Y₂ − Y₃ − Y₄)‖_F
};

// Exact assembly by full enumeration of the system and all its cavity /
// conditional subsystems (so n is bounded by the enumeration cap).  The
// system's couplings must equal beta_scale·G; M_exact, when given, is
// cross-checked against the enumerated correlation matrix.
ResidualSplit residual_Y(const gibbs_exact::SpinSystem& s,
                         const Eigen::MatrixXd& G, double q,
                         const Eigen::MatrixXd* M_exact = nullptr);

// ── overlap-concentration sandwich ───────────────────────────────────────────

struct SandwichTriple {
  double lhs = 0.0;  // n^{-2}‖M‖²_op
  double mid = 0.0;  // ⟨(R−⟨R⟩)²⟩ = n^{-2}‖M‖_F² + 2n^{-2}(m,Mm)
  double rhs = 0.0;  // n^{-1}(‖M‖²_op + 2‖M‖_op)
};

SandwichTriple sandwich_check(const gibbs_exact::GibbsSolution& g);

// ── aggregate report ─────────────────────────────────────────────────────────

struct SpectralReport {
  double op_norm_M = 0.0;
  double op_norm_resolvent_inverse = 0.0;
  double min_eig_tap_hessian = 0.0;  // v = exact magnetization, rank-one kept
  std::map<std::string, double> residual_norms;  // operator norms of the parts
  SandwichTriple sandwich;
};

// Full diagnostic on one enumerable system (couplings = beta_scale·G).
SpectralReport spectral_report(const gibbs_exact::SpinSystem& s,
                               const Eigen::MatrixXd& G, double q);

std::string to_json(const SpectralReport& report);

}  // namespace sklab::spectral
