#include "sklab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "sklab/disorder.hpp"

namespace sklab::spectral {

namespace {

constexpr int kDenseLimit = 256;        // below this, dense solvers are exact
constexpr int kIndefiniteLimit = 2000;  // dense fallback bound for min|λ|
constexpr std::uint64_t kStartSeed = 0x1A2C05;

struct LanczosExtremes {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Lanczos with full reorthogonalization and a deterministic seeded start.
// Convergence: both extremal Ritz values stable to rel. tol across two
// consecutive checks of the tridiagonal spectrum.
template <class MatVec>
LanczosExtremes lanczos_extremes(int n, MatVec&& apply, double tol,
                                 int max_steps) {
  const int m = std::min(n, max_steps);
  Eigen::MatrixXd V(n, m);
  Eigen::VectorXd alphas(m), betas(m);
  Eigen::VectorXd v(n), w(n);
  for (int i = 0; i < n; ++i)
    v[i] = disorder::keyed_gaussian(kStartSeed, static_cast<std::uint64_t>(i),
                                    0);
  v.normalize();

  LanczosExtremes out;
  double prev_min = std::numeric_limits<double>::quiet_NaN();
  double prev_max = std::numeric_limits<double>::quiet_NaN();
  double beta_prev = 0.0;
  int j = 0;
  bool exhausted = false;

  auto tridiag_extremes = [&](int steps) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(alphas.head(steps),
                              betas.head(std::max(steps - 1, 0)),
                              Eigen::EigenvaluesOnly);
    out.lambda_min = es.eigenvalues()(0);
    out.lambda_max = es.eigenvalues()(steps - 1);
  };

  for (; j < m; ++j) {
    V.col(j) = v;
    apply(v, w);
    alphas[j] = v.dot(w);
    w.noalias() -= alphas[j] * v;
    if (j > 0) w.noalias() -= beta_prev * V.col(j - 1);
    // Full reorthogonalization (one pass suffices with the second
    // Gram-Schmidt sweep below against drift).
    for (int pass = 0; pass < 2; ++pass)
      w.noalias() -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    const double b = w.norm();
    betas[j] = b;
    if (b < 1e-13 * std::max(1.0, std::abs(alphas[j]))) {
      exhausted = true;  // invariant subspace: spectrum captured exactly
      ++j;
      break;
    }
    beta_prev = b;
    v = w / b;

    if ((j + 1) % 8 == 0 || j + 1 == m) {
      tridiag_extremes(j + 1);
      const bool stable =
          std::isfinite(prev_min) &&
          std::abs(out.lambda_min - prev_min) <=
              tol * std::max(1.0, std::abs(out.lambda_min)) &&
          std::abs(out.lambda_max - prev_max) <=
              tol * std::max(1.0, std::abs(out.lambda_max));
      prev_min = out.lambda_min;
      prev_max = out.lambda_max;
      if (stable) {
        out.converged = true;
        ++j;
        break;
      }
    }
  }
  out.iterations = j;
  if (exhausted || j == n) {
    tridiag_extremes(j);
    out.converged = true;
  }
  if (!out.converged) tridiag_extremes(j);
  return out;
}

LanczosExtremes symmetric_extremes(const Eigen::MatrixXd& S, double tol) {
  const int n = static_cast<int>(S.rows());
  if (n <= kDenseLimit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S,
                                                      Eigen::EigenvaluesOnly);
    return {es.eigenvalues()(0), es.eigenvalues()(n - 1), true, 0};
  }
  return lanczos_extremes(
      n, [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = S * x; },
      tol, 500);
}

void check_finite(const Eigen::MatrixXd& A, const char* what) {
  if (!A.allFinite())
    throw std::invalid_argument(std::string("spectral: non-finite ") + what);
}

double max_abs(const Eigen::MatrixXd& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd resolvent_operator(const Eigen::VectorXd& m_vec, double q,
                                   double beta, const Eigen::MatrixXd& G) {
  const int n = static_cast<int>(G.rows());
  if (G.cols() != n)
    throw std::invalid_argument("spectral: disorder matrix must be square");
  if (m_vec.size() != n)
    throw std::invalid_argument("spectral: magnetization length mismatch");
  check_finite(G, "disorder matrix");
  Eigen::MatrixXd B = -beta * G;
  for (int i = 0; i < n; ++i) {
    const double mi = m_vec[i];
    if (!(std::abs(mi) < 1.0))
      throw std::domain_error(
          "spectral: magnetization entries must satisfy |m_i| < 1");
    B(i, i) += 1.0 / (1.0 - mi * mi) + beta * beta * (1.0 - q);
  }
  return B;
}

}  // namespace

// ── extremal estimates ───────────────────────────────────────────────────────

SpectralEstimate operator_norm(const Eigen::MatrixXd& A, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("spectral: tol must be > 0");
  check_finite(A, "matrix");
  const int rows = static_cast<int>(A.rows());
  const int cols = static_cast<int>(A.cols());
  if (rows == 0 || cols == 0) return {0.0, true, 0};

  const bool symmetric =
      rows == cols &&
      (A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, max_abs(A));
  if (symmetric) {
    const LanczosExtremes ex = symmetric_extremes(A, tol);
    return {std::max(std::abs(ex.lambda_min), std::abs(ex.lambda_max)),
            ex.converged, ex.iterations};
  }
  if (std::max(rows, cols) <= kDenseLimit) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
    return {svd.singularValues()(0), true, 0};
  }
  // Largest eigenvalue of AᵀA (two matvecs per step).
  const LanczosExtremes ex = lanczos_extremes(
      cols,
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        y.noalias() = A.transpose() * (A * x);
      },
      tol, 500);
  return {std::sqrt(std::max(0.0, ex.lambda_max)), ex.converged,
          ex.iterations};
}

SpectralEstimate min_eigenvalue(const Eigen::MatrixXd& A, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("spectral: tol must be > 0");
  check_finite(A, "matrix");
  if (A.rows() != A.cols())
    throw std::invalid_argument("spectral: min_eigenvalue needs a square matrix");
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, max_abs(A)))
    throw std::invalid_argument(
        "spectral: matrix is not symmetric (max asymmetry " +
        std::to_string(asym) + ")");
  const Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  const LanczosExtremes ex = symmetric_extremes(S, tol);
  return {ex.lambda_min, ex.converged, ex.iterations};
}

// ── TAP Hessian ──────────────────────────────────────────────────────────────

Eigen::MatrixXd tap_hessian(const TapHessianSpec& spec,
                            const Eigen::MatrixXd& G) {
  const int n = static_cast<int>(G.rows());
  if (G.cols() != n)
    throw std::invalid_argument("spectral: disorder matrix must be square");
  if (spec.v.size() != n)
    throw std::invalid_argument("spectral: v length must match G");
  check_finite(G, "disorder matrix");
  Eigen::MatrixXd H = -spec.beta * G;
  const double shift = spec.beta * spec.beta * (1.0 - spec.q);
  for (int i = 0; i < n; ++i) {
    const double vi = spec.v[i];
    if (!(std::abs(vi) < 1.0))
      throw std::domain_error("spectral: TAP Hessian needs |v_i| < 1");
    H(i, i) += 1.0 / (1.0 - vi * vi) + shift;
  }
  if (spec.include_rank_one)
    H.noalias() -=
        (2.0 * spec.beta * spec.beta / n) * spec.v * spec.v.transpose();
  return H;
}

// ── resolvent operator ───────────────────────────────────────────────────────

double resolvent_inverse_norm(const Eigen::VectorXd& m_vec, double q,
                              double beta, const Eigen::MatrixXd& G) {
  const Eigen::MatrixXd B = resolvent_operator(m_vec, q, beta, G);
  const int n = static_cast<int>(B.rows());
  const LanczosExtremes ex = symmetric_extremes(B, 1e-10);

  constexpr double kSingular = 1e-10;
  double min_abs_eig;
  if (ex.lambda_min > 0.0) {
    min_abs_eig = ex.lambda_min;
  } else if (ex.lambda_max < 0.0) {
    min_abs_eig = -ex.lambda_max;
  } else {
    // Indefinite: min|λ| sits in the interior, use the dense spectrum.
    if (n > kIndefiniteLimit)
      throw std::invalid_argument(
          "spectral: indefinite resolvent operator beyond the dense fallback "
          "size");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B,
                                                      Eigen::EigenvaluesOnly);
    min_abs_eig = es.eigenvalues().cwiseAbs().minCoeff();
  }
  if (min_abs_eig < kSingular)
    throw std::domain_error(
        "spectral: resolvent operator near-singular (min |eigenvalue| ≈ " +
        std::to_string(min_abs_eig) + ")");
  return 1.0 / min_abs_eig;
}

double resolvent_approx_error(const Eigen::MatrixXd& M_exact,
                              const Eigen::MatrixXd& G, double beta) {
  const int n = static_cast<int>(G.rows());
  if (G.cols() != n || M_exact.rows() != n || M_exact.cols() != n)
    throw std::invalid_argument("spectral: dimension mismatch");
  check_finite(M_exact, "correlation matrix");
  check_finite(G, "disorder matrix");
  Eigen::MatrixXd R = -beta * G;
  R.diagonal().array() += 1.0 + beta * beta;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
  if (es.eigenvalues().cwiseAbs().minCoeff() < 1e-10)
    throw std::domain_error("spectral: singular resolvent at this disorder");
  const Eigen::MatrixXd R_inv =
      es.eigenvectors() *
      es.eigenvalues().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();
  return operator_norm(M_exact - R_inv).value;
}

// ── residual split ───────────────────────────────────────────────────────────

ResidualSplit residual_Y(const gibbs_exact::SpinSystem& s,
                         const Eigen::MatrixXd& G, double q,
                         const Eigen::MatrixXd* M_exact) {
  gibbs_exact::validate(s);
  const int n = s.n;
  if (G.rows() != n || G.cols() != n)
    throw std::invalid_argument("spectral: disorder matrix must match n");
  const double coupling_gap =
      (s.couplings - s.beta_scale * G).cwiseAbs().maxCoeff();
  if (coupling_gap > 1e-12 * std::max(1.0, max_abs(s.couplings)))
    throw std::invalid_argument(
        "spectral: system couplings are not beta_scale·G (max gap " +
        std::to_string(coupling_gap) + ")");

  const gibbs_exact::GibbsSolution g = gibbs_exact::enumerate(s);
  const Eigen::VectorXd& m = g.magnetization;
  const Eigen::MatrixXd& M = g.correlation;
  if (M_exact != nullptr) {
    if (M_exact->rows() != n || M_exact->cols() != n)
      throw std::invalid_argument("spectral: M_exact dimension mismatch");
    if ((*M_exact - M).cwiseAbs().maxCoeff() > 1e-8)
      throw std::invalid_argument(
          "spectral: M_exact does not match this system's correlation matrix");
  }

  const double beta = s.beta_scale;
  const double shift = beta * beta * (1.0 - q);

  ResidualSplit out;
  out.Y1_diag.resize(n);
  out.Y2 = Eigen::MatrixXd::Zero(n, n);
  out.Y3 = Eigen::MatrixXd::Zero(n, n);
  out.Y4 = Eigen::MatrixXd::Zero(n, n);

  for (int i = 0; i < n; ++i) {
    const gibbs_exact::GibbsSolution plus =
        gibbs_exact::enumerate(gibbs_exact::conditional(s, i, +1));
    const gibbs_exact::GibbsSolution minus =
        gibbs_exact::enumerate(gibbs_exact::conditional(s, i, -1));
    const gibbs_exact::GibbsSolution cav =
        gibbs_exact::enumerate(gibbs_exact::cavity(s, i));

    // Row i of couplings (= β g_i·) in cavity index order.
    Eigen::VectorXd coup(n - 1);
    for (int j = 0; j < n; ++j)
      if (j != i) coup[gibbs_exact::sub_index(j, i)] = s.couplings(i, j);

    const Eigen::VectorXd delta_m =
        0.5 * (plus.magnetization - minus.magnetization);
    out.Y1_diag[i] = shift - coup.dot(delta_m);

    // Per-row vectors over the target index k: Σ_j βg_ij X_jk = (Xᵀ coup)_k
    // for X ∈ {cavity correlation, δ/Δ of the conditional correlations}.
    const Eigen::VectorXd cav_sum = cav.correlation * coup;
    const Eigen::VectorXd eps_sum =
        0.5 * ((plus.correlation + minus.correlation) * coup);
    const Eigen::VectorXd delta_sum =
        0.5 * ((plus.correlation - minus.correlation) * coup);

    const double d_i = 1.0 / (1.0 - m[i] * m[i]);
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      const int km = gibbs_exact::sub_index(k, i);
      out.Y2(i, k) = M(i, k) * d_i - cav_sum[km];
      out.Y3(i, k) = eps_sum[km] - cav_sum[km];  // Σ β g_ij Δ_i m_jk^{[i]}
      out.Y4(i, k) = m[i] * delta_sum[km];
    }
  }

  Eigen::MatrixXd B = -s.couplings;  // −βG
  for (int i = 0; i < n; ++i)
    B(i, i) += 1.0 / (1.0 - m[i] * m[i]) + shift;
  out.Y = B * M - Eigen::MatrixXd::Identity(n, n);
  out.Y1M = out.Y1_diag.asDiagonal() * M;
  out.split_error_fro = (out.Y - (out.Y1M + out.Y2 - out.Y3 - out.Y4)).norm();

  const std::pair<const char*, const Eigen::MatrixXd*> parts[] = {
      {"Y", &out.Y},   {"Y1M", &out.Y1M}, {"Y2", &out.Y2},
      {"Y3", &out.Y3}, {"Y4", &out.Y4}};
  for (const auto& [name, mat] : parts) {
    out.op_norms[name] = operator_norm(*mat).value;
    out.fro_norms[name] = mat->norm();
  }
  return out;
}

// ── overlap-concentration sandwich ───────────────────────────────────────────

SandwichTriple sandwich_check(const gibbs_exact::GibbsSolution& g) {
  const int n = static_cast<int>(g.magnetization.size());
  if (n < 1 || g.correlation.rows() != n || g.correlation.cols() != n)
    throw std::invalid_argument("spectral: malformed Gibbs solution");
  const double nn = static_cast<double>(n);
  const double op = operator_norm(g.correlation).value;
  SandwichTriple t;
  t.lhs = op * op / (nn * nn);
  t.mid = (g.correlation.squaredNorm() +
           2.0 * g.magnetization.dot(g.correlation * g.magnetization)) /
          (nn * nn);
  t.rhs = (op * op + 2.0 * op) / nn;
  return t;
}

// ── aggregate report ─────────────────────────────────────────────────────────

SpectralReport spectral_report(const gibbs_exact::SpinSystem& s,
                               const Eigen::MatrixXd& G, double q) {
  const gibbs_exact::GibbsSolution g = gibbs_exact::enumerate(s);
  SpectralReport r;
  r.op_norm_M = operator_norm(g.correlation).value;
  r.op_norm_resolvent_inverse =
      resolvent_inverse_norm(g.magnetization, q, s.beta_scale, G);
  TapHessianSpec spec;
  spec.v = g.magnetization;
  spec.q = q;
  spec.beta = s.beta_scale;
  spec.include_rank_one = true;
  r.min_eig_tap_hessian = min_eigenvalue(tap_hessian(spec, G)).value;
  r.residual_norms = residual_Y(s, G, q).op_norms;
  r.sandwich = sandwich_check(g);
  return r;
}

std::string to_json(const SpectralReport& report) {
  nlohmann::json j;
  j["op_norm_M"] = report.op_norm_M;
  j["op_norm_resolvent_inverse"] = report.op_norm_resolvent_inverse;
  j["min_eig_tap_hessian"] = report.min_eig_tap_hessian;
  j["residual_norms"] = report.residual_norms;
  j["sandwich"] = {{"lhs", report.sandwich.lhs},
                   {"mid", report.sandwich.mid},
                   {"rhs", report.sandwich.rhs}};
  return j.dump(2);
}

}  // namespace sklab::spectral
