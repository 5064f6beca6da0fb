#include "sklab/scalar_rs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sklab::scalar_rs {

namespace {

constexpr double kLog2 = 0.6931471805599453094172321214581766;

// log cosh(x) without overflow: |x| + log(1 + e^{−2|x|}) − log 2.
inline double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - kLog2;
}

void check_params(const RsParams& p, const char* op) {
  if (!(p.beta >= 0.0) || !std::isfinite(p.beta))
    throw std::invalid_argument(std::string(op) + ": beta must be >= 0");
  if (!(p.h >= 0.0) || !std::isfinite(p.h))
    throw std::invalid_argument(std::string(op) + ": h must be >= 0");
}

// E tanh²(h + β√q Z) — the fixed-point map for q.
double tanh_sq_map(const RsParams& p, double q, int order) {
  const double s = p.beta * std::sqrt(std::max(q, 0.0));
  const QuadratureRule& r = gauss_hermite(order);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double t = std::tanh(p.h + s * r.nodes[i]);
    acc += r.weights[i] * t * t;
  }
  return acc;
}

}  // namespace

// ── quadrature ───────────────────────────────────────────────────────────────

const QuadratureRule& gauss_hermite(int order) {
  if (order < 1) throw std::invalid_argument("gauss_hermite: order < 1");
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  // Golub–Welsch on the probabilists' Hermite Jacobi matrix: zero diagonal,
  // off-diagonal √k.  Nodes are the eigenvalues; weight_i = (first component
  // of the i-th normalised eigenvector)² (total mass 1).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(static_cast<double>(k));
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

double gh_expect(const std::function<double(double)>& f, int order) {
  const QuadratureRule& r = gauss_hermite(order);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double v = f(r.nodes[i]);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "gh_expect: integrand non-finite at node z = " << r.nodes[i];
      throw std::domain_error(os.str());
    }
    acc += r.weights[i] * v;
  }
  return acc;
}

double standard_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("standard_normal_quantile: p must lie in (0,1)");
  // Wichura's algorithm AS241 (PPND16): three rational approximations.
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                   6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
               1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return num / den;
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return (q < 0.0) ? -val : val;
}

// ── RS fixed point ───────────────────────────────────────────────────────────

double solve_q(const RsParams& p, double tol, int order) {
  check_params(p, "solve_q");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_q: tol must be > 0");
  double q = std::tanh(p.h) * std::tanh(p.h);
  for (int it = 0; it < 10000; ++it) {
    const double next = tanh_sq_map(p, q, order);
    if (std::abs(next - q) < tol) return next;
    q = 0.5 * q + 0.5 * next;  // damping keeps the iteration contractive
  }
  // Bisection fallback on g(q) = q − E tanh²: g(0) < 0 (h > 0) and g(1⁻) > 0
  // since E tanh² < 1.
  double lo = 0.0, hi = 1.0 - 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - tanh_sq_map(p, mid, order) < 0.0) lo = mid; else hi = mid;
  }
  q = 0.5 * (lo + hi);
  const double residual = std::abs(q - tanh_sq_map(p, q, order));
  if (residual >= tol) {
    std::ostringstream os;
    os << "solve_q: no convergence; last iterate " << q
       << ", residual " << residual;
    throw std::runtime_error(os.str());
  }
  return q;
}

double fourth_moment(const RsParams& p, double q, int order) {
  const double s = p.beta * std::sqrt(std::max(q, 0.0));
  const QuadratureRule& r = gauss_hermite(order);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double t = std::tanh(p.h + s * r.nodes[i]);
    acc += r.weights[i] * t * t * t * t;
  }
  return acc;
}

AtResult at_condition(const RsParams& p, int order) {
  check_params(p, "at_condition");
  const double q = solve_q(p, 1e-13, order);
  const double s = p.beta * std::sqrt(q);
  const QuadratureRule& r = gauss_hermite(order);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double c = std::cosh(p.h + s * r.nodes[i]);
    const double sech2 = 1.0 / (c * c);
    acc += r.weights[i] * sech2 * sech2;
  }
  AtResult out;
  out.lhs = p.beta * p.beta * acc;
  out.satisfied = out.lhs < 1.0;
  return out;
}

// ── replica-bound functional ─────────────────────────────────────────────────

double phi_functional(const RsParams& p, double m, double qprime,
                      std::optional<double> q_opt, int order) {
  check_params(p, "phi_functional");
  if (!(m > 0.0) || m > 1.0 + 1e-3)
    throw std::domain_error("phi_functional: m must lie in (0, 1] "
                            "(small overshoot for finite differences only)");
  const double q = q_opt ? *q_opt : solve_q(p, 1e-13, order);
  if (qprime < q - 1e-15 || qprime > 1.0 + 1e-15)
    throw std::domain_error("phi_functional: need q <= q' <= 1");
  const double b_out = p.beta * std::sqrt(std::max(q, 0.0));
  const double b_in = p.beta * std::sqrt(std::max(qprime - q, 0.0));
  const QuadratureRule& r = gauss_hermite(order);

  // (1/m) E_Z log E_{Z′} cosh^m(h + b_out Z + b_in Z′), inner in log space.
  double outer = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double a = p.h + b_out * r.nodes[i];
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < r.nodes.size(); ++j) {
      const double t = std::log(r.weights[j]) + m * log_cosh(a + b_in * r.nodes[j]);
      if (t > best) best = t;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < r.nodes.size(); ++j) {
      const double t = std::log(r.weights[j]) + m * log_cosh(a + b_in * r.nodes[j]);
      sum += std::exp(t - best);
    }
    outer += r.weights[i] * (best + std::log(sum));
  }
  return kLog2 + 0.25 * p.beta * p.beta * (1.0 - qprime) * (1.0 - qprime)
       - 0.25 * p.beta * p.beta * m * (qprime * qprime - q * q)
       + outer / m;
}

AtPlusMargin at_plus_margin(const RsParams& p, int grid_size, int order) {
  check_params(p, "at_plus_margin");
  if (grid_size < 1) throw std::invalid_argument("at_plus_margin: empty grid");
  const double q = solve_q(p, 1e-13, order);
  const double delta = 1e-5;
  AtPlusMargin out;
  out.margin = std::numeric_limits<double>::infinity();
  out.grid.reserve(grid_size);
  out.values.reserve(grid_size);
  for (int j = 1; j <= grid_size; ++j) {
    // Chebyshev nodes of the first kind mapped into (q, 1); interior by
    // construction, clustering at both ends where the margin is smallest.
    const double c =
        std::cos(std::numbers::pi * (2.0 * j - 1.0) / (2.0 * grid_size));
    const double qp = q + (1.0 - q) * 0.5 * (c + 1.0);
    const double d_m =
        (phi_functional(p, 1.0, qp, q, order) -
         phi_functional(p, 1.0 - delta, qp, q, order)) / delta;
    out.grid.push_back(qp);
    out.values.push_back(-d_m);
    if (-d_m < out.margin) {
      out.margin = -d_m;
      out.argmin_qprime = qp;
    }
  }
  return out;
}

// ── limiting variances ───────────────────────────────────────────────────────

NuVariances nu_variances(const RsParams& p, std::optional<double> A,
                         std::optional<double> B, int order) {
  check_params(p, "nu_variances");
  const double q = solve_q(p, 1e-13, order);
  const double q4 = fourth_moment(p, q, order);
  const double b2 = p.beta * p.beta;
  const double d1 = 1.0 - b2 * (1.0 - 2.0 * q + q4);
  const double d2 = 1.0 - b2 * (1.0 - 4.0 * q + 3.0 * q4);
  if (d1 <= 0.0 || d2 <= 0.0)
    throw std::domain_error(
        "nu_variances: outside the validity region (a variance denominator "
        "is non-positive)");
  NuVariances out;
  out.nu1_sq = (1.0 - 2.0 * q + q4) / d1;
  out.nu2_sq = (q - q4) / (d1 * d2);
  const double a = A.value_or(std::sqrt(out.nu1_sq));
  const double b = B.value_or(std::sqrt(out.nu2_sq));
  out.nu3_sq = (q4 - q * q) / d2
             + b2 * (q4 - q * q) * a * a / d2
             + 2.0 * b2 * (2.0 * q + q * q - q4) * b * b / d2;
  return out;
}

// ── Bolthausen sequences ─────────────────────────────────────────────────────

double correlation_map_psi(const RsParams& p, double q, double t, int order) {
  if (t < -1e-15 || t > q + 1e-15)
    throw std::domain_error("correlation_map_psi: need 0 <= t <= q");
  t = std::clamp(t, 0.0, q);
  const double b_out = p.beta * std::sqrt(t);
  const double b_in = p.beta * std::sqrt(q - t);
  const QuadratureRule& r = gauss_hermite(order);
  // The two inner Gaussians are conditionally independent given the outer
  // node, so the tensorised triple sum collapses to Σ_i w_i t(z_i)².
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double a = p.h + b_out * r.nodes[i];
    double inner = 0.0;
    for (std::size_t j = 0; j < r.nodes.size(); ++j)
      inner += r.weights[j] * std::tanh(a + b_in * r.nodes[j]);
    acc += r.weights[i] * inner * inner;
  }
  return acc;
}

BolthausenSequences bolthausen_sequences(const RsParams& p, int k_max,
                                         int order) {
  check_params(p, "bolthausen_sequences");
  if (k_max < 1) throw std::invalid_argument("bolthausen_sequences: k_max < 1");
  const double q = solve_q(p, 1e-13, order);
  const double sq = std::sqrt(q);
  const QuadratureRule& r = gauss_hermite(order);

  double gamma1 = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    gamma1 += r.weights[i] * std::tanh(p.h + p.beta * sq * r.nodes[i]);

  BolthausenSequences out;
  out.alpha.reserve(k_max);
  out.gamma.reserve(k_max);
  out.gamma_cap_sq.reserve(k_max);
  out.alpha.push_back(sq * gamma1);
  out.gamma.push_back(gamma1);
  out.gamma_cap_sq.push_back(gamma1 * gamma1);

  constexpr double kDegenerate = 1e-12;
  for (int k = 2; k <= k_max; ++k) {
    const double cap_prev = out.gamma_cap_sq.back();
    const double denom = q - cap_prev;
    const double alpha_k = correlation_map_psi(p, q, out.alpha.back(), order);
    if (denom <= kDegenerate || alpha_k < cap_prev) {
      // Γ² has converged to q at working precision; freeze the sequences.
      if (!out.truncated_at) out.truncated_at = k;
      out.alpha.push_back(out.alpha.back());
      out.gamma.push_back(0.0);
      out.gamma_cap_sq.push_back(cap_prev);
      continue;
    }
    const double gamma_k = (alpha_k - cap_prev) / std::sqrt(denom);
    out.alpha.push_back(alpha_k);
    out.gamma.push_back(gamma_k);
    out.gamma_cap_sq.push_back(cap_prev + gamma_k * gamma_k);
  }
  return out;
}

SeCovariance se_covariance(const RsParams& p, int k, int order) {
  check_params(p, "se_covariance");
  if (k < 1) throw std::invalid_argument("se_covariance: k < 1");
  const double q = solve_q(p, 1e-13, order);
  const BolthausenSequences seq =
      bolthausen_sequences(p, std::max(1, k - 1), order);
  SeCovariance out;
  out.K = Eigen::MatrixXd::Zero(k, k);
  for (int s = 0; s < k; ++s)
    for (int t = 0; t < k; ++t)
      out.K(s, t) = (s == t) ? q : seq.alpha[std::min(s, t)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.K);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  return out;
}

// ── restricted variational function ──────────────────────────────────────────

SigmaValue sigma_variational(const RsParams& p, double x, double lambda_u,
                             int order) {
  check_params(p, "sigma_variational");
  if (!(lambda_u < 1.0))
    throw std::domain_error("sigma_variational: need lambda_u < 1 so that "
                            "cosh^2 - lambda_u stays positive");
  const double q = solve_q(p, 1e-13, order);
  if (std::abs(x) > 1.0 / std::sqrt(q) + 1e-12)
    throw std::domain_error("sigma_variational: need |x| <= q^{-1/2}");

  const double b2 = p.beta * p.beta;
  const QuadratureRule& r = gauss_hermite(order);
  double e_inv = 0.0;       // E[1/D_N]
  double e_cs = 0.0;        // E[(C+S)/D_N²]
  double e_cxs = 0.0;       // E[C·S/D_N³]
  double e_invc = 0.0;      // E[1/(C·D_N)]
  double e_cm2 = 0.0;       // E[C·M²/D_N²]
  double e_m2 = 0.0;        // E[M²/D_N]
  const double s = p.beta * std::sqrt(q);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double y = p.h + s * r.nodes[i];
    const double ch = std::cosh(y);
    const double C = ch * ch;
    const double S = C - 1.0;  // sinh² = cosh² − 1
    const double M = std::tanh(y);
    const double DN = C - lambda_u;
    const double w = r.weights[i];
    e_inv += w / DN;
    e_cs += w * (C + S) / (DN * DN);
    e_cxs += w * C * S / (DN * DN * DN);
    e_invc += w / (C * DN);
    e_cm2 += w * C * M * M / (DN * DN);
    e_m2 += w * M * M / DN;
  }
  SigmaValue out;
  out.c1 = b2 * e_invc - 2.0 * b2 * e_cm2 - 1.0;
  out.x_coef = 2.0 * b2 * q - 2.0 * b2 * b2 * q * e_cs +
               8.0 * b2 * b2 * q * e_cxs - out.c1 * out.c1 / e_m2;
  out.value = -b2 * (1.0 - q) - lambda_u + b2 * e_inv + x * x * out.x_coef;
  return out;
}

// ── aggregate ────────────────────────────────────────────────────────────────

ScalarTheory compute_theory(const RsParams& p, int k_max, int order) {
  check_params(p, "compute_theory");
  ScalarTheory t;
  t.params = p;
  t.quadrature_order = order;
  t.q = solve_q(p, 1e-13, order);
  t.q4 = fourth_moment(p, t.q, order);
  const AtResult at = at_condition(p, order);
  t.at_lhs = at.lhs;
  t.at_satisfied = at.satisfied;
  t.at_plus_margin = at_plus_margin(p, 64, order).margin;
  const NuVariances nu = nu_variances(p, std::nullopt, std::nullopt, order);
  t.nu1_sq = nu.nu1_sq;
  t.nu2_sq = nu.nu2_sq;
  const BolthausenSequences seq = bolthausen_sequences(p, k_max, order);
  t.alpha = seq.alpha;
  t.gamma = seq.gamma;
  t.gamma_cap_sq = seq.gamma_cap_sq;
  t.truncated_at = seq.truncated_at;
  return t;
}

}  // namespace sklab::scalar_rs
