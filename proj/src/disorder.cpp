#include "sklab/disorder.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "sklab/scalar_rs.hpp"

namespace sklab::disorder {

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// w_ij in N(0, 1/n) for i ≠ j; exactly the value the full sample() stores.
inline double pre_entry(std::uint64_t seed, int i, int j, double inv_sqrt_n) {
  return inv_sqrt_n * keyed_gaussian(seed, static_cast<std::uint64_t>(i),
                                     static_cast<std::uint64_t>(j));
}

constexpr char kMagic[8] = {'S', 'K', 'L', 'A', 'B', 'G', '0', '1'};

}  // namespace

double keyed_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  std::uint64_t h = seed;
  h = mix64(h ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
  h = mix64(h ^ (0xC2B2AE3D27D4EB4FULL * (j + 1)));
  // 53-bit mantissa, offset half an ulp: strictly inside (0,1)
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double keyed_gaussian(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  return scalar_rs::standard_normal_quantile(keyed_uniform(seed, i, j));
}

DisorderSample sample(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("disorder::sample: n must be >= 2");
  DisorderSample d;
  d.n = n;
  d.seed = seed;
  d.W = Eigen::MatrixXd::Zero(n, n);
  d.G = Eigen::MatrixXd::Zero(n, n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const double inv_sqrt_2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) d.W(i, j) = pre_entry(seed, i, j, inv_sqrt_n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      // same expression order as sample_coupling_only ⇒ bitwise identical
      const double g = (d.W(i, j) + d.W(j, i)) * inv_sqrt_2;
      d.G(i, j) = g;
      d.G(j, i) = g;
    }
  return d;
}

Eigen::MatrixXd sample_coupling_only(int n, std::uint64_t seed) {
  if (n < 2)
    throw std::invalid_argument("disorder::sample_coupling_only: n >= 2");
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const double inv_sqrt_2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double g = (pre_entry(seed, i, j, inv_sqrt_n) +
                        pre_entry(seed, j, i, inv_sqrt_n)) * inv_sqrt_2;
      G(i, j) = g;
      G(j, i) = g;
    }
  return G;
}

// ── dense conditional decomposition ──────────────────────────────────────────

ConditionalState init_conditional(const DisorderSample& d) {
  if (d.W.rows() != d.n || d.W.cols() != d.n)
    throw std::invalid_argument("init_conditional: sample has no dense W");
  ConditionalState s;
  s.n = d.n;
  s.W_k = d.W;
  return s;
}

void deflate_step(ConditionalState& state, const Eigen::VectorXd& next_phi) {
  const int n = state.n;
  if (next_phi.size() != n)
    throw std::invalid_argument("deflate_step: dimension mismatch");
  Eigen::VectorXd phi = next_phi;

  // precondition: unit norm and orthogonal to the frame within 1e-8
  double worst = std::abs(phi.norm() - 1.0);
  for (const auto& prev : state.phi)
    worst = std::max(worst, std::abs(prev.dot(phi)));
  if (worst > 1e-8) {
    for (const auto& prev : state.phi) phi -= prev.dot(phi) * prev;
    const double r = phi.norm();
    if (r <= 1e-12)
      throw std::runtime_error(
          "deflate_step: next_phi lies in the span of the frame");
    phi /= r;
    state.reorthogonalized = true;
  }

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double inv_sqrt_2 = 1.0 / std::sqrt(2.0);
  const Eigen::VectorXd w_phi = state.W_k * phi;
  const Eigen::VectorXd wt_phi = state.W_k.transpose() * phi;
  // ζ^{(k)} = G^{(k)} √n φ^{(k)} with G^{(k)} = (W^{(k)} + W^{(k)T})/√2
  Eigen::VectorXd zeta = sqrt_n * inv_sqrt_2 * (w_phi + wt_phi);

  // W^{(k+1)} = W^{(k)} − [ W φ ⊗ φ + φ ⊗ Wᵀφ − (Wφ, φ) φ ⊗ φ ]
  const double diag = w_phi.dot(phi);
  state.W_k.noalias() -= w_phi * phi.transpose();
  state.W_k.noalias() -= phi * wt_phi.transpose();
  state.W_k.noalias() += diag * phi * phi.transpose();

  state.phi.push_back(std::move(phi));
  state.zeta.push_back(std::move(zeta));
}

Eigen::VectorXd gram_schmidt_next(const Eigen::VectorXd& m_next,
                                  const std::vector<Eigen::VectorXd>& frame) {
  const double input_norm = m_next.norm();
  if (!(input_norm > 0.0))
    throw std::runtime_error("gram_schmidt_next: zero input");
  Eigen::VectorXd v = m_next;
  for (int pass = 0; pass < 2; ++pass)  // second pass mops up rounding drift
    for (const auto& f : frame) v -= f.dot(v) * f;
  const double r = v.norm();
  if (r <= 1e-12 * input_norm)
    throw std::runtime_error("gram_schmidt_next: frame degenerate");
  return v / r;
}

// ── implicit conditional decomposition ───────────────────────────────────────

Eigen::VectorXd DeflatedOperator::apply(const Eigen::VectorXd& x) const {
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(G_->rows()));
  Eigen::VectorXd y = (*G_) * x;
  for (std::size_t s = 0; s < phi_.size(); ++s) {
    const double px = phi_[s].dot(x);
    const double zx = zeta_[s].dot(x);
    // ρ̄^{(s)} x = n^{-1/2}[ ζ (φ,x) + φ (ζ,x) − (ζ,φ) φ (φ,x) ]
    y.noalias() -= inv_sqrt_n * (px * zeta_[s] + (zx - c_[s] * px) * phi_[s]);
  }
  return y;
}

Eigen::VectorXd DeflatedOperator::advance(const Eigen::VectorXd& next_phi) {
  const double sqrt_n = std::sqrt(static_cast<double>(G_->rows()));
  Eigen::VectorXd zeta = sqrt_n * apply(next_phi);
  c_.push_back(zeta.dot(next_phi));
  phi_.push_back(next_phi);
  zeta_.push_back(zeta);
  return zeta;
}

// ── binary dump ──────────────────────────────────────────────────────────────

void write_binary(const std::string& path, const DisorderSample& d) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("write_binary: cannot open " + path);
  const std::uint64_t n64 = static_cast<std::uint64_t>(d.n);
  bool ok = std::fwrite(kMagic, 1, 8, f) == 8 &&
            std::fwrite(&n64, sizeof n64, 1, f) == 1 &&
            std::fwrite(&d.seed, sizeof d.seed, 1, f) == 1;
  for (int i = 0; ok && i < d.n; ++i) {
    // row-major rows of the (column-major) Eigen matrix
    Eigen::VectorXd row = d.G.row(i);
    ok = std::fwrite(row.data(), sizeof(double), d.n, f) ==
         static_cast<std::size_t>(d.n);
  }
  const bool closed = std::fclose(f) == 0;
  if (!ok || !closed) throw std::runtime_error("write_binary: short write");
}

DisorderSample read_binary(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("read_binary: cannot open " + path);
  char magic[8];
  std::uint64_t n64 = 0, seed = 0;
  bool ok = std::fread(magic, 1, 8, f) == 8 &&
            std::memcmp(magic, kMagic, 8) == 0 &&
            std::fread(&n64, sizeof n64, 1, f) == 1 &&
            std::fread(&seed, sizeof seed, 1, f) == 1 && n64 >= 2 &&
            n64 <= (1u << 20);
  DisorderSample d;
  if (ok) {
    d.n = static_cast<int>(n64);
    d.seed = seed;
    d.G.resize(d.n, d.n);
    Eigen::VectorXd row(d.n);
    for (int i = 0; ok && i < d.n; ++i) {
      ok = std::fread(row.data(), sizeof(double), d.n, f) ==
           static_cast<std::size_t>(d.n);
      if (ok) d.G.row(i) = row;
    }
  }
  std::fclose(f);
  if (!ok)
    throw std::runtime_error("read_binary: bad magic or truncated file: " +
                             path);
  return d;
}

}  // namespace sklab::disorder
