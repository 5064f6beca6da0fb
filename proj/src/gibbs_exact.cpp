#include "sklab/gibbs_exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sklab::gibbs_exact {

namespace {

// ── enumeration core ─────────────────────────────────────────────────────────
// Gray-code walk over {−1,+1}^n: one spin flips per step, so the energy and
// the local fields f = Jσ + h update in O(n).  Both are refreshed from
// scratch every 4096 steps to stop rounding drift from accumulating over the
// 2^n-step walk.  visit(H, σ) is called once per state.
template <class F>
void for_each_state(const SpinSystem& s, F&& visit) {
  const int n = s.n;
  Eigen::VectorXd sigma = Eigen::VectorXd::Constant(n, -1.0);
  Eigen::VectorXd f = s.couplings * sigma + s.fields;
  double H = 0.5 * sigma.dot(f + s.fields);
  visit(H, sigma);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t t = 1; t < total; ++t) {
    const int p = std::countr_zero(t);
    const double s_new = -sigma[p];
    H -= 2.0 * sigma[p] * f[p];
    sigma[p] = s_new;
    f.noalias() += (2.0 * s_new) * s.couplings.col(p);
    if ((t & 0xFFF) == 0) {
      f.noalias() = s.couplings * sigma + s.fields;
      H = 0.5 * sigma.dot(f + s.fields);
    }
    visit(H, sigma);
  }
}

// Streaming log Σ_σ e^{H(σ)}.
double log_partition(const SpinSystem& s) {
  double running_max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for_each_state(s, [&](double H, const Eigen::VectorXd&) {
    if (H > running_max) {
      sum = sum * std::exp(running_max - H) + 1.0;
      running_max = H;
    } else {
      sum += std::exp(H - running_max);
    }
  });
  return running_max + std::log(sum);
}

void check_enumerable(const SpinSystem& s, int cap) {
  if (cap < 1) throw std::invalid_argument("gibbs_exact: cap must be >= 1");
  if (s.n > cap)
    throw std::invalid_argument(
        "gibbs_exact: n = " + std::to_string(s.n) +
        " exceeds the enumeration cap " + std::to_string(cap) +
        "; use the harness Monte Carlo sampler for larger systems");
}

void check_site(const SpinSystem& s, int i, const char* what) {
  if (i < 0 || i >= s.n)
    throw std::invalid_argument(std::string("gibbs_exact: ") + what +
                                " index " + std::to_string(i) +
                                " outside [0, " + std::to_string(s.n) + ")");
}

// Parity moments given a precomputed log-partition value (saves the extra
// normalization pass when many cumulants are evaluated on one system).
std::vector<double> parity_moments_impl(const SpinSystem& s,
                                        const std::vector<int>& sites,
                                        double log_z) {
  const int d = static_cast<int>(sites.size());
  if (d > 6)
    throw std::invalid_argument(
        "gibbs_exact: parity moments limited to 6 sites");
  for (int site : sites) check_site(s, site, "site");
  const std::size_t m = std::size_t{1} << d;
  std::vector<double> acc(m, 0.0), prod(m, 0.0);
  for_each_state(s, [&](double H, const Eigen::VectorXd& sigma) {
    prod[0] = std::exp(H - log_z);
    for (std::size_t mask = 1; mask < m; ++mask) {
      const int low = std::countr_zero(mask);
      prod[mask] = prod[mask & (mask - 1)] * sigma[sites[low]];
    }
    for (std::size_t mask = 0; mask < m; ++mask) acc[mask] += prod[mask];
  });
  const double norm = acc[0];
  for (auto& v : acc) v /= norm;
  return acc;
}

int factorial(int k) {
  static const int table[] = {1, 1, 2, 6, 24, 120, 720};
  return table[k];
}

// Moment→cumulant Möbius inversion:
//   κ(X_1,…,X_k) = Σ_{partitions π} (−1)^{|π|−1} (|π|−1)! Π_{B∈π} E[Π_{t∈B} X_t].
// Partitions are enumerated as restricted-growth strings; each block's
// moment is a parity-moment lookup through the XOR of its site bits
// (σ_i² = 1, so repeated sites cancel pairwise).
double cumulant_impl(const SpinSystem& s, std::vector<int> indices,
                     double log_z) {
  const int k = static_cast<int>(indices.size());
  if (k < 1 || k > 6)
    throw std::invalid_argument("gibbs_exact: cumulant order must be 1..6");
  for (int idx : indices) check_site(s, idx, "cumulant");
  // Canonical order makes permutation invariance bit-exact.
  std::sort(indices.begin(), indices.end());

  std::vector<int> distinct(indices);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  std::vector<std::uint32_t> pos_bit(k);
  for (int t = 0; t < k; ++t) {
    const auto it =
        std::lower_bound(distinct.begin(), distinct.end(), indices[t]);
    pos_bit[t] = std::uint32_t{1}
                 << static_cast<int>(it - distinct.begin());
  }
  const std::vector<double> moments = parity_moments_impl(s, distinct, log_z);

  double total = 0.0;
  std::vector<int> assign(k, 0);
  std::vector<std::uint32_t> block_mask(k, 0);
  // Depth-first over restricted-growth strings: assign[t] ∈ [0, blocks].
  auto recurse = [&](auto&& self, int t, int blocks) -> void {
    if (t == k) {
      double prod = 1.0;
      for (int b = 0; b < blocks; ++b) prod *= moments[block_mask[b]];
      const double sign = (blocks % 2 == 1) ? 1.0 : -1.0;
      total += sign * factorial(blocks - 1) * prod;
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      block_mask[b] ^= pos_bit[t];
      assign[t] = b;
      self(self, t + 1, std::max(blocks, b + 1));
      block_mask[b] ^= pos_bit[t];
    }
  };
  recurse(recurse, 0, 0);
  return total;
}

}  // namespace

// ── construction / validation ────────────────────────────────────────────────

SpinSystem make_sk_system(const Eigen::MatrixXd& G, double beta, double h) {
  SpinSystem s;
  s.n = static_cast<int>(G.rows());
  s.couplings = beta * G;
  s.fields = Eigen::VectorXd::Constant(s.n, h);
  s.beta_scale = beta;
  validate(s);
  return s;
}

void validate(const SpinSystem& s) {
  if (s.n < 1) throw std::invalid_argument("gibbs_exact: n must be >= 1");
  if (s.couplings.rows() != s.n || s.couplings.cols() != s.n)
    throw std::invalid_argument("gibbs_exact: couplings must be n x n");
  if (s.fields.size() != s.n)
    throw std::invalid_argument("gibbs_exact: fields must have length n");
  for (int i = 0; i < s.n; ++i) {
    if (s.couplings(i, i) != 0.0)
      throw std::invalid_argument(
          "gibbs_exact: couplings must have zero diagonal");
    for (int j = i + 1; j < s.n; ++j)
      if (s.couplings(i, j) != s.couplings(j, i))
        throw std::invalid_argument("gibbs_exact: couplings must be symmetric");
  }
  if (!s.couplings.allFinite() || !s.fields.allFinite())
    throw std::invalid_argument("gibbs_exact: non-finite system parameters");
}

// ── enumeration ──────────────────────────────────────────────────────────────

GibbsSolution enumerate(const SpinSystem& s, int cap) {
  validate(s);
  check_enumerable(s, cap);
  const int n = s.n;
  const double lz = log_partition(s);

  constexpr int kBlock = 64;
  Eigen::MatrixXd X(n, kBlock);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  double norm = 0.0, energy = 0.0;
  int col = 0;
  for_each_state(s, [&](double H, const Eigen::VectorXd& sigma) {
    const double w = std::exp(H - lz);
    norm += w;
    energy += w * H;
    m.noalias() += w * sigma;
    X.col(col++) = std::sqrt(w) * sigma;
    if (col == kBlock) {
      second.selfadjointView<Eigen::Lower>().rankUpdate(X, 1.0);
      col = 0;
    }
  });
  if (col > 0)
    second.selfadjointView<Eigen::Lower>().rankUpdate(X.leftCols(col), 1.0);

  GibbsSolution g;
  g.log_z = lz + std::log(norm);
  g.magnetization = m / norm;
  Eigen::MatrixXd s2 = second.selfadjointView<Eigen::Lower>();
  g.correlation = s2 / norm - g.magnetization * g.magnetization.transpose();
  g.mean_energy = energy / norm;
  return g;
}

std::vector<double> parity_moments(const SpinSystem& s,
                                   const std::vector<int>& sites) {
  validate(s);
  check_enumerable(s, SpinSystem::kDefaultCap);
  return parity_moments_impl(s, sites, log_partition(s));
}

// ── cumulants ────────────────────────────────────────────────────────────────

double cumulant(const SpinSystem& s, const std::vector<int>& indices) {
  validate(s);
  check_enumerable(s, SpinSystem::kDefaultCap);
  return cumulant_impl(s, indices, log_partition(s));
}

double cumulant_replica(const SpinSystem& s, const std::vector<int>& indices) {
  validate(s);
  check_enumerable(s, SpinSystem::kDefaultCap);
  const int p = static_cast<int>(indices.size());
  if (p < 1 || p > 4)
    throw std::invalid_argument(
        "gibbs_exact: replica representation limited to order 1..4");
  for (int idx : indices) check_site(s, idx, "cumulant");

  std::vector<int> distinct(indices);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()),
                 distinct.end());
  std::vector<std::uint32_t> pos_bit(p);
  for (int t = 0; t < p; ++t) {
    const auto it =
        std::lower_bound(distinct.begin(), distinct.end(), indices[t]);
    pos_bit[t] = std::uint32_t{1}
                 << static_cast<int>(it - distinct.begin());
  }
  const std::vector<double> moments =
      parity_moments_impl(s, distinct, log_partition(s));

  // ⟨σ¹_{j1} Π_{u=1}^{p−1} (Σ_{v≤u} σ^v_{j_{u+1}} − u·σ^{u+1}_{j_{u+1}})⟩:
  // expand each factor into its u+1 monomials (coefficient +1 for replica
  // v ≤ u, coefficient −u for replica u+1); each of the ≤ p! resulting
  // terms factorizes over independent replicas into parity moments.
  double total = 0.0;
  std::vector<int> choice(std::max(p - 1, 1), 0);
  std::vector<std::uint32_t> replica_mask(p + 1, 0);
  auto expand = [&](auto&& self, int u) -> void {
    if (u == p) {
      std::fill(replica_mask.begin(), replica_mask.end(), 0u);
      replica_mask[1] ^= pos_bit[0];
      double coef = 1.0;
      for (int v = 1; v < p; ++v) {
        const int c = choice[v - 1];
        if (c < v) {
          replica_mask[c + 1] ^= pos_bit[v];
        } else {
          replica_mask[v + 1] ^= pos_bit[v];
          coef *= -static_cast<double>(v);
        }
      }
      double prod = coef;
      for (int r = 1; r <= p; ++r) prod *= moments[replica_mask[r]];
      total += prod;
      return;
    }
    for (int c = 0; c <= u; ++c) {
      choice[u - 1] = c;
      self(self, u + 1);
    }
  };
  expand(expand, 1);
  return total;
}

double kp_point(const SpinSystem& s, const std::vector<int>& free_indices,
                int k) {
  validate(s);
  check_enumerable(s, SpinSystem::kDefaultCap);
  const int p = static_cast<int>(free_indices.size());
  if (k < 0) throw std::invalid_argument("gibbs_exact: k must be >= 0");
  if (2 * k + p < 1 || 2 * k + p > 6)
    throw std::invalid_argument(
        "gibbs_exact: kp_point requires 1 <= 2k + p <= 6");
  for (int idx : free_indices) check_site(s, idx, "free");

  const double lz = log_partition(s);
  std::map<std::vector<int>, double> memo;
  auto memo_cumulant = [&](std::vector<int> indices) {
    std::sort(indices.begin(), indices.end());
    const auto it = memo.find(indices);
    if (it != memo.end()) return it->second;
    const double value = cumulant_impl(s, indices, lz);
    memo.emplace(std::move(indices), value);
    return value;
  };

  // Odometer over (i1,…,ik) ∈ [n]^k; each averaged index enters twice.
  std::vector<int> tuple(std::max(k, 1), 0);
  double total = 0.0;
  auto sweep = [&](auto&& self, int depth) -> void {
    if (depth == k) {
      std::vector<int> indices;
      indices.reserve(2 * k + p);
      for (int t = 0; t < k; ++t) {
        indices.push_back(tuple[t]);
        indices.push_back(tuple[t]);
      }
      indices.insert(indices.end(), free_indices.begin(), free_indices.end());
      total += memo_cumulant(std::move(indices));
      return;
    }
    for (int i = 0; i < s.n; ++i) {
      tuple[depth] = i;
      self(self, depth + 1);
    }
  };
  sweep(sweep, 0);
  return total * std::pow(static_cast<double>(s.n), -k);
}

// ── cavity / conditional ─────────────────────────────────────────────────────

SpinSystem cavity(const SpinSystem& s, int i) {
  validate(s);
  check_site(s, i, "cavity");
  if (s.n < 2)
    throw std::invalid_argument("gibbs_exact: cavity needs n >= 2");
  SpinSystem out;
  out.n = s.n - 1;
  out.beta_scale = s.beta_scale;
  out.couplings.resize(out.n, out.n);
  out.fields.resize(out.n);
  for (int u = 0; u < s.n; ++u) {
    if (u == i) continue;
    const int um = sub_index(u, i);
    out.fields[um] = s.fields[u];
    for (int v = 0; v < s.n; ++v) {
      if (v == i) continue;
      out.couplings(um, sub_index(v, i)) = s.couplings(u, v);
    }
  }
  return out;
}

SpinSystem conditional(const SpinSystem& s, int i, int sigma_i) {
  if (sigma_i != 1 && sigma_i != -1)
    throw std::invalid_argument("gibbs_exact: sigma_i must be +1 or -1");
  SpinSystem out = cavity(s, i);
  for (int u = 0; u < s.n; ++u)
    if (u != i)
      out.fields[sub_index(u, i)] += s.couplings(i, u) * sigma_i;
  return out;
}

DeltaEps delta_eps(const SpinSystem& s, int i, int j) {
  check_site(s, i, "delta_eps");
  check_site(s, j, "delta_eps");
  if (i == j)
    throw std::invalid_argument("gibbs_exact: delta_eps needs j != i");
  const int jm = sub_index(j, i);
  const GibbsSolution plus = enumerate(conditional(s, i, +1));
  const GibbsSolution minus = enumerate(conditional(s, i, -1));
  const GibbsSolution cav = enumerate(cavity(s, i));
  DeltaEps out;
  out.delta = 0.5 * (plus.magnetization[jm] - minus.magnetization[jm]);
  out.eps = 0.5 * (plus.magnetization[jm] + minus.magnetization[jm]);
  out.Delta = out.eps - cav.magnetization[jm];
  return out;
}

DeltaEps delta_eps_pair(const SpinSystem& s, int i, int j, int k) {
  check_site(s, i, "delta_eps");
  check_site(s, j, "delta_eps");
  check_site(s, k, "delta_eps");
  if (i == j || i == k)
    throw std::invalid_argument("gibbs_exact: delta_eps needs j, k != i");
  const int jm = sub_index(j, i), km = sub_index(k, i);
  const GibbsSolution plus = enumerate(conditional(s, i, +1));
  const GibbsSolution minus = enumerate(conditional(s, i, -1));
  const GibbsSolution cav = enumerate(cavity(s, i));
  DeltaEps out;
  out.delta = 0.5 * (plus.correlation(jm, km) - minus.correlation(jm, km));
  out.eps = 0.5 * (plus.correlation(jm, km) + minus.correlation(jm, km));
  out.Delta = out.eps - cav.correlation(jm, km);
  return out;
}

// ── overlap statistics ───────────────────────────────────────────────────────

OverlapStats overlap_stats(const SpinSystem& s, double q_ref, double K,
                           int proxy_cap) {
  if (!(K > 0.0))
    throw std::domain_error("gibbs_exact: overlap proxy needs K > 0");
  const GibbsSolution g = enumerate(s);
  const int n = s.n;
  const Eigen::VectorXd& m = g.magnetization;
  const Eigen::MatrixXd& M = g.correlation;

  OverlapStats out;
  out.mean_R = m.squaredNorm() / n;
  out.var_R =
      (M.squaredNorm() + 2.0 * m.dot(M * m)) / (static_cast<double>(n) * n);

  if (n > proxy_cap) {
    out.exp_conc_proxy = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  // ⟨exp(n(R_{1,2} − q_ref)²/K)⟩ over the product measure, by a full pair
  // enumeration.  States are packed as sign bitmasks so the overlap is a
  // popcount; pair weights are bucketed by overlap value first, leaving
  // only n+1 exponentials (computed in log space to detect overflow).
  const std::uint32_t states = std::uint32_t{1} << n;
  std::vector<double> weight(states);
  std::vector<std::uint32_t> mask(states);
  std::uint32_t idx = 0;
  for_each_state(s, [&](double H, const Eigen::VectorXd& sigma) {
    weight[idx] = std::exp(H - g.log_z);
    std::uint32_t bits = 0;
    for (int b = 0; b < n; ++b)
      if (sigma[b] > 0.0) bits |= std::uint32_t{1} << b;
    mask[idx] = bits;
    ++idx;
  });

  std::vector<double> bucket(n + 1, 0.0);
  for (std::uint32_t a = 0; a < states; ++a) {
    const double wa = weight[a];
    const std::uint32_t ma = mask[a];
    for (std::uint32_t b = 0; b < states; ++b)
      bucket[std::popcount(ma ^ mask[b])] += wa * weight[b];
  }
  double proxy = 0.0;
  constexpr double kLogMax = 709.0;
  for (int d = 0; d <= n; ++d) {
    if (bucket[d] <= 0.0) continue;
    const double r = static_cast<double>(n - 2 * d) / n;
    const double arg = n * (r - q_ref) * (r - q_ref) / K + std::log(bucket[d]);
    if (arg > kLogMax) {
      out.exp_conc_proxy = std::numeric_limits<double>::infinity();
      out.proxy_overflowed = true;
      return out;
    }
    proxy += std::exp(arg);
  }
  out.exp_conc_proxy = proxy;
  return out;
}

// ── products of centred statistics ───────────────────────────────────────────

double t_statistics(const SpinSystem& s, const std::vector<TFactor>& pattern) {
  const int d = static_cast<int>(pattern.size());
  if (d < 1 || d > 4)
    throw std::invalid_argument("gibbs_exact: pattern must have 1..4 factors");

  // Dense replica slots.
  std::vector<int> labels;
  for (const TFactor& f : pattern) {
    switch (f.kind) {
      case TFactor::Kind::pair_overlap:
        if (f.l == f.lp)
          throw std::invalid_argument(
              "gibbs_exact: pair overlap needs distinct replicas");
        labels.push_back(f.l);
        labels.push_back(f.lp);
        break;
      case TFactor::Kind::single_overlap:
        labels.push_back(f.l);
        break;
      case TFactor::Kind::norm:
        break;
    }
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const int R = static_cast<int>(labels.size());
  if (R > 4)
    throw std::invalid_argument("gibbs_exact: at most 4 distinct replicas");
  auto slot = [&](int l) {
    const auto it = std::lower_bound(labels.begin(), labels.end(), l);
    if (it == labels.end() || *it != l)
      throw std::logic_error("gibbs_exact: replica slot lookup");
    return static_cast<int>(it - labels.begin());
  };

  // Per-factor replica touch lists and the per-replica centred order.
  std::vector<std::vector<int>> touches(d);
  std::vector<int> order(std::max(R, 1), 0);
  for (int f = 0; f < d; ++f) {
    const TFactor& t = pattern[f];
    if (t.kind == TFactor::Kind::pair_overlap) {
      touches[f] = {slot(t.l), slot(t.lp)};
    } else if (t.kind == TFactor::Kind::single_overlap) {
      touches[f] = {slot(t.l)};
    }
    for (int r : touches[f]) ++order[r];
  }
  int max_order = 0;
  for (int r = 0; r < R; ++r) max_order = std::max(max_order, order[r]);
  if (max_order > 4)
    throw std::invalid_argument(
        "gibbs_exact: centred order beyond 4 on one replica");

  const GibbsSolution g = enumerate(s);
  const int n = s.n;
  const Eigen::VectorXd& m = g.magnetization;
  const Eigen::MatrixXd& M = g.correlation;

  // Centred moment tensors ⟨Π (σ − m)⟩ of order 3 and 4 when the pattern
  // needs them (order ≤ 2 is covered by M; order 1 vanishes).
  std::vector<double> C3, C4;
  if (max_order >= 3) {
    C3.assign(static_cast<std::size_t>(n) * n * n, 0.0);
    if (max_order >= 4) C4.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
    for_each_state(s, [&](double H, const Eigen::VectorXd& sigma) {
      const double w = std::exp(H - g.log_z);
      const Eigen::VectorXd c = sigma - m;
      for (int i = 0; i < n; ++i) {
        const double wi = w * c[i];
        for (int j = 0; j < n; ++j) {
          const double wij = wi * c[j];
          double* row3 = &C3[(static_cast<std::size_t>(i) * n + j) * n];
          for (int k = 0; k < n; ++k) row3[k] += wij * c[k];
          if (max_order >= 4) {
            for (int k = 0; k < n; ++k) {
              const double wijk = wij * c[k];
              double* row4 =
                  &C4[((static_cast<std::size_t>(i) * n + j) * n + k) * n];
              for (int l = 0; l < n; ++l) row4[l] += wijk * c[l];
            }
          }
        }
      }
    });
  }

  auto centred_moment = [&](const int* sites, int len) -> double {
    switch (len) {
      case 0:
        return 1.0;
      case 1:
        return 0.0;
      case 2:
        return M(sites[0], sites[1]);
      case 3:
        return C3[(static_cast<std::size_t>(sites[0]) * n + sites[1]) * n +
                  sites[2]];
      default:
        return C4[((static_cast<std::size_t>(sites[0]) * n + sites[1]) * n +
                   sites[2]) *
                      n +
                  sites[3]];
    }
  };

  // Each factor carries one site sum; expand the product into the n^d site
  // tuples, and factorize each tuple's expectation over replicas.
  std::vector<int> site(d, 0);
  int replica_sites[4][4];
  int replica_len[4];
  double total = 0.0;
  auto sweep = [&](auto&& self, int depth) -> void {
    if (depth == d) {
      double coef = 1.0;
      for (int r = 0; r < R; ++r) replica_len[r] = 0;
      for (int f = 0; f < d; ++f) {
        const TFactor& t = pattern[f];
        if (t.kind == TFactor::Kind::single_overlap) {
          coef *= m[site[f]];
        } else if (t.kind == TFactor::Kind::norm) {
          coef *= m[site[f]] * m[site[f]];
        }
        for (int r : touches[f]) replica_sites[r][replica_len[r]++] = site[f];
      }
      for (int r = 0; r < R && coef != 0.0; ++r)
        coef *= centred_moment(replica_sites[r], replica_len[r]);
      total += coef;
      return;
    }
    for (int i = 0; i < n; ++i) {
      site[depth] = i;
      self(self, depth + 1);
    }
  };
  sweep(sweep, 0);
  return total * std::pow(static_cast<double>(n), -d);
}

// ── text serialization ───────────────────────────────────────────────────────

namespace {
void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}
}  // namespace

std::string to_text(const SpinSystem& s) {
  validate(s);
  std::string out;
  out += std::to_string(s.n);
  out += ' ';
  append_double(out, s.beta_scale);
  out += '\n';
  for (int i = 0; i < s.n; ++i) {
    for (int j = i + 1; j < s.n; ++j) {
      if (j > i + 1) out += ' ';
      append_double(out, s.couplings(i, j));
    }
    out += '\n';
  }
  for (int i = 0; i < s.n; ++i) {
    if (i > 0) out += ' ';
    append_double(out, s.fields[i]);
  }
  out += '\n';
  return out;
}

SpinSystem from_text(const std::string& text) {
  std::istringstream in(text);
  SpinSystem s;
  if (!(in >> s.n) || s.n < 1)
    throw std::runtime_error("gibbs_exact: bad header in system text");
  if (!(in >> s.beta_scale))
    throw std::runtime_error("gibbs_exact: bad beta scale in system text");
  s.couplings = Eigen::MatrixXd::Zero(s.n, s.n);
  s.fields.resize(s.n);
  for (int i = 0; i < s.n; ++i)
    for (int j = i + 1; j < s.n; ++j) {
      double v;
      if (!(in >> v))
        throw std::runtime_error("gibbs_exact: truncated couplings in text");
      s.couplings(i, j) = v;
      s.couplings(j, i) = v;
    }
  for (int i = 0; i < s.n; ++i)
    if (!(in >> s.fields[i]))
      throw std::runtime_error("gibbs_exact: truncated fields in text");
  double extra;
  if (in >> extra)
    throw std::runtime_error("gibbs_exact: trailing data in system text");
  validate(s);
  return s;
}

}  // namespace sklab::gibbs_exact
