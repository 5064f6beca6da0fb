#include "sklab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "sklab/amp.hpp"
#include "sklab/disorder.hpp"
#include "sklab/spectral.hpp"

namespace sklab::harness {

namespace {

// ── small utilities ──────────────────────────────────────────────────────────

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(trim(s), &used);
    if (used != trim(s).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("harness: cannot parse " + what + " value \"" +
                                s + "\"");
  }
}

long parse_long(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(trim(s), &used);
    if (used != trim(s).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("harness: cannot parse " + what + " value \"" +
                                s + "\"");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(trim(s), &used);
    if (used != trim(s).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("harness: cannot parse " + what + " value \"" +
                                s + "\"");
  }
}

std::vector<double> parse_double_list(const std::string& s,
                                      const std::string& what) {
  std::vector<double> out;
  for (const std::string& part : split(s, ','))
    out.push_back(parse_double(part, what));
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// splitmix64 stream for the sampler and the bootstrap
struct Rng {
  std::uint64_t state;
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() {  // in [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
};

// Runs body(0..count−1), each index exactly once, across `workers` threads.
// body must not throw; capture failures inside it.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), count));
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int t = 0; t < spawn; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count;
           i = next.fetch_add(1))
        body(i);
    });
  for (std::thread& t : pool) t.join();
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

// standard error of the mean (0 for fewer than two points)
double sem_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (static_cast<double>(v.size() - 1) *
                         static_cast<double>(v.size())));
}

}  // namespace

// ── configuration ────────────────────────────────────────────────────────────

std::string command_name(Command c) {
  switch (c) {
    case Command::scalar: return "scalar";
    case Command::exact: return "exact";
    case Command::amp: return "amp";
    case Command::spectral: return "spectral";
    case Command::sweep: return "sweep";
    case Command::scaling: return "scaling";
  }
  throw std::invalid_argument("harness: unknown command value");
}

Command parse_command(const std::string& name) {
  if (name == "scalar") return Command::scalar;
  if (name == "exact") return Command::exact;
  if (name == "amp") return Command::amp;
  if (name == "spectral") return Command::spectral;
  if (name == "sweep") return Command::sweep;
  if (name == "scaling") return Command::scaling;
  throw std::invalid_argument("harness: unknown command \"" + name + "\"");
}

void ExperimentConfig::validate() const {
  if (beta.empty() || h.empty() || n_list.empty())
    throw std::invalid_argument("harness: beta, h, and n grids must be nonempty");
  if (samples < 1)
    throw std::invalid_argument("harness: samples must be at least 1");
  if (workers < 1)
    throw std::invalid_argument("harness: workers must be at least 1");
  if (k_max < 2)
    throw std::invalid_argument("harness: k_max must be at least 2");
  for (int n : n_list)
    if (n < 1) throw std::invalid_argument("harness: n values must be positive");
  for (double b : beta)
    if (!(b >= 0.0) || !std::isfinite(b))
      throw std::invalid_argument("harness: beta values must be finite and >= 0");
  for (double hh : h)
    if (!std::isfinite(hh))
      throw std::invalid_argument("harness: h values must be finite");
  (void)amp::parse_variant(variant);
}

void apply_override(ExperimentConfig& config, const std::string& key,
                    const std::string& value) {
  if (key == "command") {
    config.command = parse_command(trim(value));
  } else if (key == "beta") {
    config.beta = parse_double_list(value, "beta");
  } else if (key == "h") {
    config.h = parse_double_list(value, "h");
  } else if (key == "n") {
    config.n_list = {static_cast<int>(parse_long(value, "n"))};
  } else if (key == "n_list") {
    config.n_list.clear();
    for (const std::string& part : split(value, ','))
      config.n_list.push_back(static_cast<int>(parse_long(part, "n_list")));
  } else if (key == "samples") {
    config.samples = static_cast<int>(parse_long(value, "samples"));
  } else if (key == "seed") {
    config.seed = parse_u64(value, "seed");
  } else if (key == "k_max") {
    config.k_max = static_cast<int>(parse_long(value, "k_max"));
  } else if (key == "variant") {
    config.variant = trim(value);
  } else if (key == "statistic") {
    config.statistic = trim(value);
  } else if (key == "out") {
    config.out = trim(value);
  } else if (key == "workers") {
    config.workers = static_cast<int>(parse_long(value, "workers"));
  } else {
    throw std::invalid_argument("harness: unknown config key \"" + key + "\"");
  }
}

ExperimentConfig parse_config_text(const std::string& text,
                                   ExperimentConfig base) {
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("harness: config line " +
                                  std::to_string(line_no) +
                                  " is not key = value");
    apply_override(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream f(path);
  if (!f)
    throw std::runtime_error("harness: cannot open config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

int effective_workers(int requested) {
  int cap = requested;
  if (const char* env = std::getenv("SKLAB_THREADS")) {
    try {
      cap = std::min(cap, static_cast<int>(parse_long(env, "SKLAB_THREADS")));
    } catch (const std::invalid_argument&) {
      // unparsable env var: ignore the cap
    }
  }
  return std::max(cap, 1);
}

// ── CSV / JSON emission ──────────────────────────────────────────────────────

namespace {

const char* kCsvHeader = "experiment,param_json,statistic,value,stderr,count";

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

// RFC-style record reader: quoted fields, doubled quotes, embedded newlines.
std::vector<std::vector<std::string>> read_csv_records(std::istream& is) {
  std::string text(std::istreambuf_iterator<char>(is), {});
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any_char_in_record = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      any_char_in_record = true;
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      any_char_in_record = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any_char_in_record = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any_char_in_record) {
        record.push_back(std::move(field));
        field.clear();
        records.push_back(std::move(record));
        record.clear();
        any_char_in_record = false;
      }
    } else {
      field.push_back(c);
      any_char_in_record = true;
    }
  }
  if (quoted) throw std::runtime_error("harness: unterminated CSV quote");
  if (any_char_in_record) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace

void emit_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << kCsvHeader << "\n";
  for (const ResultRow& r : rows) {
    os << csv_quote(r.experiment) << ',' << csv_quote(r.param_json) << ','
       << csv_quote(r.statistic) << ',' << fmt_double(r.value) << ','
       << fmt_double(r.std_error) << ',' << r.count << "\n";
  }
}

std::vector<ResultRow> parse_csv(std::istream& is) {
  const auto records = read_csv_records(is);
  if (records.empty())
    throw std::runtime_error("harness: empty CSV (missing header)");
  const std::vector<std::string> expected = {"experiment", "param_json",
                                             "statistic", "value",
                                             "stderr",    "count"};
  if (records.front() != expected)
    throw std::runtime_error("harness: unexpected CSV header");
  std::vector<ResultRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.size() != 6)
      throw std::runtime_error("harness: CSV record " + std::to_string(i) +
                               " has " + std::to_string(rec.size()) +
                               " fields, expected 6");
    ResultRow r;
    r.experiment = rec[0];
    r.param_json = rec[1];
    r.statistic = rec[2];
    r.value = parse_double(rec[3], "value");
    r.std_error = parse_double(rec[4], "stderr");
    r.count = parse_long(rec[5], "count");
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_json(const std::vector<ResultRow>& rows, std::ostream& os) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    arr.push_back({{"experiment", r.experiment},
                   {"param_json", r.param_json},
                   {"statistic", r.statistic},
                   {"value", r.value},
                   {"stderr", r.std_error},
                   {"count", r.count}});
  }
  os << arr.dump(2) << "\n";
}

void emit(const std::vector<ResultRow>& rows, const std::string& format,
          const std::string& path) {
  if (format != "csv" && format != "json")
    throw std::invalid_argument("harness: unknown emit format \"" + format +
                                "\"");
  std::ofstream f(path);
  if (!f) throw std::runtime_error("harness: cannot write to " + path);
  if (format == "csv")
    emit_csv(rows, f);
  else
    emit_json(rows, f);
  if (!f) throw std::runtime_error("harness: write failure on " + path);
}

// ── per-instance statistics ──────────────────────────────────────────────────

const gibbs_exact::GibbsSolution& StatisticContext::cavity0() {
  if (!cavity0_)
    cavity0_ = gibbs_exact::enumerate(gibbs_exact::cavity(system, 0));
  return *cavity0_;
}

StatisticContext make_instance(int n, double beta, double h,
                               std::uint64_t seed) {
  StatisticContext ctx;
  ctx.n = n;
  ctx.beta = beta;
  ctx.h = h;
  ctx.seed = seed;
  ctx.G = disorder::sample_coupling_only(n, seed);
  ctx.system = gibbs_exact::make_sk_system(ctx.G, beta, h);
  ctx.gibbs = gibbs_exact::enumerate(ctx.system);
  return ctx;
}

namespace {

double stat_energy_per_site(StatisticContext& c) {
  return c.gibbs.mean_energy / static_cast<double>(c.n);
}

double stat_op_norm_m(StatisticContext& c) {
  return spectral::operator_norm(c.gibbs.correlation).value;
}

double stat_overlap_mean(StatisticContext& c) {
  return 1.0 - c.gibbs.correlation.trace() / static_cast<double>(c.n);
}

double stat_overlap_var(StatisticContext& c) {
  const double n2 = static_cast<double>(c.n) * static_cast<double>(c.n);
  const Eigen::VectorXd& m = c.gibbs.magnetization;
  return (c.gibbs.correlation.squaredNorm() +
          2.0 * m.dot(c.gibbs.correlation * m)) /
         n2;
}

double stat_resolvent_error(StatisticContext& c) {
  return spectral::resolvent_approx_error(c.gibbs.correlation, c.G, c.beta);
}

double stat_t12_sq_scaled(StatisticContext& c) {
  return c.gibbs.correlation.squaredNorm() / static_cast<double>(c.n);
}

// mean over j ≠ 0 of the squared residual of the cavity representation of
// row 0 of the correlation matrix:
//   M_{0j} − β(1−m_0²) Σ_{k≠0} G_{0k} M^{(0)}_{kj}
double stat_tap_residual_sq(StatisticContext& c) {
  const int n = c.n;
  const gibbs_exact::GibbsSolution& cav = c.cavity0();
  const double scale =
      c.beta * (1.0 - c.gibbs.magnetization[0] * c.gibbs.magnetization[0]);
  double acc = 0.0;
  for (int j = 1; j < n; ++j) {
    double sum = 0.0;
    for (int k = 1; k < n; ++k)
      sum += c.G(0, k) * cav.correlation(k - 1, j - 1);
    const double resid = c.gibbs.correlation(0, j) - scale * sum;
    acc += resid * resid;
  }
  return acc / static_cast<double>(n - 1);
}

double stat_two_point_sq(StatisticContext& c) {
  const double n2 = static_cast<double>(c.n) * static_cast<double>(c.n);
  return c.gibbs.correlation.squaredNorm() / n2;
}

}  // namespace

const std::map<std::string, StatisticFn>& statistic_registry() {
  static const std::map<std::string, StatisticFn> registry = {
      {"energy_per_site", stat_energy_per_site},
      {"op_norm_M", stat_op_norm_m},
      {"overlap_mean", stat_overlap_mean},
      {"overlap_var", stat_overlap_var},
      {"resolvent_error", stat_resolvent_error},
      {"t12_sq_scaled", stat_t12_sq_scaled},
      {"tap_residual_sq", stat_tap_residual_sq},
      {"two_point_sq", stat_two_point_sq},
  };
  return registry;
}

std::vector<std::string> statistic_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : statistic_registry()) names.push_back(name);
  return names;
}

// ── sweeps ───────────────────────────────────────────────────────────────────

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  const auto& registry = statistic_registry();
  const int workers = effective_workers(config.workers);
  const std::size_t samples = static_cast<std::size_t>(config.samples);

  SweepResult result;
  for (double beta : config.beta)
    for (double h : config.h)
      for (int n : config.n_list) {
        // per-index slots; aggregation below walks them in index order, so
        // the output is independent of worker scheduling
        std::vector<std::optional<std::map<std::string, double>>> slots(
            samples);
        parallel_for(samples, workers, [&](std::size_t i) {
          try {
            StatisticContext ctx = make_instance(
                n, beta, h, config.seed + static_cast<std::uint64_t>(i));
            std::map<std::string, double> values;
            for (const auto& [name, fn] : registry) values[name] = fn(ctx);
            slots[i] = std::move(values);
          } catch (const std::exception&) {
            // leave the slot empty; counted as a failed instance
          }
        });

        int failures = 0;
        for (const auto& slot : slots)
          if (!slot) ++failures;
        result.failed_instances += failures;

        nlohmann::json params;
        params["beta"] = beta;
        params["h"] = h;
        params["n"] = n;
        const std::string param_json = params.dump();

        for (const auto& [name, fn] : registry) {
          std::vector<double> values;
          values.reserve(samples);
          for (const auto& slot : slots)
            if (slot) values.push_back(slot->at(name));
          ResultRow row;
          row.experiment = "sweep";
          row.param_json = param_json;
          row.statistic = name;
          row.count = static_cast<long>(values.size());
          if (!values.empty()) {
            row.value = mean_of(values);
            row.std_error = sem_of(values, row.value);
          }
          result.rows.push_back(std::move(row));
        }
      }
  return result;
}

// ── Glauber sampler ──────────────────────────────────────────────────────────

double heat_bath_flip_probability(const gibbs_exact::SpinSystem& s,
                                  const Eigen::VectorXd& sigma, int site) {
  gibbs_exact::validate(s);
  if (sigma.size() != s.n)
    throw std::invalid_argument("harness: spin vector length mismatch");
  if (site < 0 || site >= s.n)
    throw std::invalid_argument("harness: site index out of range");
  const double field = s.fields[site] + s.couplings.row(site).dot(sigma);
  return 0.5 * (1.0 + std::tanh(field));
}

GlauberResult glauber_estimate(const gibbs_exact::SpinSystem& s, long sweeps,
                               long burn_in, std::uint64_t seed,
                               const std::vector<std::pair<int, int>>& pairs) {
  gibbs_exact::validate(s);
  const int n = s.n;
  if (n > 100000)
    throw std::invalid_argument("harness: Glauber sampler capped at n = 1e5");
  if (burn_in < 0 || sweeps <= burn_in)
    throw std::invalid_argument(
        "harness: need sweeps > burn_in >= 0 for at least one measurement");
  for (const auto& [i, j] : pairs)
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw std::invalid_argument("harness: pair index out of range");

  Rng rng{seed ^ 0x61AB5EEDULL};
  Eigen::VectorXd sigma(n);
  for (int i = 0; i < n; ++i) sigma[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  // maintained local fields: field_u = h_u + Σ_j J_{uj} σ_j
  Eigen::VectorXd field = s.fields + s.couplings * sigma;

  const long T = sweeps - burn_in;
  const int B = static_cast<int>(std::min<long>(32, T));
  const std::size_t np = pairs.size();

  Eigen::VectorXd m_total = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd m_batch = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd m_batch_means(n, B);
  std::vector<double> prod_total(np, 0.0), prod_batch(np, 0.0);
  Eigen::MatrixXd corr_batch_means(static_cast<Eigen::Index>(np), B);

  long done_in_batch = 0;
  int batch = 0;
  // batch b covers T/B sweeps, the first T%B batches one more
  auto batch_len = [&](int b) { return T / B + (b < static_cast<int>(T % B) ? 1 : 0); };

  for (long sweep = 0; sweep < sweeps; ++sweep) {
    for (int u = 0; u < n; ++u) {
      const double p_plus = 0.5 * (1.0 + std::tanh(field[u]));
      const double next = rng.uniform() < p_plus ? 1.0 : -1.0;
      if (next != sigma[u]) {
        const double delta = next - sigma[u];
        sigma[u] = next;
        field += delta * s.couplings.col(u);
      }
    }
    if (sweep < burn_in) continue;

    m_total += sigma;
    m_batch += sigma;
    for (std::size_t p = 0; p < np; ++p) {
      const double prod = sigma[pairs[p].first] * sigma[pairs[p].second];
      prod_total[p] += prod;
      prod_batch[p] += prod;
    }
    if (++done_in_batch == batch_len(batch)) {
      const double len = static_cast<double>(done_in_batch);
      m_batch_means.col(batch) = m_batch / len;
      for (std::size_t p = 0; p < np; ++p)
        corr_batch_means(static_cast<Eigen::Index>(p), batch) =
            prod_batch[p] / len -
            m_batch[pairs[p].first] / len * (m_batch[pairs[p].second] / len);
      m_batch.setZero();
      std::fill(prod_batch.begin(), prod_batch.end(), 0.0);
      done_in_batch = 0;
      ++batch;
    }
  }

  GlauberResult out;
  out.measurement_sweeps = T;
  out.batches = B;
  const double Td = static_cast<double>(T);
  out.m = m_total / Td;
  out.m_std_error = Eigen::VectorXd::Zero(n);
  if (B >= 2) {
    for (int i = 0; i < n; ++i) {
      double ss = 0.0;
      const double mi = m_batch_means.row(i).mean();
      for (int b = 0; b < B; ++b) {
        const double d = m_batch_means(i, b) - mi;
        ss += d * d;
      }
      out.m_std_error[i] =
          std::sqrt(ss / (static_cast<double>(B - 1) * static_cast<double>(B)));
    }
  }
  out.pair_corr.resize(np);
  out.pair_corr_std_error.assign(np, 0.0);
  for (std::size_t p = 0; p < np; ++p) {
    out.pair_corr[p] = prod_total[p] / Td -
                       out.m[pairs[p].first] * out.m[pairs[p].second];
    if (B >= 2) {
      const Eigen::Index pi = static_cast<Eigen::Index>(p);
      double ss = 0.0;
      const double mp = corr_batch_means.row(pi).mean();
      for (int b = 0; b < B; ++b) {
        const double d = corr_batch_means(pi, b) - mp;
        ss += d * d;
      }
      out.pair_corr_std_error[p] =
          std::sqrt(ss / (static_cast<double>(B - 1) * static_cast<double>(B)));
    }
  }
  return out;
}

// ── scaling studies ──────────────────────────────────────────────────────────

namespace {

// OLS slope/intercept of y against x
std::pair<double, double> ols(const std::vector<double>& x,
                              const std::vector<double>& y) {
  const double xm = mean_of(x), ym = mean_of(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  const double slope = sxy / sxx;
  return {slope, ym - slope * xm};
}

}  // namespace

ScalingResult scaling_study(const std::string& statistic,
                            const std::vector<int>& n_list, int samples,
                            double beta, double h, std::uint64_t seed,
                            int workers) {
  const auto& registry = statistic_registry();
  const auto it = registry.find(statistic);
  if (it == registry.end())
    throw std::invalid_argument("harness: unknown statistic \"" + statistic +
                                "\"");
  if (n_list.size() < 2)
    throw std::invalid_argument(
        "harness: scaling study needs at least two sizes");
  if (samples < 1)
    throw std::invalid_argument("harness: samples must be at least 1");
  const StatisticFn fn = it->second;
  const int pool = effective_workers(workers);

  ScalingResult res;
  res.statistic = statistic;
  res.n_list = n_list;

  // per-n instance values, instances parallelized, any failure rethrown
  std::vector<std::vector<double>> values(n_list.size());
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    values[ni].assign(static_cast<std::size_t>(samples), 0.0);
    std::exception_ptr failure = nullptr;
    std::mutex failure_mutex;
    parallel_for(static_cast<std::size_t>(samples), pool, [&](std::size_t i) {
      try {
        StatisticContext ctx =
            make_instance(n_list[ni], beta, h,
                          seed + static_cast<std::uint64_t>(i));
        values[ni][i] = fn(ctx);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<double> log_n, log_mean;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const double m = mean_of(values[ni]);
    res.mean.push_back(m);
    res.std_error.push_back(sem_of(values[ni], m));
    if (!(m > 0.0))
      throw std::domain_error(
          "harness: statistic mean is not positive at n = " +
          std::to_string(n_list[ni]) + "; log-log fit undefined");
    log_n.push_back(std::log(static_cast<double>(n_list[ni])));
    log_mean.push_back(std::log(m));
  }
  std::tie(res.slope, res.intercept) = ols(log_n, log_mean);

  // bootstrap over instances within each n (percentile CI, 1000 resamples)
  const int B = 1000;
  Rng rng{seed ^ 0xB0075EEDCAFEULL};
  std::vector<double> slopes;
  slopes.reserve(B);
  int degenerate = 0;
  for (int b = 0; b < B; ++b) {
    std::vector<double> boot_log_mean(n_list.size());
    bool ok = true;
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
      double acc = 0.0;
      for (int i = 0; i < samples; ++i)
        acc += values[ni][rng.next() % static_cast<std::uint64_t>(samples)];
      const double m = acc / static_cast<double>(samples);
      if (!(m > 0.0)) {
        ok = false;
        break;
      }
      boot_log_mean[ni] = std::log(m);
    }
    if (!ok) {
      ++degenerate;
      continue;
    }
    slopes.push_back(ols(log_n, boot_log_mean).first);
  }
  if (degenerate > B / 10)
    throw std::domain_error(
        "harness: bootstrap resamples repeatedly non-positive; CI unstable");
  std::sort(slopes.begin(), slopes.end());
  const std::size_t count = slopes.size();
  res.ci_lo = slopes[static_cast<std::size_t>(0.025 * (count - 1))];
  res.ci_hi = slopes[static_cast<std::size_t>(0.975 * (count - 1))];

  nlohmann::json base_params;
  base_params["beta"] = beta;
  base_params["h"] = h;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    nlohmann::json params = base_params;
    params["n"] = n_list[ni];
    ResultRow row;
    row.experiment = "scaling";
    row.param_json = params.dump();
    row.statistic = statistic;
    row.value = res.mean[ni];
    row.std_error = res.std_error[ni];
    row.count = samples;
    res.rows.push_back(std::move(row));
  }
  nlohmann::json fit_params = base_params;
  fit_params["n_list"] = n_list;
  for (const auto& [suffix, value] :
       std::vector<std::pair<std::string, double>>{
           {"_slope", res.slope},
           {"_slope_ci_lo", res.ci_lo},
           {"_slope_ci_hi", res.ci_hi}}) {
    ResultRow row;
    row.experiment = "scaling";
    row.param_json = fit_params.dump();
    row.statistic = statistic + suffix;
    row.value = value;
    row.std_error = 0.0;
    row.count = samples;
    res.rows.push_back(std::move(row));
  }
  return res;
}

}  // namespace sklab::harness
