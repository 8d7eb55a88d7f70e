/**
 * @file harness.hpp
 * @brief Experiment catalog: configs, grid runners that confront theorem
 * right-hand sides with empirical packing lower bounds, constant fitting,
 * the Program's final constant, and persisted reports.
 */
#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "centroid.hpp"
#include "dimred.hpp"
#include "measures.hpp"
#include "packing.hpp"
#include "quermass.hpp"

namespace sudakov {

inline constexpr const char* kArtifactVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Config

struct Budgets {
  std::size_t bank = 20000;          // samples per (measure, n) bank
  std::size_t candidates = 4000;     // packing candidates per cloud
  std::size_t greedy_orders = 3;     // farthest-point plus seeded permutations
  std::size_t mean_width_samples = 20000;
};

struct ExperimentConfig {
  std::string experiment;
  std::vector<std::string> measures;
  std::vector<std::string> bodies;
  std::vector<int> n;
  std::vector<double> p, t, q;
  std::vector<int> k;
  Budgets budgets;
  std::vector<std::uint64_t> seeds;
  Json params = Json::object();
  std::string output;
};

inline constexpr std::size_t kMaxBank = 2000000;
inline constexpr std::size_t kMaxCandidates = 200000;
inline constexpr std::size_t kMaxGreedyOrders = 16;
inline constexpr int kMaxHarnessDim = 64;

namespace detail {

template <class T>
std::vector<T> json_list(const Json& j, const char* key) {
  if (!j.is_array()) throw UsageError(std::string("config: '") + key + "' must be a list");
  return j.get<std::vector<T>>();
}

inline void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw UsageError("config: unknown key '" + key + "' in " + where);
}

}  // namespace detail

inline Json to_json(const ExperimentConfig& c) {
  return Json{{"experiment", c.experiment},
              {"measures", c.measures},
              {"bodies", c.bodies},
              {"n", c.n},
              {"p", c.p},
              {"t", c.t},
              {"q", c.q},
              {"k", c.k},
              {"budgets",
               {{"bank", c.budgets.bank},
                {"candidates", c.budgets.candidates},
                {"greedy_orders", c.budgets.greedy_orders},
                {"mean_width_samples", c.budgets.mean_width_samples}}},
              {"seeds", c.seeds},
              {"params", c.params},
              {"output", c.output}};
}

/// Overlays `j` on `base`; unknown keys at any level are rejected.
inline ExperimentConfig config_overlay(ExperimentConfig c, const Json& j) {
  if (!j.is_object()) throw UsageError("config: top level must be an object");
  detail::reject_unknown(j, {"experiment", "measures", "bodies", "n", "p", "t", "q", "k", "budgets", "seeds", "params", "output"},
                         "config");
  try {
    if (j.contains("experiment")) c.experiment = j.at("experiment").get<std::string>();
    if (j.contains("measures")) c.measures = detail::json_list<std::string>(j.at("measures"), "measures");
    if (j.contains("bodies")) c.bodies = detail::json_list<std::string>(j.at("bodies"), "bodies");
    if (j.contains("n")) c.n = detail::json_list<int>(j.at("n"), "n");
    if (j.contains("p")) c.p = detail::json_list<double>(j.at("p"), "p");
    if (j.contains("t")) c.t = detail::json_list<double>(j.at("t"), "t");
    if (j.contains("q")) c.q = detail::json_list<double>(j.at("q"), "q");
    if (j.contains("k")) c.k = detail::json_list<int>(j.at("k"), "k");
    if (j.contains("seeds")) c.seeds = detail::json_list<std::uint64_t>(j.at("seeds"), "seeds");
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("budgets")) {
      const Json& b = j.at("budgets");
      if (!b.is_object()) throw UsageError("config: 'budgets' must be an object");
      detail::reject_unknown(b, {"bank", "candidates", "greedy_orders", "mean_width_samples"}, "budgets");
      if (b.contains("bank")) c.budgets.bank = b.at("bank").get<std::size_t>();
      if (b.contains("candidates")) c.budgets.candidates = b.at("candidates").get<std::size_t>();
      if (b.contains("greedy_orders")) c.budgets.greedy_orders = b.at("greedy_orders").get<std::size_t>();
      if (b.contains("mean_width_samples")) c.budgets.mean_width_samples = b.at("mean_width_samples").get<std::size_t>();
    }
    if (j.contains("params")) {
      if (!j.at("params").is_object()) throw UsageError("config: 'params' must be an object");
      for (const auto& [key, value] : j.at("params").items()) c.params[key] = value;
    }
  } catch (const Json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

/// SHA-256 of the canonical (sorted-key, compact) JSON dump, hex encoded.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string text = to_json(c).dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

// ---------------------------------------------------------------------------
// Families

inline Vector anisotropic_scales(int n) {
  Vector d(n);
  for (int i = 0; i < n; ++i) d[i] = n == 1 ? 1.0 : std::exp(std::log(4.0) * (1.0 - 2.0 * i / (n - 1)));
  return d;
}

inline const std::vector<std::string>& measure_families() {
  static const std::vector<std::string> names{"gaussian",     "gaussian-anisotropic", "product-exponential",
                                              "uniform-l1",   "uniform-cube",         "uniform-ball"};
  return names;
}

inline Measure measure_family(const std::string& name, int n) {
  if (name == "gaussian") return Measure::standard_gaussian(n);
  if (name == "gaussian-anisotropic") return Measure::gaussian(anisotropic_scales(n).asDiagonal());
  if (name == "product-exponential") return Measure::product_exponential(n);
  if (name == "uniform-l1") return Measure::uniform(Body::lq_ball(n, 1.0));
  if (name == "uniform-cube") return Measure::uniform(Body::cube(n));
  if (name == "uniform-ball") return Measure::uniform(Body::euclidean_ball(n));
  throw UsageError("unknown measure family '" + name + "'");
}

/// Origin-symmetric polytope with 2N facets: normals +-e_i (i < n) and N - n
/// further seeded random unit normals, all offsets 1.
inline Body few_facet_polytope(int n, int N) {
  if (N < n) throw UsageError("polytope: need N >= n facet pairs");
  Matrix normals(N, n);
  normals.topRows(n) = Matrix::Identity(n, n);
  if (N > n) normals.bottomRows(N - n) = sample_directions(n, static_cast<std::size_t>(N - n), 0x5eed0000ULL + N).transpose();
  return Body::h_polytope(normals, Vector::Ones(N));
}

/// Number of facet pairs N of a body family (n for the cube).
inline int facet_pairs(const std::string& name, int n) {
  if (name == "cube") return n;
  if (name.rfind("polytope:", 0) == 0) return std::stoi(name.substr(9));
  throw UsageError("body family '" + name + "' is not a polytope");
}

inline Body body_family(const std::string& name, int n) {
  if (name == "ball") return Body::euclidean_ball(n);
  if (name == "cube") return Body::cube(n);
  if (name == "l1") return Body::lq_ball(n, 1.0);
  if (name == "ellipsoid") {
    Vector d(n);
    for (int i = 0; i < n; ++i) d[i] = n == 1 ? 1.0 : 1.0 + double(i) / (n - 1);
    return Body::ellipsoid(d.asDiagonal());
  }
  if (name.rfind("polytope:", 0) == 0) return few_facet_polytope(n, facet_pairs(name, n));
  throw UsageError("unknown body family '" + name + "'");
}

// ---------------------------------------------------------------------------
// Rows, reports and fitting

struct ReportRow {
  std::string experiment, measure, body;
  int n = 0;
  double p = std::nan(""), t = std::nan(""), q = std::nan("");
  double lhs_log = std::nan(""), rhs_exponent = std::nan(""), fitted_C = std::nan("");
  double margin = std::nan("");  // > 0: the claim holds with constant 1
  std::uint64_t seed = 0;      // derive_seed(run_seed, cell)
  std::uint64_t run_seed = 0;
  std::size_t cell = 0;
  double wall_ms = 0.0;
  std::string skipped;         // non-empty: reason the cell was not run
  Json extra = Json::object();
};

struct FitResult {
  double value = 0.0;
  std::size_t used = 0;
  std::vector<std::string> warnings;
};

/// max over rows of empirical / structural exponent. Rows with a zero
/// structural exponent are excluded with a warning; skipped rows are ignored.
inline FitResult fit_constant(const std::vector<ReportRow>& rows,
                              const std::function<std::pair<double, double>(const ReportRow&)>& extract) {
  FitResult f;
  for (const auto& r : rows) {
    if (!r.skipped.empty()) continue;
    const auto [emp, structural] = extract(r);
    if (!(structural > 0.0)) {
      f.warnings.push_back("fit: row cell " + std::to_string(r.cell) + " has structural exponent " +
                           std::to_string(structural) + "; excluded");
      continue;
    }
    f.value = std::max(f.value, std::max(0.0, emp) / structural);
    ++f.used;
  }
  return f;
}

struct SeedFit {
  std::uint64_t seed = 0;
  std::map<std::string, double> constants;
  bool passed = true;
  std::vector<std::string> failures;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<ReportRow> rows;
  std::vector<SeedFit> fits;
  std::map<std::string, double> stability;  // max |C_s / mean - 1| per constant
  std::vector<std::string> warnings;
  bool passed = true;
};

// ---------------------------------------------------------------------------
// The Program's final constant

struct PhiSpec {
  std::string kind = "linear";  // linear | power | ellipsoid | cube
  double C = 1.0;
  double t = 1.0;
  double exponent = 1.0;
};

inline PhiSpec phi_from_json(const Json& j) {
  detail::reject_unknown(j, {"kind", "C", "t", "exponent"}, "phi");
  PhiSpec s;
  s.kind = j.value("kind", s.kind);
  s.C = j.value("C", s.C);
  s.t = j.value("t", s.t);
  s.exponent = j.value("exponent", s.exponent);
  return s;
}

/// linear: x; power: x^e; ellipsoid: C max((x/t)^{2/3}, sqrt(x)/t);
/// cube: C max(x^{1/3} / t^{2/3}, sqrt(x / t)).
inline std::function<double(double)> make_phi(const PhiSpec& s) {
  if (s.kind == "linear") return [](double x) { return x; };
  if (s.kind == "power") return [e = s.exponent](double x) { return std::pow(x, e); };
  if (s.kind == "ellipsoid")
    return [C = s.C, t = s.t](double x) { return C * std::max(std::pow(x / t, 2.0 / 3.0), std::sqrt(x) / t); };
  if (s.kind == "cube")
    return [C = s.C, t = s.t](double x) { return C * std::max(std::cbrt(x) / std::pow(t, 2.0 / 3.0), std::sqrt(x / t)); };
  throw UsageError("phi: unknown kind '" + s.kind + "'");
}

/// Checks phi(0) = 0, phi non-decreasing and phi(x)/x non-increasing on a
/// grid of [0, 1].
inline void validate_phi(const std::function<double(double)>& phi, int grid = 256) {
  const double z = phi(0.0);
  if (std::abs(z) > 1e-12) throw DomainError("phi: phi(0) = " + std::to_string(z) + " is not 0");
  double prev = z, prev_ratio = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= grid; ++i) {
    const double x = double(i) / grid;
    const double v = phi(x);
    if (!(v >= prev - 1e-12 * std::abs(prev)))
      throw DomainError("phi: decreases at grid point x = " + std::to_string(x));
    const double r = v / x;
    if (r > prev_ratio * (1.0 + 1e-9))
      throw DomainError("phi: phi(x)/x increases at grid point x = " + std::to_string(x));
    prev = v;
    prev_ratio = r;
  }
  if (!(phi(1.0) > 0.0)) throw DomainError("phi: not increasing from 0 (phi(1) = 0)");
}

/// phi^{-1}(y) by bisection; the bracket is doubled beyond 1 if needed.
inline double phi_inverse(const std::function<double(double)>& phi, double y) {
  if (!(y > 0.0)) throw DomainError("phi_inverse: y must be positive");
  double lo = 0.0, hi = 1.0;
  for (int i = 0; phi(hi) < y; ++i) {
    if (i > 200) throw DomainError("phi_inverse: y is outside the range of phi");
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-10 * std::max(1e-300, hi) && hi - lo > 1e-300) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct ProgramBound {
  double value = 0.0;
  double separation_arm = 0.0;  // 4 max(C, C' B/R) / t
  double weak_arm = 0.0;        // 1 / (A phi^{-1}(1/(4A)))
  double phi_inverse = 0.0;
};

/// C_{A,B,D,phi_t,t} = D max(4 max(C, C' B / R) / t, 1 / (A phi_t^{-1}(1/(4A)))).
inline ProgramBound program_bound(double A, double B, double D, double R, double t,
                                  const std::function<double(double)>& phi, double C = 1.0, double C_prime = 1.0) {
  if (!(A >= 1.0 && B >= 1.0 && D >= 1.0 && R >= 1.0)) throw DomainError("program_bound: A, B, D, R must be >= 1");
  if (!(t > 0.0)) throw DomainError("program_bound: t must be positive");
  validate_phi(phi);
  ProgramBound b;
  b.phi_inverse = phi_inverse(phi, 1.0 / (4.0 * A));
  b.separation_arm = 4.0 * std::max(C, C_prime * B / R) / t;
  b.weak_arm = 1.0 / (A * b.phi_inverse);
  b.value = D * std::max(b.separation_arm, b.weak_arm);
  return b;
}

// ---------------------------------------------------------------------------
// Experiment runners

namespace detail {

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// Best of a farthest-point greedy and (orders - 1) seeded-permutation
/// greedies; exact when the cloud is small enough.
inline PackingResult best_greedy(const PointCloud& cloud, const Body& B, std::size_t orders, std::uint64_t seed) {
  const auto g = GaugeOracle::of(B);
  if (static_cast<std::size_t>(cloud.size()) <= kExactPackingMax) return exact_max_packing(cloud, g);
  PackingResult best = greedy_packing(cloud, g, seed, GreedyOrder::FarthestPoint);
  for (std::size_t j = 1; j < orders; ++j) {
    auto r = greedy_packing(cloud, g, derive_seed(seed, j), GreedyOrder::SeededPermutation);
    if (r.count > best.count) best = std::move(r);
  }
  return best;
}

/// Half interior support points, half boundary support points.
inline PointCloud zp_mixed_cloud(const ZpBody& Z, std::size_t count, std::uint64_t seed) {
  const std::size_t inner = (count + 1) / 2;
  PointCloud a = zp_candidates(Z, inner, derive_seed(seed, 1), CandidateMode::SupportPoint);
  if (count == inner) return a;
  const PointCloud b = zp_candidates(Z, count - inner, derive_seed(seed, 2), CandidateMode::Boundary);
  PointCloud out;
  out.seed = seed;
  out.provenance = "zp-support-mixed";
  out.points.resize(a.points.rows() + b.points.rows(), a.points.cols());
  out.points << a.points, b.points;
  return out;
}

inline std::uint64_t bank_seed(std::uint64_t run_seed, std::size_t measure_index, int n) {
  return derive_seed(derive_seed(run_seed, 0xBA4C0000ULL + measure_index), static_cast<std::uint64_t>(n));
}

inline double param(const ExperimentConfig& c, const char* key, double fallback) {
  return c.params.contains(key) ? c.params.at(key).get<double>() : fallback;
}

/// Description of one Z_p-packing theorem: the separator is
/// t * scale(mu, K, q) * shape(K), the bound exp(additive + C * structural).
struct PackingTheorem {
  std::function<double(const SampleBank&, const Body&, double q)> scale;
  std::function<Body(const Body& K, const std::string& name, int n, double t, double scale)> separator;
  std::function<double(const std::string& body, int n, double p, double t, double q)> structural;
  std::function<double(double q)> additive = [](double) { return 0.0; };
  std::function<std::string(int n, double p, double t)> skip = [](int, double, double) { return std::string(); };
  std::string scale_name = "m_1";
};

inline std::vector<ReportRow> zp_packing_rows(const ExperimentConfig& c, std::uint64_t run_seed, const PackingTheorem& th) {
  std::vector<ReportRow> rows;
  std::size_t cell = 0;
  std::vector<double> ts = c.t;
  std::sort(ts.begin(), ts.end());
  for (std::size_t mi = 0; mi < c.measures.size(); ++mi)
    for (int n : c.n) {
      const Measure mu = measure_family(c.measures[mi], n);
      const std::uint64_t bseed = bank_seed(run_seed, mi, n);
      auto bank = std::make_shared<const SampleBank>(sample(mu, c.budgets.bank, bseed));
      // candidate clouds depend on (measure, n, p) only; shared across bodies and q
      std::map<double, std::shared_ptr<PointCloud>> clouds;
      for (const auto& bname : c.bodies) {
        const Body K = body_family(bname, n);
        for (double q : c.q) {
          double scale = 0.0;
          std::string scale_error;
          try {
            scale = th.scale(*bank, K, q);
          } catch (const BudgetError& e) {
            scale_error = e.what();
          }
          for (double p : c.p) {
            std::shared_ptr<PointCloud>& cloud = clouds[p];
            std::string cloud_error;
            int running = 0;  // monotone lower bound from larger t
            std::vector<ReportRow> group(ts.size());
            for (std::size_t ti = ts.size(); ti-- > 0;) {
              const double t = ts[ti];
              ReportRow r;
              r.experiment = c.experiment;
              r.measure = c.measures[mi];
              r.body = bname;
              r.n = n;
              r.p = p;
              r.t = t;
              r.q = q;
              r.run_seed = run_seed;
              r.cell = cell + ti;
              r.seed = derive_seed(run_seed, r.cell);
              const auto start = Clock::now();
              std::string reason = th.skip(n, p, t);
              if (reason.empty()) reason = scale_error;
              if (reason.empty() && !cloud && cloud_error.empty()) {
                try {
                  const ZpBody Z(bank, p);
                  const auto pkey = static_cast<std::uint64_t>(std::llround(p * 1024.0));
                  cloud = std::make_shared<PointCloud>(
                      zp_mixed_cloud(Z, c.budgets.candidates, derive_seed(derive_seed(bseed, 0xC1), pkey)));
                } catch (const BudgetError& e) {
                  cloud_error = e.what();
                }
              }
              if (reason.empty()) reason = cloud_error;
              if (!reason.empty()) {
                r.skipped = reason;
                group[ti] = std::move(r);
                continue;
              }
              const Body sep = th.separator(K, bname, n, t, scale);
              const auto best = best_greedy(*cloud, sep, c.budgets.greedy_orders, r.seed);
              running = std::max(running, best.count);
              r.lhs_log = std::log(double(running));
              r.rhs_exponent = th.structural(bname, n, p, t, q);
              r.fitted_C = std::max(0.0, r.lhs_log - th.additive(q)) / r.rhs_exponent;
              r.margin = th.additive(q) + r.rhs_exponent - r.lhs_log;
              r.extra = Json{{"count", running},
                             {"greedy_count", best.count},
                             {"method", best.method},
                             {th.scale_name, scale},
                             {"candidates", cloud->size()},
                             {"saturated", running >= static_cast<int>(cloud->size())},
                             {"additive", th.additive(q)}};
              r.wall_ms = elapsed_ms(start);
              group[ti] = std::move(r);
            }
            for (auto& r : group) rows.push_back(std::move(r));
            cell += ts.size();
          }
        }
      }
    }
  return rows;
}

inline FitResult fit_rows(const std::vector<ReportRow>& rows) {
  return fit_constant(rows, [](const ReportRow& r) {
    const double add = r.extra.value("additive", 0.0);
    return std::pair{r.lhs_log - add, r.rhs_exponent};
  });
}

inline SeedFit packing_fit(const ExperimentConfig& c, std::uint64_t seed, const std::vector<ReportRow>& rows,
                           std::vector<std::string>& warnings, double default_max) {
  SeedFit f;
  f.seed = seed;
  const auto fit = fit_rows(rows);
  warnings.insert(warnings.end(), fit.warnings.begin(), fit.warnings.end());
  f.constants["C"] = fit.value;
  const double cap = param(c, "max_C", default_max);
  if (fit.value > cap) {
    f.passed = false;
    f.failures.push_back("fitted C = " + std::to_string(fit.value) + " exceeds " + std::to_string(cap));
  }
  return f;
}

}  // namespace detail

struct ExperimentRun {
  std::vector<ReportRow> rows;
  SeedFit fit;
  std::vector<std::string> warnings;
};

struct ExperimentDef {
  std::string name;
  std::string description;
  ExperimentConfig defaults;
  std::function<ExperimentRun(const ExperimentConfig&, std::uint64_t)> run;
};

namespace detail {

inline ExperimentConfig defaults(std::string name, std::vector<std::string> measures, std::vector<std::string> bodies,
                                 std::vector<int> n, std::vector<double> p, std::vector<double> t, std::vector<double> q) {
  ExperimentConfig c;
  c.experiment = std::move(name);
  c.measures = std::move(measures);
  c.bodies = std::move(bodies);
  c.n = std::move(n);
  c.p = std::move(p);
  c.t = std::move(t);
  c.q = std::move(q);
  c.seeds = {1};
  c.budgets.bank = 50000;
  return c;
}

inline ExperimentRun run_packing(const ExperimentConfig& c, std::uint64_t seed, const PackingTheorem& th, double max_C) {
  ExperimentRun out;
  out.rows = zp_packing_rows(c, seed, th);
  out.fit = packing_fit(c, seed, out.rows, out.warnings, max_C);
  return out;
}

inline double loglog(double N) { return std::log(std::log(std::numbers::e + N)); }

inline ExperimentRun run_quantile(const ExperimentConfig& c, std::uint64_t seed) {
  ExperimentRun out;
  out.fit.seed = seed;
  double C = 0.0, cmin = std::numeric_limits<double>::infinity(), markov = 0.0;
  std::size_t cell = 0;
  for (std::size_t mi = 0; mi < c.measures.size(); ++mi)
    for (int n : c.n) {
      const SampleBank bank = sample(measure_family(c.measures[mi], n), c.budgets.bank, bank_seed(seed, mi, n));
      for (const auto& bname : c.bodies) {
        const Body K = body_family(bname, n);
        const auto start = Clock::now();
        const Vector g = bank_gauges(bank, K);
        const std::vector<double> gv(g.data(), g.data() + g.size());
        const double m1 = quantile_of_values(gv, 1.0);
        const double I1 = moment_of_values(g, 1.0);
        const double base_ms = elapsed_ms(start);
        for (double q : c.q) {
          ReportRow r;
          r.experiment = c.experiment;
          r.measure = c.measures[mi];
          r.body = bname;
          r.n = n;
          r.q = q;
          r.run_seed = seed;
          r.cell = cell++;
          r.seed = derive_seed(seed, r.cell);
          const auto t0 = Clock::now();
          try {
            const double mq = quantile_of_values(gv, q);
            const double Iq = moment_of_values(g, q);
            r.lhs_log = std::log(Iq / I1);
            r.rhs_exponent = q;
            r.fitted_C = Iq / (q * I1);
            r.margin = q - Iq / I1;
            const double c_ratio = mq / (std::exp(-q) * m1);
            const double mk = m1 / (std::numbers::e / (std::numbers::e - 1.0) * I1);
            r.extra = Json{{"m_1", m1}, {"I_1", I1}, {"m_q", mq}, {"I_q", Iq}, {"c_ratio", c_ratio}, {"markov_ratio", mk}};
            C = std::max(C, r.fitted_C);
            cmin = std::min(cmin, c_ratio);
            markov = std::max(markov, mk);
          } catch (const BudgetError& e) {
            r.skipped = e.what();
          }
          r.wall_ms = base_ms + elapsed_ms(t0);
          out.rows.push_back(std::move(r));
        }
      }
    }
  out.fit.constants = {{"C", C}, {"c", std::isfinite(cmin) ? cmin : 0.0}, {"markov", markov}};
  auto fail = [&](bool bad, const std::string& what) {
    if (bad) {
      out.fit.passed = false;
      out.fit.failures.push_back(what);
    }
  };
  fail(markov > param(c, "markov_slack", 1.05), "m_1 exceeds (e/(e-1)) I_1 beyond the slack");
  fail(C > param(c, "max_C", 10.0), "fitted C in I_q <= C q I_1 exceeds the cap");
  fail(cmin < param(c, "min_c", 1e-3), "fitted c in m_q >= c e^{-q} m_1 is below the floor");
  return out;
}

inline ExperimentRun run_cylinder(const ExperimentConfig& c, std::uint64_t seed) {
  ExperimentRun out;
  out.fit.seed = seed;
  const double s = param(c, "s", 1.0 / (2.0 * std::numbers::e));
  double worst = std::numeric_limits<double>::infinity();
  std::size_t cell = 0;
  for (std::size_t mi = 0; mi < c.measures.size(); ++mi)
    for (int n : c.n) {
      auto bank = std::make_shared<const SampleBank>(sample(measure_family(c.measures[mi], n), c.budgets.bank, bank_seed(seed, mi, n)));
      for (int k : c.k)
        for (double p : c.p) {
          ReportRow r;
          r.experiment = c.experiment;
          r.measure = c.measures[mi];
          r.body = "cylinder:" + std::to_string(k);
          r.n = n;
          r.p = p;
          r.run_seed = seed;
          r.cell = cell++;
          r.seed = derive_seed(seed, r.cell);
          const auto start = Clock::now();
          if (k > n) {
            r.skipped = "k exceeds n";
            out.rows.push_back(std::move(r));
            continue;
          }
          const double t0 = s * std::sqrt(p / k);
          r.t = t0;
          const Body E = Body::cylinder(n, k, std::sqrt(double(k)));
          const Body sep = Body::cylinder(n, k, t0 * std::sqrt(double(k)));
          const ZpBody Z(bank, p);
          const PointCloud cloud = detail::zp_mixed_cloud(Z, c.budgets.candidates, derive_seed(r.seed, 0xC1));
          const auto best = detail::best_greedy(cloud, sep, c.budgets.greedy_orders, r.seed);
          const auto target = static_cast<int>(std::ceil(std::exp(double(k))));
          r.lhs_log = std::log(double(best.count));
          r.rhs_exponent = k;
          r.fitted_C = r.lhs_log / k;
          r.margin = r.lhs_log - k;  // lower-bound claim: count >= e^k
          r.extra = Json{{"count", best.count},
                         {"target", target},
                         {"method", best.method},
                         {"candidates", cloud.size()},
                         {"s", s},
                         {"m_1", quantile_mq(*bank, E, 1.0)},
                         {"verified", verify_separated(cloud, GaugeOracle::of(sep), best.witness)}};
          worst = std::min(worst, double(best.count) / target);
          if (best.count < target) {
            out.fit.passed = false;
            out.fit.failures.push_back("n=" + std::to_string(n) + " k=" + std::to_string(k) + ": " +
                                       std::to_string(best.count) + " < " + std::to_string(target));
          }
          r.wall_ms = elapsed_ms(start);
          out.rows.push_back(std::move(r));
        }
    }
  out.fit.constants["count_over_target"] = std::isfinite(worst) ? worst : 0.0;
  return out;
}

inline ExperimentRun run_sudakov(const ExperimentConfig& c, std::uint64_t seed) {
  ExperimentRun out;
  std::size_t cell = 0;
  for (int n : c.n)
    for (std::size_t bi = 0; bi < c.bodies.size(); ++bi) {
      const Body K = body_family(c.bodies[bi], n);
      const double Mstar = mean_width(K, c.budgets.mean_width_samples, bank_seed(seed, 0x5A + bi, n)).value;
      const PointCloud cloud = cloud_from_bank(sample(Measure::uniform(K), c.budgets.candidates, bank_seed(seed, bi, n)).points,
                                               "uniform", bank_seed(seed, bi, n));
      std::vector<double> ts = c.t;
      std::sort(ts.begin(), ts.end());
      std::vector<ReportRow> group(ts.size());
      int running = 0;
      for (std::size_t ti = ts.size(); ti-- > 0;) {
        ReportRow r;
        r.experiment = c.experiment;
        r.measure = "uniform";
        r.body = c.bodies[bi];
        r.n = n;
        r.t = ts[ti];
        r.run_seed = seed;
        r.cell = cell + ti;
        r.seed = derive_seed(seed, r.cell);
        const auto start = Clock::now();
        const auto best = detail::best_greedy(cloud, Body::euclidean_ball(n, r.t * Mstar), c.budgets.greedy_orders, r.seed);
        running = std::max(running, best.count);
        r.lhs_log = std::log(double(running));
        r.rhs_exponent = improved_sudakov_log_rhs(n, r.t);
        r.fitted_C = r.lhs_log / r.rhs_exponent;
        r.margin = r.rhs_exponent - r.lhs_log;
        const double weak = weak_sudakov_log_rhs(n, r.t);
        r.extra = Json{{"count", running}, {"M*", Mstar}, {"weak_rhs", weak}, {"weak_holds", r.lhs_log <= weak},
                       {"candidates", cloud.size()}, {"method", best.method}};
        if (r.lhs_log > weak) {
          out.fit.passed = false;
          out.fit.failures.push_back("weak Sudakov violated at " + r.body + " n=" + std::to_string(n));
        }
        r.wall_ms = elapsed_ms(start);
        group[ti] = std::move(r);
      }
      for (auto& r : group) out.rows.push_back(std::move(r));
      cell += ts.size();
    }
  auto fit = packing_fit(c, seed, out.rows, out.warnings, 20.0);
  fit.passed = fit.passed && out.fit.passed;
  fit.failures.insert(fit.failures.end(), out.fit.failures.begin(), out.fit.failures.end());
  out.fit = fit;
  return out;
}

}  // namespace detail

inline const std::vector<ExperimentDef>& experiment_catalog() {
  using detail::defaults;
  static const std::vector<ExperimentDef> catalog = [] {
    std::vector<ExperimentDef> v;
    {
      ExperimentDef d;
      d.name = "quantile-lemma";
      d.description = "m_q, m_1, I_1, I_q sandwich (lhs_log = log(I_q/I_1), rhs_exponent = q) for measure/body pairs; fits C in I_q <= C q I_1 and c in m_q >= c e^{-q} m_1";
      d.defaults = defaults(d.name, {"gaussian", "product-exponential", "uniform-l1"}, {"ball", "cube"}, {16}, {}, {},
                            {1, 2, 3, 4, 6, 8});
      d.defaults.budgets.bank = 1000000;
      d.run = detail::run_quantile;
      v.push_back(d);
    }
    {
      ExperimentDef d;
      d.name = "sharpness-cylinder";
      d.description = "Greedy packing of Z_p(gamma_n) by the cylinder s sqrt(p) B_2^k x R^{n-k}; needs >= e^k points";
      d.defaults = defaults(d.name, {"gaussian"}, {}, {8}, {4}, {}, {});
      d.defaults.k = {3};
      d.defaults.budgets.bank = 10000;
      d.defaults.budgets.candidates = 100000;
      d.defaults.budgets.greedy_orders = 2;
      d.run = detail::run_cylinder;
      v.push_back(d);
    }
    {
      ExperimentDef d;
      d.name = "part3-large-p";
      d.description = "p >= n: log M(Z_p, t m_q(mu,L) L) <= 1 + q + C p / t";
      d.defaults = defaults(d.name, {"uniform-l1"}, {"ball"}, {4}, {8}, {0.25, 0.5, 1, 2}, {1, 2, 4});
      d.run = [](const ExperimentConfig& c, std::uint64_t s) {
        detail::PackingTheorem th;
        th.scale = [](const SampleBank& b, const Body& K, double q) { return quantile_mq(b, K, q); };
        th.separator = [](const Body& K, const std::string&, int, double t, double sc) { return scaled(K, t * sc); };
        th.structural = [](const std::string&, int, double p, double t, double) { return p / t; };
        th.additive = [](double q) { return 1.0 + q; };
        th.skip = [](int n, double p, double) { return p < n ? std::string("p < n: outside the large-p range") : std::string(); };
        th.scale_name = "m_q";
        return detail::run_packing(c, s, th, 20.0);
      };
      v.push_back(d);
    }
    {
      ExperimentDef d;
      d.name = "ellipsoid-regular";
      d.description = "log M(Z_p, t m_1(mu,E) E) <= C (p/t^2 + p/t)";
      d.defaults = defaults(d.name, {"gaussian-anisotropic", "product-exponential", "uniform-l1"}, {"ball"}, {8, 16},
                            {1, 2, 4, 8}, {0.5, 1, 2, 4}, {1});
      d.run = [](const ExperimentConfig& c, std::uint64_t s) {
        detail::PackingTheorem th;
        th.scale = [](const SampleBank& b, const Body& K, double) { return quantile_mq(b, K, 1.0); };
        th.separator = [](const Body& K, const std::string&, int, double t, double sc) { return scaled(K, t * sc); };
        th.structural = [](const std::string&, int, double p, double t, double) { return p / (t * t) + p / t; };
        return detail::run_packing(c, s, th, 20.0);
      };
      v.push_back(d);
    }
    {
      ExperimentDef d;
      d.name = "weak-part2-ellipsoid";
      d.description = "p <= n: log M(Z_p, t I_1(mu,E) E) <= C (p^{2/3} n^{1/3} / t^{2/3} + sqrt(p n) / t)";
      d.defaults = defaults(d.name, {"gaussian-anisotropic", "product-exponential", "uniform-l1"}, {"ball", "ellipsoid"},
                            {4, 8}, {1, 2, 4, 8}, {0.5, 1, 2, 4}, {1});
      d.run = [](const ExperimentConfig& c, std::uint64_t s) {
        detail::PackingTheorem th;
        th.scale = [](const SampleBank& b, const Body& K, double) { return moment_Iq(b, K, 1.0); };
        th.separator = [](const Body& K, const std::string&, int, double t, double sc) { return scaled(K, t * sc); };
        th.structural = [](const std::string&, int n, double p, double t, double) {
          return part2_ellipsoid_log_rhs(p, n, t, 1.0);
        };
        th.skip = [](int n, double p, double) { return p > n ? std::string("p > n: outside the weak Part 2 range") : std::string(); };
        th.scale_name = "I_1";
        return detail::run_packing(c, s, th, 20.0);
      };
      v.push_back(d);
    }
    {
      ExperimentDef d;
      d.name = "cube-regular";
      d.description = "log M(Z_p, t loglog(e+n) m_1(mu,B_inf) B_inf) <= C log(e+n) (p/t^2 + p/t)";
      d.defaults = defaults(d.name, {"gaussian-anisotropic", "product-exponential", "uniform-l1"}, {"cube"}, {8, 16},
                            {1, 2, 4, 8}, {0.5, 1, 2, 4}, {1});
      d.run = [](const ExperimentConfig& c, std::uint64_t s) {
        detail::PackingTheorem th;
        th.scale = [](const SampleBank& b, const Body& K, double) { return quantile_mq(b, K, 1.0); };
        th.separator = [](const Body& K, const std::string&, int n, double t, double sc) {
          return scaled(K, t * detail::loglog(n) * sc);
        };
        th.structural = [](const std::string&, int n, double p, double t, double) {
          return std::log(std::numbers::e + n) * (p / (t * t) + p / t);
        };
        return detail::run_packing(c, s, th, 20.0);
      };
      v.push_back(d);
    }
    {
      ExperimentDef d;
      d.name = "polytope-few-facets";
      d.description = "2N-facet polytope K: log M(Z_p, t loglog(e+N) m_1(mu,K) K) <= C log(e+N) (p/t^2 + p/t)";
      d.defaults = defaults(d.name, {"gaussian", "product-exponential"}, {"polytope:12", "polytope:32"}, {6}, {1, 2, 4},
                            {0.5, 1, 2}, {1});
      d.run = [](const ExperimentConfig& c, std::uint64_t s) {
        detail::PackingTheorem th;
        th.scale = [](const SampleBank& b, const Body& K, double) { return quantile_mq(b, K, 1.0); };
        th.separator = [](const Body& K, const std::string& name, int n, double t, double sc) {
          return scaled(K, t * detail::loglog(facet_pairs(name, n)) * sc);
        };
        th.structural = [](const std::string& name, int n, double p, double t, double) {
          return std::log(std::numbers::e + facet_pairs(name, n)) * (p / (t * t) + p / t);
        };
        return detail::run_packing(c, s, th, 20.0);
      };
      v.push_back(d);
    }
    {
      ExperimentDef d;
      d.name = "sudakov-classical";
      d.description = "log M(K, t M*(K) B_2) against n / max(t, t^2); weak bound n/t checked with constant 1";
      d.defaults = defaults(d.name, {}, {"cube", "l1", "ellipsoid"}, {4, 8}, {}, {0.5, 1, 2, 4}, {});
      d.defaults.budgets.candidates = 3000;
      d.run = detail::run_sudakov;
      v.push_back(d);
    }
    return v;
  }();
  return catalog;
}

inline const ExperimentDef& find_experiment(const std::string& name) {
  for (const auto& d : experiment_catalog())
    if (d.name == name) return d;
  throw UsageError("unknown experiment '" + name + "'");
}

/// Experiment defaults overlaid with the config file; validated.
inline ExperimentConfig load_config(const Json& j) {
  if (!j.is_object() || !j.contains("experiment")) throw UsageError("config: 'experiment' is required");
  const auto& def = find_experiment(j.at("experiment").get<std::string>());
  ExperimentConfig c = config_overlay(def.defaults, j);
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError("config: " + what);
  };
  need(!c.n.empty(), "grid 'n' is empty");
  need(!c.seeds.empty(), "'seeds' is empty");
  const std::string& e = c.experiment;
  if (e != "sudakov-classical") need(!c.measures.empty(), "grid 'measures' is empty");
  if (e != "sharpness-cylinder") need(!c.bodies.empty(), "grid 'bodies' is empty");
  if (e != "quantile-lemma" && e != "sharpness-cylinder") need(!c.t.empty(), "grid 't' is empty");
  if (e != "quantile-lemma" && e != "sudakov-classical") need(!c.p.empty(), "grid 'p' is empty");
  if (e != "sharpness-cylinder" && e != "sudakov-classical") need(!c.q.empty(), "grid 'q' is empty");
  if (e == "sharpness-cylinder") need(!c.k.empty(), "grid 'k' is empty");
  for (int n : c.n) need(n >= 1 && n <= kMaxHarnessDim, "n must lie in [1, 64]");
  for (double p : c.p) need(p >= 1.0 && std::isfinite(p), "p must be finite and >= 1");
  for (double t : c.t) need(t > 0.0, "t must be positive");
  for (double q : c.q) need(q > 0.0, "q must be positive");
  for (const auto& m : c.measures) measure_family(m, 2);
  for (const auto& b : c.bodies) {
    if (b.rfind("polytope:", 0) == 0) {
      for (int n : c.n) body_family(b, n);
    } else {
      body_family(b, 2);
    }
  }
  need(c.budgets.bank >= 1000 && c.budgets.bank <= kMaxBank, "budgets.bank must lie in [1000, 2e6]");
  need(c.budgets.candidates >= 1 && c.budgets.candidates <= kMaxCandidates, "budgets.candidates must lie in [1, 2e5]");
  need(c.budgets.greedy_orders >= 1 && c.budgets.greedy_orders <= kMaxGreedyOrders, "budgets.greedy_orders must lie in [1, 16]");
  need(c.budgets.mean_width_samples >= 100, "budgets.mean_width_samples must be >= 100");
  return c;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
  return load_config(j);
}

/// Runs every seed of the config. `seed_override` replaces the config seeds.
inline ExperimentReport run(ExperimentConfig config, std::optional<std::uint64_t> seed_override = std::nullopt) {
  if (seed_override) config.seeds = {*seed_override};
  const auto& def = find_experiment(config.experiment);
  ExperimentReport rep;
  rep.config = config;
  rep.config_hash = config_hash(config);
  for (std::uint64_t s : config.seeds) {
    auto r = def.run(config, s);
    rep.rows.insert(rep.rows.end(), r.rows.begin(), r.rows.end());
    rep.warnings.insert(rep.warnings.end(), r.warnings.begin(), r.warnings.end());
    rep.passed = rep.passed && r.fit.passed;
    rep.fits.push_back(std::move(r.fit));
  }
  std::map<std::string, std::vector<double>> by;
  for (const auto& f : rep.fits)
    for (const auto& [k, v] : f.constants) by[k].push_back(v);
  for (const auto& [k, vs] : by) {
    const double mean = std::accumulate(vs.begin(), vs.end(), 0.0) / vs.size();
    double dev = 0.0;
    for (double v : vs) dev = std::max(dev, mean > 0.0 ? std::abs(v / mean - 1.0) : std::abs(v));
    rep.stability[k] = dev;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Persistence and rendering

namespace detail {

inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
inline double num_from(const Json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

}  // namespace detail

inline Json to_json(const ReportRow& r) {
  Json j{{"experiment", r.experiment},
         {"n", r.n},
         {"p", detail::num(r.p)},
         {"t", detail::num(r.t)},
         {"q", detail::num(r.q)},
         {"measure", r.measure},
         {"body", r.body},
         {"lhs_log", detail::num(r.lhs_log)},
         {"rhs_exponent", detail::num(r.rhs_exponent)},
         {"fitted_C", detail::num(r.fitted_C)},
         {"margin", detail::num(r.margin)},
         {"seed", r.seed},
         {"run_seed", r.run_seed},
         {"cell", r.cell},
         {"wall_ms", r.wall_ms},
         {"extra", r.extra}};
  if (!r.skipped.empty()) j["skipped"] = r.skipped;
  return j;
}

inline ReportRow row_from_json(const Json& j) {
  ReportRow r;
  r.experiment = j.at("experiment").get<std::string>();
  r.n = j.at("n").get<int>();
  r.p = detail::num_from(j.at("p"));
  r.t = detail::num_from(j.at("t"));
  r.q = detail::num_from(j.at("q"));
  r.measure = j.at("measure").get<std::string>();
  r.body = j.at("body").get<std::string>();
  r.lhs_log = detail::num_from(j.at("lhs_log"));
  r.rhs_exponent = detail::num_from(j.at("rhs_exponent"));
  r.fitted_C = detail::num_from(j.at("fitted_C"));
  r.margin = detail::num_from(j.value("margin", Json(nullptr)));
  r.seed = j.at("seed").get<std::uint64_t>();
  r.run_seed = j.at("run_seed").get<std::uint64_t>();
  r.cell = j.at("cell").get<std::size_t>();
  r.wall_ms = j.at("wall_ms").get<double>();
  r.extra = j.value("extra", Json::object());
  r.skipped = j.value("skipped", std::string());
  return r;
}

inline Json to_json(const ExperimentReport& rep) {
  Json fits = Json::array();
  for (const auto& f : rep.fits)
    fits.push_back(Json{{"seed", f.seed}, {"constants", f.constants}, {"passed", f.passed}, {"failures", f.failures}});
  Json rows = Json::array();
  for (const auto& r : rep.rows) rows.push_back(to_json(r));
  return Json{{"metadata",
               {{"artifact_version", kArtifactVersion},
                {"config_hash", rep.config_hash},
                {"experiment", rep.config.experiment},
                {"config", to_json(rep.config)},
                {"passed", rep.passed},
                {"stability", rep.stability},
                {"warnings", rep.warnings}}},
              {"fits", fits},
              {"rows", rows}};
}

inline ExperimentReport report_from_json(const Json& j) {
  ExperimentReport rep;
  try {
    const Json& m = j.at("metadata");
    ExperimentConfig base;
    rep.config = config_overlay(base, m.at("config"));
    rep.config_hash = m.at("config_hash").get<std::string>();
    rep.passed = m.at("passed").get<bool>();
    rep.stability = m.at("stability").get<std::map<std::string, double>>();
    rep.warnings = m.at("warnings").get<std::vector<std::string>>();
    for (const auto& f : j.at("fits")) {
      SeedFit s;
      s.seed = f.at("seed").get<std::uint64_t>();
      s.constants = f.at("constants").get<std::map<std::string, double>>();
      s.passed = f.at("passed").get<bool>();
      s.failures = f.at("failures").get<std::vector<std::string>>();
      rep.fits.push_back(std::move(s));
    }
    for (const auto& r : j.at("rows")) rep.rows.push_back(row_from_json(r));
  } catch (const Json::exception& e) {
    throw UsageError(std::string("report: ") + e.what());
  }
  return rep;
}

inline void save_report(const ExperimentReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write report '" + path + "'");
  out << to_json(rep).dump(2) << '\n';
}

inline ExperimentReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open report '" + path + "'");
  try {
    return report_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw UsageError("report '" + path + "': " + e.what());
  }
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{"experiment", "n",       "p",            "t",        "q",    "measure",
                                             "body",       "lhs_log", "rhs_exponent", "fitted_C", "seed", "wall_ms"};
  return cols;
}

namespace detail {

inline std::string fmt(double v, int digits = 17) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::vector<std::string> cells(const ReportRow& r, int digits) {
  return {r.experiment, std::to_string(r.n), fmt(r.p, digits), fmt(r.t, digits), fmt(r.q, digits), r.measure, r.body,
          fmt(r.lhs_log, digits), fmt(r.rhs_exponent, digits), fmt(r.fitted_C, digits), std::to_string(r.seed),
          fmt(r.wall_ms, 6)};
}

}  // namespace detail

inline std::string render_csv(const ExperimentReport& rep) {
  std::ostringstream os;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : rep.rows) {
    const auto c = detail::cells(r, 17);
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << '\n';
  }
  return os.str();
}

inline std::string render_table(const ExperimentReport& rep) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> head = csv_columns();
  head.push_back("note");
  grid.push_back(head);
  for (const auto& r : rep.rows) {
    auto c = detail::cells(r, 4);
    c.push_back(r.skipped.empty() ? "" : "skipped: " + r.skipped);
    grid.push_back(std::move(c));
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : grid)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream os;
  for (const auto& row : grid) {
    for (std::size_t i = 0; i < row.size(); ++i) os << std::left << std::setw(static_cast<int>(width[i] + 2)) << row[i];
    os << '\n';
  }
  os << "\nexperiment " << rep.config.experiment << "  config " << rep.config_hash.substr(0, 12) << "  "
     << (rep.passed ? "PASS" : "FAIL") << '\n';
  for (const auto& f : rep.fits) {
    os << "seed " << f.seed << ':';
    for (const auto& [k, v] : f.constants) os << ' ' << k << '=' << detail::fmt(v, 6);
    for (const auto& why : f.failures) os << "\n  " << why;
    os << '\n';
  }
  for (const auto& [k, v] : rep.stability) os << "stability " << k << ": max deviation " << detail::fmt(100.0 * v, 3) << "%\n";
  return os.str();
}

struct SeedAudit {
  bool ok = true;
  std::vector<std::string> problems;
  std::size_t rows = 0;
  std::size_t rerun_mismatches = 0;
};

/// Checks the config hash, per-row seed derivation and seed uniqueness; with
/// `rerun`, re-executes the config and compares every numeric column except
/// wall time.
inline SeedAudit seed_audit(const ExperimentReport& rep, bool rerun = false) {
  SeedAudit a;
  a.rows = rep.rows.size();
  auto problem = [&](std::string s) {
    a.ok = false;
    a.problems.push_back(std::move(s));
  };
  if (config_hash(rep.config) != rep.config_hash) problem("config hash does not match the embedded config");
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  const std::set<std::uint64_t> seeds(rep.config.seeds.begin(), rep.config.seeds.end());
  for (const auto& r : rep.rows) {
    if (!seeds.count(r.run_seed)) problem("row cell " + std::to_string(r.cell) + ": run seed not in config");
    if (derive_seed(r.run_seed, r.cell) != r.seed) problem("row cell " + std::to_string(r.cell) + ": seed is not derived from (run seed, cell)");
    if (!seen.insert({r.run_seed, r.seed}).second) problem("row cell " + std::to_string(r.cell) + ": duplicate seed");
  }
  if (rerun) {
    const auto again = run(rep.config);
    if (again.rows.size() != rep.rows.size()) {
      problem("rerun produced a different number of rows");
    } else {
      for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto x = detail::cells(rep.rows[i], 17), y = detail::cells(again.rows[i], 17);
        if (!std::equal(x.begin(), x.end() - 1, y.begin())) {
          ++a.rerun_mismatches;
          problem("rerun differs at row " + std::to_string(i));
        }
      }
    }
  }
  return a;
}

}  // namespace sudakov
