// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// fails. `acceptance 4 9` runs a subset.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "sudakov/sudakov.hpp"

using namespace sudakov;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double ball_volume(int n) { return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0); }

QuermassEstimate exact_w(int n, int k, double v) {
  QuermassEstimate q;
  q.n = n;
  q.k = k;
  q.value = v;
  return q;
}

PointCloud uniform_cloud(const Body& body, std::size_t N, std::uint64_t seed) {
  return cloud_from_bank(sample(Measure::uniform(body), N, seed).points, "uniform", seed);
}

Matrix random_matrix(Engine& rng, int n) {
  Matrix A(n, n);
  for (int i = 0; i < n; ++i) A.col(i) = gaussian_vector(rng, n);
  return A + 0.5 * Matrix::Identity(n, n);
}

// 1. Steiner polynomial of the ball, gauge/support dualities, projection orthogonality.
void exact_identities(Outcome& o) {
  double worst_steiner = 0.0;
  for (int n = 1; n <= 10; ++n) {
    std::vector<QuermassEstimate> W;
    for (int k = 1; k <= n; ++k) W.push_back(exact_w(n, k, ball_volume(n)));
    for (double t : {0.5, 1.0, 2.0}) {
      const double ref = std::pow(1.0 + t, n) * ball_volume(n);
      worst_steiner = std::max(worst_steiner, std::abs(steiner_volume(W, t) - ref) / ref);
    }
  }
  Engine rng = make_stream(101);
  double worst_dual = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 10;
    const Vector x = gaussian_vector(rng, n);
    const Matrix A = random_matrix(rng, n);
    const double g = gauge(Body::ellipsoid(A), x);
    worst_dual = std::max(worst_dual, std::abs(g - support(Body::ellipsoid(A.transpose().inverse()), x)) / std::max(1.0, g));
    const double a = 0.5 + (trial % 7) * 0.25;
    const double gc = gauge(Body::cube(n, a), x);
    worst_dual = std::max(worst_dual, std::abs(gc - support(Body::lq_ball(n, 1.0, 1.0 / a), x)) / std::max(1.0, gc));
    worst_dual = std::max(worst_dual, std::abs(x.cwiseAbs().maxCoeff() / a - gc) / std::max(1.0, gc));
  }
  double worst_orth = 0.0;
  for (auto [n, m] : {std::pair{8, 3}, {64, 8}, {256, 160}, {10, 10}}) {
    const auto P = random_projection(n, m, 7);
    worst_orth = std::max(worst_orth, (P.matrix * P.matrix.transpose() - Matrix::Identity(m, m)).cwiseAbs().maxCoeff());
  }
  o.detail << "steiner rel err " << worst_steiner << ", duality err " << worst_dual << ", orthogonality err " << worst_orth;
  o.require(worst_steiner <= 1e-9, "Steiner identity");
  o.require(worst_dual <= 1e-9, "gauge/support duality");
  o.require(worst_orth <= 1e-10, "projection orthogonality");
}

// 2. greedy <= exact and N(2B) <= M(B) <= N(B) on 200 clouds.
void oracle_equivalence(Outcome& o) {
  Engine rng = make_stream(202);
  std::uniform_real_distribution<double> U(0.1, 0.6);
  int violations = 0, sandwich_fail = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const int n = 1 + inst % 4;
    const std::size_t N = 8 + static_cast<std::size_t>(inst % 33);
    const PointCloud c = uniform_cloud(Body::cube(n, 1.0), N, 5000 + static_cast<std::uint64_t>(inst));
    Vector d(n);
    for (int i = 0; i < n; ++i) d[i] = U(rng);
    const Body B = inst % 3 == 0 ? Body::cube(n, d[0]) : Body::ellipsoid(d.asDiagonal());
    const auto g = GaugeOracle::of(B);
    const auto greedy = greedy_packing(c, g, static_cast<std::uint64_t>(inst));
    const auto exact = exact_max_packing(c, g);
    if (greedy.count > exact.count || !verify_separated(c, g, exact.witness)) ++violations;
    const int cover2 = exact_min_covering(c, GaugeOracle::of(scaled(B, 2.0))).count;
    const int cover1 = exact_min_covering(c, g).count;
    if (!(cover2 <= exact.count && exact.count <= cover1)) ++sandwich_fail;
  }
  o.detail << "200 clouds: greedy>exact " << violations << ", sandwich failures " << sandwich_fail;
  o.require(violations == 0, "greedy <= exact");
  o.require(sandwich_fail == 0, "finite sandwich");
}

// 3. Dense cloud in the unit disc against B = disc/2.
void volumetric(Outcome& o) {
  const Body disc = Body::euclidean_ball(2);
  const Body B = Body::euclidean_ball(2, 0.5);
  const auto vol = volumetric_packing_upper(disc, B, 40000, 303);
  const double upper = vol.ratio.value + 3.0 * vol.ratio.std_error;
  // dense cloud: 64 points (the exact-solver cap) taken farthest-first from 20000
  const PointCloud dense = uniform_cloud(disc, 20000, 304);
  const auto spread = greedy_packing(dense, Body::euclidean_ball(2, 0.05), 1, GreedyOrder::FarthestPoint);
  PointCloud c;
  const std::size_t keep = std::min<std::size_t>(kExactPackingMax, spread.witness.size());
  c.points.resize(static_cast<Eigen::Index>(keep), 2);
  for (std::size_t i = 0; i < keep; ++i) c.points.row(static_cast<Eigen::Index>(i)) = dense.points.row(spread.witness[i]);
  const int exact = exact_max_packing(c, B).count;
  o.detail << "exact " << exact << " on " << keep << " points, volumetric 9 ~ " << vol.ratio.value << " +3sd " << upper;
  o.require(exact >= 4, "exact >= 4");
  o.require(exact <= upper, "exact <= volumetric + 3 sigma");
}

// 4. Cylinder sharpness.
void sharpness(Outcome& o) {
  const auto rep = run(load_config(Json{{"experiment", "sharpness-cylinder"}}));
  const auto& r = rep.rows.at(0);
  const int count = r.extra["count"], target = r.extra["target"];
  const std::size_t cand = r.extra["candidates"];
  o.detail << "count " << count << " (target " << target << ") from " << cand << " candidates, separation verified "
           << r.extra["verified"].get<bool>();
  o.require(count >= 21, ">= 21 points");
  o.require(cand >= 100000, ">= 1e5 candidates");
  o.require(r.extra["verified"].get<bool>(), "witness separated");
}

// 5. Quantile-lemma suite on 6 pairs, n = 16, N = 1e6.
void quantile_suite(Outcome& o) {
  const auto rep = run(load_config(Json{{"experiment", "quantile-lemma"}, {"n", {16}}, {"budgets", {{"bank", 1000000}}}}));
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& r : rep.rows) pairs.insert({r.measure, r.body});
  const auto& f = rep.fits.at(0).constants;
  o.detail << pairs.size() << " pairs, markov " << f.at("markov") << ", C " << f.at("C") << ", c " << f.at("c");
  o.require(pairs.size() >= 6, "6 pairs");
  o.require(f.at("markov") <= 1.05, "m_1 <= 1.05 (e/(e-1)) I_1");
  o.require(f.at("C") <= 10.0, "C <= 10");
  o.require(f.at("c") >= 1e-3, "c >= 1e-3");
}

// 6. Small-ball law and constant.
void small_ball(Outcome& o) {
  const auto v = small_ball_samples(64, 8, 100000, 606);
  const double ks = kolmogorov_distance(v, [](double s) { return small_ball_cdf(64, 8, s); });
  // oracle cross-check of the closed-form cdf on a grid
  double cdf_err = 0.0;
  for (double s = 0.1; s < 2.5; s += 0.1)
    cdf_err = std::max(cdf_err, std::abs(small_ball_cdf(64, 8, s) - oracle::beta_cdf(s * s / 8.0, 4.0, 28.0)));
  const auto fit = small_ball_fit(64, 8, {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}, 100000, 607);
  o.detail << "KS " << ks << ", cdf vs quadrature " << cdf_err << ", C' " << fit.C_prime << " (" << fit.pruned.size()
           << " eps pruned)";
  o.require(ks <= 0.01, "KS <= 0.01");
  o.require(cdf_err <= 1e-7, "Beta cdf oracle");
  o.require(fit.C_prime <= 3.0, "C' <= 3");
}

// 7. Johnson-Lindenstrauss frequency.
void jl(Outcome& o) {
  Engine rng = make_stream(707);
  PointCloud c;
  c.points.resize(100, 256);
  for (int i = 0; i < 100; ++i) c.points.row(i) = gaussian_vector(rng, 256).transpose();
  const auto r = jl_check(c, 160, 0.5, 50, 708);
  o.detail << "success " << r.success << " over " << r.trials << " trials";
  o.require(r.success >= 0.9, "success >= 0.9");
}

// 8. Cell combinatorics against brute force.
void combinatorics(Outcome& o) {
  const auto K = box_cell_oracle(Vector::Zero(2), Vector::Constant(2, 2.0));
  const long long s = cell_content(K);
  const int v = comb_dimension(K);
  Engine rng = make_stream(808);
  std::uniform_real_distribution<double> U(-2.5, 2.5), W(0.2, 3.0);
  int mismatches = 0;
  for (int inst = 0; inst < 50; ++inst) {
    const int n = 1 + inst % 4;
    oracle::CellCount ref;
    CellOracle C;
    if (inst % 2 == 0) {
      Vector lo(n), hi(n);
      for (int i = 0; i < n; ++i) {
        lo[i] = U(rng);
        hi[i] = lo[i] + W(rng);
      }
      C = box_cell_oracle(lo, hi);
      ref = oracle::brute_force_cells(n, 6, [&](const std::vector<int>& S, const std::vector<double>& y) {
        for (std::size_t j = 0; j < S.size(); ++j)
          if (y[j] < lo[S[j]] || y[j] > hi[S[j]]) return false;
        return true;
      });
    } else {
      Matrix A(n, n);
      for (int i = 0; i < n; ++i) A.col(i) = 1.2 * gaussian_vector(rng, n);
      Vector c(n);
      for (int i = 0; i < n; ++i) c[i] = 0.5 * U(rng);
      const Matrix S = A * A.transpose();
      C = ellipsoid_cell_oracle(A, c);
      ref = oracle::brute_force_cells(n, 8, [&](const std::vector<int>& idx, const std::vector<double>& y) {
        std::vector<std::vector<double>> sub(idx.size(), std::vector<double>(idx.size()));
        std::vector<double> d(idx.size());
        for (std::size_t a = 0; a < idx.size(); ++a) {
          d[a] = y[a] - c[idx[a]];
          for (std::size_t b = 0; b < idx.size(); ++b) sub[a][b] = S(idx[a], idx[b]);
        }
        return oracle::quadratic_form_inverse(sub, d) <= 1.0 + 1e-12;
      });
    }
    if (cell_content(C) != ref.sigma || comb_dimension(C) != ref.v) ++mismatches;
  }
  o.detail << "Sigma([0,2]^2) = " << s << ", v = " << v << ", brute-force mismatches " << mismatches << "/50";
  o.require(s == 9 && v == 2, "[0,2]^2");
  o.require(mismatches == 0, "brute force agreement");
}

// 9. Theorem suites with fitted constants, three seeds each.
void theorem_suites(Outcome& o) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "sudakov-acceptance";
  std::filesystem::create_directories(dir);
  for (const char* name : {"ellipsoid-regular", "cube-regular", "part3-large-p", "weak-part2-ellipsoid"}) {
    const auto start = Clock::now();
    const auto rep = run(load_config(Json{{"experiment", name}, {"seeds", {1, 2, 3}}}));
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const auto path = dir / (std::string(name) + ".json");
    save_report(rep, path.string());
    const auto back = load_report(path.string());
    double worst = 0.0;
    for (const auto& f : rep.fits) worst = std::max(worst, f.constants.at("C"));
    const double stab = rep.stability.at("C");
    std::size_t used = 0;
    for (const auto& r : rep.rows) used += r.skipped.empty();
    o.detail << "\n    " << name << ": C " << worst << ", seed spread " << 100.0 * stab << "%, rows " << used << "/"
             << rep.rows.size() << ", " << secs << " s";
    o.require(worst <= 20.0, std::string(name) + " C <= 20");
    o.require(stab <= 0.10, std::string(name) + " stable within 10%");
    o.require(secs < 600.0, std::string(name) + " under 10 min");
    o.require(back.config_hash == rep.config_hash && seed_audit(back).ok, std::string(name) + " persisted");
  }
}

// 10. Centroid-body structure.
void centroid_structure(Outcome& o) {
  const int n = 6;
  const auto bank = std::make_shared<const SampleBank>(sample(Measure::product_exponential(n), 200000, 1001));
  const Matrix dirs = sample_directions(n, 200, 1002);
  double jensen = 0.0, reverse = 0.0;
  const std::vector<double> ps{1.0, 2.0, 3.0, 4.0, 6.0};
  for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
    const Vector lo = zp_support_columns(ZpBody(bank, ps[i]), dirs);
    const Vector hi = zp_support_columns(ZpBody(bank, ps[i + 1]), dirs);
    jensen = std::max(jensen, (lo.array() / hi.array()).maxCoeff());
    reverse = std::max(reverse, (hi.array() / (ps[i + 1] / ps[i] * lo.array())).maxCoeff());
  }
  double band = 0.0, i1 = 0.0;
  for (const auto& mu : {Measure::standard_gaussian(8), Measure::product_exponential(8)}) {
    const auto b = std::make_shared<const SampleBank>(sample(mu, 100000, 1003));
    const ZpBody Z(b, 8.0);
    const KpBody K(mu, 8.0);
    const auto zs = shape_oracle(Z), ks = shape_oracle(K);
    band = std::max({band, inclusion_ratio(zs, ks, InclusionMode::Star, 60, 1004),
                     inclusion_ratio(ks, zs, InclusionMode::Star, 60, 1004)});
    // I_1(mu, Z_n(mu)) on fresh draws
    const SampleBank fresh = sample(mu, 1000, 1005);
    KahanSum acc;
    for (Eigen::Index i = 0; i < fresh.points.rows(); ++i) acc.add(zp_gauge(Z, fresh.points.row(i).transpose()).value);
    i1 = std::max(i1, acc.value() / fresh.points.rows());
  }
  o.detail << "Jensen ratio " << jensen << ", reverse ratio " << reverse << ", Z_n/K_n band c " << band << ", I_1(Z_n) "
           << i1;
  o.require(jensen <= 1.0 + 1e-12, "Z_p in Z_q");
  o.require(reverse <= 1.0 + 0.02, "Z_q in (q/p) Z_p");
  o.require(band <= 10.0, "Z_n ~ K_n with c <= 10");
  o.require(i1 <= 10.0, "I_1(mu, Z_n) <= 10");
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "exact identities", 1.0, exact_identities},
      {2, "oracle equivalence", 30.0, oracle_equivalence},
      {3, "volumetric realization", 10.0, volumetric},
      {4, "cylinder sharpness", 60.0, sharpness},
      {5, "quantile lemma suite", 120.0, quantile_suite},
      {6, "small-ball law", 30.0, small_ball},
      {7, "Johnson-Lindenstrauss", 30.0, jl},
      {8, "cell combinatorics", 10.0, combinatorics},
      {9, "theorem suites", 2400.0, theorem_suites},
      {10, "centroid-body structure", 300.0, centroid_structure},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  bool all_ok = true;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    const auto start = Clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (secs > c.budget_s) {
      o.ok = false;
      o.detail << " [over budget: " << secs << " s > " << c.budget_s << " s]";
    }
    all_ok = all_ok && o.ok;
    std::printf("%s criterion %d (%s, %.2f s): %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return all_ok ? 0 : 1;
}
