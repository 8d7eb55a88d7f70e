#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sudakov/measures.hpp"
#include "sudakov/packing.hpp"

using namespace sudakov;

namespace {

PointCloud cloud_of(std::initializer_list<std::vector<double>> rows) {
  PointCloud c;
  const auto n = static_cast<Eigen::Index>(rows.begin()->size());
  c.points.resize(static_cast<Eigen::Index>(rows.size()), n);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    for (Eigen::Index k = 0; k < n; ++k) c.points(i, k) = r[static_cast<std::size_t>(k)];
    ++i;
  }
  return c;
}

PointCloud uniform_cloud(const Body& body, std::size_t N, std::uint64_t seed) {
  return cloud_from_bank(sample(Measure::uniform(body), N, seed).points, "uniform", seed);
}

Body random_ellipse(Engine& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi), ang(0.0, 3.14159);
  const double a = ang(rng);
  Matrix R(2, 2);
  R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = u(rng);
  D(1, 1) = u(rng);
  return Body::ellipsoid(R * D);
}

// Conflict matrix computed pointwise with the public gauge.
std::vector<std::vector<bool>> conflicts(const PointCloud& c, const Body& B) {
  const auto N = static_cast<std::size_t>(c.size());
  std::vector<std::vector<bool>> m(N, std::vector<bool>(N, false));
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      if (i != j)
        m[i][j] = gauge(B, (c.points.row(static_cast<Eigen::Index>(i)) - c.points.row(static_cast<Eigen::Index>(j))).transpose()) <= 2.0;
  return m;
}

std::vector<std::vector<bool>> cover_sets(const PointCloud& c, const Body& B) {
  const auto N = static_cast<std::size_t>(c.size());
  std::vector<std::vector<bool>> m(N, std::vector<bool>(N, false));
  for (std::size_t ctr = 0; ctr < N; ++ctr)
    for (std::size_t p = 0; p < N; ++p)
      m[ctr][p] = gauge(B, (c.points.row(static_cast<Eigen::Index>(p)) - c.points.row(static_cast<Eigen::Index>(ctr))).transpose()) <= 1.0;
  return m;
}

}  // namespace

TEST(Packing, TwoPointExamples) {
  const Body ball = Body::euclidean_ball(2);
  EXPECT_EQ(greedy_packing(cloud_of({{0, 0}, {3, 0}}), ball).count, 2);
  EXPECT_EQ(greedy_packing(cloud_of({{0, 0}, {1, 0}}), ball).count, 1);
  // gauge exactly 2 is not separated
  EXPECT_EQ(exact_max_packing(cloud_of({{0, 0}, {2, 0}}), ball).count, 1);
}

TEST(Packing, DenseDiscAgainstQuarterDisc) {
  const PointCloud c = uniform_cloud(Body::euclidean_ball(2), 10000, 1);
  const auto r = greedy_packing(c, Body::euclidean_ball(2, 0.25));
  EXPECT_GE(r.count, 4);
  EXPECT_TRUE(verify_separated(c, GaugeOracle::of(Body::euclidean_ball(2, 0.25)), r.witness));
}

TEST(Packing, CollinearPath) {
  const PointCloud c = cloud_of({{0.0}, {1.5}, {3.0}});
  const auto r = exact_max_packing(c, Body::euclidean_ball(1));
  EXPECT_EQ(r.count, 2);
  EXPECT_EQ(r.witness, (std::vector<int>{0, 2}));
  PointCloud empty;
  empty.points.resize(0, 2);
  EXPECT_EQ(exact_max_packing(empty, Body::euclidean_ball(2)).count, 0);
  EXPECT_EQ(greedy_packing(empty, Body::euclidean_ball(2)).count, 0);
}

TEST(Packing, GreedyIsMaximalAndBelowExact) {
  Engine rng = make_stream(77);
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t N = 5 + static_cast<std::size_t>(inst % 36);
    const PointCloud c = uniform_cloud(Body::cube(2, 1.0), N, 1000 + static_cast<std::uint64_t>(inst));
    const Body B = random_ellipse(rng, 0.15, 0.8);
    const auto g = GaugeOracle::of(B);
    const auto greedy = greedy_packing(c, g, static_cast<std::uint64_t>(inst));
    const auto exact = exact_max_packing(c, g);
    ASSERT_TRUE(verify_separated(c, g, greedy.witness));
    ASSERT_TRUE(verify_separated(c, g, exact.witness));
    EXPECT_LE(greedy.count, exact.count);
    EXPECT_EQ(greedy.count, static_cast<int>(greedy.witness.size()));
    // maximality: every rejected point conflicts with some witness
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (std::find(greedy.witness.begin(), greedy.witness.end(), i) != greedy.witness.end()) continue;
      bool conflict = false;
      for (int w : greedy.witness)
        conflict = conflict || gauge(B, (c.points.row(i) - c.points.row(w)).transpose()) <= 2.0;
      EXPECT_TRUE(conflict);
    }
    if (N <= 20) {
      EXPECT_EQ(exact.count, oracle::brute_force_mis(conflicts(c, B)));
    }
  }
}

TEST(Packing, FarthestPointOrder) {
  const PointCloud c = uniform_cloud(Body::euclidean_ball(2), 3000, 4);
  const Body B = Body::euclidean_ball(2, 0.2);
  const auto r = greedy_packing(c, B, 3, GreedyOrder::FarthestPoint);
  EXPECT_TRUE(verify_separated(c, GaugeOracle::of(B), r.witness));
  EXPECT_EQ(r.method, "greedy-farthest");
  EXPECT_GE(r.count, 4);
}

TEST(Packing, GreedySeedsAreReproducible) {
  const PointCloud c = uniform_cloud(Body::euclidean_ball(3), 2000, 8);
  const Body B = Body::euclidean_ball(3, 0.3);
  EXPECT_EQ(greedy_packing(c, B, 5).witness, greedy_packing(c, B, 5).witness);
}

TEST(Packing, CoveringExamples) {
  const Body ball = Body::euclidean_ball(2);
  EXPECT_EQ(greedy_covering(cloud_of({{0.5, 0.5}}), ball).count, 1);
  EXPECT_EQ(exact_min_covering(cloud_of({{0.5, 0.5}}), ball).count, 1);
  EXPECT_EQ(greedy_covering(cloud_of({{0, 0}, {3, 0}}), ball).count, 2);
  EXPECT_EQ(exact_min_covering(cloud_of({{0, 0}, {3, 0}}), ball).count, 2);
  EXPECT_THROW(exact_min_covering(cloud_of({{0, 0}}), ball, false), UsageError);
}

TEST(Packing, CoveringMatchesBruteForce) {
  Engine rng = make_stream(91);
  for (int inst = 0; inst < 60; ++inst) {
    const std::size_t N = 4 + static_cast<std::size_t>(inst % 15);
    const PointCloud c = uniform_cloud(Body::cube(2, 1.0), N, 500 + static_cast<std::uint64_t>(inst));
    const Body B = random_ellipse(rng, 0.2, 0.9);
    const auto g = greedy_covering(c, B);
    const auto e = exact_min_covering(c, B);
    EXPECT_TRUE(verify_cover(c, GaugeOracle::of(B), g.centers));
    EXPECT_TRUE(verify_cover(c, GaugeOracle::of(B), e.centers));
    EXPECT_LE(e.count, g.count);
    EXPECT_EQ(e.count, oracle::brute_force_cover(cover_sets(c, B)));
    // a B-cover is at least as large as a B-packing (2-separated in gauge_B)
    EXPECT_GE(g.count, exact_max_packing(c, B).count);
    EXPECT_GE(e.count, exact_max_packing(c, B).count);
  }
}

TEST(Packing, IntervalsGreedyEqualsExact) {
  for (int inst = 0; inst < 30; ++inst) {
    const PointCloud c = uniform_cloud(Body::cube(1, 5.0), 20, 40 + static_cast<std::uint64_t>(inst));
    const Body B = Body::cube(1, 0.7);
    EXPECT_EQ(exact_min_covering(c, B).count, oracle::brute_force_cover(cover_sets(c, B)));
  }
}

TEST(Packing, ExactOracleCaps) {
  const PointCloud big = uniform_cloud(Body::cube(2, 1.0), 65, 1);
  EXPECT_THROW(exact_max_packing(big, Body::euclidean_ball(2)), BudgetError);
  const PointCloud mid = uniform_cloud(Body::cube(2, 1.0), 41, 1);
  EXPECT_THROW(exact_min_covering(mid, Body::euclidean_ball(2)), BudgetError);
  const PointCloud ok = uniform_cloud(Body::cube(2, 1.0), 64, 1);
  EXPECT_NO_THROW(exact_max_packing(ok, Body::euclidean_ball(2, 0.1)));
}

TEST(Packing, VolumetricRatios) {
  const Body disc = Body::euclidean_ball(2);
  const auto same = volumetric_packing_upper(disc, disc, 20000, 1);
  EXPECT_NEAR(same.ratio.value, 4.0, 4.0 * same.ratio.std_error + 0.02);
  const auto half = volumetric_packing_upper(disc, Body::euclidean_ball(2, 0.5), 20000, 2);
  EXPECT_NEAR(half.ratio.value, 9.0, 4.0 * half.ratio.std_error + 0.05);
  EXPECT_EQ(half.undecided, 0u);
  // square plus disc: area 4 + 4*2*1 + pi over pi
  const auto sq = volumetric_packing_upper(Body::cube(2, 1.0), disc, 20000, 3);
  const double ref = (4.0 + 8.0 + std::numbers::pi) / std::numbers::pi;
  EXPECT_NEAR(sq.ratio.value, ref, 4.0 * sq.ratio.std_error + 0.02);
  EXPECT_THROW(volumetric_packing_upper(Body::euclidean_ball(9), Body::euclidean_ball(9), 10, 1), BudgetError);
}

TEST(Packing, ExactCountsRespectVolumetricBound) {
  const Body disc = Body::euclidean_ball(2);
  const Body B = Body::euclidean_ball(2, 0.5);
  const auto vol = volumetric_packing_upper(disc, B, 20000, 9);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const PointCloud c = uniform_cloud(disc, 64, 300 + s);
    EXPECT_LE(exact_max_packing(c, B).count, vol.ratio.value + 3.0 * vol.ratio.std_error);
  }
}

TEST(Packing, SandwichAndTriangleOnRandomClouds) {
  Engine rng = make_stream(5);
  for (int inst = 0; inst < 25; ++inst) {
    const PointCloud c = uniform_cloud(Body::euclidean_ball(2), 20, 900 + static_cast<std::uint64_t>(inst));
    const Body B = random_ellipse(rng, 0.1, 0.5);
    const Body D = random_ellipse(rng, 0.3, 1.2);
    const auto r = sandwich_and_triangle_check(c, B, D);
    EXPECT_TRUE(r.sandwich_holds);
    EXPECT_TRUE(r.triangle_holds);
  }
  const PointCloud one = cloud_of({{0.1, 0.2}});
  const auto r1 = sandwich_and_triangle_check(one, Body::euclidean_ball(2), Body::euclidean_ball(2));
  EXPECT_EQ(r1.cover_2B, 1);
  EXPECT_EQ(r1.packing_B, 1);
  EXPECT_EQ(r1.cover_B, 1);
  EXPECT_EQ(r1.cover_D, 1);
  // B = D: each D-cell holds at most one B-separated point
  const PointCloud c = uniform_cloud(Body::euclidean_ball(2), 20, 3);
  const Body B = Body::euclidean_ball(2, 0.3);
  const auto rb = sandwich_and_triangle_check(c, B, B);
  EXPECT_EQ(rb.local_packing_max, 1);
  EXPECT_EQ(rb.cover_D, rb.cover_B);
}

TEST(Packing, ExtendBoundSmallT) {
  const auto ext = extend_bound_small_t([](double) { return 0.0; }, 1.0);
  EXPECT_NEAR(ext(0.5), std::log(5.0), 1e-15);
  EXPECT_NEAR(ext(1.0), std::log(3.0), 1e-15);
  EXPECT_EQ(ext(2.0), 0.0);
  double prev = ext(0.01);
  for (double t = 0.02; t < 1.0; t += 0.01) {
    EXPECT_LT(ext(t), prev);
    prev = ext(t);
  }
  EXPECT_THROW(ext(0.0), DomainError);
  EXPECT_THROW(ext(-1.0), DomainError);
}

TEST(Packing, ResultSerialization) {
  const auto r = greedy_packing(cloud_of({{0, 0}, {3, 0}}), Body::euclidean_ball(2), 4);
  const Json j = to_json(r);
  EXPECT_EQ(j.at("count"), 2);
  EXPECT_EQ(j.at("method"), "greedy");
  EXPECT_EQ(j.at("separator").at("kind"), "ellipsoid");
  EXPECT_EQ(j.at("witness").size(), 2u);
}
