#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "oracles.hpp"
#include "sudakov/measures.hpp"

using namespace sudakov;

namespace {

Matrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v[i++] = x;
  return v.asDiagonal();
}

// Second-moment matrix per independent chunk; returns mean and standard error
// of entry (i, j) from the spread between chunks.
std::pair<double, double> chunked_second_moment(const RowMatrix& X, int i, int j) {
  std::vector<double> per;
  for (Eigen::Index start = 0; start + static_cast<Eigen::Index>(kChunkRows) <= X.rows();
       start += static_cast<Eigen::Index>(kChunkRows)) {
    const auto block = X.middleRows(start, static_cast<Eigen::Index>(kChunkRows));
    per.push_back((block.col(i).array() * block.col(j).array()).mean());
  }
  const Estimate e = mean_estimate(per);
  return {e.value, e.std_error};
}

}  // namespace

TEST(Measures, GaussianSampleCovariance) {
  const SampleBank b = sample(Measure::standard_gaussian(2), 100000, 1);
  const Matrix C = covariance(b);
  EXPECT_LT((C - Matrix::Identity(2, 2)).operatorNorm(), 0.02);
}

TEST(Measures, UniformCubeMean) {
  const SampleBank b = sample(Measure::uniform(Body::cube(3)), 100000, 2);
  EXPECT_LT(b.points.colwise().mean().cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LE(b.points.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Measures, ConeExpOneDimensional) {
  // Density e^{-|x|}/2 on the line: E|x| by quadrature.
  const double oracle_mean = 2.0 * oracle::half_line([](double r) { return r * std::exp(-r) / 2.0; });
  EXPECT_NEAR(oracle_mean, 1.0, 1e-8);
  const SampleBank b = sample(Measure::cone_exp(Body::cube(1)), 100000, 3);
  EXPECT_NEAR(b.points.cwiseAbs().mean(), oracle_mean, 0.02);
  EXPECT_NEAR(moment_Iq(Measure::cone_exp(Body::cube(1)), Body::cube(1), 1.0, 100000, 3), oracle_mean, 0.02);
}

TEST(Measures, ConeExpRadialLaw) {
  // The gauge of mu_K is Gamma(n, 1): mean n, variance n.
  const Body K = Body::lq_ball(4, 1.5);
  const SampleBank b = sample(Measure::cone_exp(K), 100000, 4);
  const Vector g = bank_gauges(b, K);
  EXPECT_NEAR(g.mean(), 4.0, 0.03);
  EXPECT_NEAR((g.array() - g.mean()).square().mean(), 4.0, 0.1);
}

TEST(Measures, QuantileExamples) {
  const double s_oracle = oracle::abs_normal_quantile(std::exp(-1.0));
  // Phi^{-1}((1 + e^{-1}) / 2).
  EXPECT_NEAR(s_oracle, 0.478744, 1e-5);
  EXPECT_NEAR(quantile_mq(Measure::standard_gaussian(1), Body::cube(1), 1.0, 1000000, 5), s_oracle, 3e-3);
  // mu(sK) = s^2 for uniform on K = B_inf^2, so s = e^{-1/2}.
  EXPECT_NEAR(quantile_mq(Measure::uniform(Body::cube(2)), Body::cube(2), 1.0, 1000000, 6), std::exp(-0.5), 3e-3);
}

TEST(Measures, QuantileMonotoneInQ) {
  const SampleBank b = sample(Measure::product_exponential(5), 200000, 7);
  const Body L = Body::euclidean_ball(5);
  double prev = std::numeric_limits<double>::infinity();
  for (double q : {0.1, 0.5, 1.0, 2.0, 4.0, 7.0}) {
    const double m = quantile_mq(b, L, q);
    EXPECT_LE(m, prev);
    prev = m;
  }
}

TEST(Measures, QuantileBudget) {
  try {
    quantile_mq(Measure::standard_gaussian(2), Body::cube(2), 5.0, 1000, 1);
    FAIL();
  } catch (const BudgetError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(minimal_quantile_samples(5.0))), std::string::npos);
  }
  EXPECT_EQ(minimal_quantile_samples(1.0), 136u);
}

TEST(Measures, QuantileTieBreakIsMidpoint) {
  // 100 values 1..100 at q with e^{-q} * 100 = 50 exactly: midpoint of ranks 50 and 51.
  std::vector<double> v;
  for (int i = 100; i >= 1; --i) v.push_back(i);
  EXPECT_DOUBLE_EQ(quantile_of_values(v, std::log(2.0)), 50.5);
}

TEST(Measures, MomentExamples) {
  const int n = 16;
  const double i2 = moment_Iq(Measure::standard_gaussian(n), Body::euclidean_ball(n), 2.0, 1000000, 8);
  EXPECT_NEAR(i2 / std::sqrt(n), 1.0, 0.01);
  const SampleBank b = sample(Measure::uniform(Body::lq_ball(6, 1.0)), 50000, 9);
  const Body L = Body::cube(6);
  EXPECT_LE(moment_Iq(b, L, 1.0), moment_Iq(b, L, 2.0));
  EXPECT_LE(moment_Iq(b, L, -0.5), moment_Iq(b, L, 0.0));
  EXPECT_LE(moment_Iq(b, L, 0.0), moment_Iq(b, L, 1.0));
  EXPECT_THROW(moment_Iq(b, L, -1.0), DomainError);
  EXPECT_THROW(moment_Iq(Measure::standard_gaussian(2), L, -0.5, 5000, 1), BudgetError);
}

TEST(Measures, MomentLargeQIsStable) {
  Vector g = Vector::Constant(1000, 1e10);
  EXPECT_NEAR(moment_of_values(g, 80.0) / 1e10, 1.0, 1e-12);
  g[0] = 2e10;
  EXPECT_TRUE(std::isfinite(moment_of_values(g, 200.0)));
}

TEST(Measures, CovarianceExamples) {
  EXPECT_TRUE(covariance(Measure::gaussian(diag({2, 1})), 10, 0).isApprox(diag({4, 1})));
  // Uniform on [-1,1]: integral of x^2/2 over [-1,1] = 1/3.
  const double third = oracle::simpson([](double x) { return x * x / 2.0; }, -1.0, 1.0);
  const Matrix C = covariance(Measure::uniform(Body::cube(2)), 1000000, 10);
  EXPECT_LT((C - third * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.01);

  Matrix T(2, 3);
  T << 1, 2, 0, -1, 0, 1;
  const Measure base = Measure::product_exponential(3);
  const Matrix Cp = covariance(Measure::pushforward(T, base), 400000, 11);
  const Matrix expected = T * *exact_covariance(base) * T.transpose();
  EXPECT_LT((Cp - expected).cwiseAbs().maxCoeff(), 0.1);
}

TEST(Measures, ExactCovarianceMatchesSampling) {
  // l_1 ball in the plane: E x^2 = 1/6 by direct integration.
  const double oracle_var = oracle::simpson([](double x) { return x * x * 2.0 * (1.0 - std::abs(x)) / 2.0; }, -1, 1);
  EXPECT_NEAR(oracle_var, 1.0 / 6.0, 1e-9);
  EXPECT_NEAR((*exact_covariance(Measure::uniform(Body::lq_ball(2, 1.0))))(0, 0), oracle_var, 1e-12);
  const Matrix C = covariance(sample(Measure::uniform(Body::lq_ball(2, 1.0)), 400000, 12));
  EXPECT_NEAR(C(0, 0), oracle_var, 0.003);

  ProductFactor pw{ProductFactor::Kind::Power, 1.5, 3.0};
  const double z = 2.0 * 1.5 * std::tgamma(1.0 + 1.0 / 3.0);
  const double pv = 2.0 * oracle::half_line([](double x) { return x * x * std::exp(-std::pow(x / 1.5, 3.0)); }) / z;
  const Measure m = Measure::product({pw});
  EXPECT_NEAR((*exact_covariance(m))(0, 0), pv, 1e-6);
  EXPECT_NEAR(covariance(sample(m, 400000, 13))(0, 0), pv, 0.01);
}

TEST(Measures, IsotropicConstant) {
  const double g = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (int n : {1, 3, 10}) EXPECT_NEAR(isotropic_constant(Measure::standard_gaussian(n)), g, 1e-12);
  // (1/2^n)^{1/n} (det(I/3))^{1/2n} = 1/(2 sqrt 3).
  EXPECT_NEAR(isotropic_constant(Measure::uniform(Body::cube(5))), 0.5 / std::sqrt(3.0), 1e-12);
  Engine rng = make_stream(14);
  for (int t = 0; t < 10; ++t) {
    Matrix A(4, 4);
    for (int i = 0; i < 4; ++i) A.col(i) = gaussian_vector(rng, 4);
    EXPECT_NEAR(isotropic_constant(Measure::gaussian(A)), g, 1e-12);
    EXPECT_NEAR(isotropic_constant(Measure::uniform(Body::ellipsoid(A))),
                isotropic_constant(Measure::uniform(Body::euclidean_ball(4))), 1e-12);
  }
  EXPECT_THROW(isotropic_constant(Measure::uniform(Body::cylinder(3, 1, 1.0))), UnsupportedError);
}

TEST(Measures, Marginals) {
  Matrix first = Matrix::Zero(1, 3);
  first(0, 0) = 1.0;
  const Measure m = marginal(Measure::standard_gaussian(3), first);
  ASSERT_EQ(m.kind(), "gaussian");
  EXPECT_NEAR((*exact_covariance(m))(0, 0), 1.0, 1e-15);

  const Measure prod = Measure::product({{ProductFactor::Kind::Exponential, 1.0, 1.0},
                                         {ProductFactor::Kind::Uniform, 2.0, 1.0},
                                         {ProductFactor::Kind::Power, 1.0, 2.0}});
  const Measure sub = marginal(prod, coordinate_selector(3, {0, 2}));
  ASSERT_EQ(sub.kind(), "product");
  const auto& fs = std::get<ProductMeasure>(sub.spec()).factors;
  EXPECT_EQ(fs[0].kind, ProductFactor::Kind::Exponential);
  EXPECT_EQ(fs[1].kind, ProductFactor::Kind::Power);

  Matrix T(2, 3);
  T << 1, 1, 0, 0, 1, 1;
  const Measure pf = marginal(prod, T);
  EXPECT_EQ(pf.kind(), "pushforward");
  EXPECT_TRUE(exact_covariance(pf)->isApprox(T * *exact_covariance(prod) * T.transpose()));

  Matrix rankdef(2, 3);
  rankdef << 1, 1, 0, 2, 2, 0;
  EXPECT_THROW(marginal(prod, rankdef), ConstructionError);
}

TEST(Measures, SeededDeterminism) {
  const Measure ms[] = {Measure::standard_gaussian(3), Measure::uniform(Body::lq_ball(3, 1.5)),
                        Measure::product_exponential(3), Measure::cone_exp(Body::cube(3))};
  for (const Measure& m : ms) {
    const SampleBank a = sample(m, 3000, 77), b = sample(m, 3000, 77), c = sample(m, 3000, 78);
    EXPECT_TRUE(a.points == b.points) << m.kind();
    EXPECT_FALSE(a.points == c.points) << m.kind();
    // A prefix of a larger draw coincides with the smaller draw.
    const SampleBank big = sample(m, 5000, 77);
    EXPECT_TRUE(big.points.topRows(3000) == a.points) << m.kind();
  }
}

TEST(Measures, HitAndRunMatchesExactSampler) {
  const Body E = Body::ellipsoid(diag({2.0, 1.0, 0.5}));
  const Measure m = Measure::uniform(E);
  SamplerOptions force;
  force.force_hit_and_run = true;
  const RowMatrix exact = sample(m, 64 * kChunkRows, 15).points;
  const RowMatrix chain = sample(m, 64 * kChunkRows, 16, force).points;
  ASSERT_LE(gauge_rows(E, chain).maxCoeff(), 1.0 + 1e-9);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const auto [a, sa] = chunked_second_moment(exact, i, j);
      const auto [b, sb] = chunked_second_moment(chain, i, j);
      EXPECT_LE(std::abs(a - b), 3.0 * std::sqrt(sa * sa + sb * sb) + 1e-12) << i << "," << j;
    }
}

TEST(Measures, HitAndRunOnPolytopeAndBisection) {
  // Diamond |x|+|y| <= 1 as a polytope (exact chords) and as a radial star body
  // with a convexity flag (bisection chords).
  Matrix N(2, 2);
  N << 1, 1, 1, -1;
  const Body diamond = Body::h_polytope(N, Vector::Ones(2));
  const RowMatrix a = sample(Measure::uniform(diamond), 32 * kChunkRows, 17).points;
  const auto [va, sa] = chunked_second_moment(a, 0, 0);
  EXPECT_LE(std::abs(va - 1.0 / 6.0), 3.5 * sa);

  const Body star = Body::radial_star(
      2, [](const Vector& u) { return 1.0 / (std::abs(u[0]) + std::abs(u[1])); }, true);
  const RowMatrix b = sample(Measure::uniform(star), 16 * kChunkRows, 18).points;
  const auto [vb, sb] = chunked_second_moment(b, 1, 1);
  EXPECT_LE(std::abs(vb - 1.0 / 6.0), 3.5 * sb);

  EXPECT_THROW(sample(Measure::uniform(Body::h_polytope(Matrix::Identity(65, 65), Vector::Ones(65))), 10, 1),
               BudgetError);
}

TEST(Measures, GuedonSandwichOnSmallSuite) {
  struct Pair {
    Measure mu;
    Body L;
  };
  const int n = 8;
  std::vector<Pair> pairs = {{Measure::standard_gaussian(n), Body::cube(n)},
                             {Measure::uniform(Body::lq_ball(n, 1.0)), Body::euclidean_ball(n)},
                             {Measure::product_exponential(n), Body::lq_ball(n, 1.0)}};
  for (const auto& [mu, L] : pairs) {
    const SampleBank b = sample(mu, 200000, 19);
    const double m1 = quantile_mq(b, L, 1.0), I1 = moment_Iq(b, L, 1.0);
    EXPECT_LE(m1, std::numbers::e / (std::numbers::e - 1.0) * I1 * 1.05);
    for (double q : {1.0, 2.0, 4.0}) {
      const double mq = quantile_mq(b, L, q), Iq = moment_Iq(b, L, q);
      EXPECT_LE(mq, m1);
      EXPECT_LE(I1, Iq);
      EXPECT_LE(Iq / (q * I1), 10.0);
      EXPECT_GE(mq / (std::exp(-q) * m1), 1e-3);
    }
  }
}

TEST(Measures, JsonRoundTrip) {
  const Measure ms[] = {Measure::gaussian(diag({1, 2})), Measure::uniform(Body::lq_ball(2, 3.0)),
                        Measure::product({{ProductFactor::Kind::Power, 2.0, 1.5}, {ProductFactor::Kind::Uniform, 1.0, 1.0}}),
                        Measure::cone_exp(Body::cube(2)), Measure::pushforward(Matrix::Identity(2, 2) * 3.0, Measure::standard_gaussian(2))};
  for (const Measure& m : ms) {
    const Measure back = measure_from_json(Json::parse(to_json(m).dump()));
    EXPECT_TRUE(sample(back, 100, 5).points == sample(m, 100, 5).points) << m.kind();
  }
}

TEST(Measures, BankFileRoundTrip) {
  const SampleBank b = sample(Measure::product_exponential(3), 2500, 21);
  const std::string path = ::testing::TempDir() + "bank.bin";
  save_bank(b, path);
  const SampleBank back = load_bank(path);
  EXPECT_EQ(back.seed, 21u);
  EXPECT_TRUE(back.points == b.points);
  std::remove(path.c_str());
}
