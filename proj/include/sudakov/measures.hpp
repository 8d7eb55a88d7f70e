/**
 * @file measures.hpp
 * @brief Origin-symmetric log-concave measures: seeded samplers, quantiles
 * m_q, moments I_q, covariance, isotropic constant and marginals.
 */
#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bodies.hpp"

namespace sudakov {

class Measure;
using MeasurePtr = std::shared_ptr<const Measure>;

/// Image of the standard Gaussian on R^k under A (m x k): covariance A A^T.
struct GaussianMeasure {
  Matrix A;
};

struct UniformMeasure {
  BodyPtr body;
};

/// One coordinate factor of a product density.
/// exponential: e^{-|x|/s}/(2s); uniform: 1/(2s) on [-s,s];
/// power: e^{-|x/s|^alpha}/(2s Gamma(1+1/alpha)), alpha >= 1.
struct ProductFactor {
  enum class Kind { Exponential, Uniform, Power };
  Kind kind = Kind::Exponential;
  double scale = 1.0;
  double alpha = 1.0;
};

struct ProductMeasure {
  std::vector<ProductFactor> factors;
};

/// Density e^{-|x|_K} / (n! |K|).
struct ConeExpMeasure {
  BodyPtr body;
};

struct PushforwardMeasure {
  Matrix T;
  MeasurePtr inner;
};

class Measure {
 public:
  using Spec = std::variant<GaussianMeasure, UniformMeasure, ProductMeasure, ConeExpMeasure, PushforwardMeasure>;

  explicit Measure(Spec s) : spec_(std::move(s)) {}

  static Measure gaussian(const Matrix& A);
  static Measure standard_gaussian(int n) { return gaussian(Matrix::Identity(n, n)); }
  static Measure uniform(const Body& body);
  static Measure product(std::vector<ProductFactor> factors);
  static Measure product_exponential(int n, double scale = 1.0);
  static Measure cone_exp(const Body& body);
  static Measure pushforward(const Matrix& T, const Measure& inner);

  const Spec& spec() const { return spec_; }
  int dimension() const;
  std::string kind() const;

 private:
  Spec spec_;
};

/// N i.i.d. draws, one per row, with the seed and spec that produced them.
struct SampleBank {
  RowMatrix points;
  std::uint64_t seed = 0;
  MeasurePtr measure;

  Eigen::Index size() const { return points.rows(); }
  int dimension() const { return static_cast<int>(points.cols()); }
};

struct SamplerOptions {
  bool force_hit_and_run = false;  // for validating the chain against exact samplers
};

inline constexpr int kHitAndRunMaxDim = 64;

// ---------------------------------------------------------------------------
// Construction

inline Measure Measure::gaussian(const Matrix& A) {
  if (A.rows() < 1 || A.cols() < 1 || !A.allFinite()) throw ConstructionError("gaussian: bad matrix");
  return Measure(GaussianMeasure{A});
}

inline Measure Measure::uniform(const Body& body) { return Measure(UniformMeasure{std::make_shared<const Body>(body)}); }

inline Measure Measure::product(std::vector<ProductFactor> factors) {
  if (factors.empty()) throw ConstructionError("product: need at least one factor");
  for (const auto& f : factors) {
    if (!(f.scale > 0.0)) throw ConstructionError("product: scales must be positive");
    if (f.kind == ProductFactor::Kind::Power && !(f.alpha >= 1.0))
      throw ConstructionError("product: power factors need alpha >= 1 for log-concavity");
  }
  return Measure(ProductMeasure{std::move(factors)});
}

inline Measure Measure::product_exponential(int n, double scale) {
  return product(std::vector<ProductFactor>(static_cast<std::size_t>(n), {ProductFactor::Kind::Exponential, scale, 1.0}));
}

inline Measure Measure::cone_exp(const Body& body) { return Measure(ConeExpMeasure{std::make_shared<const Body>(body)}); }

inline Measure Measure::pushforward(const Matrix& T, const Measure& inner) {
  if (T.cols() != inner.dimension()) throw ConstructionError("pushforward: T columns must match the inner dimension");
  if (T.rows() > T.cols() || !detail::full_rank_rows(T)) throw ConstructionError("pushforward: T must have full row rank");
  return Measure(PushforwardMeasure{T, std::make_shared<const Measure>(inner)});
}

inline int Measure::dimension() const {
  return std::visit(
      [](const auto& s) -> int {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GaussianMeasure>) return static_cast<int>(s.A.rows());
        else if constexpr (std::is_same_v<S, ProductMeasure>) return static_cast<int>(s.factors.size());
        else if constexpr (std::is_same_v<S, PushforwardMeasure>) return static_cast<int>(s.T.rows());
        else return s.body->dimension();
      },
      spec_);
}

inline std::string Measure::kind() const {
  static const char* names[] = {"gaussian", "uniform", "product", "cone_exp", "pushforward"};
  return names[spec_.index()];
}

// ---------------------------------------------------------------------------
// Samplers

namespace detail {

inline double gamma_draw(Engine& rng, double shape) {
  std::gamma_distribution<double> g(shape, 1.0);
  return g(rng);
}

inline double product_factor_draw(Engine& rng, const ProductFactor& f) {
  const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
  switch (f.kind) {
    case ProductFactor::Kind::Exponential: return sign * f.scale * -std::log(uniform01(rng));
    case ProductFactor::Kind::Uniform: return f.scale * (2.0 * uniform01(rng) - 1.0);
    case ProductFactor::Kind::Power: return sign * f.scale * std::pow(gamma_draw(rng, 1.0 / f.alpha), 1.0 / f.alpha);
  }
  return 0.0;
}

/// Exact uniform sampler for bodies that admit one.
inline std::optional<std::function<Vector(Engine&)>> exact_uniform_sampler(const Body& body) {
  const int n = body.dimension();
  return std::visit(
      [&](const auto& s) -> std::optional<std::function<Vector(Engine&)>> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ellipsoid>) {
          Matrix A = s.A;
          return [A, n](Engine& rng) -> Vector {
            const Vector u = sphere_point(rng, n);
            return A * (std::pow(uniform01(rng), 1.0 / n) * u);
          };
        } else if constexpr (std::is_same_v<S, Cube>) {
          const double a = s.a;
          return [a, n](Engine& rng) -> Vector {
            Vector x(n);
            for (int i = 0; i < n; ++i) x[i] = a * (2.0 * uniform01(rng) - 1.0);
            return x;
          };
        } else if constexpr (std::is_same_v<S, LqBall>) {
          const double q = s.q, r = s.r;
          if (std::isinf(q))
            return [r, n](Engine& rng) -> Vector {
              Vector x(n);
              for (int i = 0; i < n; ++i) x[i] = r * (2.0 * uniform01(rng) - 1.0);
              return x;
            };
          // Barthe-Guedon-Mendelson-Naor: y_i with density ~ e^{-|y|^q}, W ~ Exp(1),
          // then y / (|y|_q^q + W)^{1/q} is uniform on B_q^n.
          return [q, r, n](Engine& rng) -> Vector {
            Vector y(n);
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
              const double g = gamma_draw(rng, 1.0 / q);
              y[i] = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * std::pow(g, 1.0 / q);
              s += g;
            }
            const double w = -std::log(uniform01(rng));
            return r * y / std::pow(s + w, 1.0 / q);
          };
        } else if constexpr (std::is_same_v<S, LinearImage>) {
          if (!s.T_inv) return std::nullopt;
          auto inner = exact_uniform_sampler(*s.inner);
          if (!inner) return std::nullopt;
          Matrix T = s.T;
          auto f = *inner;
          return [T, f](Engine& rng) -> Vector { return T * f(rng); };
        } else {
          return std::nullopt;
        }
      },
      body.shape());
}

/// Chord of the body through x along unit direction d: returns (lo, hi) with
/// x + lambda d inside for lambda in [lo, hi].
inline std::pair<double, double> chord(const Body& body, const std::optional<NormForm>& nf, const Vector& x,
                                       const Vector& d) {
  if (nf && nf->q == 2.0) {
    const Vector a = nf->M * x, b = nf->M * d;
    const double A = b.squaredNorm(), B = 2.0 * a.dot(b), C = a.squaredNorm() - 1.0;
    if (A <= 0.0) throw DomainError("hit-and-run: body is unbounded along a chord");
    const double disc = std::sqrt(std::max(0.0, B * B - 4.0 * A * C));
    return {(-B - disc) / (2.0 * A), (-B + disc) / (2.0 * A)};
  }
  if (nf && std::isinf(nf->q)) {
    const Vector a = nf->M * x, b = nf->M * d;
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (b[i] == 0.0) continue;
      const double t1 = (1.0 - a[i]) / b[i], t2 = (-1.0 - a[i]) / b[i];
      lo = std::max(lo, std::min(t1, t2));
      hi = std::min(hi, std::max(t1, t2));
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("hit-and-run: body is unbounded along a chord");
    return {lo, hi};
  }
  // Bisection on the gauge. By the triangle inequality gauge(x + l d) >= 1
  // once l >= (1 + gauge(x)) / gauge(d).
  const double gx = gauge(body, x);
  const double gd = gauge(body, d);
  if (!(gd > 0.0)) throw DomainError("hit-and-run: body is unbounded along a chord");
  auto end = [&](double sign) {
    double lo = 0.0, hi = (1.0 + gx) / gd;
    const double tol = 1e-10 * hi;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (gauge(body, x + sign * mid * d) <= 1.0 ? lo : hi) = mid;
    }
    return lo;
  };
  return {-end(-1.0), end(1.0)};
}

/// Hit-and-run in independent per-chunk chains, each started at the origin
/// with burn-in 50 n and thinning n.
inline RowMatrix hit_and_run(const Body& body, std::size_t count, std::uint64_t seed) {
  const int n = body.dimension();
  if (n > kHitAndRunMaxDim) throw BudgetError("hit-and-run: refused for n > 64");
  if (!body.convex()) throw UnsupportedError("hit-and-run: body must be convex");
  const auto nf = norm_form(body);
  RowMatrix out(static_cast<Eigen::Index>(count), n);
  const std::size_t chunks = (count + kChunkRows - 1) / kChunkRows;
  parallel_for(chunks, [&](std::size_t c) {
    Engine rng = make_stream(seed, c);
    Vector x = Vector::Zero(n);
    auto step = [&] {
      const Vector d = sphere_point(rng, n);
      const auto [lo, hi] = chord(body, nf, x, d);
      x += (lo + (hi - lo) * uniform01(rng)) * d;
    };
    for (int i = 0; i < 50 * n; ++i) step();
    const std::size_t end = std::min(count, (c + 1) * kChunkRows);
    for (std::size_t r = c * kChunkRows; r < end; ++r) {
      for (int i = 0; i < n; ++i) step();
      out.row(static_cast<Eigen::Index>(r)) = x.transpose();
    }
  });
  return out;
}

inline RowMatrix uniform_points(const Body& body, std::size_t count, std::uint64_t seed, const SamplerOptions& opt) {
  if (!opt.force_hit_and_run) {
    if (auto f = exact_uniform_sampler(body)) {
      RowMatrix out(static_cast<Eigen::Index>(count), body.dimension());
      for_each_chunked(count, seed, [&](Engine& rng, std::size_t i) {
        out.row(static_cast<Eigen::Index>(i)) = (*f)(rng).transpose();
      });
      return out;
    }
  }
  return hit_and_run(body, count, seed);
}

}  // namespace detail

inline RowMatrix sample_points(const Measure& measure, std::size_t count, std::uint64_t seed,
                               const SamplerOptions& opt = {}) {
  const int n = measure.dimension();
  return std::visit(
      [&](const auto& s) -> RowMatrix {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GaussianMeasure>) {
          RowMatrix out(static_cast<Eigen::Index>(count), n);
          for_each_chunked(count, seed, [&](Engine& rng, std::size_t i) {
            out.row(static_cast<Eigen::Index>(i)) = (s.A * gaussian_vector(rng, s.A.cols())).transpose();
          });
          return out;
        } else if constexpr (std::is_same_v<S, UniformMeasure>) {
          return detail::uniform_points(*s.body, count, seed, opt);
        } else if constexpr (std::is_same_v<S, ProductMeasure>) {
          RowMatrix out(static_cast<Eigen::Index>(count), n);
          for_each_chunked(count, seed, [&](Engine& rng, std::size_t i) {
            for (int j = 0; j < n; ++j)
              out(static_cast<Eigen::Index>(i), j) = detail::product_factor_draw(rng, s.factors[static_cast<std::size_t>(j)]);
          });
          return out;
        } else if constexpr (std::is_same_v<S, ConeExpMeasure>) {
          // x = r theta with r ~ Gamma(n, 1) and theta = z / |z|_K, z uniform in K.
          RowMatrix z = detail::uniform_points(*s.body, count, derive_seed(seed, 1), opt);
          const Vector g = gauge_rows(*s.body, z);
          for_each_chunked(count, seed, [&](Engine& rng, std::size_t i) {
            const auto r = static_cast<Eigen::Index>(i);
            const double rad = detail::gamma_draw(rng, n);
            z.row(r) *= rad / g[r];
          });
          return z;
        } else {
          const RowMatrix inner = sample_points(*s.inner, count, seed, opt);
          return inner * s.T.transpose();
        }
      },
      measure.spec());
}

/// N i.i.d. draws from the measure; bit-identical for equal (measure, N, seed).
inline SampleBank sample(const Measure& measure, std::size_t count, std::uint64_t seed, const SamplerOptions& opt = {}) {
  if (count < 1) throw UsageError("sample: count must be positive");
  SampleBank bank;
  bank.points = sample_points(measure, count, seed, opt);
  bank.seed = seed;
  bank.measure = std::make_shared<const Measure>(measure);
  return bank;
}

// ---------------------------------------------------------------------------
// Functionals on banks

/// Gauges of all bank points with respect to `body`.
inline Vector bank_gauges(const SampleBank& bank, const Body& body) { return gauge_rows(body, bank.points); }

/// Empirical mu(body).
inline double mass(const SampleBank& bank, const Body& body) {
  const Vector g = bank_gauges(bank, body);
  return static_cast<double>((g.array() <= 1.0).count()) / static_cast<double>(g.size());
}

/// Smallest bank size for which m_q is estimable.
inline std::size_t minimal_quantile_samples(double q) { return static_cast<std::size_t>(std::ceil(50.0 * std::exp(q))); }

/// Empirical e^{-q}-quantile of `values`: Hazen plotting position p N + 1/2
/// with linear interpolation between order statistics, which puts an exact
/// integer rank p N at the midpoint of its two neighbours.
inline double quantile_of_values(std::vector<double> values, double q) {
  if (!(q > 0.0)) throw DomainError("quantile: q must be positive");
  const double N = static_cast<double>(values.size());
  const double p = std::exp(-q);
  if (p * N < 50.0)
    throw BudgetError("quantile: e^{-q} N must be at least 50; need N >= " + std::to_string(minimal_quantile_samples(q)));
  std::sort(values.begin(), values.end());
  const double h = p * N + 0.5;  // 1-based position
  const auto k = static_cast<std::size_t>(std::floor(h));
  const double frac = h - std::floor(h);
  const double lo = values[k - 1];
  const double hi = values[std::min(k, values.size() - 1)];
  return lo + frac * (hi - lo);
}

inline double quantile_mq(const SampleBank& bank, const Body& body, double q) {
  const Vector g = bank_gauges(bank, body);
  return quantile_of_values(std::vector<double>(g.data(), g.data() + g.size()), q);
}

/// m_q(mu, L) = sup{s > 0 : mu(sL) <= e^{-q}}, estimated from N fresh draws.
inline double quantile_mq(const Measure& measure, const Body& body, double q, std::size_t N, std::uint64_t seed) {
  if (static_cast<double>(N) * std::exp(-q) < 50.0)
    throw BudgetError("quantile_mq: e^{-q} N must be at least 50; need N >= " + std::to_string(minimal_quantile_samples(q)));
  return quantile_mq(sample(measure, N, seed), body, q);
}

/// (mean g^q)^{1/q} in log space; q = 0 gives the geometric mean.
inline double moment_of_values(const Vector& g, double q) {
  if (!(q > -1.0)) throw DomainError("moment: q must exceed -1");
  if (q < 0.0 && g.size() < 10000) throw BudgetError("moment: negative q needs at least 10^4 samples");
  const double N = static_cast<double>(g.size());
  if (q == 0.0) {
    KahanSum s;
    for (Eigen::Index i = 0; i < g.size(); ++i) s.add(std::log(g[i]));
    return std::exp(s.value() / N);
  }
  std::vector<double> terms(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) terms[static_cast<std::size_t>(i)] = q * std::log(g[i]);
  return std::exp((log_sum_exp(terms) - std::log(N)) / q);
}

inline double moment_Iq(const SampleBank& bank, const Body& body, double q) {
  return moment_of_values(bank_gauges(bank, body), q);
}

/// I_q(mu, L) = (E |X|_L^q)^{1/q}, estimated from N fresh draws.
inline double moment_Iq(const Measure& measure, const Body& body, double q, std::size_t N, std::uint64_t seed) {
  if (!(q > -1.0)) throw DomainError("moment_Iq: q must exceed -1");
  if (q < 0.0 && N < 10000) throw BudgetError("moment_Iq: negative q needs N >= 10^4");
  return moment_Iq(sample(measure, N, seed), body, q);
}

/// Empirical second-moment matrix (barycenter 0 by symmetry).
inline Matrix covariance(const SampleBank& bank) {
  return (bank.points.transpose() * bank.points) / static_cast<double>(bank.size());
}

/// Exact covariance where a closed form exists.
inline std::optional<Matrix> exact_covariance(const Measure& measure) {
  return std::visit(
      [&](const auto& s) -> std::optional<Matrix> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GaussianMeasure>) {
          return Matrix(s.A * s.A.transpose());
        } else if constexpr (std::is_same_v<S, ProductMeasure>) {
          const auto n = static_cast<Eigen::Index>(s.factors.size());
          Vector v(n);
          for (Eigen::Index i = 0; i < n; ++i) {
            const auto& f = s.factors[static_cast<std::size_t>(i)];
            switch (f.kind) {
              case ProductFactor::Kind::Exponential: v[i] = 2.0 * f.scale * f.scale; break;
              case ProductFactor::Kind::Uniform: v[i] = f.scale * f.scale / 3.0; break;
              case ProductFactor::Kind::Power:
                v[i] = f.scale * f.scale * std::exp(std::lgamma(3.0 / f.alpha) - std::lgamma(1.0 / f.alpha));
                break;
            }
          }
          return Matrix(v.asDiagonal());
        } else if constexpr (std::is_same_v<S, UniformMeasure>) {
          const Body& b = *s.body;
          const int n = b.dimension();
          std::function<std::optional<Matrix>(const Body&)> uni = [&](const Body& body) -> std::optional<Matrix> {
            const int d = body.dimension();
            if (const auto* e = std::get_if<Ellipsoid>(&body.shape())) return Matrix(e->A * e->A.transpose() / (d + 2.0));
            if (const auto* c = std::get_if<Cube>(&body.shape()))
              return Matrix(Matrix::Identity(d, d) * (c->a * c->a / 3.0));
            if (const auto* l = std::get_if<LqBall>(&body.shape())) {
              double var = 1.0 / 3.0;
              if (!std::isinf(l->q))
                var = std::exp(std::lgamma(3.0 / l->q) + std::lgamma(1.0 + d / l->q) - std::lgamma(1.0 / l->q) -
                               std::lgamma(1.0 + (d + 2.0) / l->q));
              return Matrix(Matrix::Identity(d, d) * (l->r * l->r * var));
            }
            if (const auto* li = std::get_if<LinearImage>(&body.shape()); li && li->T_inv) {
              auto inner = uni(*li->inner);
              if (!inner) return std::nullopt;
              return Matrix(li->T * *inner * li->T.transpose());
            }
            return std::nullopt;
          };
          (void)n;
          return uni(b);
        } else if constexpr (std::is_same_v<S, PushforwardMeasure>) {
          auto inner = exact_covariance(*s.inner);
          if (!inner) return std::nullopt;
          return Matrix(s.T * *inner * s.T.transpose());
        } else {
          return std::nullopt;
        }
      },
      measure.spec());
}

/// Cov(mu): exact A A^T for Gaussians, empirical second moments otherwise.
inline Matrix covariance(const Measure& measure, std::size_t N, std::uint64_t seed) {
  if (const auto* g = std::get_if<GaussianMeasure>(&measure.spec())) return g->A * g->A.transpose();
  return covariance(sample(measure, N, seed));
}

// ---------------------------------------------------------------------------
// Densities

/// log of the density at x, where it has a closed form.
inline std::optional<double> log_density(const Measure& measure, const Vector& x) {
  return std::visit(
      [&](const auto& s) -> std::optional<double> {
        using S = std::decay_t<decltype(s)>;
        const int n = measure.dimension();
        if constexpr (std::is_same_v<S, GaussianMeasure>) {
          const Matrix cov = s.A * s.A.transpose();
          Eigen::LLT<Matrix> llt(cov);
          if (llt.info() != Eigen::Success) return std::nullopt;
          const Vector y = llt.matrixL().solve(x);
          const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
          return -0.5 * y.squaredNorm() - 0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * logdet;
        } else if constexpr (std::is_same_v<S, ProductMeasure>) {
          double l = 0.0;
          for (int i = 0; i < n; ++i) {
            const auto& f = s.factors[static_cast<std::size_t>(i)];
            const double a = std::abs(x[i]) / f.scale;
            switch (f.kind) {
              case ProductFactor::Kind::Exponential: l += -a - std::log(2.0 * f.scale); break;
              case ProductFactor::Kind::Uniform:
                if (a > 1.0) return -std::numeric_limits<double>::infinity();
                l += -std::log(2.0 * f.scale);
                break;
              case ProductFactor::Kind::Power:
                l += -std::pow(a, f.alpha) - std::log(2.0 * f.scale) - std::lgamma(1.0 + 1.0 / f.alpha);
                break;
            }
          }
          return l;
        } else if constexpr (std::is_same_v<S, UniformMeasure>) {
          auto lv = log_volume_closed_form(*s.body);
          if (!lv) return std::nullopt;
          return gauge(*s.body, x) <= 1.0 ? -*lv : -std::numeric_limits<double>::infinity();
        } else if constexpr (std::is_same_v<S, ConeExpMeasure>) {
          auto lv = log_volume_closed_form(*s.body);
          if (!lv) return std::nullopt;
          return -gauge(*s.body, x) - std::lgamma(n + 1.0) - *lv;
        } else {
          if (s.T.rows() != s.T.cols()) return std::nullopt;
          auto inner = log_density(*s.inner, s.T.partialPivLu().solve(x));
          if (!inner) return std::nullopt;
          return *inner - std::log(std::abs(s.T.determinant()));
        }
      },
      measure.spec());
}

/// log max f. Every supported family is symmetric and log-concave, so the
/// maximum is attained at the origin.
inline std::optional<double> log_max_density(const Measure& measure) {
  return log_density(measure, Vector::Zero(measure.dimension()));
}

/// L_mu = (max f)^{1/n} (det Cov)^{1/2n}, in log space.
inline double isotropic_constant(const Measure& measure) {
  const int n = measure.dimension();
  const auto lmax = log_max_density(measure);
  const auto cov = exact_covariance(measure);
  if (!lmax || !cov) throw UnsupportedError("isotropic_constant: no closed-form maximal density for this measure");
  Eigen::LLT<Matrix> llt(*cov);
  if (llt.info() != Eigen::Success) throw DomainError("isotropic_constant: singular covariance");
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return std::exp(*lmax / n + logdet / (2.0 * n));
}

// ---------------------------------------------------------------------------
// Marginals

/// Push-forward under T (m x n, full row rank). Gaussians stay Gaussian, and
/// coordinate selections of products stay products.
inline Measure marginal(const Measure& measure, const Matrix& T) {
  if (T.cols() != measure.dimension()) throw UsageError("marginal: T columns must match the measure dimension");
  if (T.rows() > T.cols() || !detail::full_rank_rows(T)) throw ConstructionError("marginal: T must have full row rank");
  if (const auto* g = std::get_if<GaussianMeasure>(&measure.spec())) return Measure::gaussian(T * g->A);
  if (const auto* p = std::get_if<ProductMeasure>(&measure.spec())) {
    std::vector<ProductFactor> kept;
    for (Eigen::Index i = 0; i < T.rows(); ++i) {
      Eigen::Index j;
      const double mx = T.row(i).cwiseAbs().maxCoeff(&j);
      if (mx != 1.0 || T(i, j) != 1.0 || T.row(i).cwiseAbs().sum() != 1.0) {
        kept.clear();
        break;
      }
      kept.push_back(p->factors[static_cast<std::size_t>(j)]);
    }
    if (static_cast<Eigen::Index>(kept.size()) == T.rows()) return Measure::product(std::move(kept));
  }
  return Measure::pushforward(T, measure);
}

/// Rows of the identity indexed by S: the coordinate projection onto R^S.
inline Matrix coordinate_selector(int n, const std::vector<int>& S) {
  Matrix P = Matrix::Zero(static_cast<Eigen::Index>(S.size()), n);
  for (std::size_t i = 0; i < S.size(); ++i) P(static_cast<Eigen::Index>(i), S[i]) = 1.0;
  return P;
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const Measure& measure) {
  Json out;
  out["kind"] = measure.kind();
  out["dimension"] = measure.dimension();
  out["parameters"] = std::visit(
      [](const auto& s) -> Json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GaussianMeasure>) {
          return Json{{"A", matrix_to_json(s.A)}};
        } else if constexpr (std::is_same_v<S, ProductMeasure>) {
          Json fs = Json::array();
          for (const auto& f : s.factors) {
            static const char* names[] = {"exponential", "uniform", "power"};
            Json jf{{"kind", names[static_cast<int>(f.kind)]}, {"scale", f.scale}};
            if (f.kind == ProductFactor::Kind::Power) jf["alpha"] = f.alpha;
            fs.push_back(jf);
          }
          return Json{{"factors", fs}};
        } else if constexpr (std::is_same_v<S, PushforwardMeasure>) {
          return Json{{"T", matrix_to_json(s.T)}, {"inner", to_json(*s.inner)}};
        } else {
          return Json{{"body", to_json(*s.body)}};
        }
      },
      measure.spec());
  return out;
}

inline Measure measure_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const Json& p = j.at("parameters");
  Measure m = [&]() -> Measure {
    if (kind == "gaussian") return Measure::gaussian(matrix_from_json(p.at("A")));
    if (kind == "uniform") return Measure::uniform(body_from_json(p.at("body")));
    if (kind == "cone_exp") return Measure::cone_exp(body_from_json(p.at("body")));
    if (kind == "pushforward") return Measure::pushforward(matrix_from_json(p.at("T")), measure_from_json(p.at("inner")));
    if (kind == "product") {
      std::vector<ProductFactor> fs;
      for (const auto& jf : p.at("factors")) {
        ProductFactor f;
        const std::string k = jf.at("kind").get<std::string>();
        if (k == "exponential") f.kind = ProductFactor::Kind::Exponential;
        else if (k == "uniform") f.kind = ProductFactor::Kind::Uniform;
        else if (k == "power") f.kind = ProductFactor::Kind::Power;
        else throw ConstructionError("product: unknown factor kind '" + k + "'");
        f.scale = jf.value("scale", 1.0);
        f.alpha = jf.value("alpha", 1.0);
        fs.push_back(f);
      }
      return Measure::product(std::move(fs));
    }
    throw ConstructionError("unknown measure kind '" + kind + "'");
  }();
  if (j.contains("dimension") && j.at("dimension").get<int>() != m.dimension())
    throw ConstructionError("measure: declared dimension does not match parameters");
  return m;
}

// ---------------------------------------------------------------------------
// Binary bank files: 16-byte little-endian header
// {u16 magic 0x5342, u16 n, u32 N, u64 seed} followed by N*n doubles, row-major.

inline constexpr std::uint16_t kBankMagic = 0x5342;

inline void save_bank(const SampleBank& bank, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "bank files assume a little-endian host");
  if (bank.dimension() > 0xFFFF || bank.size() > 0xFFFFFFFFll) throw BudgetError("save_bank: bank too large for header");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("save_bank: cannot open " + path);
  const std::uint16_t magic = kBankMagic, n = static_cast<std::uint16_t>(bank.dimension());
  const std::uint32_t N = static_cast<std::uint32_t>(bank.size());
  const std::uint64_t seed = bank.seed;
  out.write(reinterpret_cast<const char*>(&magic), 2);
  out.write(reinterpret_cast<const char*>(&n), 2);
  out.write(reinterpret_cast<const char*>(&N), 4);
  out.write(reinterpret_cast<const char*>(&seed), 8);
  out.write(reinterpret_cast<const char*>(bank.points.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(bank.points.size())));
}

inline SampleBank load_bank(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("load_bank: cannot open " + path);
  std::uint16_t magic = 0, n = 0;
  std::uint32_t N = 0;
  std::uint64_t seed = 0;
  in.read(reinterpret_cast<char*>(&magic), 2);
  in.read(reinterpret_cast<char*>(&n), 2);
  in.read(reinterpret_cast<char*>(&N), 4);
  in.read(reinterpret_cast<char*>(&seed), 8);
  if (!in || magic != kBankMagic) throw UsageError("load_bank: not a sample bank file");
  SampleBank bank;
  bank.seed = seed;
  bank.points.resize(N, n);
  in.read(reinterpret_cast<char*>(bank.points.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(bank.points.size())));
  if (!in) throw UsageError("load_bank: truncated file");
  return bank;
}

}  // namespace sudakov
