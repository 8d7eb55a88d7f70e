/**
 * @file bodies.hpp
 * @brief Origin-symmetric convex and star bodies: gauge, support, membership,
 * volume radius, mean width and JSON round-tripping.
 */
#pragma once

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>

#include <nlohmann/json.hpp>

#include "core.hpp"

namespace sudakov {

class Body;
using BodyPtr = std::shared_ptr<const Body>;
using Json = nlohmann::json;

/// gauge(x) = |M x|_q. Most bodies reduce to this form, which lets batch
/// routines transform a point cloud once instead of calling gauge per pair.
struct NormForm {
  Matrix M;
  double q = 2.0;
};

struct Ellipsoid {
  Matrix A;
  Matrix A_inv;
  double log_abs_det = 0.0;
};

struct Cube {
  int n = 0;
  double a = 1.0;
};

struct LqBall {
  int n = 0;
  double q = 2.0;
  double r = 1.0;
};

/// Facets stored as given and negated, so gauge(x) = max_i <a_i,x>/b_i is
/// symmetric by construction.
struct HPolytope {
  Matrix normals;  // rows, including negations
  Vector offsets;
  int given = 0;   // number of facets supplied by the caller
};

struct LinearImage {
  Matrix T;
  BodyPtr inner;
  std::optional<Matrix> T_inv;       // square invertible T
  std::optional<Matrix> shape_inv_chol;  // inner ellipsoid, non-square T
};

struct RadialStar {
  int n = 0;
  std::function<double(const Vector&)> radial;     // direction (unit) -> radius, may be +inf
  bool convex = false;
  std::function<double(const Vector&)> support;    // optional
  std::optional<NormForm> norm;                    // optional fast gauge
  std::string family;                              // non-empty when serializable
  Json params;
};

class Body {
 public:
  using Shape = std::variant<Ellipsoid, Cube, LqBall, HPolytope, LinearImage, RadialStar>;

  explicit Body(Shape s) : shape_(std::move(s)) {}

  static Body ellipsoid(const Matrix& A);
  static Body euclidean_ball(int n, double r = 1.0);
  static Body cube(int n, double a = 1.0);
  static Body lq_ball(int n, double q, double r = 1.0);
  static Body h_polytope(const Matrix& normals, const Vector& offsets);
  static Body linear_image(const Matrix& T, const Body& inner);
  static Body radial_star(int n, std::function<double(const Vector&)> radial, bool convex,
                          std::function<double(const Vector&)> support = {});
  /// sqrt(k)-style cylinder {x : |x_{1..k}| <= radius} x R^{n-k}; unbounded.
  static Body cylinder(int n, int k, double radius);

  const Shape& shape() const { return shape_; }
  int dimension() const;
  bool convex() const;
  std::string kind() const;

 private:
  Shape shape_;
};

// ---------------------------------------------------------------------------
// Simplex LP: max c.x s.t. G x <= b with b > 0 and x free.
//
// The origin is feasible, so the slack basis starts the tableau directly.
// Returns +inf when unbounded.

namespace detail {

inline double lp_max_origin_feasible(const Matrix& G, const Vector& b, const Vector& c) {
  const Eigen::Index m = G.rows();
  const Eigen::Index n = G.cols();
  const Eigen::Index vars = 2 * n + m;
  Matrix tab = Matrix::Zero(m + 1, vars + 1);
  tab.block(0, 0, m, n) = G;
  tab.block(0, n, m, n) = -G;
  tab.block(0, 2 * n, m, m) = Matrix::Identity(m, m);
  tab.col(vars).head(m) = b;
  tab.block(m, 0, 1, n) = -c.transpose();
  tab.block(m, n, 1, n) = c.transpose();
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = 2 * n + i;

  const double eps = 1e-12;
  for (int iter = 0; iter < 10000; ++iter) {
    // Bland's rule: lowest-index entering column with negative reduced cost.
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < vars; ++j)
      if (tab(m, j) < -eps) {
        enter = j;
        break;
      }
    if (enter < 0) return tab(m, vars);
    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab(i, enter) > eps) {
        const double ratio = tab(i, vars) / tab(i, enter);
        if (ratio < best - eps ||
            (ratio <= best + eps && leave >= 0 &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) return std::numeric_limits<double>::infinity();
    tab.row(leave) /= tab(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i)
      if (i != leave && tab(i, enter) != 0.0) tab.row(i) -= tab(i, enter) * tab.row(leave);
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  throw std::runtime_error("simplex iteration cap reached");
}

inline bool full_rank_rows(const Matrix& T) {
  Eigen::FullPivLU<Matrix> lu(T);
  return lu.rank() == T.rows();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Construction

inline Body Body::ellipsoid(const Matrix& A) {
  if (A.rows() != A.cols() || A.rows() < 1) throw ConstructionError("ellipsoid: matrix must be square");
  if (!A.allFinite()) throw ConstructionError("ellipsoid: non-finite entries");
  Eigen::FullPivLU<Matrix> lu(A);
  if (!lu.isInvertible()) throw ConstructionError("ellipsoid: matrix is not invertible");
  Ellipsoid e;
  e.A = A;
  e.A_inv = lu.inverse();
  double lad = 0.0;
  const Matrix& LU = lu.matrixLU();
  for (Eigen::Index i = 0; i < LU.rows(); ++i) lad += std::log(std::abs(LU(i, i)));
  e.log_abs_det = lad;
  return Body(std::move(e));
}

inline Body Body::euclidean_ball(int n, double r) {
  if (n < 1 || !(r > 0.0)) throw ConstructionError("euclidean_ball: need n >= 1 and r > 0");
  return ellipsoid(r * Matrix::Identity(n, n));
}

inline Body Body::cube(int n, double a) {
  if (n < 1 || !(a > 0.0) || !std::isfinite(a)) throw ConstructionError("cube: need n >= 1 and a > 0");
  return Body(Cube{n, a});
}

inline Body Body::lq_ball(int n, double q, double r) {
  if (n < 1 || !(q >= 1.0) || !(r > 0.0)) throw ConstructionError("lq_ball: need n >= 1, q >= 1, r > 0");
  return Body(LqBall{n, q, r});
}

inline Body Body::h_polytope(const Matrix& normals, const Vector& offsets) {
  if (normals.rows() != offsets.size() || normals.rows() < 1)
    throw ConstructionError("h_polytope: one positive offset per normal required");
  if ((offsets.array() <= 0.0).any()) throw ConstructionError("h_polytope: offsets must be positive");
  const Eigen::Index m = normals.rows();
  HPolytope h;
  h.given = static_cast<int>(m);
  h.normals.resize(2 * m, normals.cols());
  h.normals << normals, -normals;
  h.offsets.resize(2 * m);
  h.offsets << offsets, offsets;
  // Boundedness: the support along every coordinate axis must be finite.
  for (Eigen::Index i = 0; i < normals.cols(); ++i) {
    Vector e = Vector::Zero(normals.cols());
    e[i] = 1.0;
    if (!std::isfinite(detail::lp_max_origin_feasible(h.normals, h.offsets, e)))
      throw ConstructionError("h_polytope: facets do not bound a compact body");
  }
  return Body(std::move(h));
}

inline Body Body::linear_image(const Matrix& T, const Body& inner) {
  if (T.cols() != inner.dimension())
    throw ConstructionError("linear_image: T must have as many columns as the inner dimension");
  if (T.rows() > T.cols() || !detail::full_rank_rows(T))
    throw ConstructionError("linear_image: T must have full row rank");
  LinearImage li;
  li.T = T;
  li.inner = std::make_shared<const Body>(inner);
  if (T.rows() == T.cols()) {
    li.T_inv = T.inverse();
  } else if (const auto* e = std::get_if<Ellipsoid>(&inner.shape())) {
    const Matrix TA = T * e->A;
    Eigen::LLT<Matrix> llt(TA * TA.transpose());
    if (llt.info() != Eigen::Success) throw ConstructionError("linear_image: degenerate image ellipsoid");
    const Matrix L = llt.matrixL();
    li.shape_inv_chol = L.inverse();
  } else {
    throw ConstructionError("linear_image: gauge needs square invertible T or an ellipsoid inner body");
  }
  return Body(std::move(li));
}

inline Body Body::radial_star(int n, std::function<double(const Vector&)> radial, bool convex,
                              std::function<double(const Vector&)> support) {
  if (n < 1 || !radial) throw ConstructionError("radial_star: need n >= 1 and a radial function");
  RadialStar r;
  r.n = n;
  r.radial = std::move(radial);
  r.convex = convex;
  r.support = std::move(support);
  return Body(std::move(r));
}

inline Body Body::cylinder(int n, int k, double radius) {
  if (k < 1 || k > n || !(radius > 0.0)) throw ConstructionError("cylinder: need 1 <= k <= n and radius > 0");
  RadialStar r;
  r.n = n;
  r.convex = true;
  r.radial = [k, radius](const Vector& u) {
    const double head = u.head(k).norm();
    return head > 0.0 ? radius / head : std::numeric_limits<double>::infinity();
  };
  r.support = [k, radius](const Vector& th) {
    if (th.size() > k && th.tail(th.size() - k).cwiseAbs().maxCoeff() > 0.0)
      return std::numeric_limits<double>::infinity();
    return radius * th.head(k).norm();
  };
  NormForm nf;
  nf.M = Matrix::Zero(k, n);
  nf.M.leftCols(k) = Matrix::Identity(k, k) / radius;
  nf.q = 2.0;
  r.norm = std::move(nf);
  r.family = "cylinder";
  r.params = Json{{"k", k}, {"radius", radius}};
  return Body(std::move(r));
}

inline int Body::dimension() const {
  return std::visit(
      [](const auto& s) -> int {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ellipsoid>) return static_cast<int>(s.A.rows());
        else if constexpr (std::is_same_v<S, HPolytope>) return static_cast<int>(s.normals.cols());
        else if constexpr (std::is_same_v<S, LinearImage>) return static_cast<int>(s.T.rows());
        else return s.n;
      },
      shape_);
}

inline bool Body::convex() const {
  return std::visit(
      [](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LinearImage>) return s.inner->convex();
        else if constexpr (std::is_same_v<S, RadialStar>) return s.convex;
        else return true;
      },
      shape_);
}

inline std::string Body::kind() const {
  static const char* names[] = {"ellipsoid", "cube", "lq_ball", "h_polytope", "linear_image", "radial_star"};
  return names[shape_.index()];
}

// ---------------------------------------------------------------------------
// Evaluation

/// Fast gauge representation, when the body has one.
inline std::optional<NormForm> norm_form(const Body& body) {
  return std::visit(
      [](const auto& s) -> std::optional<NormForm> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ellipsoid>) {
          return NormForm{s.A_inv, 2.0};
        } else if constexpr (std::is_same_v<S, Cube>) {
          return NormForm{Matrix::Identity(s.n, s.n) / s.a, std::numeric_limits<double>::infinity()};
        } else if constexpr (std::is_same_v<S, LqBall>) {
          return NormForm{Matrix::Identity(s.n, s.n) / s.r, s.q};
        } else if constexpr (std::is_same_v<S, HPolytope>) {
          Matrix M = s.normals.topRows(s.given);
          for (int i = 0; i < s.given; ++i) M.row(i) /= s.offsets[i];
          return NormForm{M, std::numeric_limits<double>::infinity()};
        } else if constexpr (std::is_same_v<S, LinearImage>) {
          if (s.shape_inv_chol) return NormForm{*s.shape_inv_chol, 2.0};
          auto inner = norm_form(*s.inner);
          if (!inner) return std::nullopt;
          return NormForm{inner->M * (*s.T_inv), inner->q};
        } else {
          return s.norm;
        }
      },
      body.shape());
}

inline double gauge(const Body& body, const Vector& x) {
  require_dimension(body.dimension(), x.size(), "gauge");
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ellipsoid>) {
          return (s.A_inv * x).norm();
        } else if constexpr (std::is_same_v<S, Cube>) {
          return x.cwiseAbs().maxCoeff() / s.a;
        } else if constexpr (std::is_same_v<S, LqBall>) {
          return lq_norm(x, s.q) / s.r;
        } else if constexpr (std::is_same_v<S, HPolytope>) {
          return std::max(0.0, (s.normals * x).cwiseQuotient(s.offsets).maxCoeff());
        } else if constexpr (std::is_same_v<S, LinearImage>) {
          if (s.shape_inv_chol) return (*s.shape_inv_chol * x).norm();
          return gauge(*s.inner, *s.T_inv * x);
        } else {
          if (s.norm) return lq_norm(s.norm->M * x, s.norm->q);
          const double r = x.norm();
          if (r == 0.0) return 0.0;
          const double rho = s.radial(x / r);
          if (!(rho > 0.0)) throw DomainError("radial_star: radial function must be positive");
          return std::isinf(rho) ? 0.0 : r / rho;
        }
      },
      body.shape());
}

inline bool contains(const Body& body, const Vector& x) { return gauge(body, x) <= 1.0; }

inline double support(const Body& body, const Vector& theta) {
  require_dimension(body.dimension(), theta.size(), "support");
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ellipsoid>) {
          return (s.A.transpose() * theta).norm();
        } else if constexpr (std::is_same_v<S, Cube>) {
          return s.a * theta.cwiseAbs().sum();
        } else if constexpr (std::is_same_v<S, LqBall>) {
          return s.r * lq_norm(theta, conjugate_exponent(s.q));
        } else if constexpr (std::is_same_v<S, HPolytope>) {
          return detail::lp_max_origin_feasible(s.normals, s.offsets, theta);
        } else if constexpr (std::is_same_v<S, LinearImage>) {
          return support(*s.inner, s.T.transpose() * theta);
        } else {
          if (!s.convex || !s.support)
            throw UnsupportedError("support: radial star body without convexity certificate and support function");
          return s.support(theta);
        }
      },
      body.shape());
}

/// Dual norm of the body evaluated at x; equals support(body, x).
inline double dual_gauge(const Body& body, const Vector& x) { return support(body, x); }

/// Returns c * body.
inline Body scaled(const Body& body, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("scaled: factor must be positive and finite");
  return std::visit(
      [&](const auto& s) -> Body {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ellipsoid>) {
          return Body::ellipsoid(c * s.A);
        } else if constexpr (std::is_same_v<S, Cube>) {
          return Body::cube(s.n, c * s.a);
        } else if constexpr (std::is_same_v<S, LqBall>) {
          return Body::lq_ball(s.n, s.q, c * s.r);
        } else if constexpr (std::is_same_v<S, HPolytope>) {
          return Body::h_polytope(s.normals.topRows(s.given), c * s.offsets.head(s.given));
        } else if constexpr (std::is_same_v<S, LinearImage>) {
          return Body::linear_image(s.T, scaled(*s.inner, c));
        } else {
          if (s.family == "cylinder")
            return Body::cylinder(s.n, s.params.at("k").template get<int>(), c * s.params.at("radius").template get<double>());
          RadialStar r = s;
          auto rho = s.radial;
          r.radial = [rho, c](const Vector& u) { return c * rho(u); };
          if (s.support) {
            auto h = s.support;
            r.support = [h, c](const Vector& th) { return c * h(th); };
          }
          if (s.norm) r.norm = NormForm{s.norm->M / c, s.norm->q};
          r.family.clear();
          return Body(std::move(r));
        }
      },
      body.shape());
}

/// Gauge values of every row of `points`, via the norm form when available.
inline Vector gauge_rows(const Body& body, const RowMatrix& points) {
  require_dimension(body.dimension(), points.cols(), "gauge_rows");
  Vector out(points.rows());
  if (auto nf = norm_form(body)) {
    const Matrix Y = points * nf->M.transpose();
    for (Eigen::Index i = 0; i < Y.rows(); ++i) out[i] = lq_norm(Y.row(i).transpose(), nf->q);
  } else {
    parallel_for(static_cast<std::size_t>(points.rows()), [&](std::size_t i) {
      const auto r = static_cast<Eigen::Index>(i);
      out[r] = gauge(body, points.row(r).transpose());
    });
  }
  return out;
}

/// Support values for each column of `thetas`.
inline Vector support_columns(const Body& body, const Matrix& thetas) {
  Vector out(thetas.cols());
  parallel_for(static_cast<std::size_t>(thetas.cols()), [&](std::size_t j) {
    const auto c = static_cast<Eigen::Index>(j);
    out[c] = support(body, thetas.col(c));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Volume radius and mean width

/// log |K| when it has a closed form.
inline std::optional<double> log_volume_closed_form(const Body& body) {
  return std::visit(
      [&](const auto& s) -> std::optional<double> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ellipsoid>) {
          return s.log_abs_det + log_unit_ball_volume(static_cast<int>(s.A.rows()));
        } else if constexpr (std::is_same_v<S, Cube>) {
          return s.n * std::log(2.0 * s.a);
        } else if constexpr (std::is_same_v<S, LqBall>) {
          if (std::isinf(s.q)) return s.n * std::log(2.0 * s.r);
          return s.n * std::log(2.0 * s.r) + s.n * std::lgamma(1.0 + 1.0 / s.q) - std::lgamma(1.0 + s.n / s.q);
        } else if constexpr (std::is_same_v<S, LinearImage>) {
          if (!s.T_inv) return std::nullopt;
          auto inner = log_volume_closed_form(*s.inner);
          if (!inner) return std::nullopt;
          return *inner + std::log(std::abs(s.T.determinant()));
        } else {
          return std::nullopt;
        }
      },
      body.shape());
}

/// Hard cap for bounding-box rejection volume estimates.
inline constexpr int kRejectionVolumeMaxDim = 8;

/// vrad(K) = (|K|/|B_2^n|)^{1/n}. Exact for closed-form bodies; Monte Carlo
/// otherwise (rejection in the support bounding box for convex bodies,
/// spherical average of rho^n for radial star bodies).
inline Estimate volume_radius(const Body& body, std::size_t samples = 100000, std::uint64_t seed = 0) {
  const int n = body.dimension();
  if (auto lv = log_volume_closed_form(body)) {
    Estimate e;
    e.value = std::exp((*lv - log_unit_ball_volume(n)) / n);
    e.exact = true;
    return e;
  }
  if (samples < 1) throw UsageError("volume_radius: samples must be positive");
  if (const auto* rs = std::get_if<RadialStar>(&body.shape()); rs && !(rs->convex && rs->support)) {
    // |K| = |B_2^n| E_sigma[rho^n].
    const Matrix dirs = sample_directions(n, samples, seed);
    std::vector<double> vals(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      const double rho = rs->radial(dirs.col(static_cast<Eigen::Index>(i)));
      if (!std::isfinite(rho)) throw DomainError("volume_radius: unbounded body");
      vals[i] = std::pow(rho, n);
    }
    const Estimate m = mean_estimate(vals);
    Estimate e;
    e.samples = samples;
    e.value = std::pow(m.value, 1.0 / n);
    e.std_error = e.value / (n * m.value) * m.std_error;  // delta method
    return e;
  }
  if (n > kRejectionVolumeMaxDim)
    throw BudgetError("volume_radius: Monte Carlo volume is restricted to n <= 8");
  Vector half(n);
  for (int i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e[i] = 1.0;
    half[i] = support(body, e);
    if (!std::isfinite(half[i])) throw DomainError("volume_radius: unbounded body");
  }
  std::vector<double> hit(samples);
  for_each_chunked(samples, seed, [&](Engine& rng, std::size_t i) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector x(n);
    for (int j = 0; j < n; ++j) x[j] = half[j] * u(rng);
    hit[i] = contains(body, x) ? 1.0 : 0.0;
  });
  const Estimate frac = mean_estimate(hit);
  const double log_box = n * std::log(2.0) + half.array().log().sum();
  Estimate e;
  e.samples = samples;
  if (frac.value == 0.0) throw BudgetError("volume_radius: no sample landed inside the body");
  const double log_vol = log_box + std::log(frac.value);
  e.value = std::exp((log_vol - log_unit_ball_volume(n)) / n);
  e.std_error = e.value / n * frac.std_error / frac.value;
  return e;
}

/// M*(K): average support over uniform directions.
inline Estimate mean_width(const Body& body, std::size_t samples, std::uint64_t seed) {
  if (samples < 100) throw UsageError("mean_width: at least 100 samples required");
  if (!body.convex()) throw UnsupportedError("mean_width: body must be convex");
  const Matrix dirs = sample_directions(body.dimension(), samples, seed);
  const Vector h = support_columns(body, dirs);
  return mean_estimate(std::vector<double>(h.data(), h.data() + h.size()));
}

/// Seeded source of uniform directions on S^{n-1}.
class DirectionSampler {
 public:
  DirectionSampler(int n, std::uint64_t seed) : n_(n), seed_(seed) {
    if (n < 1) throw UsageError("DirectionSampler: n must be positive");
  }
  /// Columns are directions; the same (n, seed, count) gives the same matrix.
  Matrix sample(std::size_t count) const { return sample_directions(n_, count, seed_); }
  int dimension() const { return n_; }
  std::uint64_t seed() const { return seed_; }

 private:
  int n_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Serialization: {kind, dimension, parameters}; matrices as row-major nested arrays.

inline Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConstructionError("matrix: expected nested arrays");
  const auto r = static_cast<Eigen::Index>(j.size());
  const auto c = static_cast<Eigen::Index>(j[0].size());
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != c)
      throw ConstructionError("matrix: ragged rows");
    for (Eigen::Index k = 0; k < c; ++k) M(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return M;
}

inline Json vector_to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

inline Vector vector_from_json(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Exponents may be written as the string "inf".
inline Json exponent_to_json(double q) { return std::isinf(q) ? Json("inf") : Json(q); }

inline double exponent_from_json(const Json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw ConstructionError("exponent: expected a number or \"inf\"");
  }
  return j.get<double>();
}

inline Json to_json(const Body& body) {
  Json out;
  out["kind"] = body.kind();
  out["dimension"] = body.dimension();
  out["parameters"] = std::visit(
      [](const auto& s) -> Json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Ellipsoid>) {
          return Json{{"A", matrix_to_json(s.A)}};
        } else if constexpr (std::is_same_v<S, Cube>) {
          return Json{{"a", s.a}};
        } else if constexpr (std::is_same_v<S, LqBall>) {
          return Json{{"q", exponent_to_json(s.q)}, {"r", s.r}};
        } else if constexpr (std::is_same_v<S, HPolytope>) {
          return Json{{"normals", matrix_to_json(s.normals.topRows(s.given))},
                      {"offsets", vector_to_json(s.offsets.head(s.given))}};
        } else if constexpr (std::is_same_v<S, LinearImage>) {
          return Json{{"T", matrix_to_json(s.T)}, {"inner", to_json(*s.inner)}};
        } else {
          if (s.family.empty()) throw UnsupportedError("to_json: radial star body without a named family");
          Json p = s.params;
          p["family"] = s.family;
          return p;
        }
      },
      body.shape());
  return out;
}

inline Body body_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int n = j.at("dimension").get<int>();
  const Json& p = j.at("parameters");
  Body b = [&]() -> Body {
    if (kind == "ellipsoid") return Body::ellipsoid(matrix_from_json(p.at("A")));
    if (kind == "cube") return Body::cube(n, p.at("a").get<double>());
    if (kind == "lq_ball") return Body::lq_ball(n, exponent_from_json(p.at("q")), p.value("r", 1.0));
    if (kind == "h_polytope") return Body::h_polytope(matrix_from_json(p.at("normals")), vector_from_json(p.at("offsets")));
    if (kind == "linear_image") return Body::linear_image(matrix_from_json(p.at("T")), body_from_json(p.at("inner")));
    if (kind == "radial_star") {
      const std::string fam = p.at("family").get<std::string>();
      if (fam == "cylinder") return Body::cylinder(n, p.at("k").get<int>(), p.at("radius").get<double>());
      throw ConstructionError("radial_star: unknown family '" + fam + "'");
    }
    throw ConstructionError("unknown body kind '" + kind + "'");
  }();
  if (b.dimension() != n) throw ConstructionError("body: declared dimension does not match parameters");
  return b;
}

}  // namespace sudakov
