/**
 * @file centroid.hpp
 * @brief L_p centroid bodies Z_p(mu) backed by a sample bank, their polars
 * B_p(mu), Ball's bodies K_p(mu), and direction-wise inclusion checks.
 */
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "measures.hpp"

namespace sudakov {

/// Empirical Z_p(mu): h(theta) = ((1/N) sum |<x_i, theta>|^p)^{1/p}.
class ZpBody {
 public:
  ZpBody(std::shared_ptr<const SampleBank> bank, double p) : bank_(std::move(bank)), p_(p) {
    if (!bank_) throw UsageError("ZpBody: missing sample bank");
    if (std::isinf(p_)) throw ConstructionError("ZpBody: p = infinity is not supported");
    if (!(p_ >= 1.0)) throw ConstructionError("ZpBody: p must be at least 1");
    const double need = std::max(1000.0, 20.0 * p_);
    if (static_cast<double>(bank_->size()) < need)
      throw BudgetError("ZpBody: bank size must be at least max(1000, 20p) = " +
                        std::to_string(static_cast<long long>(std::ceil(need))));
  }
  ZpBody(const SampleBank& bank, double p) : ZpBody(std::make_shared<const SampleBank>(bank), p) {}

  double p() const { return p_; }
  int dimension() const { return bank_->dimension(); }
  const SampleBank& bank() const { return *bank_; }
  std::shared_ptr<const SampleBank> bank_ptr() const { return bank_; }

  /// Same bank, different p: monotonicity in p then holds exactly.
  ZpBody with_p(double p) const { return ZpBody(bank_, p); }

  /// T Z_p(mu) = Z_p(T_* mu), realised on the pushed bank.
  ZpBody pushforward(const Matrix& T) const {
    require_dimension(dimension(), T.cols(), "ZpBody::pushforward");
    auto b = std::make_shared<SampleBank>();
    b->points = bank_->points * T.transpose();
    b->seed = bank_->seed;
    if (bank_->measure && T.rows() <= T.cols() && detail::full_rank_rows(T))
      b->measure = std::make_shared<const Measure>(marginal(*bank_->measure, T));
    return ZpBody(b, p_);
  }

  /// P_F Z_p(mu) = Z_p(pi_F mu) for the coordinate subspace F = span{e_i : i in S}.
  ZpBody coordinate_marginal(const std::vector<int>& S) const {
    auto b = std::make_shared<SampleBank>();
    b->points.resize(bank_->size(), static_cast<Eigen::Index>(S.size()));
    for (std::size_t j = 0; j < S.size(); ++j) b->points.col(static_cast<Eigen::Index>(j)) = bank_->points.col(S[j]);
    b->seed = bank_->seed;
    return ZpBody(b, p_);
  }

 private:
  std::shared_ptr<const SampleBank> bank_;
  double p_;
};

namespace detail {

/// x^e for x >= 0; repeated multiplication when e is a small integer.
inline double nonneg_pow(double x, double e) {
  if (e >= 0.0 && e <= 16.0 && e == std::floor(e)) {
    double r = 1.0, b = x;
    for (auto k = static_cast<unsigned>(e); k; k >>= 1, b *= b)
      if (k & 1u) r *= b;
    return r;
  }
  return std::pow(x, e);
}

/// ((1/N) sum |a_i|^p)^{1/p}; scaled by max|a_i| (log-space above p = 30).
inline double power_mean_abs(const Eigen::Ref<const Vector>& a, double p) {
  const double N = static_cast<double>(a.size());
  const double m = a.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  if (p > 30.0) {
    std::vector<double> t(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) t[static_cast<std::size_t>(i)] = p * std::log(std::abs(a[i]));
    return std::exp((log_sum_exp(t) - std::log(N)) / p);
  }
  KahanSum s;
  for (Eigen::Index i = 0; i < a.size(); ++i) s.add(nonneg_pow(std::abs(a[i]) / m, p));
  return m * std::pow(s.value() / N, 1.0 / p);
}

}  // namespace detail

inline double zp_support(const ZpBody& Z, const Vector& theta) {
  require_dimension(Z.dimension(), theta.size(), "zp_support");
  const Vector a = Z.bank().points * theta;
  return detail::power_mean_abs(a, Z.p());
}

/// Support values for every column of `thetas` (one GEMM per block).
inline Vector zp_support_columns(const ZpBody& Z, const Matrix& thetas) {
  require_dimension(Z.dimension(), thetas.rows(), "zp_support_columns");
  Vector out(thetas.cols());
  const Eigen::Index block = 64;
  for (Eigen::Index c0 = 0; c0 < thetas.cols(); c0 += block) {
    const Eigen::Index w = std::min(block, thetas.cols() - c0);
    const Matrix A = Z.bank().points * thetas.middleCols(c0, w);
    for (Eigen::Index j = 0; j < w; ++j) out[c0 + j] = detail::power_mean_abs(A.col(j), Z.p());
  }
  return out;
}

/// Boundary point of Z_p where theta is an outer normal: grad h(theta).
inline Vector zp_support_point(const ZpBody& Z, const Vector& theta) {
  const Vector a = Z.bank().points * theta;
  const double h = detail::power_mean_abs(a, Z.p());
  if (h == 0.0) return Vector::Zero(Z.dimension());
  const double p = Z.p();
  Vector w(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double r = std::abs(a[i]) / h;
    w[i] = (a[i] >= 0 ? 1.0 : -1.0) * (p == 1.0 ? 1.0 : std::pow(r, p - 1.0));
  }
  return Z.bank().points.transpose() * w / static_cast<double>(a.size());
}

struct ZpGaugeOptions {
  int restarts = 50;
  double tol = 1e-8;
  int max_iterations = 200;
  std::uint64_t seed = 0;
};

struct ZpGaugeResult {
  double value = 0.0;  // certified lower bound <x,theta>/h(theta)
  bool converged = false;
  double gap = 0.0;    // |x/value - grad h(theta)| / |grad h(theta)|, 0 at the exact optimum
  Vector theta;
  int iterations = 0;
  int starts_used = 0;
};

namespace detail {

/// Minimises log h over the hyperplane {<x, theta> = 1} from theta0.
/// Newton steps for p >= 2, reweighted least squares for p < 2, both with
/// Armijo backtracking. Returns (theta, log h(theta), converged, iterations).
struct HyperplaneMin {
  Vector theta;
  double log_h = 0.0;
  bool converged = false;
  int iterations = 0;
};

inline HyperplaneMin minimise_on_hyperplane(const RowMatrix& X, double p, const Vector& x, const Matrix& V,
                                            Vector theta, const ZpGaugeOptions& opt) {
  const double N = static_cast<double>(X.rows());
  auto log_h = [&](const Vector& th) {
    const Vector a = X * th;
    const double h = power_mean_abs(a, p);
    return h > 0.0 ? std::log(h) : -std::numeric_limits<double>::infinity();
  };
  HyperplaneMin r;
  double cur = log_h(theta);
  for (int it = 0; it < opt.max_iterations; ++it) {
    r.iterations = it + 1;
    const Vector a = X * theta;
    const double m = a.cwiseAbs().maxCoeff();
    Vector target;
    if (p >= 2.0) {
      // Newton on Phi = mean |a|^p, both terms scaled by m^{-p}.
      Vector gw(a.size()), hw(a.size());
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double s = std::abs(a[i]) / m;
        gw[i] = (a[i] >= 0 ? 1.0 : -1.0) * std::pow(s, p - 1.0);
        hw[i] = (p - 1.0) * std::pow(s, p - 2.0);
      }
      const Vector g = X.transpose() * gw / N;
      const Matrix H = X.transpose() * (hw.asDiagonal() * X) / (N * m);
      const Matrix VHV = V.transpose() * H * V;
      const Vector dz = VHV.ldlt().solve(-(V.transpose() * g));
      target = theta + V * dz;
    } else {
      // Reweighted least squares: weights |a|^{p-2}, clamped away from 0.
      Vector w(a.size());
      for (Eigen::Index i = 0; i < a.size(); ++i) w[i] = std::pow(std::max(std::abs(a[i]) / m, 1e-8), p - 2.0);
      const Matrix S = X.transpose() * (w.asDiagonal() * X) / N;
      const Vector y = S.ldlt().solve(x);
      target = y / x.dot(y);
    }
    if (!target.allFinite()) break;
    const Vector step = target - theta;
    double t = 1.0, next = log_h(target);
    while (next > cur && t > 1e-10) {
      t *= 0.5;
      next = log_h(theta + t * step);
    }
    if (next > cur) {
      r.converged = true;  // no descent available along the step
      break;
    }
    theta += t * step;
    const double improvement = cur - next;
    cur = next;
    if (improvement < opt.tol * std::max(1.0, std::abs(cur)) * 1e-2 || improvement < opt.tol * 1e-2) {
      r.converged = true;
      break;
    }
  }
  r.theta = theta;
  r.log_h = cur;
  return r;
}

}  // namespace detail

/// ||x||_{Z_p} = sup_theta <x,theta>/h(theta) = 1 / min{h(theta) : <x,theta> = 1}.
/// The objective is convex on the hyperplane; the first start is the p = 2
/// minimiser, further random starts run until one converges with a small
/// duality gap or `restarts` is exhausted. The returned value is the best
/// ratio found, a lower bound on the gauge. At kinks (p = 1) the gap need not
/// vanish; there two converged runs agreeing to sqrt(tol) also end the search.
inline ZpGaugeResult zp_gauge(const ZpBody& Z, const Vector& x, const ZpGaugeOptions& opt = {}) {
  require_dimension(Z.dimension(), x.size(), "zp_gauge");
  const double xn = x.norm();
  if (xn == 0.0) throw DomainError("zp_gauge: x must be non-zero");
  const RowMatrix& X = Z.bank().points;
  const int n = Z.dimension();
  ZpGaugeResult best;
  best.value = -1.0;
  if (n == 1) {
    best.value = std::abs(x[0]) / zp_support(Z, Vector::Ones(1));
    best.converged = true;
    best.theta = Vector::Constant(1, 1.0 / x[0]);
    best.starts_used = 1;
    return best;
  }
  // Orthonormal basis of x-perp: trailing columns of a Householder QR of x.
  const Matrix Q = Eigen::HouseholderQR<Matrix>(x / xn).householderQ() * Matrix::Identity(n, n);
  const Matrix V = Q.rightCols(n - 1);
  const Matrix S = X.transpose() * X / static_cast<double>(X.rows());
  Vector theta0 = S.ldlt().solve(x);
  theta0 /= x.dot(theta0);
  if (!theta0.allFinite()) theta0 = x / (xn * xn);

  Engine rng = make_stream(opt.seed, 0x2a);
  const int starts = std::max(1, opt.restarts);
  for (int s = 0; s < starts; ++s) {
    Vector start = theta0;
    if (s > 0) start = x / (xn * xn) + V * (gaussian_vector(rng, n - 1) * theta0.norm());
    const auto r = detail::minimise_on_hyperplane(X, Z.p(), x, V, start, opt);
    const double value = std::exp(-r.log_h);  // <x, theta> = 1
    best.iterations += r.iterations;
    best.starts_used = s + 1;
    // convex objective: two converged runs that agree settle the minimum
    const bool agrees = r.converged && best.converged && std::abs(value - best.value) <= std::sqrt(opt.tol) * best.value;
    if (value > best.value) {
      best.value = value;
      best.theta = r.theta;
      const Vector zstar = zp_support_point(Z, r.theta);
      best.gap = (x / value - zstar).norm() / std::max(zstar.norm(), 1e-300);
      best.converged = r.converged;
    }
    if (best.converged && (best.gap <= std::sqrt(opt.tol) || agrees)) break;
  }
  return best;
}

/// Membership in Z_p via the gauge.
inline bool zp_contains(const ZpBody& Z, const Vector& x, const ZpGaugeOptions& opt = {}) {
  if (x.norm() == 0.0) return true;
  return zp_gauge(Z, x, opt).value <= 1.0;
}

enum class CandidateMode {
  Radial,        // s theta / ||theta||_{Z_p}
  SupportPoint,  // s grad h(theta), a boundary point with outer normal theta
  Boundary,      // grad h(theta) itself (s = 1)
};

/// Points inside Z_p: s * (boundary point) with s = u^{1/n} (s = 1 for Boundary).
inline PointCloud zp_candidates(const ZpBody& Z, std::size_t count, std::uint64_t seed,
                                CandidateMode mode = CandidateMode::Radial, const ZpGaugeOptions& gopt = {}) {
  if (count < 1) throw UsageError("zp_candidates: count must be positive");
  const int n = Z.dimension();
  PointCloud cloud;
  cloud.seed = seed;
  cloud.provenance = mode == CandidateMode::Radial         ? "zp-radial"
                     : mode == CandidateMode::SupportPoint ? "zp-support-point"
                                                           : "zp-boundary";
  cloud.points.resize(static_cast<Eigen::Index>(count), n);
  const Matrix dirs = sample_directions(n, count, seed);
  std::vector<double> radii(count);
  for_each_chunked(count, derive_seed(seed, 7), [&](Engine& rng, std::size_t i) {
    radii[i] = mode == CandidateMode::Boundary ? 1.0 : std::pow(uniform01(rng), 1.0 / n);
  });
  if (mode == CandidateMode::Radial) {
    parallel_for(count, [&](std::size_t i) {
      const Vector th = dirs.col(static_cast<Eigen::Index>(i));
      const double g = zp_gauge(Z, th, gopt).value;
      cloud.points.row(static_cast<Eigen::Index>(i)) = (radii[i] / g) * th.transpose();
    });
    return cloud;
  }
  const RowMatrix& X = Z.bank().points;
  const double N = static_cast<double>(X.rows());
  const double p = Z.p();
  const Eigen::Index block = 64;
  for (Eigen::Index c0 = 0; c0 < static_cast<Eigen::Index>(count); c0 += block) {
    const Eigen::Index w = std::min(block, static_cast<Eigen::Index>(count) - c0);
    Matrix A = X * dirs.middleCols(c0, w);
    for (Eigen::Index j = 0; j < w; ++j) {
      const double h = detail::power_mean_abs(A.col(j), p);
      for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double a = A(i, j);
        A(i, j) = (a >= 0 ? 1.0 : -1.0) * detail::nonneg_pow(std::abs(a) / h, p - 1.0);
      }
    }
    const Matrix G = X.transpose() * A / N;  // n x w
    for (Eigen::Index j = 0; j < w; ++j)
      cloud.points.row(c0 + j) = radii[static_cast<std::size_t>(c0 + j)] * G.col(j).transpose();
  }
  return cloud;
}

/// B_p(mu): the unit ball of theta -> h_{Z_p}(theta).
class BpBall {
 public:
  explicit BpBall(ZpBody Z) : Z_(std::move(Z)) {}
  double gauge(const Vector& x) const { return zp_support(Z_, x); }
  bool contains(const Vector& x) const { return gauge(x) <= 1.0; }
  const ZpBody& polar() const { return Z_; }

 private:
  ZpBody Z_;
};

// ---------------------------------------------------------------------------
// Ball's bodies K_p(mu)

/// rho(theta) = (p / max f * int_0^inf r^{p-1} f(r theta) dr)^{1/p}.
class KpBody {
 public:
  KpBody(const Measure& measure, double p) : measure_(std::make_shared<const Measure>(measure)), p_(p) {
    if (!(p_ > 0.0) || std::isinf(p_)) throw ConstructionError("KpBody: p must be positive and finite");
    const auto lm = sudakov::log_max_density(*measure_);
    if (!lm) throw UnsupportedError("KpBody: density of this measure is not evaluable");
    log_max_ = *lm;
  }

  double p() const { return p_; }
  int dimension() const { return measure_->dimension(); }
  double log_max_density() const { return log_max_; }
  const Measure& measure() const { return *measure_; }

  double radial(const Vector& direction) const {
    require_dimension(dimension(), direction.size(), "kp_radial");
    const double dn = direction.norm();
    if (dn == 0.0) throw DomainError("kp_radial: direction must be non-zero");
    const Vector theta = direction / dn;
    auto lf = [&](double r) { return *sudakov::log_density(*measure_, Vector(r * theta)); };
    const double p = p_;
    auto psi = [&](double r) { return r <= 0.0 ? -std::numeric_limits<double>::infinity() : (p - 1.0) * std::log(r) + lf(r); };

    // psi on a log grid over [1e-10, 1e10]: locates the peak, the scale where
    // psi has dropped by one unit, and the end of the support (log-concave
    // densities are positive on an interval of the ray).
    constexpr int kGrid = 801;
    std::vector<double> rs(kGrid), vs(kGrid);
    double best = -std::numeric_limits<double>::infinity();
    int ibest = -1, ilast = -1;
    for (int i = 0; i < kGrid; ++i) {
      rs[i] = std::pow(10.0, -10.0 + 20.0 * i / (kGrid - 1));
      vs[i] = psi(rs[i]);
      if (std::isfinite(vs[i])) ilast = i;
      if (vs[i] > best) {
        best = vs[i];
        ibest = i;
      }
    }
    if (ibest < 0) throw DomainError("kp_radial: density vanishes along the ray");
    double R = std::numeric_limits<double>::infinity();
    if (ilast + 1 < kGrid) {
      double lo = rs[ilast], hi = rs[ilast + 1];
      for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::isfinite(lf(mid)) ? lo : hi) = mid;
      }
      R = lo;
    }
    {
      // golden-section refinement of the peak within its grid neighbours
      double a = rs[std::max(ibest - 1, 0)], b = std::min(rs[std::min(ibest + 1, kGrid - 1)], R);
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int i = 0; i < 100; ++i) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (psi(c) > psi(d))
          b = d;
        else
          a = c;
      }
      best = std::max(best, psi(0.5 * (a + b)));
    }
    int iscale = ibest;
    while (iscale + 1 <= ilast && vs[iscale + 1] >= best - 1.0) ++iscale;
    const double scale = std::min(rs[iscale], R);
    auto integrand = [&](double u) {
      const double v = psi(scale * u);
      return std::isfinite(v) ? std::exp(v - best) : 0.0;
    };
    using boost::math::quadrature::gauss_kronrod;
    double J = 0.0;
    if (std::isfinite(R)) {
      const double uR = R / scale;
      J = gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::min(1.0, uR), 15, 1e-12);
      if (uR > 1.0) J += gauss_kronrod<double, 61>::integrate(integrand, 1.0, uR, 15, 1e-12);
    } else {
      J = gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-12) +
          gauss_kronrod<double, 61>::integrate(integrand, 1.0, std::numeric_limits<double>::infinity(), 15, 1e-12);
    }
    const double log_rho_p = std::log(p) + std::log(scale) + best - log_max_ + std::log(J);
    return std::exp(log_rho_p / p) / dn;
  }

  /// The body as a radial star body; convex by Ball's theorem for log-concave mu.
  Body to_body() const {
    auto self = std::make_shared<KpBody>(*this);
    return Body::radial_star(dimension(), [self](const Vector& u) { return self->radial(u); }, true);
  }

 private:
  std::shared_ptr<const Measure> measure_;
  double p_;
  double log_max_ = 0.0;
};

inline double kp_radial(const KpBody& K, const Vector& theta) { return K.radial(theta); }

// ---------------------------------------------------------------------------
// Inclusion diagnostics

/// Evaluators for a shape, on batches of unit directions (columns).
struct ShapeOracle {
  int dimension = 0;
  std::function<Vector(const Matrix&)> support;  // empty when unavailable
  std::function<Vector(const Matrix&)> radial;   // empty when unavailable
  /// Exact radial function of the projection onto span(U) (U is n x k
  /// orthonormal), at unit probes given as columns in subspace coordinates.
  std::function<Vector(const Matrix& U, const Matrix& probes)> projected_radial;
  /// Exact vrad(P_F K)^k = |P_F K| / |B_2^k|, when known in closed form.
  std::function<double(const Matrix& U)> projected_vrad_pow;
};

inline ShapeOracle shape_oracle(const Body& body) {
  auto b = std::make_shared<const Body>(body);
  ShapeOracle o;
  o.dimension = body.dimension();
  if (body.convex())
    o.support = [b](const Matrix& T) { return support_columns(*b, T); };
  if (auto nf = norm_form(body); nf && nf->q == 2.0 && nf->M.rows() == nf->M.cols() && body.convex()) {
    // K = M^{-1} B_2^n, so U^T K is the ellipsoid with shape S = U^T M^{-1} M^{-T} U
    const Matrix Minv = nf->M.inverse();
    o.projected_radial = [Minv](const Matrix& U, const Matrix& probes) {
      const Matrix L = U.transpose() * Minv;
      const Eigen::LLT<Matrix> S(L * L.transpose());
      Vector out(probes.cols());
      for (Eigen::Index j = 0; j < probes.cols(); ++j) out[j] = 1.0 / std::sqrt(probes.col(j).dot(S.solve(probes.col(j))));
      return out;
    };
    o.projected_vrad_pow = [Minv](const Matrix& U) {
      const Matrix L = U.transpose() * Minv;
      return std::sqrt((L * L.transpose()).determinant());
    };
  }
  o.radial = [b](const Matrix& T) {
    Vector out(T.cols());
    for (Eigen::Index j = 0; j < T.cols(); ++j) {
      const double g = gauge(*b, T.col(j));
      out[j] = g > 0.0 ? 1.0 / g : std::numeric_limits<double>::infinity();
    }
    return out;
  };
  return o;
}

inline ShapeOracle shape_oracle(const ZpBody& Z, const ZpGaugeOptions& gopt = {}) {
  auto z = std::make_shared<const ZpBody>(Z);
  ShapeOracle o;
  o.dimension = Z.dimension();
  o.support = [z](const Matrix& T) { return zp_support_columns(*z, T); };
  o.radial = [z, gopt](const Matrix& T) {
    Vector out(T.cols());
    parallel_for(static_cast<std::size_t>(T.cols()), [&](std::size_t j) {
      const auto c = static_cast<Eigen::Index>(j);
      out[c] = 1.0 / zp_gauge(*z, T.col(c), gopt).value;
    });
    return out;
  };
  // P_F Z_p(mu) = Z_p(pi_F mu): gauge of the pushed k-dimensional bank
  o.projected_radial = [z, gopt](const Matrix& U, const Matrix& probes) {
    const ZpBody P = z->pushforward(U.transpose());
    Vector out(probes.cols());
    for (Eigen::Index j = 0; j < probes.cols(); ++j) out[j] = 1.0 / zp_gauge(P, probes.col(j), gopt).value;
    return out;
  };
  return o;
}

inline ShapeOracle shape_oracle(const KpBody& K) {
  auto k = std::make_shared<const KpBody>(K);
  ShapeOracle o;
  o.dimension = K.dimension();
  o.radial = [k](const Matrix& T) {
    Vector out(T.cols());
    parallel_for(static_cast<std::size_t>(T.cols()), [&](std::size_t j) {
      out[static_cast<Eigen::Index>(j)] = k->radial(T.col(static_cast<Eigen::Index>(j)));
    });
    return out;
  };
  return o;
}

/// c times the shape.
inline ShapeOracle scaled(const ShapeOracle& o, double c) {
  ShapeOracle s;
  s.dimension = o.dimension;
  if (o.support) s.support = [f = o.support, c](const Matrix& T) { return Vector(c * f(T)); };
  if (o.radial) s.radial = [f = o.radial, c](const Matrix& T) { return Vector(c * f(T)); };
  if (o.projected_radial)
    s.projected_radial = [f = o.projected_radial, c](const Matrix& U, const Matrix& P) { return Vector(c * f(U, P)); };
  if (o.projected_vrad_pow)
    s.projected_vrad_pow = [f = o.projected_vrad_pow, c](const Matrix& U) { return std::pow(c, U.cols()) * f(U); };
  return s;
}

enum class InclusionMode { Convex, Star };

/// max over sampled theta of h_A/h_B (Convex) or rho_A/rho_B (Star). A is
/// contained in c B on the sampled directions iff the result is <= c.
inline double inclusion_ratio(const ShapeOracle& A, const ShapeOracle& B, InclusionMode mode, std::size_t directions,
                              std::uint64_t seed) {
  if (A.dimension != B.dimension) throw UsageError("inclusion_ratio: dimension mismatch");
  const bool convex = mode == InclusionMode::Convex;
  const auto& fa = convex ? A.support : A.radial;
  const auto& fb = convex ? B.support : B.radial;
  if (!fa || !fb)
    throw UsageError(std::string("inclusion_ratio: both shapes must provide ") + (convex ? "support" : "radial") +
                     " functions in this mode");
  const Matrix dirs = sample_directions(A.dimension, directions, seed);
  const Vector a = fa(dirs), b = fb(dirs);
  return (a.array() / b.array()).maxCoeff();
}

}  // namespace sudakov
