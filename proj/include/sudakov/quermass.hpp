/**
 * @file quermass.hpp
 * @brief Quermassintegrals: Steiner polynomial, Kubota Monte Carlo over
 * random subspaces, Alexandrov bounds for Z_2, and closed-form right-hand
 * sides of the Sudakov-type bounds.
 */
#pragma once

#include <numeric>

#include "centroid.hpp"

namespace sudakov {

/// W_k(K) = |B_2^n| E_F vrad(P_F K)^k with its standard error.
struct QuermassEstimate {
  int k = 0;
  int n = 0;
  double value = 0.0;
  double std_error = 0.0;
  std::size_t subspaces = 0;
  std::uint64_t seed = 0;
  bool exact = false;
};

inline constexpr int kKubotaMaxK = 6;

/// |K + t B_2^n| = sum_k C(n,k) W_k t^{n-k}. `W` must hold W_1..W_n for one n
/// (W_0 = |B_2^n| is filled in; a supplied W_0 is ignored).
inline double steiner_volume(const std::vector<QuermassEstimate>& W, double t) {
  if (!(t >= 0.0)) throw DomainError("steiner_volume: t must be non-negative");
  if (W.empty()) throw UsageError("steiner_volume: no quermassintegrals supplied");
  const int n = W.front().n;
  std::vector<double> logW(static_cast<std::size_t>(n) + 1, std::numeric_limits<double>::quiet_NaN());
  logW[0] = log_unit_ball_volume(n);
  for (const auto& w : W) {
    if (w.n != n) throw UsageError("steiner_volume: mixed dimensions");
    if (w.k < 0 || w.k > n) throw UsageError("steiner_volume: index out of range");
    if (w.k == 0) continue;
    if (!(w.value > 0.0)) throw DomainError("steiner_volume: quermassintegrals must be positive");
    logW[static_cast<std::size_t>(w.k)] = std::log(w.value);
  }
  for (int k = 1; k <= n; ++k)
    if (std::isnan(logW[static_cast<std::size_t>(k)]))
      throw UsageError("steiner_volume: missing W_" + std::to_string(k));
  if (t == 0.0) return std::exp(logW[static_cast<std::size_t>(n)]);
  std::vector<double> terms;
  for (int k = 0; k <= n; ++k) terms.push_back(log_binomial(n, k) + logW[static_cast<std::size_t>(k)] + (n - k) * std::log(t));
  return std::exp(log_sum_exp(terms));
}

namespace detail {

/// Haar-random k-frame: orthonormalised columns of an n x k Gaussian matrix.
inline Matrix random_frame(int n, int k, Engine& rng) {
  Matrix G(n, k);
  for (int j = 0; j < k; ++j) G.col(j) = gaussian_vector(rng, n);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, k);
  // fix signs so the frame is a function of G alone
  const Matrix R = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

/// Nelder-Mead minimisation of f over R^d from x0 with initial step `step`.
inline double nelder_mead_min(const std::function<double(const Vector&)>& f, Vector x0, double step, int max_evals,
                              double rel_tol) {
  const Eigen::Index d = x0.size();
  std::vector<Vector> pts{x0};
  for (Eigen::Index i = 0; i < d; ++i) pts.push_back(x0 + step * Vector::Unit(d, i));
  std::vector<double> val;
  for (const auto& p : pts) val.push_back(f(p));
  int evals = static_cast<int>(pts.size());
  std::vector<std::size_t> idx(pts.size());
  while (evals < max_evals) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t lo = idx.front(), hi = idx.back(), nh = idx[idx.size() - 2];
    if (val[hi] - val[lo] <= rel_tol * std::abs(val[lo])) break;
    Vector c = Vector::Zero(d);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (i != hi) c += pts[i];
    c /= static_cast<double>(d);
    const Vector xr = c + (c - pts[hi]);
    const double fr = f(xr);
    ++evals;
    if (fr < val[lo]) {
      const Vector xe = c + 2.0 * (c - pts[hi]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        pts[hi] = xe;
        val[hi] = fe;
      } else {
        pts[hi] = xr;
        val[hi] = fr;
      }
    } else if (fr < val[nh]) {
      pts[hi] = xr;
      val[hi] = fr;
    } else {
      const Vector xc = fr < val[hi] ? Vector(c + 0.5 * (xr - c)) : Vector(c + 0.5 * (pts[hi] - c));
      const double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, val[hi])) {
        pts[hi] = xc;
        val[hi] = fc;
      } else {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (i == lo) continue;
          pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
          val[i] = f(pts[i]);
          ++evals;
        }
      }
    }
  }
  return *std::min_element(val.begin(), val.end());
}

/// vrad(P_F K)^k from the support function alone. For each probe u,
/// rho(u) = 1 / min{h_K(U phi) : <u, phi> = 1}; the minimum is bracketed by
/// the best of the test directions `phis` and then refined by Nelder-Mead on
/// the hyperplane (convex objective). Any residual error only raises rho.
inline double projected_vrad_pow(const ShapeOracle& K, const Matrix& U, const Matrix& phis, const Vector& h,
                                 const Matrix& probes) {
  const int k = static_cast<int>(U.cols());
  const Matrix dots = probes.transpose() * phis;
  const double spacing = std::pow(4.0 * std::numbers::pi / static_cast<double>(phis.cols()), 1.0 / (k - 1));
  KahanSum s;
  for (Eigen::Index i = 0; i < dots.rows(); ++i) {
    const Vector u = probes.col(i);
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = -1;
    for (Eigen::Index j = 0; j < dots.cols(); ++j)
      if (dots(i, j) > 0.0 && h[j] / dots(i, j) < best) {
        best = h[j] / dots(i, j);
        arg = j;
      }
    // basis of u-perp in subspace coordinates
    const Matrix Q = Eigen::HouseholderQR<Matrix>(u).householderQ() * Matrix::Identity(k, k);
    const Matrix V = Q.rightCols(k - 1);
    auto obj = [&](const Vector& z) {
      const Vector phi = u + V * z;
      return K.support(U * phi)[0];
    };
    const Vector phi0 = phis.col(arg) / dots(i, arg);
    const double refined = nelder_mead_min(obj, V.transpose() * phi0, spacing, 400, 1e-13);
    s.add(std::pow(std::min(best, refined), k));
  }
  return s.value() / static_cast<double>(dots.rows());
}

/// Per-subspace vrad(P_F K)^k for shapes sharing the same subspaces and test
/// directions (for ratio checks).
inline std::vector<std::vector<double>> kubota_samples(const std::vector<const ShapeOracle*>& shapes, int k,
                                                       std::size_t subspaces, std::size_t vol_samples,
                                                       std::uint64_t seed) {
  const int n = shapes.front()->dimension;
  for (const auto* s : shapes) {
    if (!s->support) throw UnsupportedError("quermass_kubota: support function required");
    require_dimension(n, s->dimension, "quermass_kubota");
  }
  if (k < 1 || k > n) throw UsageError("quermass_kubota: need 1 <= k <= n");
  if (k > kKubotaMaxK) throw BudgetError("quermass_kubota: k above 6");
  if (subspaces < 2) throw UsageError("quermass_kubota: at least two subspaces");
  std::vector<std::vector<double>> out(shapes.size(), std::vector<double>(subspaces));
  const std::size_t M = 500 * static_cast<std::size_t>(k);
  parallel_for(subspaces, [&](std::size_t s) {
    Engine rng = make_stream(seed, s);
    const Matrix U = random_frame(n, k, rng);
    if (k == 1) {
      Matrix th(n, 2);
      th.col(0) = U.col(0);
      th.col(1) = -U.col(0);
      for (std::size_t i = 0; i < shapes.size(); ++i) {
        const Vector h = shapes[i]->support(th);
        out[i][s] = 0.5 * (h[0] + h[1]);
      }
      return;
    }
    // test directions in F: +-e_j then uniform ones; probes for the radial average
    Matrix phis(k, static_cast<Eigen::Index>(M));
    for (int j = 0; j < k; ++j) {
      phis.col(2 * j) = Vector::Unit(k, j);
      phis.col(2 * j + 1) = -Vector::Unit(k, j);
    }
    for (Eigen::Index j = 2 * k; j < phis.cols(); ++j) phis.col(j) = sphere_point(rng, k);
    Matrix probes(k, static_cast<Eigen::Index>(vol_samples));
    for (Eigen::Index j = 0; j < probes.cols(); ++j) probes.col(j) = sphere_point(rng, k);
    const Matrix lifted = U * phis;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      if (shapes[i]->projected_vrad_pow) {
        out[i][s] = shapes[i]->projected_vrad_pow(U);
        continue;
      }
      if (shapes[i]->projected_radial) {
        const Vector rho = shapes[i]->projected_radial(U, probes);
        out[i][s] = rho.array().pow(k).mean();
        continue;
      }
      const Vector h = shapes[i]->support(lifted);
      out[i][s] = projected_vrad_pow(*shapes[i], U, phis, h, probes);
    }
  });
  return out;
}

inline QuermassEstimate to_quermass(const std::vector<double>& per, int n, int k, std::uint64_t seed) {
  const Estimate e = mean_estimate(per);
  const double ball = std::exp(log_unit_ball_volume(n));
  QuermassEstimate q;
  q.k = k;
  q.n = n;
  q.value = ball * e.value;
  q.std_error = ball * e.std_error;
  q.subspaces = per.size();
  q.seed = seed;
  return q;
}

}  // namespace detail

/// Kubota estimate of W_k(K): |B_2^n| times the mean over Haar subspaces F of
/// vrad(P_F K)^k, itself the mean of rho^k over probe directions in F.
/// k = 1 is exact per subspace (half-length of a segment). Shapes with an
/// exact projected volume (ellipsoids) or radial function (Z_p) use it; otherwise the
/// projection is bracketed by 500k support constraints and refined per probe,
/// so any residual error is upward.
inline QuermassEstimate quermass_kubota(const ShapeOracle& K, int k, std::size_t subspaces, std::size_t vol_samples,
                                        std::uint64_t seed) {
  const auto per = detail::kubota_samples({&K}, k, subspaces, vol_samples, seed);
  return detail::to_quermass(per[0], K.dimension, k, seed);
}

inline QuermassEstimate quermass_kubota(const Body& K, int k, std::size_t subspaces, std::size_t vol_samples,
                                        std::uint64_t seed) {
  if (!K.convex()) throw UnsupportedError("quermass_kubota: convex body required");
  return quermass_kubota(shape_oracle(K), k, subspaces, vol_samples, seed);
}

/// (W_k / |B_2^n|)^{1/k} with a delta-method standard error.
inline Estimate quermass_radius(const QuermassEstimate& W) {
  const double ball = std::exp(log_unit_ball_volume(W.n));
  const double r = W.value / ball;
  Estimate e;
  e.value = std::pow(r, 1.0 / W.k);
  e.std_error = e.value / W.k * (W.std_error / W.value);
  e.samples = W.subspaces;
  return e;
}

struct AlexandrovBounds {
  double lower = 0.0;  // det(Cov)^{1/2n} = vrad(Z_2)
  double upper = 0.0;  // (tr Cov / n)^{1/2}
};

/// Endpoints bracketing (W_k(Z_2)/|B_2^n|)^{1/k} for every k.
inline AlexandrovBounds alexandrov_sandwich(const Matrix& cov) {
  if (cov.rows() != cov.cols() || cov.rows() < 1) throw UsageError("alexandrov_sandwich: square covariance required");
  const int n = static_cast<int>(cov.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Vector ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0) throw DomainError("alexandrov_sandwich: covariance must be positive definite");
  AlexandrovBounds b;
  b.lower = std::exp(ev.array().log().sum() / (2.0 * n));
  b.upper = std::sqrt(cov.trace() / n);
  return b;
}

inline AlexandrovBounds alexandrov_sandwich(const Measure& mu) {
  const auto cov = exact_covariance(mu);
  if (!cov) throw UnsupportedError("alexandrov_sandwich: covariance of this measure is not available in closed form");
  return alexandrov_sandwich(*cov);
}

/// Z_2 as an ellipsoid: h(theta) = sqrt(theta^T Cov theta).
inline Body z2_ellipsoid(const Matrix& cov) {
  const Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw DomainError("z2_ellipsoid: covariance must be positive definite");
  return Body::ellipsoid(llt.matrixL());
}

struct ZpQuermassCheck {
  Estimate ratio;          // W_k(Z_p)^{1/k} / W_k(Z_2)^{1/k}
  double structural = 0.0; // max(sqrt p, p / sqrt k)
  double fitted_C = 0.0;   // ratio / structural
};

/// Both sides estimated by Kubota on one bank, with shared subspaces and
/// shared test directions so the outer-approximation bias largely cancels.
inline ZpQuermassCheck zp_quermass_bound_check(const ZpBody& Zp, int k, std::size_t subspaces,
                                               std::size_t vol_samples, std::uint64_t seed) {
  const int n = Zp.dimension();
  if (n > 6) throw BudgetError("zp_quermass_bound_check: n above 6");
  if (k < 1 || k > 3) throw BudgetError("zp_quermass_bound_check: k must be in [1, 3]");
  if (Zp.p() > 2.0 * n) throw DomainError("zp_quermass_bound_check: p above 2n");
  const ShapeOracle a = shape_oracle(Zp);
  const ShapeOracle b = shape_oracle(Zp.with_p(2.0));
  const auto per = detail::kubota_samples({&a, &b}, k, subspaces, vol_samples, seed);
  const auto Wp = detail::to_quermass(per[0], n, k, seed);
  const auto W2 = detail::to_quermass(per[1], n, k, seed);
  // ratio of the two means, error by the delta method
  const Estimate rp = quermass_radius(Wp), r2 = quermass_radius(W2);
  ZpQuermassCheck c;
  c.ratio.value = rp.value / r2.value;
  // shared subspaces make the two errors positively correlated; the
  // independent combination is an upper bound on the ratio error
  c.ratio.std_error = c.ratio.value * std::hypot(rp.std_error / rp.value, r2.std_error / r2.value);
  c.ratio.samples = subspaces;
  c.structural = std::max(std::sqrt(Zp.p()), Zp.p() / std::sqrt(double(k)));
  c.fitted_C = c.ratio.value / c.structural;
  return c;
}

// ---------------------------------------------------------------------------
// Closed-form right-hand sides

/// log of exp(C p^{2/3} n^{1/3} / t^{2/3} + C sqrt(p n) / t).
inline double part2_ellipsoid_log_rhs(double p, double n, double t, double C = 1.0) {
  if (!(p >= 1.0 && p <= n)) throw DomainError("part2_ellipsoid_rhs: p must lie in [1, n]");
  if (!(t > 0.0)) throw DomainError("part2_ellipsoid_rhs: t must be positive");
  return C * std::pow(p, 2.0 / 3.0) * std::cbrt(n) / std::pow(t, 2.0 / 3.0) + C * std::sqrt(p * n) / t;
}

inline double part2_ellipsoid_rhs(double p, double n, double t, double C = 1.0) {
  return std::exp(part2_ellipsoid_log_rhs(p, n, t, C));
}

/// log exp(n / max(t, t^2)).
inline double improved_sudakov_log_rhs(double n, double t) {
  if (!(t > 0.0)) throw DomainError("improved_sudakov_rhs: t must be positive");
  return n / std::max(t, t * t);
}
inline double improved_sudakov_rhs(double n, double t) { return std::exp(improved_sudakov_log_rhs(n, t)); }

/// log exp(n / t).
inline double weak_sudakov_log_rhs(double n, double t) {
  if (!(t > 0.0)) throw DomainError("weak_sudakov_rhs: t must be positive");
  return n / t;
}
inline double weak_sudakov_rhs(double n, double t) { return std::exp(weak_sudakov_log_rhs(n, t)); }

inline Json to_json(const QuermassEstimate& q) {
  return Json{{"k", q.k}, {"n", q.n}, {"value", q.value}, {"std_error", q.std_error}, {"subspaces", q.subspaces}, {"seed", q.seed}};
}

}  // namespace sudakov
