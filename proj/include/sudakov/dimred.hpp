/**
 * @file dimred.hpp
 * @brief Dimension reduction: Haar random projections, Johnson-Lindenstrauss
 * and small-ball checks, the decoupled projection search for Euclidean
 * balls, and cell content / combinatorial dimension for coordinate
 * projections with the coordinate-subspace search for cubes.
 */
#pragma once

#include <map>

#include <boost/math/special_functions/beta.hpp>

#include "centroid.hpp"
#include "packing.hpp"

namespace sudakov {

struct Projection {
  Matrix matrix;  // m x n
  enum class Kind { OrthogonalRows, Scaled } kind = Kind::OrthogonalRows;
  std::uint64_t seed = 0;

  int rows() const { return static_cast<int>(matrix.rows()); }
  int cols() const { return static_cast<int>(matrix.cols()); }
};

/// Haar-random m x n matrix with orthonormal rows: the rows are the first m
/// columns of Q in the QR factorisation (R with positive diagonal) of a seeded
/// Gaussian matrix. Those columns depend only on the first m Gaussian columns,
/// so only those are drawn.
inline Projection random_projection(int n, int m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw DomainError("random_projection: dimensions must be positive");
  if (m > n) throw DomainError("random_projection: m must not exceed n");
  Engine rng = make_stream(seed, 0x7a);
  std::normal_distribution<double> normal;
  Matrix G(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, m);
  for (int j = 0; j < m; ++j)
    if (qr.matrixQR()(j, j) < 0) Q.col(j) *= -1.0;
  Projection P;
  P.matrix = Q.transpose();
  P.seed = seed;
  return P;
}

/// sqrt(n/m) P, the normalisation under which E|Px|^2 = |x|^2.
inline Projection scaled(const Projection& P) {
  Projection s = P;
  if (P.kind == Projection::Kind::Scaled) return s;
  s.matrix *= std::sqrt(double(P.cols()) / P.rows());
  s.kind = Projection::Kind::Scaled;
  return s;
}

// ---------------------------------------------------------------------------
// Johnson-Lindenstrauss

struct JlResult {
  double success = 0.0;  // fraction of trials where every pair is within [1-eps, 1+eps]
  std::size_t trials = 0;
  double worst_low = std::numeric_limits<double>::infinity();  // smallest distortion seen
  double worst_high = 0.0;                                      // largest distortion seen
};

inline JlResult jl_check(const PointCloud& points, int m, double eps, std::size_t trials, std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("jl_check: eps must lie in (0, 1)");
  const int n = points.dimension();
  const Eigen::Index N = points.size();
  std::vector<double> lo(trials), hi(trials);
  parallel_for(trials, [&](std::size_t t) {
    const Projection P = scaled(random_projection(n, m, derive_seed(seed, t)));
    const RowMatrix Y = points.points * P.matrix.transpose();
    double a = std::numeric_limits<double>::infinity(), b = 0.0;
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index j = i + 1; j < N; ++j) {
        const double d = (points.points.row(i) - points.points.row(j)).norm();
        if (d == 0.0) throw UsageError("jl_check: points must be distinct");
        const double r = (Y.row(i) - Y.row(j)).norm() / d;
        a = std::min(a, r);
        b = std::max(b, r);
      }
    lo[t] = a;
    hi[t] = b;
  });
  JlResult r;
  r.trials = trials;
  std::size_t ok = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    if (lo[t] >= 1.0 - eps && hi[t] <= 1.0 + eps) ++ok;
    r.worst_low = std::min(r.worst_low, lo[t]);
    r.worst_high = std::max(r.worst_high, hi[t]);
  }
  r.success = trials ? double(ok) / double(trials) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Small ball

/// sqrt(n/m) |P x| for x = e_1 over independent Haar projections P. By
/// rotation invariance the law is the same for every unit x.
inline std::vector<double> small_ball_samples(int n, int m, std::size_t trials, std::uint64_t seed) {
  std::vector<double> out(trials);
  const double scale = std::sqrt(double(n) / m);
  parallel_for((trials + kChunkRows - 1) / kChunkRows, [&](std::size_t c) {
    const std::size_t end = std::min(trials, (c + 1) * kChunkRows);
    for (std::size_t i = c * kChunkRows; i < end; ++i) {
      const Projection P = random_projection(n, m, derive_seed(seed, i));
      out[i] = scale * P.matrix.col(0).norm();
    }
  });
  return out;
}

/// Exact law: |P x|^2 ~ Beta(m/2, (n-m)/2) for unit x, so
/// P(sqrt(n/m)|Px| <= s) = I_{s^2 m / n}(m/2, (n-m)/2).
inline double small_ball_cdf(int n, int m, double s) {
  if (s <= 0.0) return 0.0;
  if (m == n) return s >= 1.0 ? 1.0 : 0.0;
  const double x = s * s * m / n;
  if (x >= 1.0) return 1.0;
  return boost::math::ibeta(m / 2.0, (n - m) / 2.0, x);
}

/// Kolmogorov distance between the empirical law of `values` and a CDF.
inline double kolmogorov_distance(std::vector<double> values, const std::function<double(double)>& cdf) {
  std::sort(values.begin(), values.end());
  const double N = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double F = cdf(values[i]);
    d = std::max({d, std::abs((i + 1) / N - F), std::abs(F - i / N)});
  }
  return d;
}

struct SmallBallFit {
  double C_prime = 0.0;  // minimal C' with P(s <= eps) <= (C' eps)^m on the retained grid
  std::vector<double> eps;
  std::vector<double> probability;
  std::vector<double> pruned;
  double ks_distance = 0.0;  // against the exact Beta law
};

/// Fits C' in P(sqrt(n/m)|Tx| <= eps) <= (C' eps)^m. Grid points with
/// trials * eps^m < 1 are pruned: their probabilities are not resolvable.
inline SmallBallFit small_ball_fit(int n, int m, const std::vector<double>& eps_grid, std::size_t trials,
                                   std::uint64_t seed) {
  SmallBallFit f;
  std::vector<double> keep;
  for (double e : eps_grid) {
    if (!(e > 0.0 && e <= 1.0)) throw DomainError("small_ball_fit: eps must lie in (0, 1]");
    (double(trials) * std::pow(e, m) >= 1.0 ? keep : f.pruned).push_back(e);
  }
  if (keep.empty()) throw BudgetError("small_ball_fit: every eps is below the resolvable range for this trial count");
  std::sort(keep.begin(), keep.end());
  std::vector<double> s = small_ball_samples(n, m, trials, seed);
  f.ks_distance = kolmogorov_distance(s, [&](double v) { return small_ball_cdf(n, m, v); });
  std::sort(s.begin(), s.end());
  for (double e : keep) {
    const double count = static_cast<double>(std::upper_bound(s.begin(), s.end(), e) - s.begin());
    const double prob = count / static_cast<double>(trials);
    f.eps.push_back(e);
    f.probability.push_back(prob);
    if (prob > 0.0) f.C_prime = std::max(f.C_prime, std::pow(prob, 1.0 / m) / e);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Decoupled projection search (Euclidean ball target)

struct DecoupledResult {
  bool found = false;
  std::size_t trial = 0;           // index of the witness draw
  std::size_t trials_used = 0;
  Projection projection;           // orthogonal rows
  double radius = 0.0;             // L = radius * B_2^m, radius = sqrt(2) sqrt(m/n)
  double separation_margin = 0.0;  // min_{i<j} gauge_{L/C}(T x_i - T x_j) / 2 (> 1 passes)
  double mass = 0.0;               // empirical T_* mu(L)
  double mass_threshold = 0.0;     // e^{-q} / 4
  double best_separation = 0.0;    // best margins over all draws (for failures)
  double best_mass = 0.0;
};

/// Draws projections until one maps the K-separated `points` to L/C-separated
/// images and keeps pushforward mass T_* mu(L) >= e^{-q}/4. The same bank is
/// used for every draw.
inline DecoupledResult decoupled_search(const PointCloud& points, const SampleBank& bank, const Body& K, int m,
                                        double q, std::size_t trials, std::uint64_t seed, double C = 4.0) {
  const int n = K.dimension();
  require_dimension(n, bank.dimension(), "decoupled_search");
  if (points.size() > 0) require_dimension(n, points.dimension(), "decoupled_search");
  if (m < 1 || m > n) throw DomainError("decoupled_search: need 1 <= m <= n");
  if (!(C > 0.0)) throw DomainError("decoupled_search: C must be positive");
  const auto gK = GaugeOracle::of(K);
  {
    std::vector<int> all(static_cast<std::size_t>(points.size()));
    std::iota(all.begin(), all.end(), 0);
    if (!verify_separated(points, gK, all)) throw UsageError("decoupled_search: points are not K-separated");
  }
  const double muK = (gauge_rows(K, bank.points).array() <= 1.0).cast<double>().mean();
  if (muK < std::exp(-q)) throw DomainError("decoupled_search: empirical mu(K) is below e^{-q}");

  DecoupledResult r;
  r.radius = std::sqrt(2.0) * std::sqrt(double(m) / n);
  r.mass_threshold = 0.25 * std::exp(-q);
  const double sep_scale = C / r.radius;  // gauge_{L/C}(y) = C |y| / radius
  for (std::size_t t = 0; t < trials; ++t) {
    const Projection T = random_projection(n, m, derive_seed(seed, t));
    double sep = std::numeric_limits<double>::infinity();
    if (points.size() > 1) {
      const RowMatrix Y = points.points * T.matrix.transpose();
      for (Eigen::Index i = 0; i < Y.rows(); ++i)
        for (Eigen::Index j = i + 1; j < Y.rows(); ++j) sep = std::min(sep, 0.5 * sep_scale * (Y.row(i) - Y.row(j)).norm());
    }
    const RowMatrix Z = bank.points * T.matrix.transpose();
    const double mass = (Z.rowwise().norm().array() <= r.radius).cast<double>().mean();
    r.best_separation = std::max(r.best_separation, std::min(sep, 1e300));
    r.best_mass = std::max(r.best_mass, mass);
    r.trials_used = t + 1;
    if (sep > 1.0 && mass >= r.mass_threshold) {
      r.found = true;
      r.trial = t;
      r.projection = T;
      r.separation_margin = sep;
      r.mass = mass;
      return r;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Coordinate projections: cell content and combinatorial dimension

inline constexpr int kCellMaxDim = 12;
inline constexpr std::size_t kCellGridCap = 2000000;

/// Membership in every coordinate projection P_F K of a convex body in R^n.
struct CellOracle {
  int n = 0;
  bool convex = true;
  Vector lo, hi;  // coordinate extents of K (those of P_F K are the restrictions)
  /// Batch membership: rows of `Y` are points of R^{|S|} in the coordinates S.
  std::function<std::vector<char>(const std::vector<int>& S, const RowMatrix& Y)> contains;
  /// Cheap certificates for Z_p-type oracles are folded into `contains`.
};

inline CellOracle box_cell_oracle(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size() || (hi - lo).minCoeff() < 0.0) throw ConstructionError("box_cell_oracle: bad extents");
  CellOracle o;
  o.n = static_cast<int>(lo.size());
  o.lo = lo;
  o.hi = hi;
  o.contains = [lo, hi](const std::vector<int>& S, const RowMatrix& Y) {
    std::vector<char> out(static_cast<std::size_t>(Y.rows()), 1);
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
      for (std::size_t j = 0; j < S.size(); ++j) {
        const double y = Y(i, static_cast<Eigen::Index>(j));
        if (y < lo[S[j]] || y > hi[S[j]]) {
          out[static_cast<std::size_t>(i)] = 0;
          break;
        }
      }
    return out;
  };
  return o;
}

inline CellOracle cube_cell_oracle(int n, double a) { return box_cell_oracle(Vector::Constant(n, -a), Vector::Constant(n, a)); }

/// Ellipsoid c + A B_2^n; P_F is the ellipsoid with shape (A A^T)_{SS}.
inline CellOracle ellipsoid_cell_oracle(const Matrix& A, const Vector& center) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || center.size() != n) throw ConstructionError("ellipsoid_cell_oracle: dimension mismatch");
  const Matrix S = A * A.transpose();
  CellOracle o;
  o.n = n;
  o.lo.resize(n);
  o.hi.resize(n);
  for (int i = 0; i < n; ++i) {
    const double w = std::sqrt(S(i, i));
    o.lo[i] = center[i] - w;
    o.hi[i] = center[i] + w;
  }
  o.contains = [S, center](const std::vector<int>& idx, const RowMatrix& Y) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    Matrix Ssub(m, m);
    Vector c(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      c[a] = center[idx[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < m; ++b) Ssub(a, b) = S(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    }
    const Eigen::LLT<Matrix> llt(Ssub);
    std::vector<char> out(static_cast<std::size_t>(Y.rows()));
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
      const Vector d = Y.row(i).transpose() - c;
      out[static_cast<std::size_t>(i)] = d.dot(llt.solve(d)) <= 1.0 + 1e-12;
    }
    return out;
  };
  return o;
}

/// scale * P_F Z_p(mu) = scale * Z_p(pi_F mu), membership via the marginal
/// gauge. For p >= 2, Z_2 subset Z_p on a shared bank gives a cheap inclusion
/// certificate; the support in direction y gives a cheap exclusion one.
inline CellOracle zp_cell_oracle(const ZpBody& Z, double scale = 1.0, const ZpGaugeOptions& gopt = {}) {
  const int n = Z.dimension();
  CellOracle o;
  o.n = n;
  o.lo.resize(n);
  o.hi.resize(n);
  for (int i = 0; i < n; ++i) {
    const double h = zp_support(Z, Vector::Unit(n, i));
    o.lo[i] = -scale * h;
    o.hi[i] = scale * h;
  }
  auto z = std::make_shared<const ZpBody>(Z);
  o.contains = [z, scale, gopt](const std::vector<int>& S, const RowMatrix& Y) {
    const ZpBody M = z->coordinate_marginal(S);
    const RowMatrix& X = M.bank().points;
    const Matrix cov = X.transpose() * X / static_cast<double>(X.rows());
    const Eigen::LDLT<Matrix> ldlt(cov);
    std::vector<char> out(static_cast<std::size_t>(Y.rows()));
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
      const Vector y = Y.row(i).transpose() / scale;
      if (y.norm() == 0.0) {
        out[static_cast<std::size_t>(i)] = 1;
        continue;
      }
      if (M.p() >= 2.0 && std::sqrt(y.dot(ldlt.solve(y))) <= 1.0) {
        out[static_cast<std::size_t>(i)] = 1;
        continue;
      }
      if (y.squaredNorm() > zp_support(M, y) * y.norm()) {  // <y, y/|y|> > h(y/|y|)
        out[static_cast<std::size_t>(i)] = 0;
        continue;
      }
      out[static_cast<std::size_t>(i)] = zp_gauge(M, y, gopt).value <= 1.0;
    }
    return out;
  };
  return o;
}

struct CellScan {
  long long cells = 0;        // integer cells x + [0,1]^m inside P_F K
  std::vector<long long> first;  // lower corner of the first cell found
  bool complete = true;       // false if the lattice exceeded the cap
};

namespace detail {

inline std::vector<std::vector<int>> subsets_of_size(int n, int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == m) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

/// Counts (or finds, if stop_at_first) integer cells inside P_S K. Lattice
/// points are visited in order of increasing max-norm of the cell centre so a
/// capped scan still tries central cells first.
inline CellScan scan_cells(const CellOracle& K, const std::vector<int>& S, bool stop_at_first, std::size_t cap) {
  CellScan r;
  const auto m = S.size();
  if (m == 0) {
    r.cells = 1;
    return r;
  }
  std::vector<long long> a(m), b(m);  // cell lower corners range over [a, b]
  std::size_t total = 1;
  for (std::size_t j = 0; j < m; ++j) {
    a[j] = static_cast<long long>(std::ceil(K.lo[S[j]] - 1e-12));
    b[j] = static_cast<long long>(std::floor(K.hi[S[j]] + 1e-12)) - 1;
    if (b[j] < a[j]) return r;
    const auto w = static_cast<std::size_t>(b[j] - a[j] + 1);
    if (total > cap / w) {
      r.complete = false;
      total = cap + 1;
      break;
    }
    total *= w;
  }
  // enumerate cell corners
  std::vector<std::vector<long long>> corners;
  {
    std::vector<long long> x(a);
    const bool capped = total > cap;
    for (;;) {
      corners.push_back(x);
      std::size_t j = 0;
      while (j < m && ++x[j] > b[j]) {
        x[j] = a[j];
        ++j;
      }
      if (j == m) break;
      if (capped && corners.size() >= cap) break;
    }
  }
  auto centre_norm = [](const std::vector<long long>& x) {
    double v = 0.0;
    for (long long c : x) v = std::max(v, std::abs(c + 0.5));
    return v;
  };
  std::stable_sort(corners.begin(), corners.end(),
                   [&](const auto& u, const auto& v) { return centre_norm(u) < centre_norm(v); });
  // membership of lattice points, cached
  std::map<std::vector<long long>, char> member;
  auto check = [&](const std::vector<std::vector<long long>>& pts) {
    std::vector<std::vector<long long>> todo;
    for (const auto& p : pts)
      if (!member.count(p)) todo.push_back(p);
    if (todo.empty()) return;
    RowMatrix Y(static_cast<Eigen::Index>(todo.size()), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < todo.size(); ++i)
      for (std::size_t j = 0; j < m; ++j) Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = double(todo[i][j]);
    const auto res = K.contains(S, Y);
    for (std::size_t i = 0; i < todo.size(); ++i) member[todo[i]] = res[i];
  };
  const std::size_t nv = std::size_t{1} << m;
  for (const auto& x : corners) {
    bool inside = true;
    // vertices one at a time: most cells fail at an early vertex
    for (std::size_t mask = 0; mask < nv && inside; ++mask) {
      std::vector<long long> v(x);
      for (std::size_t j = 0; j < m; ++j) v[j] += (mask >> j) & 1;
      check({v});
      inside = member[v];
    }
    if (inside) {
      if (r.cells == 0) r.first = x;
      ++r.cells;
      if (stop_at_first) return r;
    }
  }
  return r;
}

inline void require_cell_oracle(const CellOracle& K) {
  if (K.n > kCellMaxDim) throw BudgetError("cell content: dimension above 12");
  if (!K.convex) throw UnsupportedError("cell content: convex oracle required (vertex test)");
}

}  // namespace detail

/// Sigma(K): integer cells inside P_F K summed over all 2^n coordinate
/// subspaces F (the zero subspace contributes 1).
inline long long cell_content(const CellOracle& K, std::size_t cap = kCellGridCap) {
  detail::require_cell_oracle(K);
  long long total = 0;
  for (int m = 0; m <= K.n; ++m)
    for (const auto& S : detail::subsets_of_size(K.n, m)) {
      const auto r = detail::scan_cells(K, S, false, cap);
      if (!r.complete) throw BudgetError("cell_content: lattice above the enumeration cap");
      total += r.cells;
    }
  return total;
}

/// v(K): largest |S| with an integer cell inside P_S K (0 if none).
inline int comb_dimension(const CellOracle& K, std::size_t cap = kCellGridCap) {
  detail::require_cell_oracle(K);
  for (int m = K.n; m >= 1; --m)
    for (const auto& S : detail::subsets_of_size(K.n, m)) {
      const auto r = detail::scan_cells(K, S, true, cap);
      if (r.cells > 0) return m;
      if (!r.complete) throw BudgetError("comb_dimension: lattice above the enumeration cap");
    }
  return 0;
}

// ---------------------------------------------------------------------------
// Coordinate-subspace search for cubes

struct CubeSearchResult {
  bool found = false;
  std::vector<int> subspace;     // F = span{e_i : i in subspace}
  int m = 0;
  std::vector<long long> cell;   // lower corner of the cell inside P_F Z_p / (8t)
  PackingResult witness;         // 3^m lattice points of P_F Z_p, t P_F B_inf separated
  double log_witness = 0.0;      // m log 3 >= m
  double projected_mass = 0.0;   // pi_F mu(P_F B_inf^n)
  double cube_mass = 0.0;        // mu(B_inf^n)
  int largest_examined = 0;      // on failure: largest dimension examined
  bool complete = true;          // every scan finished within the cap
};

/// The lattice witness points of a successful search, in subspace coordinates.
inline PointCloud cube_witness_points(const CubeSearchResult& r, double t, double C1 = 8.0) {
  PointCloud cloud;
  cloud.provenance = "cube-lattice";
  const int m = r.m;
  std::size_t count = 1;
  for (int j = 0; j < m; ++j) count *= 3;
  cloud.points.resize(static_cast<Eigen::Index>(count), m);
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rem = idx;
    for (int j = 0; j < m; ++j) {
      cloud.points(static_cast<Eigen::Index>(idx), j) = C1 * t * double(r.cell[static_cast<std::size_t>(j)]) + 0.5 * C1 * t * double(rem % 3);
      rem /= 3;
    }
  }
  return cloud;
}

/// Scans coordinate subspaces by decreasing dimension (lexicographic within a
/// dimension) for the first F such that P_F Z_p(mu) / (C1 t) contains an
/// integer cell. The cell x + [0,1]^m then gives the cube C1 t (x + [0,1]^m)
/// inside P_F Z_p, whose points at spacing C1 t / 2 form 3^m points pairwise
/// separated by t B_inf (spacing > 2t needs C1 > 4; default 8).
inline CubeSearchResult cube_part1_search(const ZpBody& Z, double t, double C1 = 8.0, std::size_t cap = 20000) {
  const int n = Z.dimension();
  if (n > kCellMaxDim) throw BudgetError("cube_part1_search: dimension above 12");
  if (!(t >= 1.0 / n)) throw DomainError("cube_part1_search: t must be at least 1/n");
  if (!(C1 > 4.0)) throw DomainError("cube_part1_search: C1 must exceed 4");
  const RowMatrix& X = Z.bank().points;
  CubeSearchResult r;
  r.cube_mass = (X.cwiseAbs().rowwise().maxCoeff().array() <= 1.0).cast<double>().mean();
  if (r.cube_mass < std::exp(-1.0)) throw DomainError("cube_part1_search: empirical mu(B_inf^n) is below 1/e");
  const CellOracle K = zp_cell_oracle(Z, 1.0 / (C1 * t));
  for (int m = n; m >= 1; --m) {
    r.largest_examined = std::max(r.largest_examined, m);
    for (const auto& S : detail::subsets_of_size(n, m)) {
      const auto scan = detail::scan_cells(K, S, true, cap);
      r.complete = r.complete && scan.complete;
      if (scan.cells == 0) continue;
      r.found = true;
      r.subspace = S;
      r.m = m;
      r.cell = scan.first;
      std::size_t count = 1;
      for (int j = 0; j < m; ++j) count *= 3;
      r.witness.method = "lattice";
      r.witness.count = static_cast<int>(count);
      r.witness.candidates = count;
      r.witness.witness.resize(count);
      std::iota(r.witness.witness.begin(), r.witness.witness.end(), 0);
      r.witness.separator = Json{{"kind", "cube"}, {"dimension", m}, {"parameters", {{"a", t}}}};
      r.log_witness = m * std::log(3.0);
      r.projected_mass = 0.0;
      {
        Eigen::Index hit = 0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
          bool in = true;
          for (int s : S) in = in && std::abs(X(i, s)) <= 1.0;
          hit += in;
        }
        r.projected_mass = double(hit) / double(X.rows());
      }
      return r;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Closed-form bounds

/// M_eps = 4 log^eps(e + 1/a).
inline double rv_exponent(double a, double eps) {
  if (!(a > 0.0) || !(eps >= 0.0)) throw DomainError("rv_bound: need a > 0 and eps >= 0");
  return 4.0 * std::pow(std::log(std::numbers::e + 1.0 / a), eps);
}

/// log of Sigma^{M_eps}: the covering bound N(K, B_inf^n) <= Sigma(C/eps K)^{M_eps}.
inline double rv_log_bound(double a, double eps, double sigma) {
  if (!(sigma >= 1.0)) throw DomainError("rv_bound: cell content is at least 1");
  return rv_exponent(a, eps) * std::log(sigma);
}
inline double rv_bound(double a, double eps, double sigma) { return std::exp(rv_log_bound(a, eps, sigma)); }

/// log of (C a n / v)^v.
inline double sauer_shelah_log_bound(double a, int n, int v, double C = 1.0) {
  if (!(a > 0.0) || v < 1 || n < 1) throw DomainError("sauer_shelah_bound: need a > 0, n >= 1, v >= 1");
  return v * std::log(C * a * n / v);
}
inline double sauer_shelah_bound(double a, int n, int v, double C = 1.0) {
  return std::exp(sauer_shelah_log_bound(a, n, v, C));
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const Projection& P) {
  return Json{{"matrix", matrix_to_json(P.matrix)},
              {"kind", P.kind == Projection::Kind::OrthogonalRows ? "orthogonal-rows" : "scaled"},
              {"seed", P.seed}};
}

inline Json to_json(const DecoupledResult& r) {
  Json j{{"found", r.found},           {"trials_used", r.trials_used},
         {"radius", r.radius},         {"mass_threshold", r.mass_threshold},
         {"best_separation", r.best_separation}, {"best_mass", r.best_mass}};
  if (r.found) {
    j["trial"] = r.trial;
    j["projection"] = to_json(r.projection);
    j["separation_margin"] = r.separation_margin;
    j["mass"] = r.mass;
  }
  return j;
}

inline Json to_json(const CubeSearchResult& r) {
  return Json{{"found", r.found},
              {"subspace", r.subspace},
              {"m", r.m},
              {"cell", r.cell},
              {"witness_count", r.witness.count},
              {"log_witness", r.log_witness},
              {"projected_mass", r.projected_mass},
              {"cube_mass", r.cube_mass},
              {"largest_examined", r.largest_examined},
              {"complete", r.complete}};
}

}  // namespace sudakov
