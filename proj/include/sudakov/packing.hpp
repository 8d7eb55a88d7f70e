/**
 * @file packing.hpp
 * @brief Packing and covering numbers of point clouds: greedy witnesses,
 * exact small-instance oracles, volumetric upper estimates and the finite
 * forms of the covering/packing sandwich and triangle inequality.
 */
#pragma once

#include <bit>
#include <numeric>

#include "bodies.hpp"

namespace sudakov {

/// Gauge of a separator, with the norm form when the separator has one.
struct GaugeOracle {
  int dimension = 0;
  std::function<double(const Vector&)> gauge;
  std::optional<NormForm> norm;
  Json description;  // serialized separator, or a label

  static GaugeOracle of(const Body& body) {
    GaugeOracle g;
    g.dimension = body.dimension();
    auto b = std::make_shared<const Body>(body);
    g.gauge = [b](const Vector& x) { return sudakov::gauge(*b, x); };
    g.norm = norm_form(body);
    try {
      g.description = to_json(body);
    } catch (const std::exception&) {
      g.description = body.kind();
    }
    return g;
  }
};

struct PackingResult {
  int count = 0;
  std::vector<int> witness;
  Json separator;
  std::string method;  // "greedy", "greedy-farthest" or "exact"
  std::uint64_t seed = 0;
  std::size_t candidates = 0;
};

struct CoveringResult {
  int count = 0;
  std::vector<int> centers;
  std::string method;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kExactPackingMax = 64;
inline constexpr std::size_t kExactCoveringMax = 40;

namespace detail {

/// Pairwise gauge evaluator over a fixed cloud.
class PairGauge {
 public:
  PairGauge(const PointCloud& cloud, const GaugeOracle& B) : cloud_(cloud), B_(B) {
    require_dimension(B.dimension, cloud.dimension(), "packing: cloud and separator");
    if (B.norm) Y_ = cloud.points * B.norm->M.transpose();
  }
  /// gauge_B(x_i - x_j)
  double operator()(Eigen::Index i, Eigen::Index j) const {
    if (B_.norm) return lq_norm((Y_.row(i) - Y_.row(j)).transpose(), B_.norm->q);
    return B_.gauge((cloud_.points.row(i) - cloud_.points.row(j)).transpose());
  }
  /// Symmetrised: both differences must exceed the threshold to separate.
  double symmetric(Eigen::Index i, Eigen::Index j) const {
    if (B_.norm) return (*this)(i, j);  // norm forms are symmetric
    return std::min((*this)(i, j), (*this)(j, i));
  }

 private:
  const PointCloud& cloud_;
  const GaugeOracle& B_;
  RowMatrix Y_;
};

inline std::vector<int> seeded_permutation(std::size_t N, std::uint64_t seed) {
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  Engine rng = make_stream(seed, 0x9ac);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

using Bits = std::uint64_t;

/// Maximum clique in a graph on <= 64 vertices (adjacency as bitmasks), by
/// branch and bound with a greedy colouring bound.
class MaxClique {
 public:
  explicit MaxClique(std::vector<Bits> adj) : adj_(std::move(adj)) {}

  std::vector<int> solve() {
    const int N = static_cast<int>(adj_.size());
    Bits all = N == 64 ? ~Bits{0} : ((Bits{1} << N) - 1);
    current_.clear();
    best_.clear();
    expand(all);
    return best_;
  }

 private:
  void expand(Bits P) {
    // colour classes in vertex order; bound[k] = colour of order[k]
    std::vector<int> order;
    std::vector<int> bound;
    Bits U = P;
    int colour = 0;
    while (U) {
      ++colour;
      Bits Q = U;
      while (Q) {
        const int v = std::countr_zero(Q);
        Q &= ~(Bits{1} << v);
        Q &= ~adj_[static_cast<std::size_t>(v)];
        U &= ~(Bits{1} << v);
        order.push_back(v);
        bound.push_back(colour);
      }
    }
    for (int k = static_cast<int>(order.size()) - 1; k >= 0; --k) {
      if (current_.size() + static_cast<std::size_t>(bound[static_cast<std::size_t>(k)]) <= best_.size()) return;
      const int v = order[static_cast<std::size_t>(k)];
      current_.push_back(v);
      const Bits NP = P & adj_[static_cast<std::size_t>(v)];
      if (NP)
        expand(NP);
      else if (current_.size() > best_.size())
        best_ = current_;
      current_.pop_back();
      P &= ~(Bits{1} << v);
    }
  }

  std::vector<Bits> adj_;
  std::vector<int> current_, best_;
};

/// Minimum set cover of the points 0..N-1 (N <= 64) by the given sets.
class MinCover {
 public:
  MinCover(std::vector<Bits> sets, int N) : sets_(std::move(sets)), N_(N) {}

  std::vector<int> solve(std::vector<int> initial) {
    best_ = std::move(initial);
    current_.clear();
    const Bits all = N_ == 64 ? ~Bits{0} : ((Bits{1} << N_) - 1);
    max_size_ = 1;
    for (Bits s : sets_) max_size_ = std::max(max_size_, std::popcount(s));
    search(all);
    return best_;
  }

 private:
  void search(Bits uncovered) {
    if (!uncovered) {
      if (current_.size() < best_.size()) best_ = current_;
      return;
    }
    const std::size_t lower = current_.size() + static_cast<std::size_t>((std::popcount(uncovered) + max_size_ - 1) / max_size_);
    if (lower >= best_.size()) return;
    // branch on the uncovered point with the fewest covering sets
    int pick = -1, fewest = std::numeric_limits<int>::max();
    for (Bits U = uncovered; U;) {
      const int p = std::countr_zero(U);
      U &= U - 1;
      int c = 0;
      for (Bits s : sets_) c += (s >> p) & 1;
      if (c < fewest) {
        fewest = c;
        pick = p;
      }
    }
    std::vector<int> options;
    for (std::size_t s = 0; s < sets_.size(); ++s)
      if ((sets_[s] >> pick) & 1) options.push_back(static_cast<int>(s));
    std::sort(options.begin(), options.end(), [&](int a, int b) {
      const int ca = std::popcount(sets_[static_cast<std::size_t>(a)] & uncovered);
      const int cb = std::popcount(sets_[static_cast<std::size_t>(b)] & uncovered);
      return ca != cb ? ca > cb : a < b;
    });
    for (int s : options) {
      current_.push_back(s);
      search(uncovered & ~sets_[static_cast<std::size_t>(s)]);
      current_.pop_back();
    }
  }

  std::vector<Bits> sets_;
  int N_;
  int max_size_ = 1;
  std::vector<int> current_, best_;
};

}  // namespace detail

/// True iff every pair of witnesses satisfies gauge_B(x_i - x_j) > 2.
inline bool verify_separated(const PointCloud& cloud, const GaugeOracle& B, const std::vector<int>& witness) {
  const detail::PairGauge g(cloud, B);
  for (std::size_t a = 0; a < witness.size(); ++a)
    for (std::size_t b = a + 1; b < witness.size(); ++b)
      if (!(g.symmetric(witness[a], witness[b]) > 2.0)) return false;
  return true;
}

/// True iff every cloud point is within gauge 1 of some center.
inline bool verify_cover(const PointCloud& cloud, const GaugeOracle& B, const std::vector<int>& centers) {
  const detail::PairGauge g(cloud, B);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    bool hit = false;
    for (int c : centers)
      if (g(i, c) <= 1.0) {
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  return true;
}

enum class GreedyOrder { SeededPermutation, FarthestPoint };

/// Keeps a candidate iff it is B-separated from everything kept so far. The
/// result is maximal, so its count lower-bounds M(A, B) for any A containing
/// the cloud.
inline PackingResult greedy_packing(const PointCloud& cloud, const GaugeOracle& B, std::uint64_t seed = 0,
                                    GreedyOrder order = GreedyOrder::SeededPermutation) {
  PackingResult r;
  r.separator = B.description;
  r.seed = seed;
  r.candidates = static_cast<std::size_t>(cloud.size());
  r.method = order == GreedyOrder::SeededPermutation ? "greedy" : "greedy-farthest";
  const std::size_t N = static_cast<std::size_t>(cloud.size());
  if (N == 0) return r;
  const detail::PairGauge g(cloud, B);
  const auto perm = detail::seeded_permutation(N, seed);
  if (order == GreedyOrder::SeededPermutation) {
    for (int i : perm) {
      bool ok = true;
      for (int k : r.witness)
        if (!(g.symmetric(i, k) > 2.0)) {
          ok = false;
          break;
        }
      if (ok) r.witness.push_back(i);
    }
  } else {
    std::vector<double> nearest(N, std::numeric_limits<double>::infinity());
    int next = perm.front();
    while (next >= 0) {
      r.witness.push_back(next);
      int arg = -1;
      double far = 2.0;
      for (int i : perm) {
        const auto ui = static_cast<std::size_t>(i);
        nearest[ui] = std::min(nearest[ui], g.symmetric(i, next));
        if (nearest[ui] > far) {
          far = nearest[ui];
          arg = i;
        }
      }
      next = arg;
    }
  }
  r.count = static_cast<int>(r.witness.size());
  return r;
}

inline PackingResult greedy_packing(const PointCloud& cloud, const Body& B, std::uint64_t seed = 0,
                                    GreedyOrder order = GreedyOrder::SeededPermutation) {
  return greedy_packing(cloud, GaugeOracle::of(B), seed, order);
}

/// Largest B-separated subset of the cloud (maximum independent set of the
/// conflict graph gauge_B(x - y) <= 2).
inline PackingResult exact_max_packing(const PointCloud& cloud, const GaugeOracle& B) {
  const std::size_t N = static_cast<std::size_t>(cloud.size());
  if (N > kExactPackingMax)
    throw BudgetError("exact_max_packing: at most " + std::to_string(kExactPackingMax) + " points");
  PackingResult r;
  r.separator = B.description;
  r.method = "exact";
  r.candidates = N;
  r.seed = cloud.seed;
  if (N == 0) return r;
  const detail::PairGauge g(cloud, B);
  std::vector<detail::Bits> sep(N, 0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j)
      if (g.symmetric(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 2.0) {
        sep[i] |= detail::Bits{1} << j;
        sep[j] |= detail::Bits{1} << i;
      }
  r.witness = detail::MaxClique(sep).solve();
  std::sort(r.witness.begin(), r.witness.end());
  r.count = static_cast<int>(r.witness.size());
  return r;
}

inline PackingResult exact_max_packing(const PointCloud& cloud, const Body& B) {
  return exact_max_packing(cloud, GaugeOracle::of(B));
}

/// Greedy set cover with centers at cloud points: repeatedly takes the center
/// covering the most uncovered points (lowest index on ties).
inline CoveringResult greedy_covering(const PointCloud& cloud, const GaugeOracle& B) {
  CoveringResult r;
  r.method = "greedy";
  r.seed = cloud.seed;
  const std::size_t N = static_cast<std::size_t>(cloud.size());
  if (N == 0) return r;
  const std::size_t words = (N + 63) / 64;
  const detail::PairGauge g(cloud, B);
  // covers[c] = points p with gauge_B(p - c) <= 1
  std::vector<std::vector<detail::Bits>> covers(N, std::vector<detail::Bits>(words, 0));
  parallel_for(N, [&](std::size_t c) {
    for (std::size_t p = 0; p < N; ++p)
      if (g(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) <= 1.0) covers[c][p / 64] |= detail::Bits{1} << (p % 64);
  });
  std::vector<detail::Bits> uncovered(words, ~detail::Bits{0});
  if (N % 64) uncovered.back() = (detail::Bits{1} << (N % 64)) - 1;
  std::size_t left = N;
  while (left > 0) {
    std::size_t best = 0;
    int gain = -1;
    for (std::size_t c = 0; c < N; ++c) {
      int s = 0;
      for (std::size_t w = 0; w < words; ++w) s += std::popcount(covers[c][w] & uncovered[w]);
      if (s > gain) {
        gain = s;
        best = c;
      }
    }
    r.centers.push_back(static_cast<int>(best));
    for (std::size_t w = 0; w < words; ++w) uncovered[w] &= ~covers[best][w];
    left -= static_cast<std::size_t>(gain);
  }
  r.count = static_cast<int>(r.centers.size());
  return r;
}

inline CoveringResult greedy_covering(const PointCloud& cloud, const Body& B) {
  return greedy_covering(cloud, GaugeOracle::of(B));
}

/// Minimum cover of the cloud by translates c + B with c in the cloud.
inline CoveringResult exact_min_covering(const PointCloud& cloud, const GaugeOracle& B, bool centers_from_cloud = true) {
  if (!centers_from_cloud)
    throw UsageError("exact_min_covering: only centers drawn from the cloud are supported");
  const std::size_t N = static_cast<std::size_t>(cloud.size());
  if (N > kExactCoveringMax)
    throw BudgetError("exact_min_covering: at most " + std::to_string(kExactCoveringMax) + " points");
  CoveringResult r;
  r.method = "exact";
  r.seed = cloud.seed;
  if (N == 0) return r;
  const detail::PairGauge g(cloud, B);
  std::vector<detail::Bits> sets(N, 0);
  for (std::size_t c = 0; c < N; ++c)
    for (std::size_t p = 0; p < N; ++p)
      if (g(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) <= 1.0) sets[c] |= detail::Bits{1} << p;
  const auto greedy = greedy_covering(cloud, B);
  r.centers = detail::MinCover(sets, static_cast<int>(N)).solve(greedy.centers);
  std::sort(r.centers.begin(), r.centers.end());
  r.count = static_cast<int>(r.centers.size());
  return r;
}

inline CoveringResult exact_min_covering(const PointCloud& cloud, const Body& B, bool centers_from_cloud = true) {
  return exact_min_covering(cloud, GaugeOracle::of(B), centers_from_cloud);
}

// ---------------------------------------------------------------------------
// Volumetric upper estimate M(A, B) <= |A + B| / |B|

struct VolumetricResult {
  Estimate ratio;        // |A + B| / |B|
  std::size_t undecided = 0;  // points counted inside without a certificate
};

inline constexpr int kVolumetricMaxDim = 8;

namespace detail {

/// Decides x in A + B. Inside is certified by a point a of A with
/// gauge_B(x - a) <= 1 (projected descent from 20 starts, retraction
/// a -> a / max(1, gauge_A(a))); outside by a direction with
/// <x, theta> > h_A(theta) + h_B(theta) (supergradient ascent of this concave
/// gap on the unit ball). Returns 1 inside, 0 outside, -1 undecided.
inline int minkowski_membership(const Body& A, const Body& B, const Vector& x, Engine& rng) {
  const int n = A.dimension();
  auto hsum = [&](const Vector& th) { return support(A, th) + support(B, th); };
  auto retract = [&](const Vector& a) {
    const double g = gauge(A, a);
    return g > 1.0 ? Vector(a / g) : a;
  };
  const double xn = x.norm();
  if (xn == 0.0) return 1;
  // quick exclusion along x and the axes
  {
    const Vector u = x / xn;
    if (x.dot(u) > hsum(u) * (1.0 + 1e-12)) return 0;
  }
  auto F = [&](const Vector& a) { return gauge(B, x - a); };
  auto grad = [&](const Vector& a, double f0) {
    Vector gr(n);
    const double h = 1e-7 * std::max(1.0, a.norm());
    for (int k = 0; k < n; ++k) {
      Vector ak = a;
      ak[k] += h;
      gr[k] = (F(ak) - f0) / h;
    }
    return gr;
  };
  for (int s = 0; s < 20; ++s) {
    Vector a = s == 0 ? retract(x) : retract(gaussian_vector(rng, n) * xn / std::sqrt(double(n)));
    double f = F(a);
    double step = 0.5 * xn;
    for (int it = 0; it < 60 && f > 1.0; ++it) {
      const Vector gr = grad(a, f);
      const double gn = gr.norm();
      if (gn == 0.0) break;
      const Vector cand = retract(a - step * gr / gn);
      const double fc = F(cand);
      if (fc < f) {
        a = cand;
        f = fc;
      } else {
        step *= 0.5;
      }
    }
    if (f <= 1.0) return 1;
  }
  // dual search for a separating direction
  Vector th = x / xn;
  double step = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double gap = x.dot(th) - hsum(th);
    if (gap > 1e-12 * xn) return 0;
    Vector gr(n);
    const double h = 1e-7;
    for (int k = 0; k < n; ++k) {
      Vector tk = th;
      tk[k] += h;
      gr[k] = (x.dot(tk) - hsum(tk) - gap) / h;
    }
    Vector cand = th + step * gr;
    if (cand.norm() > 1.0) cand.normalize();
    if (x.dot(cand) - hsum(cand) > gap)
      th = cand;
    else
      step *= 0.5;
    if (step < 1e-12) break;
  }
  return -1;
}

}  // namespace detail

/// Monte Carlo estimate of |A + B| / |B| by uniform sampling in the bounding
/// box of A + B. Undecided membership tests count as inside, so the estimate
/// errs upward.
inline VolumetricResult volumetric_packing_upper(const Body& A, const Body& B, std::size_t samples, std::uint64_t seed) {
  const int n = A.dimension();
  require_dimension(n, B.dimension(), "volumetric_packing_upper");
  if (n > kVolumetricMaxDim) throw BudgetError("volumetric_packing_upper: dimension above 8");
  if (!A.convex() || !B.convex()) throw UnsupportedError("volumetric_packing_upper: convex bodies required");
  if (samples < 1) throw UsageError("volumetric_packing_upper: samples must be positive");
  Vector half(n);
  for (int k = 0; k < n; ++k) {
    const Vector e = Vector::Unit(n, k);
    half[k] = std::max(support(A, e) + support(B, e), support(A, -e) + support(B, -e));
  }
  double log_box = 0.0;
  for (int k = 0; k < n; ++k) log_box += std::log(2.0 * half[k]);
  double log_B = 0.0;
  if (auto lv = log_volume_closed_form(B))
    log_B = *lv;
  else
    log_B = n * std::log(volume_radius(B, samples, derive_seed(seed, 3)).value) + log_unit_ball_volume(n);

  std::vector<int> verdict(samples);
  for_each_chunked(samples, seed, [&](Engine& rng, std::size_t i) {
    Vector x(n);
    for (int k = 0; k < n; ++k) x[k] = (2.0 * uniform01(rng) - 1.0) * half[k];
    verdict[i] = detail::minkowski_membership(A, B, x, rng);
  });
  VolumetricResult r;
  std::vector<double> hits(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    hits[i] = verdict[i] != 0 ? 1.0 : 0.0;
    if (verdict[i] < 0) ++r.undecided;
  }
  const Estimate frac = mean_estimate(hits);
  const double scale = std::exp(log_box - log_B);
  r.ratio.value = frac.value * scale;
  r.ratio.std_error = frac.std_error * scale;
  r.ratio.samples = samples;
  return r;
}

// ---------------------------------------------------------------------------
// Finite sandwich and triangle relations

struct SandwichReport {
  int cover_2B = 0;          // N(cloud, 2B)
  int packing_B = 0;         // M(cloud, B)
  int cover_B = 0;           // N(cloud, B)
  int cover_D = 0;           // N(cloud, D)
  int local_packing_max = 0; // max_i M(cloud ∩ (c_i + D), B) over an optimal D-cover
  bool sandwich_holds = false;
  bool triangle_holds = false;
};

/// Exact N(cloud, 2B) <= M(cloud, B) <= N(cloud, B) and
/// M(cloud, B) <= N(cloud, D) max_i M(cloud ∩ (c_i + D), B).
inline SandwichReport sandwich_and_triangle_check(const PointCloud& cloud, const Body& B, const Body& D) {
  SandwichReport r;
  const auto gB = GaugeOracle::of(B);
  const auto gD = GaugeOracle::of(D);
  r.packing_B = exact_max_packing(cloud, gB).count;
  r.cover_2B = exact_min_covering(cloud, GaugeOracle::of(scaled(B, 2.0))).count;
  r.cover_B = exact_min_covering(cloud, gB).count;
  const auto coverD = exact_min_covering(cloud, gD);
  r.cover_D = coverD.count;
  for (int c : coverD.centers) {
    PointCloud local;
    local.seed = cloud.seed;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < cloud.size(); ++i)
      if (gD.gauge((cloud.points.row(i) - cloud.points.row(c)).transpose()) <= 1.0) rows.push_back(i);
    local.points.resize(static_cast<Eigen::Index>(rows.size()), cloud.dimension());
    for (std::size_t k = 0; k < rows.size(); ++k) local.points.row(static_cast<Eigen::Index>(k)) = cloud.points.row(rows[k]);
    r.local_packing_max = std::max(r.local_packing_max, exact_max_packing(local, gB).count);
  }
  r.sandwich_holds = r.cover_2B <= r.packing_B && r.packing_B <= r.cover_B;
  r.triangle_holds = r.packing_B <= r.cover_D * r.local_packing_max || cloud.size() == 0;
  return r;
}

/// Extends a bound phi valid for t >= t0 to all t > 0:
/// phi(t) := phi(t0) + log(1 + 2 t0 / t) for t <= t0.
inline std::function<double(double)> extend_bound_small_t(std::function<double(double)> phi, double t0) {
  if (!(t0 > 0.0)) throw DomainError("extend_bound_small_t: t0 must be positive");
  const double at_t0 = phi(t0);
  return [phi = std::move(phi), t0, at_t0](double t) {
    if (!(t > 0.0)) throw DomainError("extend_bound_small_t: t must be positive");
    if (t > t0) return phi(t);
    return at_t0 + std::log1p(2.0 * t0 / t);
  };
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const PackingResult& r) {
  return Json{{"count", r.count},          {"witness", r.witness}, {"separator", r.separator},
              {"method", r.method},        {"seed", r.seed},       {"candidates", r.candidates}};
}

inline Json to_json(const CoveringResult& r) {
  return Json{{"count", r.count}, {"centers", r.centers}, {"method", r.method}, {"seed", r.seed}};
}

inline PointCloud cloud_from_bank(const RowMatrix& points, std::string provenance, std::uint64_t seed) {
  PointCloud c;
  c.points = points;
  c.provenance = std::move(provenance);
  c.seed = seed;
  return c;
}

}  // namespace sudakov
