/**
 * @file core.hpp
 * @brief Shared vocabulary: linear-algebra aliases, error types, seeded
 * random streams, log-space helpers and a deterministic parallel loop.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace sudakov {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Row-major storage for point banks: one point per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Errors

/// Caller passed arguments that do not fit together (dimension mismatch etc).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
/// An object could not be built from the given parameters.
struct ConstructionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
/// A numeric argument is outside the mathematical domain of the operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
/// Requested work exceeds a sample or size cap.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// The object does not support this operation (e.g. support of a star body).
struct UnsupportedError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Finite point set in R^n, one point per row, with its origin.
struct PointCloud {
  RowMatrix points;
  std::string provenance;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return points.rows(); }
  int dimension() const { return static_cast<int>(points.cols()); }
};

/// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  bool exact = false;
};

// ---------------------------------------------------------------------------
// Random streams
//
// Every stochastic routine derives its engines from (seed, stream index)
// through splitmix64, so work split into indexed chunks is reproducible no
// matter how the chunks are scheduled.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

using Engine = std::mt19937_64;

inline Engine make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  return Engine{splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))};
}

/// Derives a child seed, e.g. one per grid cell or per subspace.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag + 0x632BE59BD9B4E019ULL));
}

/// Rows per independently seeded chunk in every chunked sampler.
inline constexpr std::size_t kChunkRows = 1024;

/// Calls fn(rng, i) for i in [0, count), where rng is the stream of the
/// chunk containing i. Output is identical for any thread count.
template <class Fn>
void for_each_chunked(std::size_t count, std::uint64_t seed, Fn&& fn);

inline Vector gaussian_vector(Engine& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

/// Uniform point on the unit sphere S^{n-1}.
inline Vector sphere_point(Engine& rng, Eigen::Index n) {
  for (;;) {
    Vector v = gaussian_vector(rng, n);
    const double norm = v.norm();
    if (norm > 0.0) return v / norm;
  }
}

inline double uniform01(Engine& rng) {
  // (0,1]: never returns zero so logs and negative powers stay finite.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = 0.0;
  do {
    x = u(rng);
  } while (x == 0.0);
  return x;
}

// ---------------------------------------------------------------------------
// Parallel loop

/// Thread cap from SUDAKOV_THREADS (default: hardware concurrency).
inline unsigned thread_cap() {
  if (const char* env = std::getenv("SUDAKOV_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count). Each index must write only its own
/// output slot; results are then independent of scheduling.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(thread_cap(), count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += threads) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <class Fn>
void for_each_chunked(std::size_t count, std::uint64_t seed, Fn&& fn) {
  const std::size_t chunks = (count + kChunkRows - 1) / kChunkRows;
  parallel_for(chunks, [&](std::size_t c) {
    Engine rng = make_stream(seed, c);
    const std::size_t end = std::min(count, (c + 1) * kChunkRows);
    for (std::size_t i = c * kChunkRows; i < end; ++i) fn(rng, i);
  });
}

/// Uniform directions on S^{n-1}, one per column.
inline Matrix sample_directions(Eigen::Index n, std::size_t count, std::uint64_t seed) {
  Matrix out(n, static_cast<Eigen::Index>(count));
  for_each_chunked(count, seed, [&](Engine& rng, std::size_t i) {
    out.col(static_cast<Eigen::Index>(i)) = sphere_point(rng, n);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Log-space arithmetic

/// Neumaier-compensated accumulator.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// log(sum exp(v_i)) with compensated summation of the shifted terms.
inline double log_sum_exp(const std::vector<double>& v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  KahanSum s;
  for (double x : v) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

/// Mean and standard error of a sample, accumulated in index order.
inline Estimate mean_estimate(const std::vector<double>& v) {
  Estimate e;
  e.samples = v.size();
  if (v.empty()) return e;
  KahanSum s;
  for (double x : v) s.add(x);
  const double mean = s.value() / static_cast<double>(v.size());
  KahanSum ss;
  for (double x : v) ss.add((x - mean) * (x - mean));
  e.value = mean;
  if (v.size() > 1) e.std_error = std::sqrt(ss.value() / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return e;
}

/// log |B_2^n| = (n/2) log pi - lgamma(n/2 + 1).
inline double log_unit_ball_volume(int n) {
  return 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0);
}

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// |x|_q for q in [1, inf].
inline double lq_norm(const Vector& x, double q) {
  if (std::isinf(q)) return x.cwiseAbs().maxCoeff();
  if (q == 1.0) return x.cwiseAbs().sum();
  if (q == 2.0) return x.norm();
  const double m = x.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]) / m, q);
  return m * std::pow(s, 1.0 / q);
}

/// Hölder conjugate exponent (1 <-> inf).
inline double conjugate_exponent(double q) {
  if (q == 1.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(q)) return 1.0;
  return q / (q - 1.0);
}

inline void require_dimension(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got)
    throw UsageError(std::string(what) + ": dimension mismatch (expected " + std::to_string(expected) +
                     ", got " + std::to_string(got) + ")");
}

}  // namespace sudakov
