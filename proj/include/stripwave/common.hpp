#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace stripwave {

using Span  = std::span<double>;
using CSpan = std::span<const double>;
using Rng   = std::mt19937_64;

// Error taxonomy mirrors the CLI exit codes: config 2, solver 3, invariant 4.
struct ConfigError : std::runtime_error { using std::runtime_error::runtime_error; };
struct SolverError : std::runtime_error { using std::runtime_error::runtime_error; };
struct InvariantError : std::runtime_error { using std::runtime_error::runtime_error; };

inline double dot(CSpan a, CSpan b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(CSpan a) { return std::sqrt(dot(a, a)); }

inline double dist(CSpan a, CSpan b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double inf_norm(CSpan a) {
  double s = 0.0;
  for (double x : a) s = std::max(s, std::abs(x));
  return s;
}

// Compensated accumulation in extended precision; the caller fixes the
// summation order. The extra mantissa bits let energy comparisons resolve
// decreases well below one double ulp of the total, which is what keeps the
// monotone line search from stalling near convergence.
struct KahanSum {
  long double s = 0.0L, c = 0.0L;
  void add(double x) { add_ld(x); }
  void add_ld(long double x) {
    const long double y = x - c;
    const long double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  long double value_ld() const { return s; }
  double value() const { return static_cast<double>(s); }
};

struct WallTimer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// Static block partition over [0, n); fn(begin, end) per worker.
// threads <= 1 runs inline. Work assignment depends only on n and threads,
// never on scheduling, so any reduction over fixed blocks stays deterministic.
template <class F>
void parallel_for(std::int64_t n, int threads, F&& fn) {
  if (n <= 0) return;
  if (threads <= 1 || n < 256) {
    fn(std::int64_t{0}, n);
    return;
  }
  const int nw = static_cast<int>(std::min<std::int64_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(nw);
  const std::int64_t chunk = (n + nw - 1) / nw;
  for (int w = 0; w < nw; ++w) {
    const std::int64_t b = w * chunk;
    const std::int64_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

// Rescale u about a so that |u - a| becomes `target`, guaranteeing the
// result stays within radius `cap` (cap >= target) despite rounding. The
// guard shrinks by a few ulps extra so projections are exactly idempotent.
inline void scale_about(Span u, CSpan a, double target, double cap) {
  const double rho = dist(u, a);
  if (target <= 0.0 || rho == 0.0) {
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = a[i];
    return;
  }
  double sc = target / rho;
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = a[i] + sc * (u[i] - a[i]);
  constexpr double kNudge = 1.0 - 8.0 * std::numeric_limits<double>::epsilon();
  for (int guard = 0; guard < 16; ++guard) {
    const double d = dist(u, a);
    if (d <= cap) return;
    sc = cap / d * kNudge;
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = a[i] + sc * (u[i] - a[i]);
  }
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Uniform direction on the unit sphere in R^m.
inline std::vector<double> random_unit_vector(Rng& rng, int m) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(m);
  double n = 0.0;
  do {
    for (int i = 0; i < m; ++i) v[i] = gauss(rng);
    n = norm2(v);
  } while (n < 1e-12);
  for (int i = 0; i < m; ++i) v[i] /= n;
  return v;
}

}  // namespace stripwave
