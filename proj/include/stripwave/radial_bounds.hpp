#pragma once

#include <optional>

#include "potential.hpp"

namespace stripwave {

// Tabulated auxiliary functions of the tail analysis:
//   g(r) = min over r' in [r, r0], nu on the sphere, a in {a-, a+}
//          of <W_u(a + r' nu), nu>,
//   f monotone with f(0) = 0 and f(r^2) <= 2 r g(r).
// g is tabulated on a uniform r-grid, f on the induced t = r^2 grid.
struct RadialBoundFn {
  double r0 = 0.0;
  std::vector<double> r_nodes;  // uniform on [0, r0]
  std::vector<double> g_vals;
  std::vector<double> t_nodes;  // r_nodes squared
  std::vector<double> f_vals;   // empty until build_f
  std::optional<double> linear_c2;
  bool strictified = false;
  double strict_slack = 0.0;

  bool has_g() const { return !g_vals.empty(); }
  bool has_f() const { return linear_c2.has_value() || !f_vals.empty(); }

  double g(double r) const {
    if (r <= 0.0) return g_vals.front();
    if (r >= r0) return g_vals.back();
    const double x = r / r0 * (r_nodes.size() - 1);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(x), r_nodes.size() - 2);
    const double w = (r - r_nodes[k]) / (r_nodes[k + 1] - r_nodes[k]);
    return (1.0 - w) * g_vals[k] + w * g_vals[k + 1];
  }

  // Piecewise-linear in t, extended by 0 below 0 and by the linear/constant
  // continuation above r0^2 (nondecreasing either way).
  double f(double t) const {
    if (t <= 0.0) return 0.0;
    if (linear_c2) return *linear_c2 * t;
    if (t >= t_nodes.back()) return f_vals.back();
    std::size_t k = segment_of(t);
    const double w = (t - t_nodes[k]) / (t_nodes[k + 1] - t_nodes[k]);
    return (1.0 - w) * f_vals[k] + w * f_vals[k + 1];
  }

  double f_prime(double t) const {
    if (linear_c2) return t >= 0.0 ? *linear_c2 : 0.0;
    if (t <= 0.0 || t >= t_nodes.back()) return 0.0;
    std::size_t k = segment_of(t);
    return (f_vals[k + 1] - f_vals[k]) / (t_nodes[k + 1] - t_nodes[k]);
  }

  // largest slope of f on [0, t_hi]; the shift constant of the monotone
  // fixed-point iteration must dominate it
  double max_slope(double t_hi) const {
    if (linear_c2) return *linear_c2;
    double out = 0.0;
    for (std::size_t k = 0; k + 1 < t_nodes.size() && t_nodes[k] < t_hi; ++k)
      out = std::max(out, (f_vals[k + 1] - f_vals[k]) / (t_nodes[k + 1] - t_nodes[k]));
    return out;
  }

 private:
  std::size_t segment_of(double t) const {
    // t-grid is r^2 of a uniform grid; invert analytically
    const double r = std::sqrt(t);
    const double x = r / r0 * (r_nodes.size() - 1);
    return std::min<std::size_t>(static_cast<std::size_t>(x), r_nodes.size() - 2);
  }
};

// Dense sampling of the directional derivative followed by a suffix minimum
// from the right, so g(r) really is the minimum over [r, r0].
inline RadialBoundFn compute_g(const Potential& P, int n_r = 512, int n_sphere = 0) {
  RadialBoundFn rb;
  rb.r0 = P.r0;
  const int m = P.m;
  const auto dirs = sphere_samples(m, n_sphere);
  rb.r_nodes.resize(n_r + 1);
  rb.g_vals.resize(n_r + 1);
  rb.t_nodes.resize(n_r + 1);
  std::vector<double> u(m), gr(m);
  for (int k = 0; k <= n_r; ++k) {
    const double r = P.r0 * k / n_r;
    rb.r_nodes[k] = r;
    rb.t_nodes[k] = r * r;
    double d = std::numeric_limits<double>::infinity();
    for (const auto* a : {&P.a_minus, &P.a_plus}) {
      for (const auto& nu : dirs) {
        for (int i = 0; i < m; ++i) u[i] = (*a)[i] + r * nu[i];
        P.grad(u, gr);
        d = std::min(d, dot(gr, nu));
      }
    }
    rb.g_vals[k] = d;
  }
  for (int k = n_r - 1; k >= 0; --k)
    rb.g_vals[k] = std::min(rb.g_vals[k], rb.g_vals[k + 1]);
  for (int k = 1; k <= n_r; ++k)
    if (rb.g_vals[k] <= 0.0)
      throw InvariantError("compute_g: g(r) <= 0 at r = " + std::to_string(rb.r_nodes[k]) +
                           " (H2 violated at sample resolution)");
  return rb;
}

// Synthetic linear bound f(t) = c^2 t (and g(r) = c^2 r / 2 consistent with
// it), used by tests and the standalone comparison solver.
inline RadialBoundFn linear_bound(double c2, double r0, int n = 512) {
  if (c2 < 0.0) throw InvariantError("linear_bound: c2 must be >= 0");
  RadialBoundFn rb;
  rb.r0 = r0;
  rb.r_nodes.resize(n + 1);
  rb.g_vals.resize(n + 1);
  rb.t_nodes.resize(n + 1);
  rb.f_vals.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double r = r0 * k / n;
    rb.r_nodes[k] = r;
    rb.t_nodes[k] = r * r;
    rb.g_vals[k] = 0.5 * c2 * r;
    rb.f_vals[k] = c2 * r * r;
  }
  rb.linear_c2 = c2;
  return rb;
}

enum class FMode { envelope, linear };

// Envelope mode: monotone nondecreasing lower envelope of t -> 2 sqrt(t) g(sqrt(t)),
// strictified by a 1e-12 * t blend when ties occur. Linear mode: f(t) = c^2 t
// with c^2 = min 2 g(r)/r; refuses degenerate minima where that infimum
// collapses relative to its own scale.
inline void build_f(RadialBoundFn& rb, FMode mode) {
  if (!rb.has_g()) throw InvariantError("build_f: g is not tabulated");
  const std::size_t n = rb.r_nodes.size();
  if (mode == FMode::linear) {
    double c2 = std::numeric_limits<double>::infinity();
    double c2_max = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double q = 2.0 * rb.g_vals[k] / rb.r_nodes[k];
      c2 = std::min(c2, q);
      c2_max = std::max(c2_max, q);
    }
    if (!(c2 > 0.0) || c2 < 1e-4 * c2_max)
      throw InvariantError("build_f: inf 2g(r)/r degenerates (minimum is not nondegenerate); "
                           "use envelope mode");
    rb.linear_c2 = c2;
    rb.f_vals.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) rb.f_vals[k] = c2 * rb.t_nodes[k];
    return;
  }
  rb.linear_c2.reset();
  rb.f_vals.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    rb.f_vals[k] = 2.0 * rb.r_nodes[k] * rb.g_vals[k];
  for (std::size_t k = n - 1; k-- > 0;)
    rb.f_vals[k] = std::min(rb.f_vals[k], rb.f_vals[k + 1]);
  bool ties = false;
  for (std::size_t k = 1; k < n; ++k)
    if (rb.f_vals[k] <= rb.f_vals[k - 1]) { ties = true; break; }
  if (ties) {
    for (std::size_t k = 0; k < n; ++k) rb.f_vals[k] += 1e-12 * rb.t_nodes[k];
    rb.strictified = true;
    rb.strict_slack = 1e-12 * rb.t_nodes.back();
  }
}

}  // namespace stripwave
