#pragma once

#include "field_energy.hpp"
#include "minimize.hpp"
#include "radial_bounds.hpp"

namespace stripwave {

// One period slab of width 2L centered at a multiple of L: the scalar
// comparison problem lives on its active cells, with Dirichlet value t on
// the two end sections (imposed through ghost faces) and zero flux on the
// lateral boundary (inactive neighbors).
struct Slab {
  const DiscreteDomain* dom = nullptr;
  double center = 0.0;
  int col_lo = 0, col_hi = 0;                    // [col_lo, col_hi)
  std::vector<std::int32_t> cells;               // global ids, column-major
  std::vector<std::int32_t> local_id;            // global -> local, -1 outside
  std::vector<std::array<std::int32_t, 4>> nbr;  // local adjacency
  std::vector<std::int8_t> end;                  // 1: first column, 2: last
  std::vector<std::int32_t> center_cells;        // the two columns astride the midline

  std::size_t size() const { return cells.size(); }
  double h() const { return dom->h; }
};

inline Slab make_slab(const DiscreteDomain& D, double center_s) {
  const double L = D.strip.L;
  Slab S;
  S.dom = &D;
  S.center = center_s;
  const double lo = center_s - L;
  S.col_lo = static_cast<int>(std::llround((lo + D.T) / D.h));
  S.col_hi = S.col_lo + 2 * D.period_cells;
  if (std::abs(S.col_lo * D.h - (lo + D.T)) > 1e-9 * L)
    throw InvariantError("make_slab: slab center must sit on the period grid");
  if (S.col_lo < 0 || S.col_hi > D.n_cols)
    throw InvariantError("make_slab: slab [" + std::to_string(lo) + ", " +
                         std::to_string(center_s + L) + "] leaves the computational domain");
  S.local_id.assign(D.n_cells(), -1);
  for (int i = S.col_lo; i < S.col_hi; ++i)
    for (std::int32_t c = D.col_start[i]; c < D.col_start[i + 1]; ++c) {
      S.local_id[c] = static_cast<std::int32_t>(S.cells.size());
      S.cells.push_back(c);
    }
  S.nbr.resize(S.size());
  S.end.assign(S.size(), 0);
  for (std::size_t lc = 0; lc < S.size(); ++lc) {
    const std::int32_t gc = S.cells[lc];
    for (int d = 0; d < 4; ++d) {
      const std::int32_t gn = D.nbr[gc][d];
      S.nbr[lc][d] = gn >= 0 ? S.local_id[gn] : -1;
    }
    const int col = D.cells[gc].first;
    if (col == S.col_lo) S.end[lc] = 1;
    if (col == S.col_hi - 1) S.end[lc] = 2;
  }
  const int mid_l = S.col_lo + D.period_cells - 1;
  for (int i = mid_l; i <= mid_l + 1; ++i)
    for (std::int32_t c = D.col_start[i]; c < D.col_start[i + 1]; ++c)
      S.center_cells.push_back(S.local_id[c]);
  return S;
}

struct PhiProblem {
  Slab slab;
  const RadialBoundFn* f = nullptr;
  double t = 0.0;  // Dirichlet value on the end sections
};

struct PhiOpts {
  double tol = 0.0;        // 0: scale-aware default
  double cg_tol = 1e-10;   // relative
  int cg_max_iter = 0;     // 0: 20 * n
  int max_newton = 50;
  int max_picard = 2000;
};

struct PhiSolution {
  std::vector<double> phi;
  double residual_inf = 0.0;
  int newton_iters = 0;
  bool used_picard = false;
  bool converged = false;
  double min_phi = 0.0, max_phi = 0.0;
  bool in_bounds = false;  // 0 <= phi <= t up to roundoff
};

namespace detail {

// y = (A + diag) x with A the negative finite-volume Laplacian on the slab,
// Dirichlet ends folded in as a 2/h^2 diagonal contribution. SPD.
inline void slab_apply(const Slab& S, const std::vector<double>& diag,
                       const std::vector<double>& x, std::vector<double>& y) {
  const double inv_h2 = 1.0 / (S.h() * S.h());
  for (std::size_t c = 0; c < S.size(); ++c) {
    double deg = S.end[c] ? 2.0 : 0.0;
    double off = 0.0;
    for (int d = 0; d < 4; ++d) {
      const std::int32_t n = S.nbr[c][d];
      if (n < 0) continue;
      deg += 1.0;
      off += x[n];
    }
    y[c] = (deg * x[c] - off) * inv_h2 + diag[c] * x[c];
  }
}

// Matrix-free conjugate gradients on the SPD slab operator.
inline bool slab_cg(const Slab& S, const std::vector<double>& diag, const std::vector<double>& b,
                    std::vector<double>& x, double rel_tol, int max_iter) {
  const std::size_t n = S.size();
  if (max_iter <= 0) max_iter = static_cast<int>(20 * n);
  std::vector<double> r(n), p(n), Ap(n);
  slab_apply(S, diag, x, Ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
  p = r;
  double rr = dot(r, r);
  const double b2 = std::sqrt(dot(b, b));
  const double target = rel_tol * std::max(b2, 1e-300);
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= target) return true;
    slab_apply(S, diag, p, Ap);
    const double pAp = dot(p, Ap);
    if (pAp <= 0.0) return false;
    const double alpha = rr / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    const double rr_new = dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  return std::sqrt(rr) <= target;
}

}  // namespace detail

// Damped Newton for the finite-volume system Delta_h phi = f(phi) with
// Dirichlet value t on the end columns and zero lateral flux, falling back
// to monotone Picard iteration (linear solve with frozen right-hand side,
// globally convergent from phi = t downward for nondecreasing f).
inline PhiSolution solve_phi(const PhiProblem& prob, PhiOpts opts = {}) {
  const Slab& S = prob.slab;
  const RadialBoundFn& f = *prob.f;
  const double t = prob.t;
  const std::size_t n = S.size();
  const double inv_h2 = 1.0 / (S.h() * S.h());
  if (opts.tol <= 0.0) opts.tol = 1e-11 * std::max(1.0, 2.0 * t * inv_h2);

  PhiSolution sol;
  sol.phi.assign(n, t);
  std::vector<double> F(n), diag(n), delta(n), trial(n);

  auto residual_at = [&](const std::vector<double>& phi, std::vector<double>& out) {
    for (std::size_t c = 0; c < n; ++c) {
      double acc = 0.0;
      for (int d = 0; d < 4; ++d) {
        const std::int32_t nb = S.nbr[c][d];
        if (nb >= 0) acc += (phi[nb] - phi[c]) * inv_h2;
      }
      if (S.end[c]) acc += 2.0 * (t - phi[c]) * inv_h2;
      out[c] = acc - f.f(phi[c]);
    }
  };

  residual_at(sol.phi, F);
  double Fn = inf_norm(F);
  int newton = 0;
  for (; newton < opts.max_newton && Fn > opts.tol; ++newton) {
    for (std::size_t c = 0; c < n; ++c) diag[c] = std::max(0.0, f.f_prime(sol.phi[c]));
    std::fill(delta.begin(), delta.end(), 0.0);
    if (!detail::slab_cg(S, diag, F, delta, opts.cg_tol, opts.cg_max_iter)) break;
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 30; ++bt) {
      for (std::size_t c = 0; c < n; ++c) trial[c] = sol.phi[c] + step * delta[c];
      std::vector<double> Ft(n);
      residual_at(trial, Ft);
      const double Ftn = inf_norm(Ft);
      if (Ftn < Fn) {
        sol.phi.swap(trial);
        F.swap(Ft);
        Fn = Ftn;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  sol.newton_iters = newton;

  if (Fn > opts.tol) {
    // shifted monotone fixed-point iteration from the supersolution phi = t:
    // (-Lap + K) phi_{k+1} = K phi_k - f(phi_k) + boundary flux, with the
    // shift K dominating f' so the right-hand side is nondecreasing in phi
    // and the map contracts with rate K / (lambda_min + K) < 1
    sol.used_picard = true;
    sol.phi.assign(n, t);
    const double K = f.max_slope(t);
    const std::vector<double> shift(n, K);
    residual_at(sol.phi, F);
    Fn = inf_norm(F);
    for (int it = 0; it < opts.max_picard && Fn > opts.tol; ++it) {
      // correction form of the same map, so the inner solve targets the
      // residual rather than the full right-hand side
      std::fill(delta.begin(), delta.end(), 0.0);
      if (!detail::slab_cg(S, shift, F, delta, opts.cg_tol, opts.cg_max_iter))
        throw SolverError("solve_phi: CG failed inside the fixed-point iteration");
      for (std::size_t c = 0; c < n; ++c) sol.phi[c] += delta[c];
      residual_at(sol.phi, F);
      Fn = inf_norm(F);
    }
    if (Fn > opts.tol)
      throw SolverError("solve_phi: fixed-point fallback stalled, residual " +
                        std::to_string(Fn));
  }

  sol.residual_inf = Fn;
  sol.converged = Fn <= opts.tol;
  sol.min_phi = *std::min_element(sol.phi.begin(), sol.phi.end());
  sol.max_phi = *std::max_element(sol.phi.begin(), sol.phi.end());
  const double slack = 1e-9 * std::max(1.0, t);
  sol.in_bounds = sol.min_phi >= -slack && sol.max_phi <= t + slack;
  return sol;
}

// Maximum of phi over the central section (the two cell columns astride the
// slab midline; no cell center lies on it in a cell-centered grid).
inline double t_hat(const PhiProblem& prob, const PhiSolution& sol) {
  double out = -std::numeric_limits<double>::infinity();
  for (auto lc : prob.slab.center_cells) out = std::max(out, sol.phi[lc]);
  return out;
}

struct TjSequence {
  std::vector<double> values;  // t_0, t_1, ..., t_jmax
  std::optional<double> theta;  // t_1/t_0 when f is linear
  bool stalled = false;         // some t_{j+1} >= t_j
  bool degenerate = false;      // no contraction at all (f == 0 case)
};

// Iterate t_{j+1} = max of phi(., t_j) over the central section. For linear
// f the problem scales, so t_j = theta^j t_0 with theta from the first solve.
inline TjSequence iterate_tj(const Slab& slab, const RadialBoundFn& f, double t0, int j_max,
                             PhiOpts opts = {}) {
  TjSequence seq;
  seq.values.push_back(t0);
  double t = t0;
  for (int j = 0; j < j_max; ++j) {
    if (t <= 0.0) {
      seq.values.push_back(0.0);
      continue;
    }
    PhiProblem prob{slab, &f, t};
    const PhiSolution sol = solve_phi(prob, opts);
    const double th = t_hat(prob, sol);
    if (th >= t) {
      seq.stalled = true;
      seq.degenerate = th >= t * (1.0 - 1e-12);
      seq.values.push_back(th);
      break;
    }
    seq.values.push_back(th);
    t = th;
  }
  if (f.linear_c2 && seq.values.size() >= 2 && t0 > 0.0)
    seq.theta = seq.values[1] / seq.values[0];
  return seq;
}

struct SlabComparison {
  int k = 0;
  int side = +1;
  double t = 0.0;
  double t_hat = 0.0;
  double max_violation = -std::numeric_limits<double>::infinity();  // max of rho^2 - phi
  bool pass = false;
};

struct ComparisonReport {
  std::vector<SlabComparison> slabs;
  double eps_disc = 0.0;
  bool pass = false;
};

// Slab-by-slab verification of the comparison bound rho^2 <= phi on the
// tail slabs at +-(N+k)L, k = 1..k_max, with t taken from the slab's own
// end sections so the comparison hypothesis holds by construction.
inline ComparisonReport verify_comparison(const Field& u, const Potential& P,
                                          const RadialBoundFn& f, const ConstraintSpec& C,
                                          int k_max, double eps_disc = 0.0, PhiOpts opts = {}) {
  const DiscreteDomain& D = *u.dom;
  ComparisonReport rep;
  rep.eps_disc = eps_disc > 0.0 ? eps_disc : 4.0 * D.h * D.h;
  rep.pass = true;
  for (int side : {+1, -1}) {
    const CSpan a(side > 0 ? C.a_plus : C.a_minus);
    for (int k = 1; k <= k_max; ++k) {
      SlabComparison sc;
      sc.k = k;
      sc.side = side;
      const double center = side * (C.N + k) * C.L;
      const Slab S = make_slab(D, center);
      std::vector<double> rho2(S.size());
      for (std::size_t lc = 0; lc < S.size(); ++lc)
        rho2[lc] = std::pow(dist(u.cell(S.cells[lc]), a), 2);
      double t = 0.0;
      for (std::size_t lc = 0; lc < S.size(); ++lc)
        if (S.end[lc]) t = std::max(t, rho2[lc]);
      if (t > P.r0 * P.r0)
        throw InvariantError("verify_comparison: end-section rho^2 exceeds r0^2; "
                             "field is not in the constrained tail regime");
      sc.t = t;
      if (t <= 0.0) {
        sc.max_violation = 0.0;
        sc.pass = true;
        rep.slabs.push_back(sc);
        continue;
      }
      PhiProblem prob{S, &f, t};
      const PhiSolution sol = solve_phi(prob, opts);
      sc.t_hat = t_hat(prob, sol);
      for (std::size_t lc = 0; lc < S.size(); ++lc)
        sc.max_violation = std::max(sc.max_violation, rho2[lc] - sol.phi[lc]);
      sc.pass = sc.max_violation <= rep.eps_disc;
      if (!sc.pass) rep.pass = false;
      rep.slabs.push_back(sc);
    }
  }
  return rep;
}

struct DecayFit {
  double k0 = 0.0;
  double K0 = 0.0;
  double fit_residual = 0.0;  // rms of the linear fit in log space
  double s_lo = 0.0, s_hi = 0.0;
  int n_cols = 0;
  double k0_linearization = 0.0;  // sqrt(min eigenvalue of D^2 W at the minimum)
  bool ok = false;
  std::string message;
};

// Least-squares fit of log max_y |u(s,.) - a| against |s| over the tail
// window where the column amplitude sits between 10 h^2 and r0/2.
inline DecayFit decay_fit(const Field& u, const Potential& P, int side) {
  const DiscreteDomain& D = *u.dom;
  const CSpan a(side > 0 ? P.a_plus : P.a_minus);
  DecayFit fit;
  fit.k0_linearization = min_eig_hess(P, a).k0_candidate;
  const double d_lo = 10.0 * D.h * D.h;
  const double d_hi = 0.5 * P.r0;
  std::vector<double> xs, ys;
  for (int i = 0; i < D.n_cols; ++i) {
    const double s = D.s_center(i);
    if (side > 0 ? s <= 0.0 : s >= 0.0) continue;
    double d = 0.0;
    for (std::int32_t c = D.col_start[i]; c < D.col_start[i + 1]; ++c)
      d = std::max(d, dist(u.cell(c), a));
    if (d < d_lo || d > d_hi) continue;
    xs.push_back(std::abs(s));
    ys.push_back(std::log(d));
  }
  fit.n_cols = static_cast<int>(xs.size());
  if (fit.n_cols < 5) {
    fit.message = "tail window has fewer than 5 columns; field not decayed enough, increase T";
    return fit;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double nn = static_cast<double>(xs.size());
  const double det = nn * sxx - sx * sx;
  const double slope = (nn * sxy - sx * sy) / det;
  const double inter = (sy * sxx - sx * sxy) / det;
  fit.k0 = -slope;
  fit.K0 = std::exp(inter);
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (inter + slope * xs[i]);
    rss += e * e;
  }
  fit.fit_residual = std::sqrt(rss / nn);
  fit.s_lo = *std::min_element(xs.begin(), xs.end());
  fit.s_hi = *std::max_element(xs.begin(), xs.end());
  fit.ok = fit.k0 > 0.0;
  if (!fit.ok) fit.message = "fitted rate is not positive";
  return fit;
}

}  // namespace stripwave
