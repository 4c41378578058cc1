#pragma once

#include "field_energy.hpp"

namespace stripwave {

// Ball constraints defining the discrete minimization class: cells with
// s >= N L must stay within r0/2 of a_plus, cells with s <= -N L within
// r0/2 of a_minus. The constant maps are thereby excluded.
struct ConstraintSpec {
  int N = 1;
  double L = 1.0;
  double r0 = 0.4;
  std::vector<double> a_minus, a_plus;
  double radius() const { return 0.5 * r0; }
};

inline ConstraintSpec make_constraint(const Potential& P, int N, double L) {
  if (N < 1) throw ConfigError("constraint: N must be >= 1");
  ConstraintSpec C;
  C.N = N;
  C.L = L;
  C.r0 = P.r0;
  C.a_minus = P.a_minus;
  C.a_plus = P.a_plus;
  return C;
}

// Slab diagnostics need four whole periods beyond the constrained region.
inline void validate_slab_headroom(const ConstraintSpec& C, const DiscreteDomain& D) {
  if (C.N * C.L + 4.0 * C.L > D.T + 1e-9)
    throw ConfigError("constraint: NL+4L <= T is required, got NL+4L = " +
                      std::to_string(C.N * C.L + 4.0 * C.L) + ", T = " + std::to_string(D.T));
}

inline void project_constraints_inplace(Field& u, const ConstraintSpec& C) {
  const DiscreteDomain& D = *u.dom;
  const double rad = C.radius();
  for (std::size_t c = 0; c < D.n_cells(); ++c) {
    const double s = D.s_center(D.cells[c].first);
    const std::vector<double>* a = nullptr;
    if (s >= C.N * C.L)
      a = &C.a_plus;
    else if (s <= -C.N * C.L)
      a = &C.a_minus;
    if (!a) continue;
    auto uc = u.cell(static_cast<std::int32_t>(c));
    if (dist(uc, *a) > rad) scale_about(uc, *a, rad, rad);
  }
}

inline Field project_constraints(const Field& u, const ConstraintSpec& C) {
  Field v = u;
  project_constraints_inplace(v, C);
  return v;
}

// The affine upper-bound competitor: a_minus for s <= -L, a_plus for s >= L,
// linear in between, independent of y.
inline Field build_affine_initial(const DiscreteDomain& D, const Potential& P) {
  Field u(D, P.m);
  const double L = D.strip.L;
  for (std::size_t c = 0; c < D.n_cells(); ++c) {
    const double s = D.s_center(D.cells[c].first);
    auto uc = u.cell(static_cast<std::int32_t>(c));
    if (s <= -L) {
      for (int k = 0; k < P.m; ++k) uc[k] = P.a_minus[k];
    } else if (s >= L) {
      for (int k = 0; k < P.m; ++k) uc[k] = P.a_plus[k];
    } else {
      const double wp = 0.5 * (1.0 + s / L), wm = 0.5 * (1.0 - s / L);
      for (int k = 0; k < P.m; ++k) uc[k] = wm * P.a_minus[k] + wp * P.a_plus[k];
    }
  }
  return u;
}

struct MinimizeOpts {
  double tol = 1e-6;        // on the projected residual, sup norm
  int max_iter = 20000;
  double alpha0 = 0.0;      // 0: h^2/8
  int max_backtracks = 40;
  int threads = 1;
  bool record_trace = true;
};

struct MinimizeReport {
  std::vector<double> trace;            // strictly decreasing accepted energies
  EnergyBreakdown energy;
  double residual_inf = 0.0;            // plain PDE residual over free cells
  double projected_residual_inf = 0.0;  // optimality measure with active balls
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  bool hit_cap = false;
  int backtracks = 0;
  double wall_seconds = 0.0;
  // constraint activity at termination (exact, distance >= radius - tiny)
  int active_plus = 0, active_minus = 0;
  double margin_plus = std::numeric_limits<double>::infinity();
  double margin_minus = std::numeric_limits<double>::infinity();
};

namespace detail {

struct EngineSetup {
  const ConstraintSpec* C = nullptr;
  const std::vector<std::uint8_t>* free_mask = nullptr;  // null: all cells free
  double sup_bound = 0.0;                                // <= 0: no truncation
};

inline void zero_fixed(Field& r, const std::vector<std::uint8_t>& free_mask) {
  const int m = r.m;
  for (std::size_t c = 0; c < r.n_cells(); ++c)
    if (!free_mask[c])
      for (int k = 0; k < m; ++k) r.data[c * m + k] = 0.0;
}

// Sup norm of the residual with ascent components removed on active balls
// (the feasible-direction optimality measure of the projected method).
inline double projected_residual_inf(const Field& u, const Field& r, const EngineSetup& setup) {
  const DiscreteDomain& D = *u.dom;
  const int m = u.m;
  double out = 0.0;
  std::vector<double> re(m);
  const std::vector<double> zero(m, 0.0);
  for (std::size_t c = 0; c < u.n_cells(); ++c) {
    if (setup.free_mask && !(*setup.free_mask)[c]) continue;
    const auto uc = u.cell(static_cast<std::int32_t>(c));
    const auto rc = r.cell(static_cast<std::int32_t>(c));
    for (int k = 0; k < m; ++k) re[k] = rc[k];
    auto remove_outward = [&](CSpan a, double rad) {
      const double d = dist(uc, a);
      if (d < rad * (1.0 - 1e-12) || d == 0.0) return;
      double comp = 0.0;
      for (int k = 0; k < m; ++k) comp += re[k] * (uc[k] - a[k]) / d;
      if (comp <= 0.0) return;
      for (int k = 0; k < m; ++k) re[k] -= comp * (uc[k] - a[k]) / d;
    };
    if (setup.C) {
      const double s = D.s_center(D.cells[c].first);
      if (s >= setup.C->N * setup.C->L)
        remove_outward(setup.C->a_plus, setup.C->radius());
      else if (s <= -setup.C->N * setup.C->L)
        remove_outward(setup.C->a_minus, setup.C->radius());
    }
    if (setup.sup_bound > 0.0) remove_outward(zero, setup.sup_bound);
    for (int k = 0; k < m; ++k) out = std::max(out, std::abs(re[k]));
  }
  return out;
}

inline double free_residual_inf(const Field& r, const EngineSetup& setup) {
  if (!setup.free_mask) return inf_norm(r);
  double out = 0.0;
  for (std::size_t c = 0; c < r.n_cells(); ++c)
    if ((*setup.free_mask)[c]) out = std::max(out, inf_norm(r.cell(static_cast<std::int32_t>(c))));
  return out;
}

// Projected gradient with Barzilai-Borwein steps and a monotone safeguard:
// the trial step is halved until the energy strictly decreases, and every
// iterate is truncated and projected back onto the constraint balls.
inline std::pair<Field, MinimizeReport> minimize_engine(Field u, const Potential& P,
                                                        const EngineSetup& setup,
                                                        const MinimizeOpts& opts) {
  WallTimer timer;
  const DiscreteDomain& D = *u.dom;
  const double h = D.h;
  MinimizeReport rep;

  auto project = [&](Field& v) {
    if (setup.sup_bound > 0.0) {
      const std::vector<double> zero(v.m, 0.0);
      for (std::size_t c = 0; c < v.n_cells(); ++c) {
        if (setup.free_mask && !(*setup.free_mask)[c]) continue;
        auto vc = v.cell(static_cast<std::int32_t>(c));
        if (norm2(vc) > setup.sup_bound) scale_about(vc, zero, setup.sup_bound, setup.sup_bound);
      }
    }
    if (setup.C) project_constraints_inplace(v, *setup.C);
  };

  project(u);
  long double E = energy(u, P, {}, opts.threads).total_ld;
  if (opts.record_trace) rep.trace.push_back(static_cast<double>(E));
  Field r = residual(u, P, opts.threads);
  if (setup.free_mask) zero_fixed(r, *setup.free_mask);
  double pr = projected_residual_inf(u, r, setup);

  double alpha = opts.alpha0 > 0.0 ? opts.alpha0 : h * h / 8.0;
  Field v(D, u.m);
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    if (pr <= opts.tol) {
      rep.converged = true;
      break;
    }
    double a = alpha;
    bool accepted = false;
    long double Ev = 0.0L;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      v.data = u.data;
      for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] += a * r.data[i];
      project(v);
      Ev = energy(v, P, {}, opts.threads).total_ld;
      if (Ev < E) {
        accepted = true;
        break;
      }
      a *= 0.5;
      ++rep.backtracks;
    }
    if (!accepted) {
      rep.stalled = true;
      break;
    }
    Field r_new = residual(v, P, opts.threads);
    if (setup.free_mask) zero_fixed(r_new, *setup.free_mask);
    double ss = 0.0, sy = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < u.data.size(); ++i) {
      const double s = v.data[i] - u.data[i];
      const double y = -(r_new.data[i] - r.data[i]);
      ss += s * s;
      sy += s * y;
      yy += y * y;
    }
    if (sy > 1e-300 && yy > 0.0) {
      const double bb = (iter % 2 == 0) ? sy / yy : ss / sy;
      alpha = std::clamp(bb, 1e-12, 1e3);
    } else {
      alpha = std::min(2.0 * a, 1e3);
    }
    u.data.swap(v.data);
    E = Ev;
    r = std::move(r_new);
    pr = projected_residual_inf(u, r, setup);
    if (opts.record_trace) rep.trace.push_back(static_cast<double>(E));
  }
  rep.iterations = iter;
  rep.hit_cap = iter >= opts.max_iter && !rep.converged;
  rep.projected_residual_inf = pr;
  rep.residual_inf = free_residual_inf(r, setup);
  rep.energy = energy(u, P, {}, opts.threads);

  if (setup.C) {
    const double rad = setup.C->radius();
    for (std::size_t c = 0; c < u.n_cells(); ++c) {
      const double s = D.s_center(D.cells[c].first);
      const std::vector<double>* a = nullptr;
      if (s >= setup.C->N * setup.C->L)
        a = &setup.C->a_plus;
      else if (s <= -setup.C->N * setup.C->L)
        a = &setup.C->a_minus;
      if (!a) continue;
      const double margin = rad - dist(u.cell(static_cast<std::int32_t>(c)), *a);
      if (a == &setup.C->a_plus) {
        rep.margin_plus = std::min(rep.margin_plus, margin);
        if (margin <= 1e-12 * rad) ++rep.active_plus;
      } else {
        rep.margin_minus = std::min(rep.margin_minus, margin);
        if (margin <= 1e-12 * rad) ++rep.active_minus;
      }
    }
  }
  rep.wall_seconds = timer.seconds();
  return {std::move(u), std::move(rep)};
}

}  // namespace detail

// Constrained minimization over the ball class. Iterates are truncated at
// |u| <= P.M and projected after every step; the energy trace is strictly
// decreasing by construction of the safeguard.
inline std::pair<Field, MinimizeReport> minimize(const Field& u0, const Potential& P,
                                                 const ConstraintSpec* C,
                                                 const MinimizeOpts& opts = {}) {
  detail::EngineSetup setup;
  setup.C = C;
  setup.sup_bound = P.M;
  return detail::minimize_engine(u0, P, setup, opts);
}

// Minimize the energy over the cells of A holding everything else fixed;
// the fixed values act as Dirichlet data through the faces crossing the
// boundary of A. Unconstrained inside A.
inline std::pair<Field, MinimizeReport> dirichlet_minimize_subdomain(
    const Field& u, const std::vector<std::int32_t>& A, const Potential& P,
    const MinimizeOpts& opts = {}) {
  const DiscreteDomain& D = *u.dom;
  if (!is_edge_connected(D, A))
    throw InvariantError("dirichlet_minimize_subdomain: A is not edge-connected");
  std::vector<std::uint8_t> free_mask(D.n_cells(), 0);
  for (auto c : A) free_mask[c] = 1;
  detail::EngineSetup setup;
  setup.free_mask = &free_mask;
  return detail::minimize_engine(u, P, setup, opts);
}

}  // namespace stripwave
