#pragma once

#include "geometry.hpp"
#include "potential.hpp"

namespace stripwave {

// One m-vector per active cell; the domain is referenced, not owned.
struct Field {
  const DiscreteDomain* dom = nullptr;
  int m = 1;
  std::vector<double> data;

  Field() = default;
  Field(const DiscreteDomain& d, int m_, double fill = 0.0)
      : dom(&d), m(m_), data(d.n_cells() * m_, fill) {}

  Span cell(std::int32_t c) { return {data.data() + static_cast<std::size_t>(c) * m, static_cast<std::size_t>(m)}; }
  CSpan cell(std::int32_t c) const { return {data.data() + static_cast<std::size_t>(c) * m, static_cast<std::size_t>(m)}; }
  std::size_t n_cells() const { return dom ? dom->n_cells() : 0; }
};

inline Field constant_field(const DiscreteDomain& D, CSpan value) {
  Field u(D, static_cast<int>(value.size()));
  for (std::size_t c = 0; c < D.n_cells(); ++c)
    for (std::size_t k = 0; k < value.size(); ++k) u.data[c * value.size() + k] = value[k];
  return u;
}

inline double inf_norm(const Field& u) { return inf_norm(CSpan(u.data)); }

inline double inf_dist(const Field& u, const Field& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.data.size(); ++i) s = std::max(s, std::abs(u.data[i] - v.data[i]));
  return s;
}

// Half-open window [lo, hi) on cell-center s coordinates. Faces belong to the
// window of their owner column (the left/lower cell), so column-aligned
// windows partition the energy exactly.
struct SRange {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool contains(double s) const { return s >= lo && s < hi; }
};

struct EnergyBreakdown {
  double dirichlet = 0.0;
  double potential = 0.0;
  double total = 0.0;
  long double total_ld = 0.0L;  // extended-precision total for comparisons
};

// Finite-volume energy: sum over faces of 1/2 |u_A - u_B|^2 (n = 2, so the
// h^{n-2} factor is 1) plus sum over cells of W(u) h^2. Kahan-compensated
// per column, columns combined in index order; the grouping is column-aligned
// so period translation reproduces sums bitwise.
inline EnergyBreakdown energy(const Field& u, const Potential& P, SRange w = {}, int threads = 1) {
  const DiscreteDomain& D = *u.dom;
  const double h2 = D.h * D.h;
  const int m = u.m;
  std::vector<long double> dir_col(D.n_cols, 0.0L), pot_col(D.n_cols, 0.0L);
  parallel_for(D.n_cols, threads, [&](std::int64_t c0, std::int64_t c1) {
    for (int i = static_cast<int>(c0); i < c1; ++i) {
      if (!w.contains(D.s_center(i))) continue;
      KahanSum kd, kp;
      for (std::int32_t f = D.face_start[i]; f < D.face_start[i + 1]; ++f) {
        const auto& fc = D.faces[f];
        const double* a = u.data.data() + static_cast<std::size_t>(fc.a) * m;
        const double* b = u.data.data() + static_cast<std::size_t>(fc.b) * m;
        double q = 0.0;
        for (int k = 0; k < m; ++k) {
          const double d = a[k] - b[k];
          q += d * d;
        }
        kd.add(0.5 * q);
      }
      for (std::int32_t c = D.col_start[i]; c < D.col_start[i + 1]; ++c)
        kp.add(P.eval(u.cell(c)) * h2);
      dir_col[i] = kd.value_ld();
      pot_col[i] = kp.value_ld();
    }
  });
  KahanSum dir, pot;
  for (int i = 0; i < D.n_cols; ++i) {
    if (!w.contains(D.s_center(i))) continue;
    dir.add_ld(dir_col[i]);
    pot.add_ld(pot_col[i]);
  }
  EnergyBreakdown eb;
  eb.dirichlet = dir.value();
  eb.potential = pot.value();
  eb.total_ld = dir.value_ld() + pot.value_ld();
  eb.total = static_cast<double>(eb.total_ld);
  return eb;
}

// Residual of the discrete Euler-Lagrange system with Neumann boundary:
// per cell, sum over active neighbors of (u_nbr - u_cell)/h^2 minus W_u(u).
// Equals -(1/h^2) grad of the discrete energy, componentwise.
inline Field residual(const Field& u, const Potential& P, int threads = 1) {
  const DiscreteDomain& D = *u.dom;
  const double inv_h2 = 1.0 / (D.h * D.h);
  const int m = u.m;
  Field r(D, m);
  parallel_for(static_cast<std::int64_t>(D.n_cells()), threads,
               [&](std::int64_t c0, std::int64_t c1) {
                 for (std::int64_t c = c0; c < c1; ++c) {
                   const auto uc = u.cell(static_cast<std::int32_t>(c));
                   auto rc = r.cell(static_cast<std::int32_t>(c));
                   P.grad(uc, rc);
                   for (int k = 0; k < m; ++k) rc[k] = -rc[k];
                   for (int d = 0; d < 4; ++d) {
                     const std::int32_t n = D.nbr[c][d];
                     if (n < 0) continue;
                     const auto un = u.cell(n);
                     for (int k = 0; k < m; ++k) rc[k] += (un[k] - uc[k]) * inv_h2;
                   }
                 }
               });
  return r;
}

// Energy restricted to cells with center s in (s_bar - delta, s_bar + delta).
inline double slab_energy(const Field& u, const Potential& P, double s_bar, double delta,
                          int threads = 1) {
  return energy(u, P, {s_bar - delta, s_bar + delta}, threads).total;
}

// L-infinity truncation about the origin: u -> min(|u|, M) u/|u|. Cells with
// |u| <= M are left untouched (bitwise), so the map is exactly idempotent.
inline Field truncate_sup(const Field& u, double M) {
  if (M <= 0.0) throw InvariantError("truncate_sup: M must be positive");
  Field v = u;
  const std::vector<double> zero(v.m, 0.0);
  for (std::size_t c = 0; c < v.n_cells(); ++c) {
    auto vc = v.cell(static_cast<std::int32_t>(c));
    if (norm2(vc) > M) scale_about(vc, zero, M, M);
  }
  return v;
}

// Shift a field by one period of cell columns. direction +1 moves content
// toward larger s; columns shifted in from beyond the truncation are filled
// with the minimum on that side (a_minus on the left, a_plus on the right).
inline Field translate_field_by_period(const Field& u, const Potential& P, int direction) {
  const DiscreteDomain& D = *u.dom;
  if (direction != 1 && direction != -1)
    throw InvariantError("translate_field_by_period: direction must be +1 or -1");
  if (!D.periodic_mask)
    throw InvariantError("translate_field_by_period: mask is not periodic");
  Field v(D, u.m);
  const int Pc = D.period_cells;
  for (std::size_t c = 0; c < D.n_cells(); ++c) {
    const auto [i, j] = D.cells[c];
    const int src_col = i - direction * Pc;
    auto vc = v.cell(static_cast<std::int32_t>(c));
    if (src_col < 0) {
      for (int k = 0; k < u.m; ++k) vc[k] = P.a_minus[k];
    } else if (src_col >= D.n_cols) {
      for (int k = 0; k < u.m; ++k) vc[k] = P.a_plus[k];
    } else {
      const std::int32_t s = D.cell_at(src_col, j);
      if (s < 0)
        throw InvariantError("translate_field_by_period: source cell inactive (mask not periodic)");
      const auto uc = u.cell(s);
      for (int k = 0; k < u.m; ++k) vc[k] = uc[k];
    }
  }
  return v;
}

}  // namespace stripwave
