#pragma once

#include "minimize.hpp"

namespace stripwave {

// Independent 1D heteroclinic solver. A one-row flat strip of height h makes
// the finite-volume energy exactly h times the 1D discrete energy
// sum_i (1/2 |du/h|^2 + W(u)) h, so the same minimization engine doubles as
// the 1D oracle; reported energies are divided back by h.
struct OdeParams {
  double L = 2.0;   // ball constraints beyond |s| >= N*L
  int N = 1;
  double T = 8.0;
  double h = 1.0 / 128;
  MinimizeOpts opts;
};

struct OdeSolution {
  int m = 1;
  double h = 0.0, T = 0.0;
  std::vector<double> s;      // column centers
  std::vector<double> u;      // n_cols * m
  double energy = 0.0;        // 1D energy
  double equipartition_defect = 0.0;
  MinimizeReport report;

  CSpan at(int i) const {
    return {u.data() + static_cast<std::size_t>(i) * m, static_cast<std::size_t>(m)};
  }
  int n() const { return static_cast<int>(s.size()); }
};

inline OdeSolution solve_heteroclinic_1d(const Potential& P, OdeParams params = {}) {
  const int k = static_cast<int>(std::llround(params.L / params.h));
  if (k < 1) throw ConfigError("ode: h larger than L");
  const double h = params.L / k;
  StripSpec strip;
  strip.kind = StripSpec::Kind::flat;
  strip.L = params.L;
  strip.R = std::max(2.0, 2.0 * h);
  strip.y_lo = 0.0;
  strip.y_hi = h;
  const DiscreteDomain dom = build_mask(strip, h, params.T);
  if (dom.n_rows != 1) throw InvariantError("ode: expected a one-row strip");

  const ConstraintSpec C = make_constraint(P, params.N, params.L);
  const Field u0 = build_affine_initial(dom, P);
  MinimizeOpts opts = params.opts;
  auto [u, rep] = minimize(u0, P, &C, opts);
  if (!rep.converged && !rep.stalled)
    throw SolverError("ode: minimizer hit the iteration cap");

  OdeSolution sol;
  sol.m = P.m;
  sol.h = h;
  sol.T = params.T;
  sol.s.resize(dom.n_cols);
  sol.u.resize(static_cast<std::size_t>(dom.n_cols) * P.m);
  for (int i = 0; i < dom.n_cols; ++i) {
    sol.s[i] = dom.s_center(i);
    const std::int32_t c = dom.col_start[i];
    const auto uc = u.cell(c);
    for (int kk = 0; kk < P.m; ++kk) sol.u[static_cast<std::size_t>(i) * P.m + kk] = uc[kk];
  }
  sol.energy = rep.energy.total / h;
  sol.report = rep;

  // first integral check: max over interior nodes of |1/2 |u'|^2 - W(u)|
  double defect = 0.0;
  std::vector<double> du(P.m);
  for (int i = 1; i + 1 < dom.n_cols; ++i) {
    for (int kk = 0; kk < P.m; ++kk)
      du[kk] = (sol.u[(i + 1) * static_cast<std::size_t>(P.m) + kk] -
                sol.u[(i - 1) * static_cast<std::size_t>(P.m) + kk]) /
               (2.0 * h);
    defect = std::max(defect, std::abs(0.5 * dot(du, du) - P.eval(sol.at(i))));
  }
  sol.equipartition_defect = defect;

  // the ends must sit inside the constraint balls
  if (dist(sol.at(0), P.a_minus) > 0.5 * P.r0 + 1e-9 ||
      dist(sol.at(sol.n() - 1), P.a_plus) > 0.5 * P.r0 + 1e-9)
    throw InvariantError("ode: truncation ends left the constraint balls");
  return sol;
}

// Profile of the solution along the axis connecting the minima, used for
// the translation-quotient centering: the first coordinate of u - midpoint
// in the direction (a_plus - a_minus)/|a_plus - a_minus|.
inline double axis_coordinate(CSpan u, const Potential& P) {
  double v = 0.0;
  const double dn = dist(P.a_plus, P.a_minus);
  for (int k = 0; k < P.m; ++k) {
    const double ek = (P.a_plus[k] - P.a_minus[k]) / dn;
    v += (u[k] - 0.5 * (P.a_minus[k] + P.a_plus[k])) * ek;
  }
  return v;
}

struct OdeComparison {
  double max_col_deviation = 0.0;
  double max_y_variation = 0.0;
  double shift = 0.0;  // s*(2d) - s*(1d)
  bool centered = false;
  std::string message;
};

namespace detail {

// Zero crossing of a sampled profile by linear interpolation; picks the
// crossing nearest the origin.
inline bool zero_crossing(const std::vector<double>& s, const std::vector<double>& w,
                          double& out) {
  bool found = false;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if ((w[i] <= 0.0 && w[i + 1] > 0.0) || (w[i] >= 0.0 && w[i + 1] < 0.0)) {
      const double c = s[i] - w[i] * (s[i + 1] - s[i]) / (w[i + 1] - w[i]);
      if (!found || std::abs(c) < std::abs(out)) {
        out = c;
        found = true;
      }
    }
  }
  return found;
}

}  // namespace detail

// Column-by-column comparison of a 2D field on a flat cylinder against the
// 1D solution, after centering both at the crossing of the well midpoint.
inline OdeComparison compare_to_2d(const OdeSolution& ode, const Field& u, const Potential& P) {
  const DiscreteDomain& D = *u.dom;
  const int m = u.m;
  OdeComparison cmp;

  std::vector<double> s2(D.n_cols), w2(D.n_cols);
  std::vector<double> col_mean(static_cast<std::size_t>(D.n_cols) * m, 0.0);
  for (int i = 0; i < D.n_cols; ++i) {
    s2[i] = D.s_center(i);
    const int cnt = D.column_size(i);
    for (std::int32_t c = D.col_start[i]; c < D.col_start[i + 1]; ++c) {
      const auto uc = u.cell(c);
      for (int k = 0; k < m; ++k) col_mean[static_cast<std::size_t>(i) * m + k] += uc[k] / cnt;
    }
    w2[i] = axis_coordinate({col_mean.data() + static_cast<std::size_t>(i) * m,
                             static_cast<std::size_t>(m)},
                            P);
  }
  std::vector<double> w1(ode.n());
  for (int i = 0; i < ode.n(); ++i) w1[i] = axis_coordinate(ode.at(i), P);

  double c2 = 0.0, c1 = 0.0;
  if (!detail::zero_crossing(s2, w2, c2) || !detail::zero_crossing(ode.s, w1, c1)) {
    cmp.message = "centering failed: no midpoint crossing";
    return cmp;
  }
  cmp.centered = true;
  cmp.shift = c2 - c1;

  std::vector<double> uo(m);
  for (int i = 0; i < D.n_cols; ++i) {
    const double se = s2[i] - cmp.shift;
    if (se < ode.s.front() || se > ode.s.back()) continue;
    const double x = (se - ode.s.front()) / ode.h;
    const int k0 = std::min(static_cast<int>(x), ode.n() - 2);
    const double w = x - k0;
    for (int k = 0; k < m; ++k)
      uo[k] = (1.0 - w) * ode.u[static_cast<std::size_t>(k0) * m + k] +
              w * ode.u[static_cast<std::size_t>(k0 + 1) * m + k];
    for (std::int32_t c = D.col_start[i]; c < D.col_start[i + 1]; ++c) {
      const auto uc = u.cell(c);
      for (int k = 0; k < m; ++k)
        cmp.max_col_deviation = std::max(cmp.max_col_deviation, std::abs(uc[k] - uo[k]));
    }
  }
  for (int i = 0; i < D.n_cols; ++i)
    for (std::int32_t c = D.col_start[i]; c < D.col_start[i + 1]; ++c) {
      const auto uc = u.cell(c);
      for (int k = 0; k < m; ++k)
        cmp.max_y_variation = std::max(
            cmp.max_y_variation,
            std::abs(uc[k] - col_mean[static_cast<std::size_t>(i) * m + k]));
    }
  return cmp;
}

}  // namespace stripwave
