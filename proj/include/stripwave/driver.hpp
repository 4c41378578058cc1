#pragma once

#include "comparison_decay.hpp"
#include "minimize.hpp"
#include "polar_cutoff.hpp"

namespace stripwave {

struct SolveConfig {
  Potential P;
  StripSpec strip;
  double h = 1.0 / 32;
  double T = 8.0;
  int N = 2;
  MinimizeOpts opts;
  double r_transition = 0.0;    // 0: r0/4
  double activity_margin = 0.0; // 0: 1e-3 * r0
  int comparison_k_max = 3;
  double eps_disc = 0.0;        // 0: 4 h^2
  std::uint64_t seed = 0;       // echoed for reproducibility audits
  int threads = 1;
};

struct SolveReport {
  MinimizeReport min_report;
  EnergyBreakdown energy;
  double affine_energy = 0.0;
  double margin_required = 0.0;

  // constraint realization at s = +-NL (with margin) split into the first
  // period band and the rest of the tail
  int active_band_plus = 0, active_tail_plus = 0;
  int active_band_minus = 0, active_tail_minus = 0;
  double margin_plus = 0.0, margin_minus = 0.0;
  bool constraint_inactive = false;
  bool translated = false;
  bool existence_diagnostic_fail = false;

  std::optional<int> transition_free_column;  // integer multiple of L
  double r_transition = 0.0;
  int Z = 0;
  double w0_estimate = 0.0;
  double z_ratio_bound = 0.0;  // J(affine) / w0_estimate
  bool z_bound_ok = false;

  ComparisonReport comparison;
  DecayFit decay_plus, decay_minus;
  std::optional<double> linear_c2;
  double wall_seconds = 0.0;

  bool converged() const { return min_report.converged; }
  bool all_checks_pass() const {
    return converged() && constraint_inactive && !existence_diagnostic_fail && comparison.pass;
  }
};

namespace detail {

struct Activity {
  int band_plus = 0, tail_plus = 0, band_minus = 0, tail_minus = 0;
  double margin_plus = std::numeric_limits<double>::infinity();
  double margin_minus = std::numeric_limits<double>::infinity();
  bool inactive(double) const { return band_plus + tail_plus + band_minus + tail_minus == 0; }
};

inline Activity constraint_activity(const Field& u, const ConstraintSpec& C, double margin) {
  const DiscreteDomain& D = *u.dom;
  const double rad = C.radius();
  Activity act;
  for (std::size_t c = 0; c < u.n_cells(); ++c) {
    const double s = D.s_center(D.cells[c].first);
    if (s >= C.N * C.L) {
      const double mg = rad - dist(u.cell(static_cast<std::int32_t>(c)), C.a_plus);
      act.margin_plus = std::min(act.margin_plus, mg);
      if (mg < margin) {
        if (s < (C.N + 1) * C.L) ++act.band_plus; else ++act.tail_plus;
      }
    } else if (s <= -C.N * C.L) {
      const double mg = rad - dist(u.cell(static_cast<std::int32_t>(c)), C.a_minus);
      act.margin_minus = std::min(act.margin_minus, mg);
      if (mg < margin) {
        if (s > -(C.N + 1) * C.L) ++act.band_minus; else ++act.tail_minus;
      }
    }
  }
  return act;
}

}  // namespace detail

// Full standing-wave pipeline: constrained minimization from the affine
// competitor, constraint-realization check at s = +-NL (with one period
// translation and re-minimization if one side is touched), tail comparison
// on the slabs, transition-count diagnostic, and decay fits.
inline std::pair<Field, SolveReport> solve_standing_wave(const SolveConfig& cfg,
                                                         const DiscreteDomain& D) {
  WallTimer timer;
  SolveReport rep;
  const Potential& P = cfg.P;
  const ConstraintSpec C = make_constraint(P, cfg.N, D.strip.L);
  validate_slab_headroom(C, D);
  const double margin = cfg.activity_margin > 0.0 ? cfg.activity_margin : 1e-3 * P.r0;
  rep.margin_required = margin;

  MinimizeOpts opts = cfg.opts;
  opts.threads = cfg.threads;
  const Field ubar = build_affine_initial(D, P);
  rep.affine_energy = energy(ubar, P, {}, cfg.threads).total;

  auto [u, mrep] = minimize(ubar, P, &C, opts);
  rep.min_report = mrep;

  detail::Activity act = detail::constraint_activity(u, C, margin);
  if (!act.inactive(margin)) {
    // one period translation away from the side that is touched, as in the
    // constraint-removal argument; applied at most once
    const bool minus_touched = act.band_minus + act.tail_minus > 0;
    const int direction = minus_touched ? +1 : -1;
    Field shifted = translate_field_by_period(u, P, direction);
    auto [u2, mrep2] = minimize(shifted, P, &C, opts);
    u = std::move(u2);
    rep.translated = true;
    // keep both traces: the solve continues in a second phase
    rep.min_report.trace.insert(rep.min_report.trace.end(), mrep2.trace.begin(),
                                mrep2.trace.end());
    rep.min_report.iterations += mrep2.iterations;
    rep.min_report.converged = mrep2.converged;
    rep.min_report.stalled = mrep2.stalled;
    rep.min_report.residual_inf = mrep2.residual_inf;
    rep.min_report.projected_residual_inf = mrep2.projected_residual_inf;
    rep.min_report.energy = mrep2.energy;
    act = detail::constraint_activity(u, C, margin);
  }
  rep.active_band_plus = act.band_plus;
  rep.active_tail_plus = act.tail_plus;
  rep.active_band_minus = act.band_minus;
  rep.active_tail_minus = act.tail_minus;
  rep.margin_plus = act.margin_plus;
  rep.margin_minus = act.margin_minus;
  rep.constraint_inactive = act.inactive(margin);
  rep.existence_diagnostic_fail = rep.translated && !rep.constraint_inactive;
  rep.energy = rep.min_report.energy;

  // tail comparison with the envelope bound (valid for degenerate minima too)
  RadialBoundFn rb = compute_g(P);
  build_f(rb, FMode::envelope);
  try {
    RadialBoundFn lin = rb;
    build_f(lin, FMode::linear);
    rep.linear_c2 = lin.linear_c2;
  } catch (const InvariantError&) {
    rep.linear_c2.reset();
  }
  rep.comparison = verify_comparison(u, P, rb, C, cfg.comparison_k_max,
                                     cfg.eps_disc > 0.0 ? cfg.eps_disc : 4.0 * D.h * D.h);

  // transition diagnostics over the integer sections hL, h in [-(N-2), N-2]
  const double r = cfg.r_transition > 0.0 ? cfg.r_transition : 0.25 * P.r0;
  rep.r_transition = r;
  const int h_max = cfg.N - 2;
  std::vector<int> flagged;
  for (int hh = -h_max; hh <= h_max; ++hh) {
    const int col = D.col_of_s(hh * C.L + 0.5 * D.h);
    double free_plus = 0.0, free_minus = 0.0;  // max over the section
    bool far_from_both = false;
    for (std::int32_t c = D.col_start[col]; c < D.col_start[col + 1]; ++c) {
      const double dp = dist(u.cell(c), P.a_plus);
      const double dm = dist(u.cell(c), P.a_minus);
      free_plus = std::max(free_plus, dp);
      free_minus = std::max(free_minus, dm);
      if (std::min(dp, dm) >= r) far_from_both = true;
    }
    if (far_from_both) flagged.push_back(hh);
    if (!rep.transition_free_column && std::min(free_plus, free_minus) < r)
      rep.transition_free_column = hh;
  }
  rep.Z = static_cast<int>(flagged.size());
  double w0 = std::numeric_limits<double>::infinity();
  for (int hh : flagged)
    w0 = std::min(w0, slab_energy(u, P, hh * C.L, 0.25 * C.L, cfg.threads));
  rep.w0_estimate = flagged.empty() ? 0.0 : w0;
  if (rep.w0_estimate > 0.0) {
    rep.z_ratio_bound = rep.affine_energy / rep.w0_estimate;
    rep.z_bound_ok = rep.Z <= rep.z_ratio_bound;
  } else {
    rep.z_bound_ok = rep.Z == 0;
  }

  rep.decay_plus = decay_fit(u, P, +1);
  rep.decay_minus = decay_fit(u, P, -1);
  rep.wall_seconds = timer.seconds();
  return {std::move(u), std::move(rep)};
}

}  // namespace stripwave
