#pragma once

#include "minimize.hpp"

namespace stripwave {

// Polar representation u = a + rho nu about a point a; nu is undefined on
// the zero set {rho = 0} and carries a marker there.
struct PolarField {
  const DiscreteDomain* dom = nullptr;
  int m = 1;
  std::vector<double> base;
  std::vector<double> rho;
  std::vector<double> nu;             // unit vectors where defined
  std::vector<std::uint8_t> defined;  // 0 on the zero set

  CSpan nu_at(std::int32_t c) const {
    return {nu.data() + static_cast<std::size_t>(c) * m, static_cast<std::size_t>(m)};
  }
};

inline PolarField polar_decompose(const Field& u, CSpan a) {
  PolarField p;
  p.dom = u.dom;
  p.m = u.m;
  p.base.assign(a.begin(), a.end());
  p.rho.resize(u.n_cells());
  p.nu.assign(u.data.size(), 0.0);
  p.defined.assign(u.n_cells(), 0);
  for (std::size_t c = 0; c < u.n_cells(); ++c) {
    const auto uc = u.cell(static_cast<std::int32_t>(c));
    const double r = dist(uc, a);
    p.rho[c] = r;
    if (r > 0.0) {
      p.defined[c] = 1;
      for (int k = 0; k < u.m; ++k) p.nu[c * u.m + k] = (uc[k] - a[k]) / r;
    }
  }
  return p;
}

inline Field recompose(const PolarField& p) {
  Field u(*p.dom, p.m);
  for (std::size_t c = 0; c < u.n_cells(); ++c) {
    auto uc = u.cell(static_cast<std::int32_t>(c));
    for (int k = 0; k < p.m; ++k)
      uc[k] = p.base[k] + (p.defined[c] ? p.rho[c] * p.nu[c * p.m + k] : 0.0);
  }
  return u;
}

struct PolarIdentity {
  double lhs = 0.0;      // sum over faces of |u_A - u_B|^2
  double rhs = 0.0;      // radial + angular face sums
  double gap = 0.0;      // lhs - rhs
  double radial = 0.0;
  double angular = 0.0;
};

// Discrete analogue of the polar energy identity. The angular increment at a
// face uses rho at the face (arithmetic mean) times |nu_A - nu_B|^2; faces
// touching the zero set contribute no angular term, matching the convention
// that the angular derivative vanishes there. The gap is O(h^2) for smooth
// fields staying away from a.
inline PolarIdentity polar_energy_identity_check(const Field& u, CSpan a) {
  const DiscreteDomain& D = *u.dom;
  const PolarField p = polar_decompose(u, a);
  KahanSum lhs, rad, ang;
  const int m = u.m;
  for (const auto& fc : D.faces) {
    const auto ua = u.cell(fc.a), ub = u.cell(fc.b);
    double q = 0.0;
    for (int k = 0; k < m; ++k) {
      const double d = ua[k] - ub[k];
      q += d * d;
    }
    lhs.add(q);
    const double dr = p.rho[fc.a] - p.rho[fc.b];
    rad.add(dr * dr);
    if (p.defined[fc.a] && p.defined[fc.b]) {
      const double rf = 0.5 * (p.rho[fc.a] + p.rho[fc.b]);
      const auto na = p.nu_at(fc.a), nb = p.nu_at(fc.b);
      double dn = 0.0;
      for (int k = 0; k < m; ++k) {
        const double d = na[k] - nb[k];
        dn += d * d;
      }
      ang.add(rf * rf * dn);
    }
  }
  PolarIdentity out;
  out.lhs = lhs.value();
  out.radial = rad.value();
  out.angular = ang.value();
  out.rhs = out.radial + out.angular;
  out.gap = out.lhs - out.rhs;
  return out;
}

// Project the radial part onto [0, r]: u -> a + min(rho, r) nu. Cells with
// rho <= r are untouched bitwise, so the map is exactly idempotent, and it
// is 1-Lipschitz so the Dirichlet part of the energy cannot increase.
inline Field radial_truncate(const Field& u, CSpan a, double r) {
  if (r < 0.0) throw InvariantError("radial_truncate: r must be >= 0");
  Field v = u;
  for (std::size_t c = 0; c < v.n_cells(); ++c) {
    auto vc = v.cell(static_cast<std::int32_t>(c));
    if (dist(vc, a) > r) scale_about(vc, a, r, r);
  }
  return v;
}

// Radial cut-off with the linear taper: rho <= r unchanged, rho in [r, 2r]
// mapped to radius 2r - rho, rho >= 2r collapsed to a.
inline Field cutoff_alpha(const Field& u, CSpan a, double r) {
  if (r <= 0.0) throw InvariantError("cutoff_alpha: r must be positive");
  Field v = u;
  for (std::size_t c = 0; c < v.n_cells(); ++c) {
    auto vc = v.cell(static_cast<std::int32_t>(c));
    const double rho = dist(vc, a);
    if (rho <= r) continue;
    if (rho >= 2.0 * r) {
      for (std::size_t k = 0; k < vc.size(); ++k) vc[k] = a[k];
    } else {
      scale_about(vc, a, 2.0 * r - rho, r);
    }
  }
  return v;
}

struct CutoffResult {
  Field u;
  bool step1 = false;     // true: plain radial truncation branch
  bool modified = false;  // false: operator acted as the identity
  EnergyBreakdown energy_before, energy_after;
  double decrease = 0.0;
  double sup_before = 0.0, sup_after = 0.0;  // sup of |u - a| over A
};

// Replacement operator of the cut-off argument, restricted to a connected
// active subset A whose inner boundary layer stays in the r-ball. When the
// radial part stays below 2r on A the plain truncation is used (step 1);
// otherwise the tapered cut-off (step 2). Outside A the field is returned
// unchanged. The result satisfies |u - a| <= r on A, and the energy strictly
// decreases whenever some cell of A had rho > r.
inline CutoffResult cutoff_replace(const Field& u, const std::vector<std::int32_t>& A, CSpan a,
                                   double r, const Potential& P) {
  const DiscreteDomain& D = *u.dom;
  if (r <= 0.0 || 2.0 * r > P.r0 * (1.0 + 1e-12))
    throw InvariantError("cutoff_replace: need 0 < 2r <= r0");
  if (A.empty()) throw InvariantError("cutoff_replace: A is empty");
  if (!is_edge_connected(D, A)) throw InvariantError("cutoff_replace: A is not edge-connected");

  std::vector<std::uint8_t> in(D.n_cells(), 0);
  for (auto c : A) in[c] = 1;
  double rho_max = 0.0;
  for (auto c : A) {
    const double rho = dist(u.cell(c), a);
    rho_max = std::max(rho_max, rho);
    bool layer = false;
    for (int d = 0; d < 4; ++d) {
      const std::int32_t n = D.nbr[c][d];
      if (n >= 0 && !in[n]) layer = true;
    }
    if (layer && rho > r * (1.0 + 1e-12))
      throw InvariantError("cutoff_replace: boundary layer of A leaves the r-ball (rho = " +
                           std::to_string(rho) + " > r = " + std::to_string(r) + ")");
  }

  CutoffResult out;
  out.sup_before = rho_max;
  out.step1 = rho_max <= 2.0 * r;
  out.energy_before = energy(u, P);
  out.u = u;
  for (auto c : A) {
    auto vc = out.u.cell(c);
    const double rho = dist(vc, a);
    if (rho <= r) continue;
    out.modified = true;
    if (out.step1) {
      scale_about(vc, a, r, r);
    } else if (rho >= 2.0 * r) {
      for (std::size_t k = 0; k < vc.size(); ++k) vc[k] = a[k];
    } else {
      scale_about(vc, a, 2.0 * r - rho, r);
    }
  }
  out.energy_after = out.modified ? energy(out.u, P) : out.energy_before;
  out.decrease = out.energy_before.total - out.energy_after.total;
  for (auto c : A) out.sup_after = std::max(out.sup_after, dist(out.u.cell(c), a));
  return out;
}

struct MaxPrincipleReport {
  double sup_dist = 0.0;
  bool pass = false;
  bool converged = false;
  int cutoff_rounds = 0;
  double energy_final = 0.0;
};

// Ball-trapping harness: minimize over A with the given exterior values as
// Dirichlet data, then check sup_A |u - a| <= r + tol. If a converged state
// still leaves the ball and the replacement operator applies, use it (the
// energy strictly decreases) and re-minimize.
inline MaxPrincipleReport max_principle_test(const Field& u_with_data,
                                             const std::vector<std::int32_t>& A, CSpan a,
                                             double r, double tol, const Potential& P,
                                             MinimizeOpts opts = {}, int max_cutoff_rounds = 3) {
  std::vector<std::uint8_t> in(u_with_data.n_cells(), 0);
  for (auto c : A) in[c] = 1;
  MaxPrincipleReport rep;
  Field u = u_with_data;
  for (int round = 0;; ++round) {
    auto [v, mrep] = dirichlet_minimize_subdomain(u, A, P, opts);
    u = std::move(v);
    rep.converged = mrep.converged;
    rep.energy_final = mrep.energy.total;
    rep.sup_dist = 0.0;
    for (auto c : A) rep.sup_dist = std::max(rep.sup_dist, dist(u.cell(c), a));
    if (rep.sup_dist <= r + tol || round >= max_cutoff_rounds) break;
    // applicable only if the inner boundary layer stayed in the ball
    bool applicable = true;
    for (auto c : A) {
      bool layer = false;
      for (int d = 0; d < 4; ++d) {
        const std::int32_t n = u.dom->nbr[c][d];
        if (n >= 0 && !in[n]) layer = true;
      }
      if (layer && dist(u.cell(c), a) > r) applicable = false;
    }
    if (!applicable) break;
    u = cutoff_replace(u, A, a, r, P).u;
    ++rep.cutoff_rounds;
  }
  rep.pass = rep.sup_dist <= r + tol;
  return rep;
}

// --- randomized harnesses shared by the CLI and the test suites ---

// Largest-connected-component of a random cell rectangle, together with the
// interior cell deepest inside it (graph distance to the boundary layer).
struct RandomSubset {
  std::vector<std::int32_t> cells;
  std::int32_t deep_cell = -1;
  int depth = 0;
};

inline RandomSubset random_connected_subset(const DiscreteDomain& D, Rng& rng, int min_half = 3,
                                            int max_half = 10) {
  RandomSubset out;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const int ci = std::uniform_int_distribution<int>(0, D.n_cols - 1)(rng);
    const int cj = std::uniform_int_distribution<int>(0, D.n_rows - 1)(rng);
    const int hw = std::uniform_int_distribution<int>(min_half, max_half)(rng);
    const int hh = std::uniform_int_distribution<int>(min_half, max_half)(rng);
    std::vector<std::int32_t> rect;
    for (int i = std::max(0, ci - hw); i <= std::min(D.n_cols - 1, ci + hw); ++i)
      for (int j = std::max(0, cj - hh); j <= std::min(D.n_rows - 1, cj + hh); ++j) {
        const std::int32_t c = D.cell_at(i, j);
        if (c >= 0) rect.push_back(c);
      }
    if (rect.size() < 16) continue;
    // connected component of the first cell
    std::vector<std::uint8_t> in(D.n_cells(), 0);
    for (auto c : rect) in[c] = 1;
    std::vector<std::int32_t> comp = {rect.front()};
    std::vector<std::uint8_t> seen(D.n_cells(), 0);
    seen[rect.front()] = 1;
    for (std::size_t q = 0; q < comp.size(); ++q)
      for (int d = 0; d < 4; ++d) {
        const std::int32_t n = D.nbr[comp[q]][d];
        if (n >= 0 && in[n] && !seen[n]) {
          seen[n] = 1;
          comp.push_back(n);
        }
      }
    if (comp.size() < 16) continue;
    // BFS distance from the boundary layer
    std::vector<std::uint8_t> in_comp(D.n_cells(), 0);
    for (auto c : comp) in_comp[c] = 1;
    std::vector<int> dist_layer(D.n_cells(), -1);
    std::vector<std::int32_t> queue;
    for (auto c : comp) {
      bool layer = false;
      for (int d = 0; d < 4; ++d) {
        const std::int32_t n = D.nbr[c][d];
        if (n >= 0 && !in_comp[n]) layer = true;
      }
      if (layer) {
        dist_layer[c] = 0;
        queue.push_back(c);
      }
    }
    if (queue.empty()) {  // subset touches only domain boundary; any cell works
      for (auto c : comp) {
        dist_layer[c] = 0;
        queue.push_back(c);
      }
    }
    for (std::size_t q = 0; q < queue.size(); ++q)
      for (int d = 0; d < 4; ++d) {
        const std::int32_t n = D.nbr[queue[q]][d];
        if (n >= 0 && in_comp[n] && dist_layer[n] < 0) {
          dist_layer[n] = dist_layer[queue[q]] + 1;
          queue.push_back(n);
        }
      }
    std::int32_t deep = comp.front();
    for (auto c : comp)
      if (dist_layer[c] > dist_layer[deep]) deep = c;
    if (dist_layer[deep] < 3) continue;
    std::sort(comp.begin(), comp.end());
    out.cells = std::move(comp);
    out.deep_cell = deep;
    out.depth = dist_layer[deep];
    return out;
  }
  throw SolverError("random_connected_subset: no usable subset found");
}

struct CutoffTrialsReport {
  int trials_step1 = 0, trials_step2 = 0, trials_identity = 0;
  int failures = 0;
  double min_decrease_step1 = std::numeric_limits<double>::infinity();
  double min_decrease_step2 = std::numeric_limits<double>::infinity();
  double max_sup_after = 0.0;
  bool pass = false;
};

// Randomized exercise of the replacement operator: per trial a random
// connected subset, radial noise below 0.3 r outside a bump, and a bump whose
// peak selects the branch (below 2r: truncation, above: taper). Identity
// trials keep everything inside the r-ball and must return the input bitwise.
inline CutoffTrialsReport run_cutoff_trials(const DiscreteDomain& D, const Potential& P, double r,
                                            int trials_per_branch, std::uint64_t seed) {
  if (2.0 * r > P.r0 * (1.0 + 1e-12))
    throw ConfigError("cutoff trials: need 2r <= r0");
  Rng rng(seed);
  CutoffTrialsReport rep;
  const int m = P.m;
  const CSpan a(P.a_plus);
  for (int branch = 0; branch < 3; ++branch) {
    const int trials = branch == 2 ? std::max(1, trials_per_branch / 4) : trials_per_branch;
    for (int t = 0; t < trials; ++t) {
      const RandomSubset sub = random_connected_subset(D, rng);
      Field u(D, m);
      for (std::size_t c = 0; c < D.n_cells(); ++c) {
        const auto nu = random_unit_vector(rng, m);
        const double rho = uniform(rng, 0.0, branch == 2 ? 0.9 * r : 0.3 * r);
        for (int k = 0; k < m; ++k) u.data[c * m + k] = a[k] + rho * nu[k];
      }
      double peak = 0.0;
      if (branch == 0) peak = uniform(rng, 1.2 * r, 1.9 * r);
      if (branch == 1) peak = uniform(rng, 3.0 * r, 6.0 * r);
      if (branch != 2) {
        const auto [bi, bj] = D.cells[sub.deep_cell];
        // keep the bump support clear of the boundary layer even along
        // diagonals (graph distance >= euclidean * sqrt(2) there)
        const double radius_cells = std::max(1.0, (sub.depth - 1) / std::sqrt(2.0));
        const auto dir = random_unit_vector(rng, m);
        for (auto c : sub.cells) {
          const auto [i, j] = D.cells[c];
          const double d2 = (double(i - bi) * (i - bi) + double(j - bj) * (j - bj)) /
                            (radius_cells * radius_cells);
          if (d2 >= 1.0) continue;
          const double rho = peak * (1.0 - d2);
          auto uc = u.cell(c);
          for (int k = 0; k < m; ++k) uc[k] = a[k] + rho * dir[k];
        }
      }
      const CutoffResult res = cutoff_replace(u, sub.cells, a, r, P);
      bool ok = true;
      if (branch == 0) {
        ok = res.step1 && res.modified && res.decrease > 0.0;
        if (ok) rep.min_decrease_step1 = std::min(rep.min_decrease_step1, res.decrease);
        ++rep.trials_step1;
      } else if (branch == 1) {
        ok = !res.step1 && res.modified && res.decrease > 0.0;
        if (ok) rep.min_decrease_step2 = std::min(rep.min_decrease_step2, res.decrease);
        ++rep.trials_step2;
      } else {
        ok = !res.modified && res.u.data == u.data && res.decrease == 0.0;
        ++rep.trials_identity;
      }
      if (res.sup_after > r) ok = false;
      rep.max_sup_after = std::max(rep.max_sup_after, res.sup_after);
      if (!ok) ++rep.failures;
    }
  }
  rep.pass = rep.failures == 0;
  return rep;
}

struct MaxPrincipleTrialsReport {
  int trials = 0;
  int failures = 0;
  int not_converged = 0;
  double worst_sup = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// Randomized ball-trapping trials: exterior data in the r-ball about a_plus,
// interior starts rotating between in-ball, violating, and constant.
inline MaxPrincipleTrialsReport run_max_principle_trials(const DiscreteDomain& D,
                                                         const Potential& P, double r, int trials,
                                                         double tol, std::uint64_t seed,
                                                         MinimizeOpts opts = {}) {
  Rng rng(seed);
  MaxPrincipleTrialsReport rep;
  rep.tol = tol;
  const int m = P.m;
  const CSpan a(P.a_plus);
  for (int t = 0; t < trials; ++t) {
    const RandomSubset sub = random_connected_subset(D, rng, 4, 12);
    std::vector<std::uint8_t> in(D.n_cells(), 0);
    for (auto c : sub.cells) in[c] = 1;
    Field u(D, m);
    for (std::size_t c = 0; c < D.n_cells(); ++c) {
      const auto nu = random_unit_vector(rng, m);
      double rho;
      if (!in[c])
        rho = r * std::pow(uniform(rng, 0.0, 1.0), 1.0 / m);  // exterior data in the ball
      else if (t % 3 == 0)
        rho = uniform(rng, r, 2.0 * r);  // violating start
      else if (t % 3 == 1)
        rho = uniform(rng, 0.0, r);
      else
        rho = 0.0;
      for (int k = 0; k < m; ++k) u.data[c * m + k] = a[k] + rho * nu[k];
    }
    const MaxPrincipleReport one = max_principle_test(u, sub.cells, a, r, tol, P, opts);
    ++rep.trials;
    if (!one.converged) ++rep.not_converged;
    rep.worst_sup = std::max(rep.worst_sup, one.sup_dist);
    if (!one.pass) ++rep.failures;
  }
  rep.pass = rep.failures == 0;
  return rep;
}

}  // namespace stripwave
