#pragma once

#include <Eigen/Eigenvalues>
#include <functional>
#include <numbers>
#include <optional>

#include "common.hpp"

namespace stripwave {

// Bistable potential W: R^m -> R with global minima a_minus, a_plus at level 0.
// r0 is the radius of radial monotonicity about each minimum, M the radius
// beyond which W(s*u) >= W(u) holds for s >= 1 (used by the sup truncation).
struct Potential {
  std::string family = "custom";
  int m = 1;
  std::vector<double> a_minus, a_plus;
  double r0 = 0.4;
  double M = 2.0;
  std::function<double(CSpan)> eval;
  std::function<void(CSpan, Span)> grad;
  std::function<void(CSpan, Span)> hess;  // row-major m*m; empty -> finite differences of grad
};

inline double eval_W(const Potential& P, CSpan u) { return P.eval(u); }
inline void eval_grad(const Potential& P, CSpan u, Span out) { P.grad(u, out); }

// W(u) = 1/4 (1 - u^2)^2, m = 1, minima at -1 and +1.
inline Potential scalar_quartic() {
  Potential P;
  P.family = "scalar_quartic";
  P.m = 1;
  P.a_minus = {-1.0};
  P.a_plus = {1.0};
  P.r0 = 0.4;
  P.M = 2.0;
  P.eval = [](CSpan u) {
    const double q = 1.0 - u[0] * u[0];
    return 0.25 * q * q;
  };
  P.grad = [](CSpan u, Span g) { g[0] = u[0] * u[0] * u[0] - u[0]; };
  P.hess = [](CSpan u, Span H) { H[0] = 3.0 * u[0] * u[0] - 1.0; };
  return P;
}

// W(u) = |u - a_minus|^2 |u - a_plus|^2.
inline Potential product_well(int m = 2,
                              std::vector<double> a_minus = {},
                              std::vector<double> a_plus = {}) {
  Potential P;
  P.family = "product_well";
  P.m = m;
  const bool default_minus = a_minus.empty(), default_plus = a_plus.empty();
  P.a_minus = default_minus ? std::vector<double>(m, 0.0) : std::move(a_minus);
  P.a_plus = default_plus ? std::vector<double>(m, 0.0) : std::move(a_plus);
  if (default_minus) P.a_minus[0] = -1.0;
  if (default_plus) P.a_plus[0] = 1.0;
  P.r0 = 0.4;
  P.M = 3.0;
  const std::vector<double> am = P.a_minus, ap = P.a_plus;
  P.eval = [am, ap, m](CSpan u) {
    double Pm = 0.0, Qp = 0.0;
    for (int i = 0; i < m; ++i) {
      const double p = u[i] - am[i], q = u[i] - ap[i];
      Pm += p * p;
      Qp += q * q;
    }
    return Pm * Qp;
  };
  P.grad = [am, ap, m](CSpan u, Span g) {
    double Pm = 0.0, Qp = 0.0;
    for (int i = 0; i < m; ++i) {
      const double p = u[i] - am[i], q = u[i] - ap[i];
      Pm += p * p;
      Qp += q * q;
    }
    for (int i = 0; i < m; ++i) g[i] = 2.0 * Qp * (u[i] - am[i]) + 2.0 * Pm * (u[i] - ap[i]);
  };
  P.hess = [am, ap, m](CSpan u, Span H) {
    double Pm = 0.0, Qp = 0.0;
    for (int i = 0; i < m; ++i) {
      const double p = u[i] - am[i], q = u[i] - ap[i];
      Pm += p * p;
      Qp += q * q;
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double pi = u[i] - am[i], qi = u[i] - ap[i];
        const double pj = u[j] - am[j], qj = u[j] - ap[j];
        double v = 4.0 * (pi * qj + qi * pj);
        if (i == j) v += 2.0 * (Pm + Qp);
        H[i * m + j] = v;
      }
  };
  return P;
}

// W(u) = |u - a_minus|^2 |u - a_plus|^4; quartic contact at a_plus, so the
// Hessian there vanishes (degenerate branch of the theory).
inline Potential degenerate_well(int m = 2,
                                 std::vector<double> a_minus = {},
                                 std::vector<double> a_plus = {}) {
  Potential P;
  P.family = "degenerate_well";
  P.m = m;
  const bool default_minus = a_minus.empty(), default_plus = a_plus.empty();
  P.a_minus = default_minus ? std::vector<double>(m, 0.0) : std::move(a_minus);
  P.a_plus = default_plus ? std::vector<double>(m, 0.0) : std::move(a_plus);
  if (default_minus) P.a_minus[0] = -1.0;
  if (default_plus) P.a_plus[0] = 1.0;
  P.r0 = 0.4;
  P.M = 3.0;
  const std::vector<double> am = P.a_minus, ap = P.a_plus;
  P.eval = [am, ap, m](CSpan u) {
    double Pm = 0.0, Qp = 0.0;
    for (int i = 0; i < m; ++i) {
      const double p = u[i] - am[i], q = u[i] - ap[i];
      Pm += p * p;
      Qp += q * q;
    }
    return Pm * Qp * Qp;
  };
  P.grad = [am, ap, m](CSpan u, Span g) {
    double Pm = 0.0, Qp = 0.0;
    for (int i = 0; i < m; ++i) {
      const double p = u[i] - am[i], q = u[i] - ap[i];
      Pm += p * p;
      Qp += q * q;
    }
    for (int i = 0; i < m; ++i)
      g[i] = 2.0 * Qp * Qp * (u[i] - am[i]) + 4.0 * Pm * Qp * (u[i] - ap[i]);
  };
  P.hess = [am, ap, m](CSpan u, Span H) {
    double Pm = 0.0, Qp = 0.0;
    for (int i = 0; i < m; ++i) {
      const double p = u[i] - am[i], q = u[i] - ap[i];
      Pm += p * p;
      Qp += q * q;
    }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double pi = u[i] - am[i], qi = u[i] - ap[i];
        const double pj = u[j] - am[j], qj = u[j] - ap[j];
        double v = 8.0 * Qp * (pi * qj + qi * pj) + 8.0 * Pm * qi * qj;
        if (i == j) v += 2.0 * Qp * Qp + 4.0 * Pm * Qp;
        H[i * m + j] = v;
      }
  };
  return P;
}

// Central finite differences of grad; fallback Hessian for custom potentials.
inline void hess_fd(const Potential& P, CSpan u, Span H, double eps = 1e-5) {
  const int m = P.m;
  std::vector<double> up(u.begin(), u.end()), um(u.begin(), u.end());
  std::vector<double> gp(m), gm(m);
  for (int j = 0; j < m; ++j) {
    const double e = eps * (1.0 + std::abs(u[j]));
    up[j] = u[j] + e;
    um[j] = u[j] - e;
    P.grad(up, gp);
    P.grad(um, gm);
    for (int i = 0; i < m; ++i) H[i * m + j] = (gp[i] - gm[i]) / (2.0 * e);
    up[j] = u[j];
    um[j] = u[j];
  }
  // symmetrize
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const double v = 0.5 * (H[i * m + j] + H[j * m + i]);
      H[i * m + j] = H[j * m + i] = v;
    }
}

struct EigReport {
  double mu_min = 0.0;        // smallest eigenvalue of D^2 W(a)
  double k0_candidate = 0.0;  // sqrt(max(mu_min, 0)), linearized decay rate
  bool degenerate = false;
};

inline EigReport min_eig_hess(const Potential& P, CSpan a, double tol = 1e-8) {
  const int m = P.m;
  std::vector<double> H(static_cast<std::size_t>(m) * m);
  if (P.hess)
    P.hess(a, H);
  else
    hess_fd(P, a, H);
  Eigen::MatrixXd A(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) A(i, j) = H[i * m + j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  EigReport rep;
  rep.mu_min = es.eigenvalues().minCoeff();
  rep.degenerate = rep.mu_min <= tol;
  rep.k0_candidate = rep.mu_min > 0.0 ? std::sqrt(rep.mu_min) : 0.0;
  return rep;
}

// Deterministic direction sets on S^{m-1}: signs for m=1, equal angles for
// m=2, a Fibonacci lattice for m=3.
inline std::vector<std::vector<double>> sphere_samples(int m, int n) {
  std::vector<std::vector<double>> out;
  if (m == 1) {
    out.push_back({1.0});
    out.push_back({-1.0});
    return out;
  }
  if (m == 2) {
    if (n <= 0) n = 720;
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * std::numbers::pi * k / n;
      out.push_back({std::cos(th), std::sin(th)});
    }
    return out;
  }
  if (m == 3) {
    if (n <= 0) n = 2048;
    out.reserve(n);
    const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / n;
      const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
      out.push_back({rr * std::cos(ga * k), rr * std::sin(ga * k), z});
    }
    return out;
  }
  throw InvariantError("sphere_samples: only m <= 3 is supported");
}

struct HypothesisReport {
  bool h1 = false, h2 = false, h3 = false;
  double h1_min_outside = 0.0;   // min W over samples away from the minima
  double h1_at_minima = 0.0;     // max |W(a+-)|
  double h2_worst_quotient = 0.0;  // min difference quotient of r -> W(a + r nu)
  double h3_worst_margin = 0.0;  // min of W(s u) - W(u), |u| = M, s in [1, s_max]
  bool pass() const { return h1 && h2 && h3; }
};

// Samples H1-H3 on deterministic grids; failures are carried in the report.
inline HypothesisReport check_H1_H2_H3(const Potential& P, int samples = 64) {
  HypothesisReport rep;
  const int m = P.m;
  const double diam = dist(P.a_minus, P.a_plus);
  const double excl = 0.05 * diam;

  // H1: zero level at the minima, positivity elsewhere on a box around them.
  rep.h1_at_minima = std::max(std::abs(P.eval(P.a_minus)), std::abs(P.eval(P.a_plus)));
  std::vector<double> lo(m), hi(m);
  for (int i = 0; i < m; ++i) {
    lo[i] = std::min(P.a_minus[i], P.a_plus[i]) - 0.75 * diam;
    hi[i] = std::max(P.a_minus[i], P.a_plus[i]) + 0.75 * diam;
  }
  int per_dim = m == 1 ? samples * 32 : (m == 2 ? samples * 2 : std::max(12, (3 * samples) / 4));
  std::vector<double> u(m);
  double min_outside = std::numeric_limits<double>::infinity();
  std::vector<int> idx(m, 0);
  while (true) {
    for (int i = 0; i < m; ++i)
      u[i] = lo[i] + (hi[i] - lo[i]) * (idx[i] + 0.5) / per_dim;
    if (dist(u, P.a_minus) > excl && dist(u, P.a_plus) > excl)
      min_outside = std::min(min_outside, P.eval(u));
    int d = 0;
    while (d < m && ++idx[d] == per_dim) idx[d++] = 0;
    if (d == m) break;
  }
  rep.h1_min_outside = min_outside;
  rep.h1 = rep.h1_at_minima <= 1e-10 * (1.0 + diam) && min_outside > 0.0;

  // H2: positive difference quotients of r -> W(a + r nu) on (0, r0].
  const auto dirs = sphere_samples(m, m == 2 ? 180 : 512);
  const int nr = 128;
  double worst_q = std::numeric_limits<double>::infinity();
  for (const auto* a : {&P.a_minus, &P.a_plus}) {
    for (const auto& nu : dirs) {
      double w_prev = P.eval(*a);
      for (int k = 1; k <= nr; ++k) {
        const double r = P.r0 * k / nr;
        for (int i = 0; i < m; ++i) u[i] = (*a)[i] + r * nu[i];
        const double w = P.eval(u);
        worst_q = std::min(worst_q, (w - w_prev) / (P.r0 / nr));
        w_prev = w;
      }
    }
  }
  rep.h2_worst_quotient = worst_q;
  rep.h2 = worst_q > 0.0;

  // H3: W(s u) >= W(u) for |u| = M, s in [1, s_max]. The solver truncates
  // fields at |u| <= M, so s_max = 4 covers everything it can produce.
  const double s_max = 4.0;
  double worst_m = std::numeric_limits<double>::infinity();
  std::vector<double> su(m);
  for (const auto& nu : dirs) {
    for (int i = 0; i < m; ++i) u[i] = P.M * nu[i];
    const double w0 = P.eval(u);
    for (int k = 0; k <= 64; ++k) {
      const double s = 1.0 + (s_max - 1.0) * k / 64.0;
      for (int i = 0; i < m; ++i) su[i] = s * u[i];
      worst_m = std::min(worst_m, P.eval(su) - w0);
    }
  }
  rep.h3_worst_margin = worst_m;
  rep.h3 = worst_m >= -1e-12;
  return rep;
}

}  // namespace stripwave
