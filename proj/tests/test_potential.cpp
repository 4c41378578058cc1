#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace stripwave;
using Catch::Approx;

TEST_CASE("built-in potentials evaluate at the reference points", "[potential]") {
  const Potential pw = product_well(2);
  REQUIRE(eval_W(pw, pw.a_plus) == 0.0);
  REQUIRE(eval_W(pw, std::vector<double>{0.0, 0.0}) == Approx(1.0));

  const Potential sq = scalar_quartic();
  REQUIRE(eval_W(sq, std::vector<double>{0.0}) == Approx(0.25));
  std::vector<double> g(1);
  eval_grad(sq, std::vector<double>{0.5}, g);
  REQUIRE(g[0] == Approx(-0.375));
}

TEST_CASE("gradients vanish at the minima", "[potential]") {
  for (const Potential& P : {scalar_quartic(), product_well(2), degenerate_well(2)}) {
    std::vector<double> g(P.m);
    eval_grad(P, P.a_plus, g);
    REQUIRE(inf_norm(g) == 0.0);
    eval_grad(P, P.a_minus, g);
    REQUIRE(inf_norm(g) == 0.0);
  }
}

TEST_CASE("gradient and Hessian match finite differences", "[potential]") {
  Rng rng(11);
  for (const Potential& P : {scalar_quartic(), product_well(2), degenerate_well(2),
                             product_well(3)}) {
    const int m = P.m;
    std::vector<double> u(m), g(m), up(m), um(m);
    std::vector<double> H(m * m), Hfd(m * m);
    for (int trial = 0; trial < 100; ++trial) {
      for (int k = 0; k < m; ++k) u[k] = uniform(rng, -1.5, 1.5);
      P.grad(u, g);
      double scale = 1.0 + inf_norm(g);
      for (int k = 0; k < m; ++k) {
        up = u;
        um = u;
        const double e = 1e-6 * (1.0 + std::abs(u[k]));
        up[k] += e;
        um[k] -= e;
        const double fd = (P.eval(up) - P.eval(um)) / (2.0 * e);
        REQUIRE(std::abs(g[k] - fd) <= 1e-5 * scale);
      }
      P.hess(u, H);
      hess_fd(P, u, Hfd);
      scale = 1.0 + inf_norm(H);
      for (int k = 0; k < m * m; ++k) REQUIRE(std::abs(H[k] - Hfd[k]) <= 1e-4 * scale);
    }
  }
}

TEST_CASE("smallest Hessian eigenvalue at the minima", "[potential]") {
  SECTION("product well: 2|a+ - a-|^2") {
    const Potential P = product_well(2);
    const EigReport e = min_eig_hess(P, P.a_plus);
    REQUIRE(e.mu_min == Approx(8.0).epsilon(1e-10));
    REQUIRE_FALSE(e.degenerate);
    REQUIRE(e.k0_candidate == Approx(std::sqrt(8.0)));
    // finite-difference Hessian route agrees
    Potential Pfd = P;
    Pfd.hess = nullptr;
    REQUIRE(min_eig_hess(Pfd, Pfd.a_plus).mu_min == Approx(8.0).margin(1e-4));
  }
  SECTION("scalar quartic: W''(1) = 2") {
    const Potential P = scalar_quartic();
    REQUIRE(min_eig_hess(P, P.a_plus).mu_min == Approx(2.0));
  }
  SECTION("degenerate well: quartic contact") {
    const Potential P = degenerate_well(2);
    const EigReport e = min_eig_hess(P, P.a_plus);
    REQUIRE(e.degenerate);
    REQUIRE(e.mu_min == Approx(0.0).margin(1e-10));
    REQUIRE_FALSE(min_eig_hess(P, P.a_minus).degenerate);
  }
}

TEST_CASE("compute_g tabulates a nonnegative nondecreasing bound", "[potential][g]") {
  for (const Potential& P : {scalar_quartic(), product_well(2)}) {
    const RadialBoundFn rb = compute_g(P, 512);
    REQUIRE(rb.g_vals.front() == 0.0);
    for (std::size_t k = 1; k < rb.g_vals.size(); ++k) {
      REQUIRE(rb.g_vals[k] >= rb.g_vals[k - 1]);
      REQUIRE(rb.g_vals[k] > rb.g_vals[k - 1]);  // strict for the nondegenerate built-ins
    }
  }
}

TEST_CASE("three-component wells go through the g/f pipeline", "[potential][g][m3]") {
  const Potential P = product_well(3);
  RadialBoundFn rb = compute_g(P, 256);  // Fibonacci sphere directions
  build_f(rb, FMode::envelope);
  REQUIRE(rb.g_vals.front() == 0.0);
  for (std::size_t k = 1; k < rb.g_vals.size(); ++k) {
    REQUIRE(rb.g_vals[k] > rb.g_vals[k - 1]);
    REQUIRE(rb.f_vals[k] <= 2.0 * rb.r_nodes[k] * rb.g_vals[k] + rb.strict_slack);
  }
  // the minimum direction is along the connecting axis, same as m = 2
  const RadialBoundFn rb2 = compute_g(product_well(2), 256);
  REQUIRE(rb.g(0.2) == Approx(rb2.g(0.2)).epsilon(1e-3));
}

TEST_CASE("compute_g agrees with a brute-force oracle", "[potential][g]") {
  const Potential P = product_well(2);
  const RadialBoundFn rb = compute_g(P, 512, 720);
  const double r_query = 0.1;

  // independent dense scan at 10x directions and a fine r' grid
  const auto dirs = sphere_samples(2, 7200);
  std::vector<double> u(2), g(2);
  double oracle = std::numeric_limits<double>::infinity();
  double upper_at_r = std::numeric_limits<double>::infinity();  // min over nu at r' = r only
  const int nrp = 5120;
  for (const auto* a : {&P.a_minus, &P.a_plus}) {
    for (const auto& nu : dirs) {
      for (int k = 0; k <= nrp; ++k) {
        const double rp = r_query + (P.r0 - r_query) * k / nrp;
        for (int i = 0; i < 2; ++i) u[i] = (*a)[i] + rp * nu[i];
        P.grad(u, g);
        const double d = dot(g, nu);
        oracle = std::min(oracle, d);
        if (k == 0) upper_at_r = std::min(upper_at_r, d);
      }
    }
  }
  const double lib = rb.g(r_query);
  REQUIRE(lib > 0.0);
  REQUIRE(lib <= upper_at_r + 1e-12);
  REQUIRE(lib == Approx(oracle).margin(2e-3));
  REQUIRE(oracle <= lib + 1e-12);  // finer sampling can only lower the minimum
}

TEST_CASE("compute_g rejects a range where H2 fails", "[potential][g]") {
  Potential P = scalar_quartic();
  P.r0 = 1.5;  // reaches past the opposite well, radial derivative flips sign
  REQUIRE_THROWS_AS(compute_g(P, 256), InvariantError);
}

TEST_CASE("build_f linear mode", "[potential][f]") {
  SECTION("exactly linear g(r) = 4r gives c^2 = 8") {
    RadialBoundFn rb = linear_bound(8.0, 0.5);
    rb.linear_c2.reset();
    rb.f_vals.clear();
    build_f(rb, FMode::linear);
    REQUIRE(rb.linear_c2.has_value());
    REQUIRE(*rb.linear_c2 == Approx(8.0).epsilon(1e-12));
    REQUIRE(rb.f(0.25) == Approx(2.0));
  }
  SECTION("degenerate well is refused") {
    RadialBoundFn rb = compute_g(degenerate_well(2), 512);
    REQUIRE_THROWS_AS(build_f(rb, FMode::linear), InvariantError);
  }
  SECTION("linear c2 satisfies c2 t <= 2 sqrt(t) g(sqrt(t)) nodewise") {
    RadialBoundFn rb = compute_g(product_well(2), 512);
    build_f(rb, FMode::linear);
    for (std::size_t k = 1; k < rb.t_nodes.size(); ++k)
      REQUIRE(*rb.linear_c2 * rb.t_nodes[k] <=
              2.0 * rb.r_nodes[k] * rb.g_vals[k] * (1.0 + 1e-12));
  }
}

TEST_CASE("build_f envelope mode keeps the defining inequality", "[potential][f]") {
  for (const Potential& P : {scalar_quartic(), product_well(2), degenerate_well(2)}) {
    RadialBoundFn rb = compute_g(P, 512);
    build_f(rb, FMode::envelope);
    REQUIRE(rb.f_vals.front() == 0.0);
    REQUIRE(rb.f(0.0) == 0.0);
    const double slack = rb.strictified ? rb.strict_slack : 0.0;
    for (std::size_t k = 0; k < rb.t_nodes.size(); ++k) {
      REQUIRE(rb.f_vals[k] <= 2.0 * rb.r_nodes[k] * rb.g_vals[k] + slack);
      if (k > 0) REQUIRE(rb.f_vals[k] > rb.f_vals[k - 1]);
    }
    REQUIRE_FALSE(rb.strictified);  // built-ins produce strict envelopes directly
  }
}

TEST_CASE("hypothesis checker", "[potential][hypotheses]") {
  SECTION("product well passes H1-H3") {
    const HypothesisReport rep = check_H1_H2_H3(product_well(2));
    REQUIRE(rep.h1);
    REQUIRE(rep.h2);
    REQUIRE(rep.h3);
    REQUIRE(rep.pass());
  }
  SECTION("shifted potential fails H1") {
    Potential P = product_well(2);
    const auto base = P.eval;
    P.eval = [base](CSpan u) { return base(u) - 0.1; };
    const HypothesisReport rep = check_H1_H2_H3(P);
    REQUIRE_FALSE(rep.h1);
    REQUIRE(rep.h1_at_minima == Approx(0.1));
  }
  SECTION("scalar quartic with M = 2 passes H3") {
    const HypothesisReport rep = check_H1_H2_H3(scalar_quartic());
    REQUIRE(rep.h3);
    REQUIRE(rep.h3_worst_margin >= 0.0);
  }
  SECTION("degenerate contact still satisfies the radial monotonicity") {
    // the quartic-contact well has vanishing curvature at a_plus but its
    // radial difference quotients stay positive on (0, r0]
    const HypothesisReport rep = check_H1_H2_H3(degenerate_well(2));
    REQUIRE(rep.pass());
    REQUIRE(rep.h2_worst_quotient > 0.0);
    REQUIRE(rep.h2_worst_quotient < 1e-2);  // tiny near the flat minimum
  }
}
