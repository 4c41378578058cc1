// Command-line front end: one subcommand per pillar of the solver
// (solve | ode | phi | decay-fit | cutoff-test | check).
// Exit codes: 0 success, 2 config error, 3 solver non-convergence,
// 4 invariant-check failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "stripwave/stripwave.hpp"

namespace fs = std::filesystem;
using namespace stripwave;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  int threads_override = 0;
  std::int64_t seed_override = -1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("-c,--config", args.config_path, "JSON configuration file")->required();
  sub->add_option("-o,--out", args.out_override, "output directory (overrides config)");
  sub->add_option("--threads", args.threads_override, "worker parallelism (overrides config)");
  sub->add_option("--seed", args.seed_override, "RNG seed (overrides config)");
}

RunConfig load(const CommonArgs& args, Subcommand sub) {
  RunConfig cfg = parse_config(read_text(args.config_path), sub);
  if (const char* env = std::getenv("STRIPWAVE_OUTDIR")) cfg.output_dir = env;
  if (!args.out_override.empty()) cfg.output_dir = args.out_override;  // flag wins
  if (args.threads_override > 0) cfg.threads = args.threads_override;
  if (args.seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed_override);
  return cfg;
}

fs::path prepare_outdir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_json_file(dir / "config_echo.json", effective_json(cfg));
  return dir;
}

void note_artifacts(const fs::path& dir, std::initializer_list<const char*> names) {
  for (const char* n : names) std::cout << (dir / n).string() << "\n";
}

int run_solve(const RunConfig& cfg) {
  const fs::path dir = prepare_outdir(cfg);
  const DiscreteDomain D = build_mask(cfg.strip, cfg.h, cfg.T);
  for (const auto& w : D.warnings) std::cerr << "warning: " << w << "\n";
  SolveConfig sc;
  sc.P = cfg.make_potential();
  sc.strip = cfg.strip;
  sc.h = D.h;
  sc.T = cfg.T;
  sc.N = cfg.N;
  sc.opts = cfg.make_opts();
  sc.seed = cfg.seed;
  sc.threads = cfg.threads;
  auto [u, rep] = solve_standing_wave(sc, D);
  write_field_csv(dir / "solution.csv", u);
  write_trace_csv(dir / "energy_trace.csv", rep.min_report.trace);
  write_json_file(dir / "report.json", to_json(rep));
  if (cfg.dump_mask) write_mask_csv(dir / "mask.csv", D);
  note_artifacts(dir, {"solution.csv", "report.json", "energy_trace.csv", "config_echo.json"});
  std::cerr << "solve: " << (rep.converged() ? "converged" : "NOT converged") << " in "
            << rep.min_report.iterations << " iterations, residual "
            << rep.min_report.residual_inf << ", wall " << rep.wall_seconds << " s\n";
  if (!rep.converged()) return 3;
  return rep.all_checks_pass() ? 0 : 4;
}

int run_ode(const RunConfig& cfg) {
  const fs::path dir = prepare_outdir(cfg);
  OdeParams params;
  params.L = cfg.strip.L;
  params.N = cfg.N;
  params.T = cfg.T;
  params.h = cfg.h;
  params.opts = cfg.make_opts();
  const Potential P = cfg.make_potential();
  const OdeSolution sol = solve_heteroclinic_1d(P, params);
  write_profile_csv(dir / "profile.csv", sol);
  json j;
  j["energy"] = sol.energy;
  j["equipartition_defect"] = sol.equipartition_defect;
  j["minimize"] = to_json(sol.report);
  write_json_file(dir / "ode_report.json", j);
  note_artifacts(dir, {"profile.csv", "ode_report.json", "config_echo.json"});
  return sol.report.converged ? 0 : 3;
}

int run_phi(const RunConfig& cfg) {
  const fs::path dir = prepare_outdir(cfg);
  const Potential P = cfg.make_potential();
  const DiscreteDomain D = build_mask(cfg.strip, cfg.h, cfg.strip.L);
  const Slab S = make_slab(D, 0.0);
  RadialBoundFn rb;
  if (cfg.phi_f_mode == "linear") {
    rb = linear_bound(cfg.phi_c2, P.r0);
  } else if (cfg.phi_f_mode == "envelope") {
    rb = compute_g(P);
    build_f(rb, FMode::envelope);
  } else {
    throw ConfigError("phi.f_mode: expected linear | envelope");
  }
  PhiProblem prob{S, &rb, cfg.phi_t};
  const PhiSolution sol = solve_phi(prob);
  const double th = t_hat(prob, sol);
  const TjSequence seq = iterate_tj(S, rb, cfg.phi_t, cfg.phi_j_max);
  write_phi_csv(dir / "phi.csv", S, sol.phi);
  json j;
  j["t"] = cfg.phi_t;
  j["t_hat"] = th;
  j["contraction"] = cfg.phi_t > 0.0 ? th / cfg.phi_t : 0.0;
  j["residual_inf"] = sol.residual_inf;
  j["in_bounds"] = sol.in_bounds;
  j["used_picard"] = sol.used_picard;
  j["t_sequence"] = seq.values;
  j["theta"] = seq.theta ? json(*seq.theta) : json(nullptr);
  j["stalled"] = seq.stalled;
  write_json_file(dir / "phi_report.json", j);
  note_artifacts(dir, {"phi.csv", "phi_report.json", "config_echo.json"});
  if (!sol.converged) return 3;
  return sol.in_bounds ? 0 : 4;
}

int run_decay_fit(const RunConfig& cfg) {
  const fs::path dir = prepare_outdir(cfg);
  if (cfg.input_field.empty())
    throw ConfigError("decay.input_field: required (path to a solution csv)");
  const Potential P = cfg.make_potential();
  const DiscreteDomain D = build_mask(cfg.strip, cfg.h, cfg.T);
  const Field u = read_field_csv(cfg.input_field, D, P.m);
  const DecayFit fit = decay_fit(u, P, cfg.decay_side);
  write_json_file(dir / "decay.json", to_json(fit));
  note_artifacts(dir, {"decay.json", "config_echo.json"});
  return fit.ok ? 0 : 4;
}

int run_cutoff_test(const RunConfig& cfg) {
  const fs::path dir = prepare_outdir(cfg);
  const Potential P = cfg.make_potential();
  const DiscreteDomain D = build_mask(cfg.strip, cfg.h, 2.0 * cfg.strip.L);
  const double r = cfg.cutoff_r > 0.0 ? cfg.cutoff_r : 0.25 * P.r0;
  const CutoffTrialsReport rep = run_cutoff_trials(D, P, r, cfg.cutoff_trials, cfg.seed);
  json j = to_json(rep);
  j["r"] = r;
  j["seed"] = cfg.seed;
  write_json_file(dir / "cutoff_report.json", j);
  note_artifacts(dir, {"cutoff_report.json", "config_echo.json"});
  return rep.pass ? 0 : 4;
}

int run_check(const RunConfig& cfg) {
  const fs::path dir = prepare_outdir(cfg);
  const Potential P = cfg.make_potential();
  const HypothesisReport hyp = check_H1_H2_H3(P);
  json j;
  j["hypotheses"] = to_json(hyp);
  const EigReport em = min_eig_hess(P, P.a_minus);
  const EigReport ep = min_eig_hess(P, P.a_plus);
  j["hessian"] = {{"mu_min_at_a_minus", em.mu_min},
                  {"mu_min_at_a_plus", ep.mu_min},
                  {"degenerate_minus", em.degenerate},
                  {"degenerate_plus", ep.degenerate},
                  {"k0_candidate_plus", ep.k0_candidate},
                  {"k0_candidate_minus", em.k0_candidate}};
  bool pass = hyp.pass();
  try {
    RadialBoundFn rb = compute_g(P);
    build_f(rb, FMode::envelope);
    bool g_strict = true;
    for (std::size_t k = 1; k < rb.g_vals.size(); ++k)
      if (rb.g_vals[k] <= rb.g_vals[k - 1]) g_strict = false;
    j["g"] = {{"ok", true}, {"g_r0", rb.g_vals.back()}, {"strictly_increasing", g_strict}};
    j["f"] = {{"ok", true}, {"strictified", rb.strictified}, {"slack", rb.strict_slack}};
    try {
      RadialBoundFn lin = compute_g(P);
      build_f(lin, FMode::linear);
      j["f"]["linear_c2"] = *lin.linear_c2;
    } catch (const InvariantError& e) {
      j["f"]["linear_c2"] = nullptr;
      j["f"]["linear_mode_error"] = e.what();
    }
  } catch (const InvariantError& e) {
    j["g"] = {{"ok", false}, {"error", e.what()}};
    pass = false;
  }
  j["pass"] = pass;
  write_json_file(dir / "check_report.json", j);
  note_artifacts(dir, {"check_report.json", "config_echo.json"});
  return pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stripwave: heteroclinic standing waves on periodic strips"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* solve = app.add_subcommand("solve", "constrained standing-wave solve with diagnostics");
  auto* ode = app.add_subcommand("ode", "1D heteroclinic oracle");
  auto* phi = app.add_subcommand("phi", "scalar comparison problem on one period slab");
  auto* decay = app.add_subcommand("decay-fit", "exponential tail fit of a stored field");
  auto* cutoff = app.add_subcommand("cutoff-test", "randomized replacement-operator trials");
  auto* check = app.add_subcommand("check", "potential hypothesis checkers");
  for (auto* sub : {solve, ode, phi, decay, cutoff, check}) add_common(sub, args);

  CLI11_PARSE(app, argc, argv);
  try {
    Subcommand sub = Subcommand::solve;
    if (ode->parsed()) sub = Subcommand::ode;
    if (phi->parsed()) sub = Subcommand::phi;
    if (decay->parsed()) sub = Subcommand::decay_fit;
    if (cutoff->parsed()) sub = Subcommand::cutoff_test;
    if (check->parsed()) sub = Subcommand::check;
    const RunConfig cfg = load(args, sub);
    if (solve->parsed()) return run_solve(cfg);
    if (ode->parsed()) return run_ode(cfg);
    if (phi->parsed()) return run_phi(cfg);
    if (decay->parsed()) return run_decay_fit(cfg);
    if (cutoff->parsed()) return run_cutoff_test(cfg);
    if (check->parsed()) return run_check(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
