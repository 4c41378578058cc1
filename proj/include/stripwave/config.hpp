#pragma once

#include "io.hpp"

namespace stripwave {

enum class Subcommand { solve, ode, phi, decay_fit, cutoff_test, check };

// Effective run configuration: everything the CLI needs, with defaults
// filled and cross-field rules validated up front. The JSON echo written to
// the output directory parses back to the identical effective config.
struct RunConfig {
  // potential
  std::string family = "scalar_quartic";
  int m = 0;  // 0: family default
  std::vector<double> a_minus, a_plus;  // empty: family default
  double r0 = 0.0;                      // 0: family default
  double M = 0.0;
  // strip
  StripSpec strip;
  // grid
  double h = 1.0 / 32;
  double T = 8.0;
  // constraint
  int N = 2;
  // optimizer
  double tol = 1e-6;
  int max_iter = 20000;
  std::uint64_t seed = 0;
  // orchestration
  int threads = 1;
  std::string output_dir = "out";
  bool dump_mask = false;
  // subcommand extras
  double phi_t = 0.0625;
  std::string phi_f_mode = "linear";  // or "envelope"
  double phi_c2 = 1.0;
  int phi_j_max = 4;
  int decay_side = +1;
  std::string input_field;
  int cutoff_trials = 200;
  double cutoff_r = 0.0;  // 0: r0/4

  Potential make_potential() const {
    Potential P;
    if (family == "scalar_quartic") {
      P = scalar_quartic();
    } else if (family == "product_well") {
      P = product_well(m > 0 ? m : 2, a_minus, a_plus);
    } else if (family == "degenerate_well") {
      P = degenerate_well(m > 0 ? m : 2, a_minus, a_plus);
    } else {
      throw ConfigError("potential.family: unknown family '" + family + "'");
    }
    if (r0 > 0.0) P.r0 = r0;
    if (M > 0.0) P.M = M;
    return P;
  }

  MinimizeOpts make_opts() const {
    MinimizeOpts o;
    o.tol = tol;
    o.max_iter = max_iter;
    o.threads = threads;
    return o;
  }
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

inline std::vector<double> get_vec(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (!j.at(key).is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
  return j.at(key).get<std::vector<double>>();
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text, Subcommand sub = Subcommand::solve) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  if (j.contains("potential")) {
    const auto& p = j.at("potential");
    if (p.is_string()) {
      cfg.family = p.get<std::string>();
    } else {
      cfg.family = detail::get_or<std::string>(p, "family", cfg.family);
      cfg.m = detail::get_or<int>(p, "m", 0);
      cfg.a_minus = detail::get_vec(p, "a_minus");
      cfg.a_plus = detail::get_vec(p, "a_plus");
      cfg.r0 = detail::get_or<double>(p, "r0", 0.0);
      cfg.M = detail::get_or<double>(p, "M", 0.0);
    }
  }
  if (j.contains("strip")) {
    const auto& s = j.at("strip");
    cfg.strip.L = detail::get_or<double>(s, "L", 1.0);
    cfg.strip.R = detail::get_or<double>(s, "R", 2.0);
    const std::string kind = detail::get_or<std::string>(s, "kind", "flat");
    if (kind == "flat") {
      cfg.strip.kind = StripSpec::Kind::flat;
    } else if (kind == "sinusoidal") {
      cfg.strip.kind = StripSpec::Kind::sinusoidal;
      cfg.strip.amplitude = detail::get_or<double>(s, "amplitude", 0.2);
      cfg.strip.phase = detail::get_or<double>(s, "phase", 0.0);
    } else if (kind == "table") {
      cfg.strip.kind = StripSpec::Kind::table;
      if (!s.contains("table") || !s.at("table").is_array())
        throw ConfigError("strip.table: required array of [s, lo, hi] nodes");
      for (const auto& row : s.at("table")) {
        if (!row.is_array() || row.size() != 3)
          throw ConfigError("strip.table: each node must be [s, lo, hi]");
        cfg.strip.table.push_back({row[0].get<double>(), row[1].get<double>(),
                                   row[2].get<double>()});
      }
    } else {
      throw ConfigError("strip.kind: expected flat | sinusoidal | table, got '" + kind + "'");
    }
    cfg.strip.y_lo = detail::get_or<double>(s, "y_lo", 0.0);
    cfg.strip.y_hi = detail::get_or<double>(s, "y_hi", 1.0);
  }
  if (j.contains("grid")) {
    cfg.h = detail::get_or<double>(j.at("grid"), "h", cfg.h);
    cfg.T = detail::get_or<double>(j.at("grid"), "T", cfg.T);
  }
  if (j.contains("constraint")) cfg.N = detail::get_or<int>(j.at("constraint"), "N", cfg.N);
  if (j.contains("opts")) {
    const auto& o = j.at("opts");
    cfg.tol = detail::get_or<double>(o, "tol", cfg.tol);
    cfg.max_iter = detail::get_or<int>(o, "max_iter", cfg.max_iter);
    cfg.seed = detail::get_or<std::uint64_t>(o, "seed", cfg.seed);
  }
  cfg.threads = detail::get_or<int>(j, "threads", 1);
  cfg.output_dir = detail::get_or<std::string>(j, "output_dir", cfg.output_dir);
  cfg.dump_mask = detail::get_or<bool>(j, "dump_mask", false);
  if (j.contains("phi")) {
    const auto& p = j.at("phi");
    cfg.phi_t = detail::get_or<double>(p, "t", cfg.phi_t);
    cfg.phi_f_mode = detail::get_or<std::string>(p, "f_mode", cfg.phi_f_mode);
    cfg.phi_c2 = detail::get_or<double>(p, "c2", cfg.phi_c2);
    cfg.phi_j_max = detail::get_or<int>(p, "j_max", cfg.phi_j_max);
  }
  if (j.contains("decay")) {
    const auto& d = j.at("decay");
    const std::string side = detail::get_or<std::string>(d, "side", "+");
    if (side != "+" && side != "-") throw ConfigError("decay.side: expected '+' or '-'");
    cfg.decay_side = side == "+" ? +1 : -1;
    cfg.input_field = detail::get_or<std::string>(d, "input_field", "");
  }
  if (j.contains("cutoff")) {
    const auto& c = j.at("cutoff");
    cfg.cutoff_trials = detail::get_or<int>(c, "trials", cfg.cutoff_trials);
    cfg.cutoff_r = detail::get_or<double>(c, "r", 0.0);
  }

  // cross-field validation; h snapping is reported by build_mask
  const Potential P = cfg.make_potential();
  if (cfg.N < 1) throw ConfigError("constraint.N: must be >= 1");
  if (cfg.h <= 0.0) throw ConfigError("grid.h: must be positive");
  if (cfg.T <= 0.0) throw ConfigError("grid.T: must be positive");
  if (cfg.tol <= 0.0) throw ConfigError("opts.tol: must be positive");
  if (cfg.max_iter < 1) throw ConfigError("opts.max_iter: must be >= 1");
  if (cfg.threads < 1) throw ConfigError("threads: must be >= 1");
  const double np = cfg.T / cfg.strip.L;
  if (std::abs(np - std::llround(np)) > 1e-9)
    throw ConfigError("grid.T: must be an integer multiple of strip.L");
  // slab diagnostics need four periods of headroom; the 1D oracle only needs
  // the constrained tails to exist
  if (sub == Subcommand::solve && cfg.N * cfg.strip.L + 4.0 * cfg.strip.L > cfg.T + 1e-9)
    throw ConfigError("cross-field rule violated: NL+4L <= T");
  if (sub == Subcommand::ode && cfg.N * cfg.strip.L + cfg.strip.L > cfg.T + 1e-9)
    throw ConfigError("cross-field rule violated: NL+L <= T (ode)");
  if (cfg.cutoff_r > 0.0 && 2.0 * cfg.cutoff_r > P.r0)
    throw ConfigError("cross-field rule violated: 2r <= r0 (cutoff.r)");
  if (sub == Subcommand::phi && cfg.phi_t > P.r0 * P.r0 + 1e-12)
    throw ConfigError("cross-field rule violated: phi.t <= r0^2");
  cfg.strip.validate();
  return cfg;
}

inline json effective_json(const RunConfig& cfg) {
  json p = {{"family", cfg.family}};
  if (cfg.m > 0) p["m"] = cfg.m;
  if (!cfg.a_minus.empty()) p["a_minus"] = cfg.a_minus;
  if (!cfg.a_plus.empty()) p["a_plus"] = cfg.a_plus;
  if (cfg.r0 > 0.0) p["r0"] = cfg.r0;
  if (cfg.M > 0.0) p["M"] = cfg.M;
  json s = {{"L", cfg.strip.L}, {"R", cfg.strip.R}};
  switch (cfg.strip.kind) {
    case StripSpec::Kind::flat: s["kind"] = "flat"; break;
    case StripSpec::Kind::sinusoidal:
      s["kind"] = "sinusoidal";
      s["amplitude"] = cfg.strip.amplitude;
      s["phase"] = cfg.strip.phase;
      break;
    case StripSpec::Kind::table: {
      s["kind"] = "table";
      json rows = json::array();
      for (const auto& r : cfg.strip.table) rows.push_back({r[0], r[1], r[2]});
      s["table"] = rows;
      break;
    }
  }
  s["y_lo"] = cfg.strip.y_lo;
  s["y_hi"] = cfg.strip.y_hi;
  json j;
  j["potential"] = p;
  j["strip"] = s;
  j["grid"] = {{"h", cfg.h}, {"T", cfg.T}};
  j["constraint"] = {{"N", cfg.N}};
  j["opts"] = {{"tol", cfg.tol}, {"max_iter", cfg.max_iter}, {"seed", cfg.seed}};
  j["threads"] = cfg.threads;
  j["output_dir"] = cfg.output_dir;
  j["dump_mask"] = cfg.dump_mask;
  j["phi"] = {{"t", cfg.phi_t}, {"f_mode", cfg.phi_f_mode}, {"c2", cfg.phi_c2},
              {"j_max", cfg.phi_j_max}};
  j["decay"] = {{"side", cfg.decay_side > 0 ? "+" : "-"}, {"input_field", cfg.input_field}};
  j["cutoff"] = {{"trials", cfg.cutoff_trials}, {"r", cfg.cutoff_r}};
  return j;
}

}  // namespace stripwave
