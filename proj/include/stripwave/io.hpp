#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "comparison_decay.hpp"
#include "driver.hpp"
#include "ode_oracle.hpp"
#include "polar_cutoff.hpp"

namespace stripwave {

using json = nlohmann::ordered_json;

// 17 significant digits round-trips doubles exactly.
inline std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed: " + path.string());
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_field_csv(const std::filesystem::path& path, const Field& u) {
  const DiscreteDomain& D = *u.dom;
  std::string out = "i,j,s,y";
  for (int k = 1; k <= u.m; ++k) out += ",u_" + std::to_string(k);
  out += "\n";
  for (std::size_t c = 0; c < u.n_cells(); ++c) {
    const auto [i, j] = D.cells[c];
    out += std::to_string(i) + "," + std::to_string(j) + "," + fmt17(D.s_center(i)) + "," +
           fmt17(D.y_center(j));
    const auto uc = u.cell(static_cast<std::int32_t>(c));
    for (int k = 0; k < u.m; ++k) out += "," + fmt17(uc[k]);
    out += "\n";
  }
  write_text(path, out);
}

inline Field read_field_csv(const std::filesystem::path& path, const DiscreteDomain& D, int m) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty field csv: " + path.string());
  Field u(D, m);
  std::vector<std::uint8_t> seen(D.n_cells(), 0);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != static_cast<std::size_t>(4 + m))
      throw ConfigError("field csv: bad column count in line '" + line + "'");
    const int i = static_cast<int>(vals[0]), j = static_cast<int>(vals[1]);
    const std::int32_t c = D.cell_at(i, j);
    if (c < 0)
      throw ConfigError("field csv: cell (" + std::to_string(i) + "," + std::to_string(j) +
                        ") is not active in this domain");
    for (int k = 0; k < m; ++k) u.data[static_cast<std::size_t>(c) * m + k] = vals[4 + k];
    seen[c] = 1;
    ++rows;
  }
  if (rows != D.n_cells())
    throw ConfigError("field csv: " + std::to_string(rows) + " rows for " +
                      std::to_string(D.n_cells()) + " active cells");
  return u;
}

inline void write_mask_csv(const std::filesystem::path& path, const DiscreteDomain& D) {
  std::string out;
  for (int j = D.n_rows - 1; j >= 0; --j) {
    for (int i = 0; i < D.n_cols; ++i) {
      out += D.cell_at(i, j) >= 0 ? '1' : '0';
      out += i + 1 < D.n_cols ? ',' : '\n';
    }
  }
  write_text(path, out);
}

inline void write_trace_csv(const std::filesystem::path& path, const std::vector<double>& trace) {
  std::string out = "iter,energy\n";
  for (std::size_t k = 0; k < trace.size(); ++k)
    out += std::to_string(k) + "," + fmt17(trace[k]) + "\n";
  write_text(path, out);
}

inline void write_phi_csv(const std::filesystem::path& path, const Slab& S,
                          const std::vector<double>& phi) {
  const DiscreteDomain& D = *S.dom;
  std::string out = "i,j,s,y,phi\n";
  for (std::size_t lc = 0; lc < S.size(); ++lc) {
    const auto [i, j] = D.cells[S.cells[lc]];
    out += std::to_string(i) + "," + std::to_string(j) + "," + fmt17(D.s_center(i)) + "," +
           fmt17(D.y_center(j)) + "," + fmt17(phi[lc]) + "\n";
  }
  write_text(path, out);
}

inline void write_profile_csv(const std::filesystem::path& path, const OdeSolution& sol) {
  std::string out = "i,s";
  for (int k = 1; k <= sol.m; ++k) out += ",u_" + std::to_string(k);
  out += "\n";
  for (int i = 0; i < sol.n(); ++i) {
    out += std::to_string(i) + "," + fmt17(sol.s[i]);
    for (int k = 0; k < sol.m; ++k)
      out += "," + fmt17(sol.u[static_cast<std::size_t>(i) * sol.m + k]);
    out += "\n";
  }
  write_text(path, out);
}

// --- report serialization (wall-clock times stay out of the artifacts so
// identical config + seed reproduces files bitwise) ---

inline json to_json(const EnergyBreakdown& e) {
  return {{"dirichlet", e.dirichlet}, {"potential", e.potential}, {"total", e.total}};
}

inline json to_json(const MinimizeReport& r) {
  return {{"converged", r.converged},
          {"stalled", r.stalled},
          {"hit_iteration_cap", r.hit_cap},
          {"iterations", r.iterations},
          {"backtracks", r.backtracks},
          {"energy", to_json(r.energy)},
          {"residual_inf", r.residual_inf},
          {"projected_residual_inf", r.projected_residual_inf}};
}

inline json to_json(const DecayFit& f) {
  return {{"ok", f.ok},         {"k0", f.k0},
          {"K0", f.K0},         {"fit_residual", f.fit_residual},
          {"s_lo", f.s_lo},     {"s_hi", f.s_hi},
          {"n_cols", f.n_cols}, {"k0_linearization", f.k0_linearization},
          {"message", f.message}};
}

inline json to_json(const ComparisonReport& r) {
  json slabs = json::array();
  for (const auto& s : r.slabs)
    slabs.push_back({{"k", s.k},
                     {"side", s.side},
                     {"t", s.t},
                     {"t_hat", s.t_hat},
                     {"max_violation", s.max_violation},
                     {"pass", s.pass}});
  return {{"eps_disc", r.eps_disc}, {"pass", r.pass}, {"slabs", slabs}};
}

inline json to_json(const SolveReport& r) {
  json j;
  j["status"] = r.converged() ? "converged" : (r.min_report.stalled ? "stalled" : "cap");
  j["minimize"] = to_json(r.min_report);
  j["energy"] = to_json(r.energy);
  j["affine_energy"] = r.affine_energy;
  j["constraint"] = {{"inactive", r.constraint_inactive},
                     {"margin_required", r.margin_required},
                     {"active_band_plus", r.active_band_plus},
                     {"active_tail_plus", r.active_tail_plus},
                     {"active_band_minus", r.active_band_minus},
                     {"active_tail_minus", r.active_tail_minus},
                     {"margin_plus", r.margin_plus},
                     {"margin_minus", r.margin_minus},
                     {"translated", r.translated},
                     {"existence_diagnostic_fail", r.existence_diagnostic_fail}};
  j["transition"] = {{"r", r.r_transition},
                     {"free_column", r.transition_free_column
                                         ? json(*r.transition_free_column)
                                         : json(nullptr)},
                     {"Z", r.Z},
                     {"w0_estimate", r.w0_estimate},
                     {"z_ratio_bound", r.z_ratio_bound},
                     {"z_bound_ok", r.z_bound_ok}};
  j["comparison"] = to_json(r.comparison);
  j["decay_plus"] = to_json(r.decay_plus);
  j["decay_minus"] = to_json(r.decay_minus);
  j["linear_c2"] = r.linear_c2 ? json(*r.linear_c2) : json(nullptr);
  j["all_checks_pass"] = r.all_checks_pass();
  return j;
}

inline json to_json(const HypothesisReport& r) {
  return {{"h1", r.h1},
          {"h2", r.h2},
          {"h3", r.h3},
          {"h1_min_outside", r.h1_min_outside},
          {"h1_at_minima", r.h1_at_minima},
          {"h2_worst_quotient", r.h2_worst_quotient},
          {"h3_worst_margin", r.h3_worst_margin},
          {"pass", r.pass()}};
}

inline json to_json(const CutoffTrialsReport& r) {
  return {{"trials_step1", r.trials_step1},
          {"trials_step2", r.trials_step2},
          {"trials_identity", r.trials_identity},
          {"failures", r.failures},
          {"min_decrease_step1", r.min_decrease_step1},
          {"min_decrease_step2", r.min_decrease_step2},
          {"max_sup_after", r.max_sup_after},
          {"pass", r.pass}};
}

inline json to_json(const OdeComparison& c) {
  return {{"centered", c.centered},
          {"shift", c.shift},
          {"max_col_deviation", c.max_col_deviation},
          {"max_y_variation", c.max_y_variation},
          {"message", c.message}};
}

}  // namespace stripwave
