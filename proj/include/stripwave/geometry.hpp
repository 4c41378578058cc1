#pragma once

#include <array>
#include <numbers>
#include <utility>

#include "common.hpp"

namespace stripwave {

// Periodic strip {(s, y) : g_lo(s) < y < g_hi(s)} with L-periodic C^2
// boundary functions bounded by R. The flat kind is the cylinder case.
struct StripSpec {
  enum class Kind { flat, sinusoidal, table };
  Kind kind = Kind::flat;
  double L = 1.0;
  double R = 2.0;
  double y_lo = 0.0, y_hi = 1.0;
  double amplitude = 0.0, phase = 0.0;               // top boundary modulation
  std::vector<std::array<double, 3>> table;          // (s, lo, hi), s in [0, L)

  double lo(double s) const {
    if (kind != Kind::table) return y_lo;
    return interp(s, 1);
  }
  double hi(double s) const {
    switch (kind) {
      case Kind::flat: return y_hi;
      case Kind::sinusoidal:
        return y_hi + amplitude * std::sin(2.0 * std::numbers::pi * s / L + phase);
      case Kind::table: return interp(s, 2);
    }
    return y_hi;
  }
  bool flat() const { return kind == Kind::flat; }

  void validate(int n_samples = 256) const {
    if (L <= 0.0) throw ConfigError("strip: L must be positive");
    if (R <= 0.0) throw ConfigError("strip: R must be positive");
    if (kind == Kind::table && table.size() < 2)
      throw ConfigError("strip: table needs at least two nodes");
    for (int k = 0; k < n_samples; ++k) {
      const double s = L * k / n_samples;
      const double a = lo(s), b = hi(s);
      if (!(b - a > 0.0))
        throw InvariantError("strip: empty cross-section, hi <= lo at s = " + std::to_string(s));
      if (std::abs(a) > R || std::abs(b) > R)
        throw InvariantError("strip: boundary exceeds |y| <= R at s = " + std::to_string(s));
      const double dp = std::abs(lo(s + L) - a) + std::abs(hi(s + L) - b);
      if (dp > 1e-9 * (1.0 + std::abs(a) + std::abs(b)))
        throw InvariantError("strip: boundary not L-periodic at s = " + std::to_string(s));
    }
  }

 private:
  double interp(double s, int comp) const {
    double x = std::fmod(s, L);
    if (x < 0.0) x += L;
    std::size_t k = 0;
    while (k + 1 < table.size() && table[k + 1][0] <= x) ++k;
    const double s0 = table[k][0];
    const double s1 = (k + 1 < table.size()) ? table[k + 1][0] : table[0][0] + L;
    const auto& v1 = (k + 1 < table.size()) ? table[k + 1] : table[0];
    const double w = (x - s0) / (s1 - s0);
    return (1.0 - w) * table[k][comp] + w * v1[comp];
  }
};

// Cell-centered mask over [-T, T] x [y0, y0 + n_rows h]. A cell is active iff
// its center lies strictly inside the strip. Neumann boundaries are realized
// by omitting fluxes through faces to inactive cells, so no boundary fitting
// is needed. Immutable after construction.
struct DiscreteDomain {
  StripSpec strip;
  double h = 0.0;  // snapped to L / round(L/h)
  double T = 0.0;
  int n_cols = 0, n_rows = 0;
  double y0 = 0.0;
  int period_cells = 0;
  bool periodic_mask = false;

  std::vector<std::int32_t> id;                   // n_cols*n_rows, -1 = inactive
  std::vector<std::pair<int, int>> cells;         // (col, row) per active id
  std::vector<std::array<std::int32_t, 4>> nbr;   // left, right, down, up (-1 = none)
  struct Face {
    std::int32_t a, b;  // active ids, a is the left/lower cell
    std::int32_t col;   // owner column (column of a)
    std::int8_t axis;   // 0: s-direction, 1: y-direction
  };
  std::vector<Face> faces;
  std::vector<std::int32_t> col_start;   // cells of column i: [col_start[i], col_start[i+1])
  std::vector<std::int32_t> face_start;  // faces owned by column i
  std::vector<std::string> warnings;

  double s_center(int i) const { return -T + (i + 0.5) * h; }
  double y_center(int j) const { return y0 + (j + 0.5) * h; }
  int col_of_s(double s) const {
    return std::clamp(static_cast<int>(std::floor((s + T) / h)), 0, n_cols - 1);
  }
  std::size_t n_cells() const { return cells.size(); }
  std::int32_t cell_at(int i, int j) const {
    if (i < 0 || i >= n_cols || j < 0 || j >= n_rows) return -1;
    return id[static_cast<std::size_t>(i) * n_rows + j];
  }
  int column_size(int i) const { return col_start[i + 1] - col_start[i]; }
};

inline DiscreteDomain build_mask(const StripSpec& spec, double h_req, double T) {
  spec.validate();
  DiscreteDomain D;
  D.strip = spec;
  const int k = static_cast<int>(std::llround(spec.L / h_req));
  if (k < 1) throw ConfigError("grid: h larger than the period L");
  D.h = spec.L / k;
  if (std::abs(D.h - h_req) > 1e-12 * spec.L)
    D.warnings.push_back("h snapped to L/" + std::to_string(k) + " = " + std::to_string(D.h));
  const double np = T / spec.L;
  if (std::abs(np - std::llround(np)) > 1e-9)
    throw ConfigError("grid: T must be an integer multiple of L");
  D.T = T;
  D.period_cells = k;
  D.n_cols = 2 * static_cast<int>(std::llround(np)) * k;
  if (D.n_cols <= 0) throw ConfigError("grid: empty domain, T must be positive");

  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < D.n_cols; ++i) {
    const double s = D.s_center(i);
    ymin = std::min(ymin, spec.lo(s));
    ymax = std::max(ymax, spec.hi(s));
  }
  D.y0 = std::floor(ymin / D.h) * D.h;
  D.n_rows = static_cast<int>(std::ceil((ymax - D.y0) / D.h - 1e-12));

  D.id.assign(static_cast<std::size_t>(D.n_cols) * D.n_rows, -1);
  D.col_start.assign(D.n_cols + 1, 0);
  for (int i = 0; i < D.n_cols; ++i) {
    D.col_start[i] = static_cast<std::int32_t>(D.cells.size());
    const double s = D.s_center(i);
    const double a = spec.lo(s), b = spec.hi(s);
    int count = 0;
    for (int j = 0; j < D.n_rows; ++j) {
      const double y = D.y_center(j);
      if (y > a && y < b) {
        D.id[static_cast<std::size_t>(i) * D.n_rows + j] =
            static_cast<std::int32_t>(D.cells.size());
        D.cells.emplace_back(i, j);
        ++count;
      }
    }
    if (count == 0)
      throw InvariantError("build_mask: empty cross-section at s = " + std::to_string(s));
  }
  D.col_start[D.n_cols] = static_cast<std::int32_t>(D.cells.size());

  D.nbr.resize(D.cells.size());
  for (std::size_t c = 0; c < D.cells.size(); ++c) {
    const auto [i, j] = D.cells[c];
    D.nbr[c] = {D.cell_at(i - 1, j), D.cell_at(i + 1, j), D.cell_at(i, j - 1),
                D.cell_at(i, j + 1)};
    if (D.nbr[c][0] < 0 && D.nbr[c][1] < 0 && D.nbr[c][2] < 0 && D.nbr[c][3] < 0)
      throw InvariantError("build_mask: isolated cell at column " + std::to_string(i));
  }

  D.face_start.assign(D.n_cols + 1, 0);
  for (int i = 0; i < D.n_cols; ++i) {
    D.face_start[i] = static_cast<std::int32_t>(D.faces.size());
    for (std::int32_t c = D.col_start[i]; c < D.col_start[i + 1]; ++c) {
      if (D.nbr[c][1] >= 0) D.faces.push_back({c, D.nbr[c][1], i, 0});
      if (D.nbr[c][3] >= 0) D.faces.push_back({c, D.nbr[c][3], i, 1});
    }
  }
  D.face_start[D.n_cols] = static_cast<std::int32_t>(D.faces.size());

  // mask periodicity: columns one period apart carry the same rows
  D.periodic_mask = true;
  for (int i = 0; i + D.period_cells < D.n_cols && D.periodic_mask; ++i) {
    if (D.column_size(i) != D.column_size(i + D.period_cells)) D.periodic_mask = false;
    for (std::int32_t c = D.col_start[i]; c < D.col_start[i + 1] && D.periodic_mask; ++c) {
      const int j = D.cells[c].second;
      if (D.cell_at(i + D.period_cells, j) < 0) D.periodic_mask = false;
    }
  }
  return D;
}

// True iff the active cells of column `col` form one edge-connected component.
inline bool check_connectedness(const DiscreteDomain& D, int col) {
  if (col < 0 || col >= D.n_cols || D.column_size(col) == 0) return false;
  std::vector<std::int32_t> stack = {D.col_start[col]};
  std::vector<std::uint8_t> seen(D.column_size(col), 0);
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    const std::int32_t c = stack.back();
    stack.pop_back();
    for (int d : {2, 3}) {
      const std::int32_t n = D.nbr[c][d];
      if (n >= D.col_start[col] && n < D.col_start[col + 1] && !seen[n - D.col_start[col]]) {
        seen[n - D.col_start[col]] = 1;
        ++visited;
        stack.push_back(n);
      }
    }
  }
  return visited == D.column_size(col);
}

// Edge-connectivity of an arbitrary active-cell subset (flood fill).
inline bool is_edge_connected(const DiscreteDomain& D, const std::vector<std::int32_t>& set) {
  if (set.empty()) return false;
  std::vector<std::uint8_t> in(D.n_cells(), 0);
  for (auto c : set) in[c] = 1;
  std::vector<std::int32_t> stack = {set.front()};
  std::vector<std::uint8_t> seen(D.n_cells(), 0);
  seen[set.front()] = 1;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const std::int32_t c = stack.back();
    stack.pop_back();
    for (int d = 0; d < 4; ++d) {
      const std::int32_t n = D.nbr[c][d];
      if (n >= 0 && in[n] && !seen[n]) {
        seen[n] = 1;
        ++visited;
        stack.push_back(n);
      }
    }
  }
  return visited == set.size();
}

}  // namespace stripwave
