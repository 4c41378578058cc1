#pragma once

#include "stripwave/stripwave.hpp"

namespace sw_test {

using namespace stripwave;

inline StripSpec flat_strip(double L = 1.0, double lo = 0.0, double hi = 1.0) {
  StripSpec s;
  s.kind = StripSpec::Kind::flat;
  s.L = L;
  s.y_lo = lo;
  s.y_hi = hi;
  return s;
}

inline StripSpec sinusoidal_strip(double L = 1.0, double amplitude = 0.2, double phase = 0.0) {
  StripSpec s;
  s.kind = StripSpec::Kind::sinusoidal;
  s.L = L;
  s.y_lo = 0.0;
  s.y_hi = 1.0;
  s.amplitude = amplitude;
  s.phase = phase;
  return s;
}

// y-independent tanh(s/sqrt(2)) profile, the scalar-quartic heteroclinic.
inline Field plant_tanh(const DiscreteDomain& D) {
  Field u(D, 1);
  for (std::size_t c = 0; c < D.n_cells(); ++c)
    u.data[c] = std::tanh(D.s_center(D.cells[c].first) / std::sqrt(2.0));
  return u;
}

inline Field random_field(const DiscreteDomain& D, int m, Rng& rng, double lo, double hi) {
  Field u(D, m);
  for (auto& x : u.data) x = uniform(rng, lo, hi);
  return u;
}

// directional derivative of the energy along d, via the residual identity
inline double energy_slope(const Field& u, const Field& d, const Potential& P) {
  const Field r = residual(u, P);
  const double h2 = u.dom->h * u.dom->h;
  double s = 0.0;
  for (std::size_t i = 0; i < u.data.size(); ++i) s -= h2 * r.data[i] * d.data[i];
  return s;
}

}  // namespace sw_test
