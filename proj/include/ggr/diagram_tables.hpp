#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "ggr/errors.hpp"
#include "ggr/free_lattice.hpp"
#include "ggr/scattering.hpp"
#include "ggr/torus_grid.hpp"

namespace ggr {

// Everything a diagram evaluation needs, tabulated once per model/pair factor:
// the free kernel and Fermi factor, the pair correlation g = f^2 - 1 sampled
// at minimum-image distances, its lattice Fourier transform, and a pairwise
// displacement index so inner loops are pure table lookups.
struct DiagramTables {
  TorusGrid grid;
  std::vector<double> gamma_pos; // gamma(x) per displacement site
  std::vector<double> g_pos;     // g(x) per displacement site
  std::vector<double> gamma_hat; // Fermi factor per momentum site
  std::vector<double> g_hat;     // g transform per momentum site (real, even)
  std::vector<int> disp;         // disp[s1 * sites + s2] = index of x_{s1} - x_{s2}
  double rho0 = 0.0;

  long long sites() const { return grid.sites(); }
};

inline DiagramTables build_diagram_tables(const DiscreteTorusModel& model,
                                          const std::function<double(double)>& pair_g) {
  model.validate();
  const long long s = model.grid.sites();
  if (s * s > (1LL << 24))
    throw resource_error("diagram tables need sites^2 storage; grid too large");
  DiagramTables t;
  t.grid = model.grid;
  t.gamma_hat = model.occupation_table();
  t.gamma_pos = model.kernel_table();
  t.rho0 = t.gamma_pos[0];

  t.g_pos.resize(static_cast<std::size_t>(s));
  std::array<int, 3> x = {0, 0, 0};
  for (long long i = 0; i < s; ++i) {
    model.grid.decode(i, x);
    t.g_pos[static_cast<std::size_t>(i)] = pair_g(std::sqrt(model.grid.min_image_norm2(x)));
  }

  // ghat(q) = h^d sum_x g(x) cos(2 pi q . x / m); gamma and g are both even.
  const int m = model.grid.m;
  std::vector<double> ct(static_cast<std::size_t>(m));
  for (int tt = 0; tt < m; ++tt) ct[static_cast<std::size_t>(tt)] = std::cos(2.0 * M_PI * tt / m);
  t.g_hat.assign(static_cast<std::size_t>(s), 0.0);
  const double hd = std::pow(model.grid.h, model.grid.d);
  std::array<int, 3> k = {0, 0, 0};
  for (long long ik = 0; ik < s; ++ik) {
    model.grid.decode(ik, k);
    double acc = 0.0;
    for (long long ix = 0; ix < s; ++ix) {
      model.grid.decode(ix, x);
      long long phase = 0;
      for (int ax = 0; ax < model.grid.d; ++ax)
        phase += static_cast<long long>(k[static_cast<std::size_t>(ax)]) *
                 x[static_cast<std::size_t>(ax)];
      acc += t.g_pos[static_cast<std::size_t>(ix)] * ct[static_cast<std::size_t>(phase % m)];
    }
    t.g_hat[static_cast<std::size_t>(ik)] = acc * hd;
  }

  t.disp.resize(static_cast<std::size_t>(s * s));
  std::array<int, 3> a = {0, 0, 0}, b = {0, 0, 0}, dxy = {0, 0, 0};
  for (long long i = 0; i < s; ++i) {
    model.grid.decode(i, a);
    for (long long j = 0; j < s; ++j) {
      model.grid.decode(j, b);
      for (int ax = 0; ax < model.grid.d; ++ax)
        dxy[static_cast<std::size_t>(ax)] =
            a[static_cast<std::size_t>(ax)] - b[static_cast<std::size_t>(ax)];
      t.disp[static_cast<std::size_t>(i * s + j)] =
          static_cast<int>(model.grid.encode(dxy));
    }
  }
  return t;
}

inline DiagramTables build_diagram_tables(const DiscreteTorusModel& model,
                                          const JastrowFactor& jf) {
  if (jf.b > 0.5 * model.grid.length())
    throw input_error("healing radius must not exceed half the torus length");
  return build_diagram_tables(model, [&jf](double r) { return jf.g(r); });
}

} // namespace ggr
