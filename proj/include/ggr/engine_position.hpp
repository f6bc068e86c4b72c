#pragma once

#include <vector>

#include "ggr/diagram_tables.hpp"
#include "ggr/errors.hpp"
#include "ggr/graphs.hpp"

namespace ggr {

// Position-space diagram value
//
//   Gamma(pi, G; x_1..x_q) = sign(pi) h^{dp} sum_{internal sites}
//       prod_j gamma(x_j - x_{pi(j)}) prod_{{u,v} in G} g(x_u - x_v),
//
// by direct summation over the internal configurations.  When q = 0 the
// summand is translation invariant and one internal vertex is pinned to the
// origin, trading one site sum for a factor L^d.
inline double position_value(const DiagramTables& t, const Diagram& dia,
                             const std::vector<long long>& external_sites) {
  if (static_cast<int>(external_sites.size()) != dia.q)
    throw input_error("diagram expects one site per external vertex");
  const long long s = t.sites();
  const int n = dia.q + dia.p;
  const int first_free = dia.q == 0 ? dia.q + 1 : dia.q; // pinned vertex if q = 0
  const int loops = n - first_free;

  std::vector<long long> site(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < dia.q; ++i) site[static_cast<std::size_t>(i)] = external_sites[static_cast<std::size_t>(i)];

  double total = 0.0;
  long long configs = 1;
  for (int i = 0; i < loops; ++i) {
    if (configs > (1LL << 40) / s) throw resource_error("position sum too large");
    configs *= s;
  }
  for (long long c = 0; c < configs; ++c) {
    long long rest = c;
    for (int i = 0; i < loops; ++i) {
      site[static_cast<std::size_t>(first_free + i)] = rest % s;
      rest /= s;
    }
    double prod = 1.0;
    for (int j = 0; j < n; ++j) {
      const long long d_idx =
          t.disp[static_cast<std::size_t>(site[static_cast<std::size_t>(j)] * s +
                                          site[static_cast<std::size_t>(dia.perm[static_cast<std::size_t>(j)])])];
      prod *= t.gamma_pos[static_cast<std::size_t>(d_idx)];
      if (prod == 0.0) break;
    }
    if (prod != 0.0) {
      for (const auto& [u, v] : dia.edges) {
        const long long d_idx =
            t.disp[static_cast<std::size_t>(site[static_cast<std::size_t>(u)] * s +
                                            site[static_cast<std::size_t>(v)])];
        prod *= t.g_pos[static_cast<std::size_t>(d_idx)];
      }
    }
    total += prod;
  }

  const int d = t.grid.d;
  double scale = dia.sign * std::pow(t.grid.h, d * dia.p);
  if (dia.q == 0) scale *= std::pow(t.grid.m, d); // pinned vertex: L^d / h^d
  return scale * total;
}

} // namespace ggr
