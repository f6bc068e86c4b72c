#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ggr/constants.hpp"
#include "ggr/diagram_tables.hpp"
#include "ggr/engine_position.hpp"
#include "ggr/errors.hpp"
#include "ggr/free_lattice.hpp"
#include "ggr/graphs.hpp"

namespace ggr {

// Linked-diagram (cluster) expansion of the pair-modified partition function
// and reduced densities, together with the absolute-convergence check and the
// geometric tail estimate used to certify truncations.
//
// The small parameters are the grid L1 masses
//   I_g     = h^d sum_x |g(x)|,      I_gamma = h^d sum_x |gamma(x)|,
// and the expansion converges once rho0 * I_g (and rho0 * I_g * I_gamma) are
// small.  Tail classes are indexed by the number k0 of vacuum pair clusters
// and the excess edge count n_g0, at fixed external count m:
//   m = 0:  C L^d rho0 (C rho0 I_g)^{n_g0 + k0} I_gamma^{k0 - 1}
//   m > 0:  C_m rho0^m (C rho0 I_g)^{n_g0 + k0} I_gamma^{k0},
// with p = 2 k0 + n_g0.  The constants are not universal numbers; they live
// in the ConstantRegistry (keys "tail.C" and "tail.Cm") and are fitted once
// on exactly enumerable orders, then reused unchanged for every prediction.

struct ExpansionNorms {
  double rho0 = 0.0;
  double I_g = 0.0;
  double I_gamma = 0.0;
  double volume = 0.0; // L^d
};

inline ExpansionNorms expansion_norms(const DiagramTables& t) {
  ExpansionNorms n;
  n.rho0 = t.rho0;
  n.I_g = kernel_abs_moment(t.grid, t.g_pos, 0);
  n.I_gamma = kernel_abs_moment(t.grid, t.gamma_pos, 0);
  n.volume = std::pow(t.grid.length(), t.grid.d);
  return n;
}

// ---------------------------------------------------------------------------
// Tail bounds by (k0, n_g0) class
// ---------------------------------------------------------------------------

inline double tail_class_bound(int m, int k0, int n_g0, const ExpansionNorms& norms,
                               const ConstantRegistry& reg) {
  if (k0 < 0 || n_g0 < 0 || m < 0) throw input_error("tail class indices must be nonnegative");
  if (m == 0 && k0 < 1) throw input_error("vacuum tail classes need at least one pair cluster");
  const double C = reg.get("tail.C");
  const double x = C * norms.rho0 * norms.I_g;
  if (m == 0)
    return C * norms.volume * norms.rho0 * std::pow(x, n_g0 + k0) *
           std::pow(norms.I_gamma, k0 - 1);
  const double Cm = reg.get("tail.Cm." + std::to_string(m));
  return Cm * std::pow(norms.rho0, m) * std::pow(x, n_g0 + k0) * std::pow(norms.I_gamma, k0);
}

// Sum of tail_class_bound over every class with 2 k0 + n_g0 > p_max.  Returns
// +infinity when the underlying geometric series does not converge.
inline double tail_sum(int m, int p_max, const ExpansionNorms& norms,
                       const ConstantRegistry& reg) {
  const double C = reg.get("tail.C");
  const double x = C * norms.rho0 * norms.I_g;
  const double y = norms.I_gamma;
  if (!(x < 1.0) || !(x * y < 1.0)) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  const int k_lo = m == 0 ? 1 : 0;
  for (int k0 = k_lo; k0 < 400; ++k0) {
    const int n0 = std::max(0, p_max + 1 - 2 * k0);
    // sum over n_g0 >= n0 of x^{n_g0 + k0} = x^{k0 + n0} / (1 - x)
    const double geom = std::pow(x, k0 + n0) / (1.0 - x);
    double term;
    if (m == 0) {
      term = reg.get("tail.C") * norms.volume * norms.rho0 * geom * std::pow(y, k0 - 1);
    } else {
      term = reg.get("tail.Cm." + std::to_string(m)) * std::pow(norms.rho0, m) * geom *
             std::pow(y, k0);
    }
    total += term;
    if (term < 1e-300 * std::max(total, 1.0) && k0 > p_max) break;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Exactly enumerated orders
// ---------------------------------------------------------------------------

inline double factorial(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

// (1/p!) sum of diagram values over the linked family at order p, grouped by
// (k, n_g + n_g*).  For q = 0 the family is the linked vacuum set; for q >= 1
// it is the set whose every component touches an external vertex.
inline std::map<std::pair<int, int>, double> class_sums(const DiagramTables& t, int q, int p,
                                                        const std::vector<long long>& ext) {
  const auto all = q == 0 ? linked_diagrams(0, p) : tilde_linked_diagrams(q, p);
  std::map<std::pair<int, int>, double> out;
  const double w = 1.0 / factorial(p);
  for (const auto& dia : all) {
    const auto key = std::make_pair(dia.stats.k, dia.stats.n_g + dia.stats.n_g_star);
    out[key] += w * position_value(t, dia, ext);
  }
  return out;
}

struct ExpansionTerm {
  int p = 0;
  double value = 0.0; // (1/p!) sum over the linked family at order p
};

struct SeriesResult {
  std::vector<ExpansionTerm> terms;
  double total = 0.0;
  double tail = 0.0; // tail_sum estimate beyond the truncation
};

// log(Z_J / Z) truncated at p_max: sum_{2 <= p <= p_max} (1/p!) sum over
// linked vacuum diagrams, with the geometric class-tail estimate attached.
inline SeriesResult zj_expansion(const DiagramTables& t, int p_max,
                                 const ConstantRegistry& reg) {
  if (p_max < 2) throw input_error("partition-function expansion starts at order 2");
  SeriesResult res;
  for (int p = 2; p <= p_max; ++p) {
    ExpansionTerm term;
    term.p = p;
    const double w = 1.0 / factorial(p);
    for (const auto& dia : linked_diagrams(0, p)) term.value += w * position_value(t, dia, {});
    res.total += term.value;
    res.terms.push_back(term);
  }
  res.tail = tail_sum(0, p_max, expansion_norms(t), reg);
  return res;
}

// Reduced q-point density of the pair-modified state, truncated at p_max:
//   prod_{i<j} f(x_i - x_j)^2 * sum_{p <= p_max} (1/p!) sum over the
//   external-rooted linked family.  The pair factor is recovered from the
//   tabulated g = f^2 - 1.
inline SeriesResult rhoJ_expansion(const DiagramTables& t, int q,
                                   const std::vector<long long>& ext, int p_max,
                                   const ConstantRegistry& reg) {
  if (q < 1 || q > 3) throw input_error("reduced densities supported for 1 <= q <= 3");
  if (static_cast<int>(ext.size()) != q) throw input_error("need one site per external point");
  const long long s = t.sites();
  double prefactor = 1.0;
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) {
      const long long disp =
          t.disp[static_cast<std::size_t>(ext[static_cast<std::size_t>(i)] * s +
                                          ext[static_cast<std::size_t>(j)])];
      prefactor *= 1.0 + t.g_pos[static_cast<std::size_t>(disp)];
    }
  SeriesResult res;
  for (int p = 0; p <= p_max; ++p) {
    ExpansionTerm term;
    term.p = p;
    const double w = 1.0 / factorial(p);
    for (const auto& dia : tilde_linked_diagrams(q, p))
      term.value += w * position_value(t, dia, ext);
    term.value *= prefactor;
    res.total += term.value;
    res.terms.push_back(term);
  }
  res.tail = tail_sum(q, p_max, expansion_norms(t), reg);
  return res;
}

// ---------------------------------------------------------------------------
// Absolute-convergence left-hand side
// ---------------------------------------------------------------------------

// sum_{p <= p_max} (1/p!) h^{dp} sum_{internal sites} |W_p^q| rho^{(q+p)}
// where W_p^q sums prod g_e over admissible graphs and rho^{(n)} is the Wick
// determinant of the free kernel.  For q = 0 translation invariance pins the
// first internal vertex (times the site count).
inline double convergence_lhs(const DiagramTables& t, int q, int p_max,
                              const std::vector<long long>& ext) {
  if (q < 0 || static_cast<int>(ext.size()) != q) throw input_error("bad external configuration");
  if (q + p_max > 7) throw resource_error("convergence check bounded to q + p <= 7");
  const long long s = t.sites();
  const double hd = std::pow(t.grid.h, t.grid.d);
  double total = 0.0;
  const int p_lo = q == 0 ? 2 : 0;
  std::vector<std::array<int, 3>> pts;
  for (int p = p_lo; p <= p_max; ++p) {
    const auto graphs = enumerate_graphs(q, p);
    const int n = q + p;
    const int first_free = q == 0 ? 1 : 0; // pin one internal in the vacuum case
    const int loops = p - (q == 0 ? 1 : 0);
    long long configs = 1;
    for (int i = 0; i < loops; ++i) {
      configs *= s;
      if (configs > (1LL << 40)) throw resource_error("convergence sum too large");
    }
    std::vector<long long> site(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < q; ++i) site[static_cast<std::size_t>(i)] = ext[static_cast<std::size_t>(i)];
    pts.assign(static_cast<std::size_t>(n), {0, 0, 0});
    double acc = 0.0;
    for (long long c = 0; c < configs; ++c) {
      long long rest = c;
      for (int j = n - 1; j >= q + first_free; --j) {
        site[static_cast<std::size_t>(j)] = rest % s;
        rest /= s;
      }
      for (int j = 0; j < n; ++j)
        t.grid.decode(site[static_cast<std::size_t>(j)], pts[static_cast<std::size_t>(j)]);
      double w = 0.0;
      for (const auto& edges : graphs) {
        double prod = 1.0;
        for (const auto& [u, v] : edges) {
          prod *= t.g_pos[static_cast<std::size_t>(
              t.disp[static_cast<std::size_t>(site[static_cast<std::size_t>(u)] * s +
                                              site[static_cast<std::size_t>(v)])])];
          if (prod == 0.0) break;
        }
        w += prod;
      }
      if (w == 0.0) continue;
      acc += std::abs(w) * wick_density(t.grid, t.gamma_pos, pts);
    }
    double scale = std::pow(hd, p) / factorial(p);
    if (q == 0) scale *= static_cast<double>(s);
    total += scale * acc;
  }
  return total;
}

// Fit the shared tail constants on exactly enumerable class sums: for every
// (k0, n_g0) class at p <= p_max the registry constant is raised until the
// class bound dominates the measured value.  With the single-constant form
// the implied value for a vacuum class is
//   C >= (|S| / (L^d rho0 (rho0 I_g)^{n+k} I_gamma^{k-1}))^{1/(1+n+k)}
// and analogously with C_m for external classes (inner constant shared).
inline void fit_tail_constants(const DiagramTables& t, int q, int p_max,
                               const std::vector<long long>& ext, ConstantRegistry& reg) {
  const auto norms = expansion_norms(t);
  for (int p = (q == 0 ? 2 : 0); p <= p_max; ++p) {
    for (const auto& [key, sum] : class_sums(t, q, p, ext)) {
      const auto [k0, n_g0] = key;
      const double mag = std::abs(sum);
      if (mag == 0.0) continue;
      if (q == 0) {
        const double base = norms.volume * norms.rho0 *
                            std::pow(norms.rho0 * norms.I_g, n_g0 + k0) *
                            std::pow(norms.I_gamma, k0 - 1);
        if (base > 0.0)
          reg.fit_max("tail.C", std::pow(mag / base, 1.0 / (1.0 + n_g0 + k0)));
      } else {
        // share the inner constant fitted on vacuum classes; fit only the
        // outer m-dependent constant here
        const double C = reg.get("tail.C");
        const double base = std::pow(norms.rho0, q) *
                            std::pow(C * norms.rho0 * norms.I_g, n_g0 + k0) *
                            std::pow(norms.I_gamma, k0);
        if (base > 0.0) reg.fit_max("tail.Cm." + std::to_string(q), mag / base);
      }
    }
  }
}

} // namespace ggr
