#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "ggr/diagram_tables.hpp"
#include "ggr/errors.hpp"
#include "ggr/graphs.hpp"

namespace ggr {

// Momentum-space diagram value.  Expanding every kernel and pair factor in
// lattice Fourier series and summing out the internal positions leaves one
// momentum-conservation constraint per internal vertex v,
//
//   k_v - k_{pi^{-1}(v)} + sum_e sigma_{e,v} q_e = 0  (mod reciprocal lattice),
//
// where sigma is +1 at the smaller endpoint of a pair edge and -1 at the
// larger.  The value is
//
//   Gamma = sign(pi) L^{-d(q+|E|)} sum_{free momenta}
//           prod_j gamma_hat(k_j) prod_e ghat(q_e) prod_ext exp(i flux_m . x_m).
//
// Constraints with a unit coefficient are removed by integer substitution
// (unimodular, so exact on Z_m); any remainder becomes an indicator factor.
// The surviving sum is performed by bucket elimination: momentum variables
// are summed out one at a time, tabulating the partial product over the
// distinct affine functionals that remain, so structured diagrams collapse to
// low-rank convolutions instead of a dense sum over every free momentum.
namespace momentum_detail {

using Func = std::vector<int>; // coefficients over the free-variable slots

inline bool is_zero(const Func& f) {
  for (int c : f)
    if (c != 0) return false;
  return true;
}

struct Factor {
  std::vector<Func> funcs;
  std::vector<std::complex<double>> table; // size sites^funcs.size(), row-major
};

} // namespace momentum_detail

inline std::complex<double> momentum_value(const DiagramTables& t, const Diagram& dia,
                                           const std::vector<long long>& external_sites) {
  using momentum_detail::Factor;
  using momentum_detail::Func;
  if (static_cast<int>(external_sites.size()) != dia.q)
    throw input_error("diagram expects one site per external vertex");

  const int n = dia.q + dia.p;
  const int ne = static_cast<int>(dia.edges.size());
  const int nv = n + ne; // vertex momenta then edge momenta
  const long long S = t.sites();
  const int m = t.grid.m, d = t.grid.d;

  std::vector<int> inv(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) inv[static_cast<std::size_t>(dia.perm[static_cast<std::size_t>(j)])] = j;

  auto raw_flux = [&](int v) {
    std::vector<int> row(static_cast<std::size_t>(nv), 0);
    row[static_cast<std::size_t>(v)] += 1;
    row[static_cast<std::size_t>(inv[static_cast<std::size_t>(v)])] -= 1;
    for (int e = 0; e < ne; ++e) {
      if (dia.edges[static_cast<std::size_t>(e)].first == v) row[static_cast<std::size_t>(n + e)] += 1;
      if (dia.edges[static_cast<std::size_t>(e)].second == v) row[static_cast<std::size_t>(n + e)] -= 1;
    }
    return row;
  };

  // --- constraints for internal vertices, then unit-pivot substitution ---
  std::vector<std::vector<int>> rows;
  for (int v = dia.q; v < n; ++v) {
    auto row = raw_flux(v);
    if (!momentum_detail::is_zero(row)) rows.push_back(std::move(row));
  }
  std::vector<char> eliminated(static_cast<std::size_t>(nv), 0);
  std::vector<std::vector<int>> expr(static_cast<std::size_t>(nv)); // over raw variables
  for (;;) {
    int pr = -1, pu = -1;
    for (int r = 0; r < static_cast<int>(rows.size()) && pr < 0; ++r)
      for (int u = 0; u < nv && pr < 0; ++u)
        if (std::abs(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(u)]) == 1) {
          pr = r;
          pu = u;
        }
    if (pr < 0) break;
    const auto row = rows[static_cast<std::size_t>(pr)];
    const int c = row[static_cast<std::size_t>(pu)];
    Func e(static_cast<std::size_t>(nv), 0);
    for (int u = 0; u < nv; ++u)
      if (u != pu) e[static_cast<std::size_t>(u)] = -c * row[static_cast<std::size_t>(u)];
    eliminated[static_cast<std::size_t>(pu)] = 1;
    expr[static_cast<std::size_t>(pu)] = e;
    rows.erase(rows.begin() + pr);
    for (auto& r2 : rows) {
      const int c2 = r2[static_cast<std::size_t>(pu)];
      if (c2 == 0) continue;
      r2[static_cast<std::size_t>(pu)] = 0;
      for (int u = 0; u < nv; ++u) r2[static_cast<std::size_t>(u)] += c2 * e[static_cast<std::size_t>(u)];
    }
    rows.erase(std::remove_if(rows.begin(), rows.end(), momentum_detail::is_zero), rows.end());
  }

  // --- free slots and resolution of every variable over them ---
  std::vector<int> slot(static_cast<std::size_t>(nv), -1);
  int nfree = 0;
  for (int u = 0; u < nv; ++u)
    if (!eliminated[static_cast<std::size_t>(u)]) slot[static_cast<std::size_t>(u)] = nfree++;
  std::vector<Func> resolved(static_cast<std::size_t>(nv));
  std::vector<char> have(static_cast<std::size_t>(nv), 0);
  std::function<const Func&(int)> resolve_var = [&](int u) -> const Func& {
    if (!have[static_cast<std::size_t>(u)]) {
      Func f(static_cast<std::size_t>(nfree), 0);
      if (!eliminated[static_cast<std::size_t>(u)]) {
        f[static_cast<std::size_t>(slot[static_cast<std::size_t>(u)])] = 1;
      } else {
        for (int w = 0; w < nv; ++w) {
          const int c = expr[static_cast<std::size_t>(u)][static_cast<std::size_t>(w)];
          if (c == 0) continue;
          const Func& sub = resolve_var(w);
          for (int i = 0; i < nfree; ++i) f[static_cast<std::size_t>(i)] += c * sub[static_cast<std::size_t>(i)];
        }
      }
      resolved[static_cast<std::size_t>(u)] = std::move(f);
      have[static_cast<std::size_t>(u)] = 1;
    }
    return resolved[static_cast<std::size_t>(u)];
  };
  auto resolve_raw = [&](const std::vector<int>& raw) {
    Func f(static_cast<std::size_t>(nfree), 0);
    for (int u = 0; u < nv; ++u) {
      if (raw[static_cast<std::size_t>(u)] == 0) continue;
      const Func& sub = resolve_var(u);
      for (int i = 0; i < nfree; ++i)
        f[static_cast<std::size_t>(i)] += raw[static_cast<std::size_t>(u)] * sub[static_cast<std::size_t>(i)];
    }
    return f;
  };

  // --- momentum-site component tables ---
  std::vector<std::array<int, 3>> comp(static_cast<std::size_t>(S));
  for (long long i = 0; i < S; ++i) t.grid.decode(i, comp[static_cast<std::size_t>(i)]);
  auto encode_mod = [&](const std::array<int, 3>& c) {
    long long idx = 0;
    for (int ax = 0; ax < d; ++ax) {
      int r = c[static_cast<std::size_t>(ax)] % m;
      if (r < 0) r += m;
      idx = idx * m + r;
    }
    return idx;
  };

  // --- assemble primitive factors ---
  std::complex<double> scalar =
      static_cast<double>(dia.sign) *
      std::pow(t.grid.length(), -static_cast<double>(d) * (dia.q + ne));
  std::vector<Factor> factors;
  auto add_factor = [&](Func f, std::vector<std::complex<double>> table) {
    if (momentum_detail::is_zero(f)) {
      scalar *= table[0]; // zero functional picks the zero-momentum entry
      return;
    }
    Factor fac;
    fac.funcs.push_back(std::move(f));
    fac.table = std::move(table);
    factors.push_back(std::move(fac));
  };
  auto real_table = [&](const std::vector<double>& src) {
    return std::vector<std::complex<double>>(src.begin(), src.end());
  };
  for (int j = 0; j < n; ++j) add_factor(resolve_var(j), real_table(t.gamma_hat));
  for (int e = 0; e < ne; ++e) add_factor(resolve_var(n + e), real_table(t.g_hat));
  for (const auto& row : rows) { // unresolved constraints become indicators
    Func f = resolve_raw(row);
    if (momentum_detail::is_zero(f)) continue;
    std::vector<std::complex<double>> table(static_cast<std::size_t>(S), 0.0);
    table[0] = 1.0;
    add_factor(std::move(f), std::move(table));
  }
  for (int ext = 0; ext < dia.q; ++ext) {
    Func f = resolve_raw(raw_flux(ext));
    if (momentum_detail::is_zero(f)) continue;
    std::array<int, 3> x = {0, 0, 0};
    t.grid.decode(external_sites[static_cast<std::size_t>(ext)], x);
    std::vector<std::complex<double>> table(static_cast<std::size_t>(S));
    for (long long i = 0; i < S; ++i) {
      long long dot = 0;
      for (int ax = 0; ax < d; ++ax)
        dot += static_cast<long long>(comp[static_cast<std::size_t>(i)][static_cast<std::size_t>(ax)]) *
               x[static_cast<std::size_t>(ax)];
      const double arg = 2.0 * M_PI * static_cast<double>(dot % m) / m;
      table[static_cast<std::size_t>(i)] = {std::cos(arg), std::sin(arg)};
    }
    add_factor(std::move(f), std::move(table));
  }

  // --- bucket elimination over the free slots ---
  std::vector<char> slot_done(static_cast<std::size_t>(nfree), 0);
  auto touches = [](const Factor& fac, int v) {
    for (const auto& f : fac.funcs)
      if (f[static_cast<std::size_t>(v)] != 0) return true;
    return false;
  };
  for (int step = 0; step < nfree; ++step) {
    // choose the slot whose elimination leaves the fewest distinct functionals
    int best = -1;
    long long best_cost = -1;
    int best_snew = 0;
    for (int v = 0; v < nfree; ++v) {
      if (slot_done[static_cast<std::size_t>(v)]) continue;
      std::vector<Func> rests;
      for (const auto& fac : factors) {
        if (!touches(fac, v)) continue;
        for (const auto& f : fac.funcs) {
          Func rest = f;
          rest[static_cast<std::size_t>(v)] = 0;
          if (momentum_detail::is_zero(rest)) continue;
          if (std::find(rests.begin(), rests.end(), rest) == rests.end())
            rests.push_back(std::move(rest));
        }
      }
      long long cost = S;
      for (std::size_t i = 0; i < rests.size(); ++i) {
        cost *= S;
        if (cost > (1LL << 62) / S) break;
      }
      if (best < 0 || cost < best_cost) {
        best = v;
        best_cost = cost;
        best_snew = static_cast<int>(rests.size());
      }
    }
    if (best < 0) break;
    if (best_cost > 200000000LL)
      throw resource_error("momentum elimination exceeds the work budget");

    // partition factors
    std::vector<Factor> kept, coll;
    for (auto& fac : factors)
      (touches(fac, best) ? coll : kept).push_back(std::move(fac));
    factors = std::move(kept);

    // distinct nonzero rest functionals define the new factor's indices
    std::vector<Func> rests;
    std::vector<std::vector<std::pair<int, int>>> plan; // per factor: (coeff on v, rest id or -1)
    for (const auto& fac : coll) {
      std::vector<std::pair<int, int>> fp;
      for (const auto& f : fac.funcs) {
        Func rest = f;
        rest[static_cast<std::size_t>(best)] = 0;
        int id = -1;
        if (!momentum_detail::is_zero(rest)) {
          auto it = std::find(rests.begin(), rests.end(), rest);
          if (it == rests.end()) {
            rests.push_back(rest);
            id = static_cast<int>(rests.size()) - 1;
          } else {
            id = static_cast<int>(it - rests.begin());
          }
        }
        fp.emplace_back(f[static_cast<std::size_t>(best)], id);
      }
      plan.push_back(std::move(fp));
    }
    const int snew = static_cast<int>(rests.size());
    (void)best_snew;

    long long entries = 1;
    for (int i = 0; i < snew; ++i) entries *= S;
    std::vector<std::complex<double>> table(static_cast<std::size_t>(entries));
    std::vector<long long> yidx(static_cast<std::size_t>(snew), 0);
    std::vector<std::array<int, 3>> ycomp(static_cast<std::size_t>(snew), {0, 0, 0});
    for (long long yflat = 0; yflat < entries; ++yflat) {
      long long restidx = yflat;
      for (int i = snew - 1; i >= 0; --i) {
        yidx[static_cast<std::size_t>(i)] = restidx % S;
        restidx /= S;
        ycomp[static_cast<std::size_t>(i)] = comp[static_cast<std::size_t>(yidx[static_cast<std::size_t>(i)])];
      }
      std::complex<double> acc = 0.0;
      for (long long w = 0; w < S; ++w) {
        const auto& wc = comp[static_cast<std::size_t>(w)];
        std::complex<double> prod = 1.0;
        for (std::size_t fi = 0; fi < coll.size(); ++fi) {
          long long flat = 0;
          for (const auto& [a, id] : plan[fi]) {
            std::array<int, 3> c = {0, 0, 0};
            for (int ax = 0; ax < d; ++ax)
              c[static_cast<std::size_t>(ax)] =
                  a * wc[static_cast<std::size_t>(ax)] +
                  (id >= 0 ? ycomp[static_cast<std::size_t>(id)][static_cast<std::size_t>(ax)] : 0);
            flat = flat * S + encode_mod(c);
          }
          prod *= coll[fi].table[static_cast<std::size_t>(flat)];
          if (prod == std::complex<double>(0.0, 0.0)) break;
        }
        acc += prod;
      }
      table[static_cast<std::size_t>(yflat)] = acc;
    }
    slot_done[static_cast<std::size_t>(best)] = 1;
    if (snew == 0) {
      scalar *= table[0];
    } else {
      Factor fac;
      fac.funcs = std::move(rests);
      fac.table = std::move(table);
      factors.push_back(std::move(fac));
    }
  }

  for (const auto& fac : factors) {
    if (!fac.funcs.empty())
      throw verify_error("momentum elimination left an unreduced factor");
    scalar *= fac.table[0];
  }
  return scalar;
}

} // namespace ggr
