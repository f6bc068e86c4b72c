#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ggr/errors.hpp"
#include "ggr/potential.hpp"
#include "ggr/quadrature.hpp"
#include "ggr/thermo.hpp"

namespace ggr {

// Zero-energy relative scattering problem for a repulsive pair potential in
// dimension d, posed variationally:
//
//   c_d a^d = inf { integral (|grad f|^2 + (1/2) v f^2) |x|^2 dx : f -> 1 },
//
// whose Euler-Lagrange equation in the radial variable is
//
//   (r^{d+1} f')' = (1/2) v(r) r^{d+1} f,
//
// with f0(r) = 1 - a^d / r^d exactly outside the support of v.  The scattering
// parameter a generalises the s-wave length to the |x|^2-weighted (p-wave)
// functional; c_d = |S^{d-1}| d.

struct SolveOptions {
  int grid_points = 4000;      // radial steps between r_min and the support edge
  double inner_fraction = 1e-4; // r_min = inner_fraction * support radius
};

struct ScatteringSolution {
  int d = 3;
  Potential pot;
  double r_min = 0.0;  // inner edge of the integration window
  double r_out = 0.0;  // support radius; closed-form tail beyond
  double a_pow_d = 0.0;        // extraction 1: tail coefficient from boundary matching
  double a_pow_d_energy = 0.0; // extraction 2: energy functional / c_d
  double a = 0.0;              // a_pow_d^{1/d}

  // Ascending radial profile on [r_min, r_out] (empty for a bare hard core,
  // where the closed form covers every radius).
  std::vector<double> rs, fs, fps;

  double f0(double r) const {
    if (pot.has_hard_core() && r <= pot.core_radius) return 0.0;
    if (rs.empty() || r >= r_out) return 1.0 - a_pow_d / std::pow(r, d);
    if (r <= r_min) return fs.front(); // regular solution is flat to O(r^2)
    return interpolate(r).first;
  }

  double f0_prime(double r) const {
    if (pot.has_hard_core() && r <= pot.core_radius) return 0.0;
    if (rs.empty() || r >= r_out)
      return static_cast<double>(d) * a_pow_d / std::pow(r, d + 1);
    if (r <= r_min) return fps.front() * (r / r_min); // f' vanishes linearly at 0
    return interpolate(r).second;
  }

private:
  // Cubic Hermite interpolation from the stored profile (values and slopes).
  std::pair<double, double> interpolate(double r) const {
    auto it = std::upper_bound(rs.begin(), rs.end(), r);
    std::size_t i = static_cast<std::size_t>(it - rs.begin());
    if (i == 0) i = 1;
    if (i >= rs.size()) i = rs.size() - 1;
    const double r0 = rs[i - 1], r1 = rs[i], h = r1 - r0;
    const double t = (r - r0) / h;
    const double f0v = fs[i - 1], f1v = fs[i], p0 = fps[i - 1], p1 = fps[i];
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    const double val = h00 * f0v + h * h10 * p0 + h01 * f1v + h * h11 * p1;
    const double d00 = 6 * t * (t - 1), d10 = (1 - t) * (1 - 3 * t);
    const double d01 = 6 * t * (1 - t), d11 = t * (3 * t - 2);
    const double der = (d00 * f0v + d01 * f1v) / h + d10 * p0 + d11 * p1;
    return {val, der};
  }
};

namespace detail {

// One inward fourth-order sweep of the radial Euler-Lagrange system written as
//   u' = w / r^{d+1},   w' = (1/2) v(r) r^{d+1} u,   w := r^{d+1} u',
// starting from the exact tail values u = 1 - A/r^d, w = d A at r = r_out.
// Optionally records the profile and accumulates the energy integrand
//   e' = (u'^2 + (1/2) v u^2) r^{d+1} = w^2 / r^{d+1} + (1/2) v u^2 r^{d+1}
// as an extra component, so the quadrature inherits the integrator's order.
struct SweepResult {
  double u_in = 0.0, w_in = 0.0, energy = 0.0;
};

inline SweepResult sweep_inward(const Potential& pot, int d, double A,
                                const std::vector<double>& grid,
                                ScatteringSolution* record) {
  const double r_out = grid.back();
  double u = 1.0 - A / std::pow(r_out, d);
  double w = static_cast<double>(d) * A;
  double e = 0.0;
  const auto rhs = [&](double r, double uu, double ww, double& du, double& dw,
                       double& de) {
    const double rp = std::pow(r, d + 1);
    du = ww / rp;
    dw = 0.5 * pot(r) * rp * uu;
    de = ww * ww / rp + 0.5 * pot(r) * uu * uu * rp;
  };
  if (record) {
    record->rs.assign(grid.begin(), grid.end());
    record->fs.assign(grid.size(), 0.0);
    record->fps.assign(grid.size(), 0.0);
    record->fs.back() = u;
    record->fps.back() = w / std::pow(r_out, d + 1);
  }
  for (std::size_t i = grid.size() - 1; i > 0; --i) {
    const double r1 = grid[i], r0 = grid[i - 1], h = r0 - r1; // h < 0
    // The potential is smooth inside each step (jumps and kinks are aligned
    // with step boundaries), so boundary stages take the interior limit.
    const double nudge = 1e-9 * (r1 - r0);
    double k1u, k1w, k1e, k2u, k2w, k2e, k3u, k3w, k3e, k4u, k4w, k4e;
    rhs(r1 - nudge, u, w, k1u, k1w, k1e);
    rhs(r1 + 0.5 * h, u + 0.5 * h * k1u, w + 0.5 * h * k1w, k2u, k2w, k2e);
    rhs(r1 + 0.5 * h, u + 0.5 * h * k2u, w + 0.5 * h * k2w, k3u, k3w, k3e);
    rhs(r0 + nudge, u + h * k3u, w + h * k3w, k4u, k4w, k4e);
    u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
    w += h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
    e += h / 6.0 * (k1e + 2 * k2e + 2 * k3e + k4e);
    if (record) {
      record->fs[i - 1] = u;
      record->fps[i - 1] = w / std::pow(r0, d + 1);
    }
  }
  SweepResult out;
  out.u_in = u;
  out.w_in = w;
  out.energy = -e; // integrated downward
  return out;
}

inline std::vector<double> radial_solve_grid(const Potential& pot, int d,
                                             const SolveOptions& opts) {
  const double r_out = pot.support_radius();
  const double r_min = opts.inner_fraction * r_out;
  // Resolve stiff interiors: keep kappa * h small where kappa^2 = v_max / 2.
  double v_max = 0.0;
  if (pot.kind == PotentialKind::SoftSphere) v_max = pot.height;
  if (pot.kind == PotentialKind::TabulatedRadial)
    v_max = *std::max_element(pot.v.begin(), pot.v.end());
  const double kappa = std::sqrt(0.5 * v_max);
  // Fourth-order global error ~ (kappa h)^4 kappa r_out; this keeps it < 1e-9.
  int n = std::max(opts.grid_points, static_cast<int>(std::ceil(1600.0 * kappa * r_out)));
  std::vector<double> grid(static_cast<std::size_t>(n) + 1);
  const double q = std::log(r_out / r_min) / n;
  for (int i = 0; i <= n; ++i) grid[static_cast<std::size_t>(i)] = r_min * std::exp(q * i);
  grid.front() = r_min;
  grid.back() = r_out;
  // Align steps with tabulated kinks so each step sees a smooth potential.
  if (pot.kind == PotentialKind::TabulatedRadial) {
    for (double node : pot.r) {
      if (node <= r_min || node >= r_out) continue;
      auto it = std::lower_bound(grid.begin(), grid.end(), node);
      if (it != grid.begin() && it != grid.end()) {
        // snap the nearer neighbour onto the kink
        auto prev = it - 1;
        if (node - *prev < *it - node) *prev = node; else *it = node;
      }
    }
  }
  return grid;
}

} // namespace detail

inline ScatteringSolution solve_scattering(const Potential& pot, int d,
                                           const SolveOptions& opts = {}) {
  check_dimension(d);
  pot.validate();
  ScatteringSolution sol;
  sol.d = d;
  sol.pot = pot;
  sol.r_out = pot.support_radius();

  if (pot.has_hard_core()) {
    // f0 = [1 - (a0/r)^d]_+ exactly; the energy route reduces to the analytic
    // tail |S^{d-1}| d A^2 / r_out^d with A = a0^d.
    sol.r_min = pot.core_radius;
    sol.a_pow_d = std::pow(pot.core_radius, d);
    sol.a = pot.core_radius;
    sol.a_pow_d_energy = sol.a_pow_d * sol.a_pow_d / std::pow(sol.r_out, d);
    return sol;
  }

  const auto grid = detail::radial_solve_grid(pot, d, opts);
  sol.r_min = grid.front();

  // The sweep is affine in the tail coefficient A, so two sweeps determine the
  // A that makes the inner solution regular (r^{d+1} f' -> 0 at the origin).
  const auto m0 = detail::sweep_inward(pot, d, 0.0, grid, nullptr);
  const auto m1 = detail::sweep_inward(pot, d, 1.0, grid, nullptr);
  const double denom = m0.w_in - m1.w_in;
  if (denom == 0.0) throw verify_error("scattering solve: degenerate boundary system");
  const double A = m0.w_in / denom;

  const auto fin = detail::sweep_inward(pot, d, A, grid, &sol);
  sol.a_pow_d = A;
  sol.a = A > 0.0 ? std::pow(A, 1.0 / d) : 0.0;

  // Energy extraction: interior integral (fourth-order, accumulated during the
  // sweep) + regular-core stub below r_min + analytic tail beyond r_out.
  const double stub =
      0.5 * pot(0.5 * sol.r_min) * fin.u_in * fin.u_in * std::pow(sol.r_min, d + 2) / (d + 2);
  const double tail = static_cast<double>(d) * A * A / std::pow(sol.r_out, d);
  sol.a_pow_d_energy = (fin.energy + stub) / d + tail / d;
  return sol;
}

// Jastrow pair factor built from the scattering solution: f = f0 / (1 - a^d/b^d)
// for r <= b and f = 1 beyond, continuous at the healing radius b >= r_out.
struct JastrowFactor {
  int d = 3;
  double b = 0.0;
  double norm = 1.0; // 1 - a^d / b^d
  ScatteringSolution sol;

  double a_pow_d() const { return sol.a_pow_d; }
  double a() const { return sol.a; }

  double f(double r) const { return r >= b ? 1.0 : sol.f0(r) / norm; }
  double fprime(double r) const { return r >= b ? 0.0 : sol.f0_prime(r) / norm; }
  double g(double r) const {
    const double x = f(r);
    return x * x - 1.0;
  }
};

inline JastrowFactor build_jastrow(const ScatteringSolution& sol, double b) {
  if (!(b >= sol.r_out) || !(b > sol.a))
    throw input_error("healing radius must lie beyond the potential support and a");
  JastrowFactor jf;
  jf.d = sol.d;
  jf.b = b;
  jf.sol = sol;
  jf.norm = 1.0 - sol.a_pow_d / std::pow(b, sol.d);
  if (!(jf.norm > 0.0)) throw input_error("healing radius too close to a");
  return jf;
}

namespace detail {

// Panel boundaries covering [0, b] with refinement against the profile window
// and closed-form tail, plus explicit nodes at every integrand kink.
inline std::vector<double> moment_breaks(const JastrowFactor& jf) {
  const auto& sol = jf.sol;
  std::vector<double> breaks;
  const double lo = sol.pot.has_hard_core() ? sol.pot.core_radius : 0.0;
  breaks.push_back(lo);
  const double inner = std::max(sol.r_min, lo == 0.0 ? sol.r_min : lo);
  if (inner > lo) breaks.push_back(inner);
  // profile window
  if (sol.r_out > inner) {
    auto geo = geometric_breaks(inner, sol.r_out, 200);
    breaks.insert(breaks.end(), geo.begin() + 1, geo.end());
  }
  // closed-form window out to the healing radius
  if (jf.b > sol.r_out) {
    auto geo = geometric_breaks(sol.r_out, jf.b, 200);
    breaks.insert(breaks.end(), geo.begin() + 1, geo.end());
  }
  if (sol.pot.kind == PotentialKind::TabulatedRadial)
    for (double node : sol.pot.r)
      if (node > lo && node < jf.b) breaks.push_back(node);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

template <typename F>
double radial_moment(const JastrowFactor& jf, int n, F&& radial_integrand) {
  const auto breaks = moment_breaks(jf);
  const int d = jf.d;
  const auto f = [&](double r) {
    return radial_integrand(r) * std::pow(r, n + d - 1);
  };
  return sphere_area(d) * integrate_panels(f, breaks);
}

} // namespace detail

// integral over R^d of |g(x)| |x|^n dx (g vanishes beyond b).
inline double g_moment(const JastrowFactor& jf, int n) {
  double core = 0.0;
  if (jf.sol.pot.has_hard_core()) {
    // f = 0 inside the core, so |g| = 1 there.
    const double a0 = jf.sol.pot.core_radius;
    core = sphere_area(jf.d) * std::pow(a0, n + jf.d) / (n + jf.d);
  }
  return core + detail::radial_moment(jf, n, [&](double r) { return std::abs(jf.g(r)); });
}

// integral of (|grad f|^2 + (1/2) v f^2) |x|^n dx; n = 2 is the energy
// functional of the trial factor (the hard core contributes nothing: f = 0).
inline double energy_moment(const JastrowFactor& jf, int n) {
  return detail::radial_moment(jf, n, [&](double r) {
    const double fp = jf.fprime(r);
    const double fv = jf.f(r);
    return fp * fp + 0.5 * jf.sol.pot(r) * fv * fv;
  });
}

// integral of f(x) |grad f(x)| |x|^n dx.
inline double f_gradf_moment(const JastrowFactor& jf, int n) {
  return detail::radial_moment(jf, n,
                               [&](double r) { return jf.f(r) * std::abs(jf.fprime(r)); });
}

// Weak-coupling (Born) approximation to a^d: (1/(2 c_d)) integral v |x|^2 dx.
inline double born_a_pow_d(const Potential& pot, int d) {
  check_dimension(d);
  pot.validate();
  if (pot.has_hard_core()) throw input_error("Born approximation needs a finite potential");
  const double r_out = pot.support_radius();
  auto breaks = linear_breaks(0.0, r_out, 400);
  if (pot.kind == PotentialKind::TabulatedRadial)
    for (double node : pot.r)
      if (node > 0.0 && node < r_out) breaks.push_back(node);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const double integral =
      sphere_area(d) *
      integrate_panels([&](double r) { return pot(r) * std::pow(r, d + 1); }, breaks);
  return integral / (2.0 * pwave_energy_constant(d));
}

} // namespace ggr
