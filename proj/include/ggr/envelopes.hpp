#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ggr/constants.hpp"
#include "ggr/errors.hpp"
#include "ggr/thermo.hpp"

namespace ggr {

// Error envelopes for the pressure lower bound, the Jastrow-cutoff
// optimization, and the temperature-regime split.
//
// Every envelope is "constant x structure": the structure is an explicit
// closed form in (a, b, rho0, zeta), and the constant comes from the registry
// with default 1.0.  Structural checks (slopes, ratios, homogeneity) are
// therefore constant-free, while calibrated runs can install fitted values.

// ---- inputs ---------------------------------------------------------------

struct BoundInputs {
  int d = 3;
  double a = 0.0;    // p-wave scattering length
  double beta = 1.0; // inverse temperature
  double mu = 0.0;   // chemical potential
  double rho0 = 0.0; // free-gas density at (beta, mu), thermodynamic limit

  double log_z() const { return beta * mu; }
  double zeta() const { return degeneracy_weight(log_z()); }
  // dimensionless diluteness a^d rho0
  double x() const { return std::pow(a, d) * rho0; }

  GrandParams grand() const { return GrandParams{d, beta, mu}; }

  void validate() const {
    check_dimension(d);
    if (!(a > 0.0)) throw input_error("bound inputs need a scattering length a > 0");
    if (!(beta > 0.0) || !std::isfinite(mu)) throw input_error("need beta > 0 and finite mu");
    if (!(rho0 > 0.0) || !std::isfinite(rho0)) throw input_error("need a positive free density");
  }
};

inline BoundInputs make_bound_inputs(int d, double a, double beta, double mu) {
  BoundInputs in;
  in.d = d;
  in.a = a;
  in.beta = beta;
  in.mu = mu;
  in.rho0 = free_density(GrandParams{d, beta, mu});
  in.validate();
  return in;
}

// Standing smallness hypothesis of the high-temperature branch:
//   a^d rho0 zeta^{d/2} |log a^d rho0| < c            (registry "regime.c")
inline bool high_temp_valid(const BoundInputs& in, const ConstantRegistry& reg) {
  in.validate();
  const double x = in.x();
  if (!(x < 1.0)) return false;
  return x * std::pow(in.zeta(), 0.5 * in.d) * std::abs(std::log(x)) < reg.get("regime.c");
}

// ---- error envelopes at fixed cutoff b ------------------------------------

struct EpsEnvelopes {
  // the three error terms of the pressure functional, per unit volume
  double eps_Z = 0.0; // normalization ratio log(Z_J/Z)/beta
  double eps_2 = 0.0; // two-body energy weight against the correlation error
  double eps_3 = 0.0; // three-body cross term

  // Sub-envelopes of eps_2 attributed to diagram classes by
  // k + n_g + n_g^*.  Every class is integrated against the pair-energy
  // weight (whose mass is ~ a^{d-2} and whose |x|^2 moment is ~ a^d), so all
  // fields share the dimension of a pressure; I_g, I_gamma, I_{|x|g} enter
  // through their bounds a^d log(b/a), zeta^{d/2}, a^d b.
  double xi_eq1 = 0.0;
  double xi_i = 0.0;
  double xi_ii = 0.0;
  double xi_iii = 0.0;
  double xi_ge3 = 0.0;

  double total() const { return eps_Z + eps_2 + eps_3; }
};

// Envelope for the class sum over diagrams with k + n_g + n_g^* >= 3 on a pair
// of external points, in terms of measured expansion norms:
//   C rho0^5 I_g^3 (1 + I_gamma^3)                     (registry "xi.ge3.C")
inline double xi_ge3_envelope(double rho0, double I_g, double I_gamma,
                              const ConstantRegistry& reg) {
  return reg.get("xi.ge3.C") * std::pow(rho0, 5) * std::pow(I_g, 3) *
         (1.0 + std::pow(I_gamma, 3));
}

inline EpsEnvelopes eps_envelopes(const BoundInputs& in, double b, const ConstantRegistry& reg) {
  in.validate();
  const double rho_scale = std::pow(in.rho0, -1.0 / in.d);
  if (!(b > in.a) || !(b <= reg.get("b.range.C") * rho_scale * (1.0 + 1e-12)))
    throw input_error("cutoff b must lie in (a, C rho0^{-1/d}]");

  const int d = in.d;
  const double a = in.a, r = in.rho0, z = in.zeta();
  const double lg = std::log(b / a);
  auto P = [](double base, double e) { return std::pow(base, e); };

  EpsEnvelopes env;
  env.eps_Z = reg.get("eps.Z.C") * (P(a, d) * b * b * P(r, 2.0 + 4.0 / d) / z +
                                    P(a, 2 * d) * P(r, 3.0 + 2.0 / d) * P(z, 0.5 * d - 1.0) * lg * lg);
  if (d >= 2) {
    env.eps_2 = reg.get("eps.2.C") * (P(a, 2 * d) * P(r, 3.0 + 2.0 / d) * lg +
                                      P(a, 4 * d - 2) * P(r, 5) * P(z, 1.5 * d) * P(lg, 3));
    env.eps_3 = reg.get("eps.3.C") * (P(a, 2 * d) * b * b * P(r, 3.0 + 4.0 / d) +
                                      P(a, 3 * d - 2) * P(r, 4) * P(z, 0.5 * d) * lg);
  } else {
    env.eps_2 = reg.get("eps.2.C") *
                (a * b * P(r, 5) * lg + a * a * P(r, 5) * P(z, 1.5) * P(lg, 3));
    env.eps_3 = reg.get("eps.3.C") * a * a * P(r, 5) * z * lg * lg;
  }

  // class k + n_g + n_g^* = 1: the separation-quadratic bound picks up the
  // |x|^2 energy moment a^d
  env.xi_eq1 = reg.get("xi.eq1.C") * P(a, 2 * d) * P(r, 3.0 + 2.0 / d) * lg;
  // class = 2, double-pair piece (two g^2 moments, one carrying the (b^2+|x|^2)^2 weight)
  env.xi_i = reg.get("xi.i.C") * P(a, 4 * d) * P(b, 4 - d) * P(r, 4.0 + 6.0 / d) * lg * lg;
  // class = 2, single-pair piece rho0^{4+1/d} I_{|x|g} I_g times the energy mass
  env.xi_ii = reg.get("xi.ii.C") * P(a, 3 * d - 2) * b * P(r, 4.0 + 1.0 / d) * lg;
  // class = 2, remainder after symmetrization (second-order Taylor control);
  // the first two pieces are flat in the separation, the third is quadratic
  env.xi_iii = reg.get("xi.iii.C") *
               (P(a, 3 * d - 2) * b * P(r, 4.0 + 1.0 / d) * lg +
                P(a, 4 * d - 2) * P(r, 5) * P(z, 1.5 * d) * P(lg, 3) +
                P(a, 3 * d) * P(r, 4.0 + 2.0 / d) * P(z, d) * lg * lg);
  // classes >= 3, flat in the separation, with I_g -> a^d log(b/a) and
  // I_gamma -> zeta^{d/2}
  env.xi_ge3 = P(a, d - 2) * xi_ge3_envelope(r, P(a, d) * lg, P(z, 0.5 * d), reg);
  return env;
}

// ---- choice of the Jastrow cutoff b ---------------------------------------

// The closed-form cutoff choice per dimension, capped by the standing
// requirement b <~ rho0^{-1/d} and floored at 2a to stay a valid cutoff.
inline double choose_b(const BoundInputs& in) {
  in.validate();
  const double x = in.x();
  if (!(x < 1.0)) throw input_error("cutoff choice needs a^d rho0 < 1");
  const double z = in.zeta();
  const double cap = std::pow(in.rho0, -1.0 / in.d);
  double b = 0.0;
  switch (in.d) {
    case 3: b = in.a * std::pow(x, -2.0 / 15.0) * std::pow(z, 1.0 / 5.0); break;
    case 2: b = in.a * std::pow(x, -1.0 / 4.0) * std::pow(z, 1.0 / 4.0); break;
    default: b = in.a * std::pow(x, -1.0 / 2.0) * std::pow(std::abs(std::log(x)), -1.0 / 2.0);
  }
  if (!(2.0 * in.a <= cap))
    throw input_error("cutoff range is empty: need rho0^{-1/d} >= 2a");
  return std::max(2.0 * in.a, std::min(b, cap));
}

// Total envelope optimized by the cutoff choice: the relative (a/b)^d
// correction of the two-body leading term plus the three error envelopes.
inline double b_objective(const BoundInputs& in, double b, const ConstantRegistry& reg) {
  const double correction = reg.get("b.correction.C") * std::pow(in.a, 2 * in.d) *
                            std::pow(b, -in.d) * std::pow(in.rho0, 2.0 + 2.0 / in.d);
  return correction + eps_envelopes(in, b, reg).total();
}

// Log-grid reference optimum of b_objective over b in (2a, rho0^{-1/d}].
inline double grid_search_b(const BoundInputs& in, const ConstantRegistry& reg, int points = 200) {
  in.validate();
  if (points < 2) throw input_error("grid search needs at least two points");
  const double lo = 2.0 * in.a, hi = std::pow(in.rho0, -1.0 / in.d);
  if (!(hi > lo)) throw input_error("empty cutoff range: need rho0^{-1/d} > 2a");
  double best_b = lo, best_val = b_objective(in, lo, reg);
  for (int i = 1; i < points; ++i) {
    const double b = lo * std::pow(hi / lo, double(i) / (points - 1));
    const double val = b_objective(in, b, reg);
    if (val < best_val) {
      best_val = val;
      best_b = b;
    }
  }
  return best_b;
}

// ---- regime split and the assembled bound ---------------------------------

enum class Regime { high_temperature, low_temperature };

struct BoundReport {
  int d = 3;
  double a = 0.0, rho0 = 0.0, zeta = 1.0;
  double psi0 = 0.0;         // free pressure
  double b_choice = 0.0;     // Jastrow cutoff used
  double leading_term = 0.0; // coeff(d, log z) a^d rho0^{2+2/d}
  EpsEnvelopes eps;          // at b_choice (high-temperature branch only)
  double delta_d = 0.0;      // dimensionless relative error envelope
  Regime regime = Regime::high_temperature;
  bool valid = false;

  // the certified bound: psi >= psi0 - leading_term (1 + delta_d)
  double pressure_lower_bound() const { return psi0 - leading_term * (1.0 + delta_d); }
};

// Relative error envelope of the high-temperature branch.
inline double delta_high_temp(const BoundInputs& in, const ConstantRegistry& reg) {
  const double x = in.x(), z = in.zeta(), lgx = std::abs(std::log(x));
  double s = 0.0;
  switch (in.d) {
    case 3:
      s = std::pow(x, 6.0 / 15.0) * std::pow(z, -3.0 / 5.0) +
          x * std::sqrt(z) * lgx * lgx + std::pow(x, 7.0 / 3.0) * std::pow(z, 4.5) * std::pow(lgx, 3);
      break;
    case 2:
      s = std::sqrt(x / z) + x * z * lgx + x * x * std::pow(z, 3) * std::pow(lgx, 3);
      break;
    default:
      s = std::sqrt(x * lgx) + x * std::pow(z, 1.5) * std::pow(lgx, 3);
  }
  return reg.get("delta.high.C") * s;
}

// Relative error envelope of the low-temperature branch: the zero-temperature
// correction plus the temperature term (a^d rho0)^{-1} zeta^{-2}.
inline double delta_low_temp(const BoundInputs& in, const ConstantRegistry& reg) {
  const double x = in.x(), z = in.zeta();
  double zero_t = 0.0;
  switch (in.d) {
    case 3: zero_t = in.a * in.a * std::pow(in.rho0, 2.0 / 3.0); break;
    case 2: zero_t = x * std::pow(std::log(x), 2); break;
    default: zero_t = std::pow(x, 13.0 / 17.0);
  }
  return reg.get("delta.low.C") * (zero_t + 1.0 / (x * z * z));
}

// Degeneracy threshold above which the low-temperature branch takes over.
inline double zeta_threshold(const BoundInputs& in, const ConstantRegistry& reg) {
  const double x = in.x(), lgx = std::abs(std::log(x));
  double t = 0.0;
  switch (in.d) {
    case 3: t = std::pow(x, -20.0 / 39.0) * std::pow(lgx, -6.0 / 13.0); break;
    case 2: t = std::pow(x, -3.0 / 5.0) * std::pow(lgx, -2.0 / 5.0); break;
    default: t = std::pow(x, -4.0 / 7.0) * std::pow(lgx, -6.0 / 7.0);
  }
  return reg.get("regime.switch.C") * t;
}

inline BoundReport high_temp_bound(const BoundInputs& in, const ConstantRegistry& reg) {
  in.validate();
  if (!high_temp_valid(in, reg))
    throw regime_error(
        "outside the high-temperature regime: a^d rho0 zeta^{d/2} |log a^d rho0| too large; "
        "use the low-temperature bound or report no bound");
  BoundReport rep;
  rep.d = in.d;
  rep.a = in.a;
  rep.rho0 = in.rho0;
  rep.zeta = in.zeta();
  rep.psi0 = free_pressure(in.grand());
  rep.b_choice = choose_b(in);
  rep.leading_term =
      correction_coefficient(in.d, in.log_z()) * std::pow(in.a, in.d) * std::pow(in.rho0, 2.0 + 2.0 / in.d);
  rep.eps = eps_envelopes(in, rep.b_choice, reg);
  rep.delta_d = delta_high_temp(in, reg);
  rep.regime = Regime::high_temperature;
  rep.valid = true;
  return rep;
}

inline BoundReport low_temp_bound(const BoundInputs& in, const ConstantRegistry& reg) {
  in.validate();
  // Consistency of the Legendre-transform route: the free pressure equals
  // rho0 mu - phi0(beta, rho0) when phi0 is evaluated at the matching density.
  const double psi0 = free_pressure(in.grand());
  const double legendre = in.rho0 * in.mu - free_energy_density(in.d, in.beta, in.rho0);
  if (!(std::abs(legendre - psi0) <= 1e-6 * std::max(1.0, std::abs(psi0))))
    throw verify_error("free pressure disagrees with its Legendre transform");

  BoundReport rep;
  rep.d = in.d;
  rep.a = in.a;
  rep.rho0 = in.rho0;
  rep.zeta = in.zeta();
  rep.psi0 = psi0;
  // inherits the zero-temperature cutoff optimization
  rep.b_choice = choose_b(in);
  rep.leading_term =
      correction_coefficient(in.d, in.log_z()) * std::pow(in.a, in.d) * std::pow(in.rho0, 2.0 + 2.0 / in.d);
  rep.delta_d = delta_low_temp(in, reg);
  rep.regime = Regime::low_temperature;
  rep.valid = in.x() < reg.get("regime.c");
  return rep;
}

inline BoundReport main_bound(const BoundInputs& in, const ConstantRegistry& reg) {
  in.validate();
  if (!(in.x() < reg.get("regime.c")))
    throw input_error("diluteness violated: need a^d rho0 < c");
  if (in.zeta() >= zeta_threshold(in, reg)) return low_temp_bound(in, reg);
  return high_temp_bound(in, reg);
}

// Ratio of the two branch envelopes evaluated exactly at the switching
// degeneracy (beta is adjusted to put zeta on the threshold at fixed z-sign).
inline double branch_agreement_ratio(int d, double a, double rho0, const ConstantRegistry& reg) {
  BoundInputs in;
  in.d = d;
  in.a = a;
  in.rho0 = rho0;
  // Place (beta, mu) on the threshold: zeta = 1 + log z with z >= 1.
  BoundInputs probe = in;
  probe.beta = 1.0;
  probe.mu = 0.0;
  const double zt = zeta_threshold(probe, reg);
  if (!(zt > 1.0)) throw input_error("threshold below the degenerate range; decrease a^d rho0");
  in.beta = 1.0;
  in.mu = zt - 1.0; // log z = zeta - 1
  in.validate();
  const double hi = delta_high_temp(in, reg), lo = delta_low_temp(in, reg);
  if (!(hi > 0.0) || !(lo > 0.0)) throw verify_error("branch envelopes must be positive");
  return hi / lo;
}

// ---- density of the trial state vs the free density -----------------------

struct RhoDeviation {
  double deviation = 0.0;  // optimized difference-quotient bound on rho - rho0
  double eps_star = 0.0;   // optimizing chemical-potential increment
  double quotient_term = 0.0;  // (psi0(mu+eps) - psi0(mu))/eps - rho0 at eps_star
  double correction_term = 0.0; // C a^d rho0^{2+2/d} / eps_star
};

// Difference-quotient bound on the density deviation of the trial state:
// minimize over eps > 0
//   D(eps) = [(psi0(mu+eps) - psi0(mu))/eps - rho0] + C a^d rho0^{2+2/d}/eps.
// The first term grows ~ eps (convexity of psi0), the second decays ~ 1/eps,
// so the optimum scales as sqrt of the product, i.e. as (a^d rho0)^{1/2}.
inline RhoDeviation rho_vs_rho0(const BoundInputs& in, const ConstantRegistry& reg) {
  check_dimension(in.d);
  if (!(in.a >= 0.0)) throw input_error("need a scattering length a >= 0");
  if (!(in.beta > 0.0) || !std::isfinite(in.mu)) throw input_error("need beta > 0 and finite mu");
  if (!(in.rho0 > 0.0) || !std::isfinite(in.rho0)) throw input_error("need a positive free density");
  // No interaction: the trial state is the free state and the bound is zero.
  if (in.a == 0.0) return RhoDeviation{};
  const double psi_at = free_pressure(in.grand());
  const double correction =
      reg.get("corollary.C") * std::pow(in.a, in.d) * std::pow(in.rho0, 2.0 + 2.0 / in.d);
  auto quotient = [&](double eps) {
    return (free_pressure(GrandParams{in.d, in.beta, in.mu + eps}) - psi_at) / eps - in.rho0;
  };
  auto objective = [&](double log_eps) {
    const double eps = std::exp(log_eps);
    return quotient(eps) + correction / eps;
  };

  // The optimum balances the curvature term (psi0''/2) eps against C/eps, so
  // center the bracket on sqrt(2 C / psi0'') and search four e-folds around it.
  const double dmu = 1e-3 * std::max(1.0, std::abs(in.mu));
  const double curvature = (free_density(GrandParams{in.d, in.beta, in.mu + dmu}) -
                            free_density(GrandParams{in.d, in.beta, in.mu - dmu})) /
                           (2.0 * dmu);
  if (!(curvature > 0.0)) throw verify_error("free density must increase with mu");
  const double eps_guess = std::sqrt(2.0 * correction / curvature);
  const double lo0 = std::log(eps_guess) - 4.0, hi0 = std::log(eps_guess) + 4.0;
  double lo = lo0, hi = hi0, best = lo0;
  double best_val = objective(lo0);
  const int coarse = 80;
  for (int i = 1; i <= coarse; ++i) {
    const double t = lo0 + (hi0 - lo0) * i / coarse;
    const double v = objective(t);
    if (v < best_val) {
      best_val = v;
      best = t;
    }
  }
  lo = best - (hi0 - lo0) / coarse;
  hi = best + (hi0 - lo0) / coarse;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = hi - gr * (hi - lo), c2 = lo + gr * (hi - lo);
  double f1 = objective(c1), f2 = objective(c2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = c2;
      c2 = c1;
      f2 = f1;
      c1 = hi - gr * (hi - lo);
      f1 = objective(c1);
    } else {
      lo = c1;
      c1 = c2;
      f1 = f2;
      c2 = lo + gr * (hi - lo);
      f2 = objective(c2);
    }
  }
  RhoDeviation out;
  out.eps_star = std::exp(0.5 * (lo + hi));
  out.quotient_term = quotient(out.eps_star);
  out.correction_term = correction / out.eps_star;
  out.deviation = out.quotient_term + out.correction_term;
  return out;
}

// ---- small fitting helper --------------------------------------------------

// Least-squares slope of log(y) against log(x).
inline double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw input_error("slope fit needs matching samples, at least two");
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw input_error("slope fit needs positive samples");
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw input_error("slope fit needs distinct x samples");
  return (n * sxy - sx * sy) / denom;
}

} // namespace ggr
