#pragma once

#include <cmath>
#include <numbers>

#include "ggr/errors.hpp"
#include "ggr/polylog.hpp"

namespace ggr {

// Free-Fermi-gas thermodynamics in the grand-canonical ensemble with
// dispersion |k|^2 (units hbar^2/2m = 1), d in {1,2,3}.

inline void check_dimension(int d) {
  if (d < 1 || d > 3) throw input_error("dimension must be 1, 2, or 3");
}

// Surface area of the unit sphere S^(d-1).
inline double sphere_area(int d) {
  check_dimension(d);
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / gamma_half(d);
}

// Volume of the unit ball in d dimensions.
inline double ball_volume(int d) { return sphere_area(d) / d; }

// Constant c_d in the scattering energy identity
// inf Int (|grad f|^2 + v f^2 / 2) |x|^2 dx = c_d a^d : {2, 4 pi, 12 pi}.
inline double pwave_energy_constant(int d) {
  check_dimension(d);
  return sphere_area(d) * d;
}

struct GrandParams {
  int d = 3;
  double beta = 1.0;
  double mu = 0.0;

  double log_z() const { return beta * mu; }
  double z() const { return std::exp(log_z()); }

  void validate() const {
    check_dimension(d);
    if (!(beta > 0.0) || !std::isfinite(beta)) throw input_error("beta must be positive and finite");
    if (!std::isfinite(mu)) throw input_error("mu must be finite");
  }
};

// zeta = 1 + |log z|; the dimensionless degeneracy weight multiplying the
// thermal scales throughout the error envelopes.
inline double degeneracy_weight(double log_z) { return 1.0 + std::abs(log_z); }

// Grand-canonical pressure of the free gas:
// psi0 = beta^(-1-d/2) (4 pi)^(-d/2) * (-Li_{d/2+1}(-z)).
inline double free_pressure(const GrandParams& p) {
  p.validate();
  return std::pow(p.beta, -1.0 - 0.5 * p.d) * std::pow(4.0 * std::numbers::pi, -0.5 * p.d) *
         neg_polylog(p.d + 2, p.log_z());
}

// Particle density of the free gas: rho0 = (4 pi beta)^(-d/2) * (-Li_{d/2}(-z)).
inline double free_density(const GrandParams& p) {
  p.validate();
  return std::pow(4.0 * std::numbers::pi * p.beta, -0.5 * p.d) * neg_polylog(p.d, p.log_z());
}

// Coefficient of the leading interaction correction a^d rho0^(2+2/d):
// 2 pi c_d (-Li_{d/2+1}(-z)) / (-Li_{d/2}(-z))^(1+2/d). Depends on z only.
inline double correction_coefficient(int d, double log_z) {
  check_dimension(d);
  const double num = neg_polylog(d + 2, log_z);
  const double den = neg_polylog(d, log_z);
  return 2.0 * std::numbers::pi * pwave_energy_constant(d) * num /
         std::pow(den, 1.0 + 2.0 / d);
}

// Zero-temperature limit of correction_coefficient:
// {2 pi^2/3, 4 pi^2, (12 pi/5)(6 pi^2)^(2/3)} for d = 1, 2, 3.
inline double zero_temperature_coefficient(int d) {
  check_dimension(d);
  const double pi = std::numbers::pi;
  switch (d) {
    case 1: return 2.0 * pi * pi / 3.0;
    case 2: return 4.0 * pi * pi;
    default: return (12.0 * pi / 5.0) * std::pow(6.0 * pi * pi, 2.0 / 3.0);
  }
}

// Fermi momentum of a gas at density rho: rho = ball_volume * k_F^d / (2 pi)^d.
inline double fermi_momentum(double rho, int d) {
  check_dimension(d);
  if (!(rho > 0.0)) throw input_error("fermi_momentum: rho must be positive");
  return 2.0 * std::numbers::pi * std::pow(rho / ball_volume(d), 1.0 / d);
}

// Ground-state energy density of the free gas, as the direct Fermi-sea
// integral Int_{|k|<k_F} |k|^2 dk/(2 pi)^d = d/(d+2) * rho * k_F^2.
// (An equivalent-looking product form with d^(2/d) in place of the leading d
// circulates; it agrees for d = 1, 2 only. The Fermi-sea integral is
// authoritative; see the unit tests for the explicit comparison.)
inline double ground_state_energy_density(double rho, int d) {
  const double kf = fermi_momentum(rho, d);
  return static_cast<double>(d) / (d + 2) * rho * kf * kf;
}

// One fully evaluated thermodynamic state point.
struct FreeGasPoint {
  int d = 3;
  double beta = 0.0;
  double mu = 0.0;
  double log_z = 0.0;
  double zeta = 0.0;  // 1 + |log z|
  double psi0 = 0.0;  // free pressure
  double rho0 = 0.0;  // free density
  double coeff = 0.0; // correction_coefficient(d, log_z)
};

inline FreeGasPoint free_gas_point(const GrandParams& p) {
  p.validate();
  FreeGasPoint out;
  out.d = p.d;
  out.beta = p.beta;
  out.mu = p.mu;
  out.log_z = p.log_z();
  out.zeta = degeneracy_weight(out.log_z);
  out.psi0 = free_pressure(p);
  out.rho0 = free_density(p);
  out.coeff = correction_coefficient(p.d, out.log_z);
  return out;
}

// Invert free_density in mu at fixed beta (the map is strictly increasing).
inline double chemical_potential_for_density(int d, double beta, double rho) {
  check_dimension(d);
  if (!(rho > 0.0) || !(beta > 0.0)) throw input_error("density inversion needs rho, beta > 0");
  auto density = [&](double mu) { return free_density({d, beta, mu}); };
  double lo = -1.0 / beta, hi = 1.0 / beta;
  while (density(lo) > rho) lo *= 2.0;
  while (density(hi) < rho) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (density(mid) < rho ? lo : hi) = mid;
    if (hi - lo < 1e-15 * (std::abs(lo) + std::abs(hi) + 1e-3)) break;
  }
  return 0.5 * (lo + hi);
}

// Free-energy density at fixed density: phi0(beta, rho) = rho mu(rho) - psi0.
inline double free_energy_density(int d, double beta, double rho) {
  const double mu = chemical_potential_for_density(d, beta, rho);
  return rho * mu - free_pressure({d, beta, mu});
}

} // namespace ggr
