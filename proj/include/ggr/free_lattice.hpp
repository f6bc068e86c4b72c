#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "ggr/errors.hpp"
#include "ggr/polylog.hpp"
#include "ggr/quadrature.hpp"
#include "ggr/thermo.hpp"
#include "ggr/torus_grid.hpp"

namespace ggr {

// Free Fermi gas on a discrete torus.  The one-body weight in momentum space
// is the Fermi factor of a chosen dispersion,
//
//   gamma_hat(k) = w(k) / (1 + w(k)),   w(k) = exp(beta (mu - eps(k))),
//
// and the position kernel is its lattice Fourier transform
//
//   gamma(x) = L^{-d} sum_k gamma_hat(k) exp(i k . x).
//
// Correlations of the free state are Wick determinants of this kernel.
enum class DispersionKind {
  Gaussian,    // eps(k) = |k|^2 with k the minimum-image momentum
  TightBinding // eps(k) = sum_i (2 - 2 cos(k_i h)) / h^2
};

struct DiscreteTorusModel {
  TorusGrid grid;
  double beta = 1.0;
  double mu = 0.0;
  DispersionKind dispersion = DispersionKind::Gaussian;

  void validate() const {
    grid.validate();
    if (!(beta > 0.0) || !std::isfinite(mu)) throw input_error("need beta > 0 and finite mu");
  }

  double dispersion_at(const std::array<int, 3>& kidx) const {
    double e = 0.0;
    for (int i = 0; i < grid.d; ++i) {
      const double k = grid.momentum(kidx[static_cast<std::size_t>(i)]);
      if (dispersion == DispersionKind::Gaussian) {
        e += k * k;
      } else {
        e += (2.0 - 2.0 * std::cos(k * grid.h)) / (grid.h * grid.h);
      }
    }
    return e;
  }

  // log of the activity weight w(k) = z exp(-beta eps(k))
  double log_weight(const std::array<int, 3>& kidx) const {
    return beta * (mu - dispersion_at(kidx));
  }

  // Fermi factor w/(1+w), evaluated stably on both sides
  double occupation(const std::array<int, 3>& kidx) const {
    const double lw = log_weight(kidx);
    if (lw >= 0.0) return 1.0 / (1.0 + std::exp(-lw));
    const double w = std::exp(lw);
    return w / (1.0 + w);
  }

  // Largest Fermi factor on the Brillouin-zone boundary; the position kernel
  // approximates its continuum counterpart only when this is negligible.
  double bz_edge_occupation() const {
    std::array<int, 3> kidx = {0, 0, 0};
    kidx[0] = grid.m / 2;
    return occupation(kidx);
  }

  // gamma_hat on every momentum site, flat row-major index
  std::vector<double> occupation_table() const {
    validate();
    const long long s = grid.sites();
    std::vector<double> out(static_cast<std::size_t>(s));
    std::array<int, 3> kidx = {0, 0, 0};
    for (long long i = 0; i < s; ++i) {
      grid.decode(i, kidx);
      out[static_cast<std::size_t>(i)] = occupation(kidx);
    }
    return out;
  }

  // rho_0(L) = L^{-d} sum_k gamma_hat(k) = gamma(0)
  double density() const {
    validate();
    const long long s = grid.sites();
    std::array<int, 3> kidx = {0, 0, 0};
    double acc = 0.0;
    for (long long i = 0; i < s; ++i) {
      grid.decode(i, kidx);
      acc += occupation(kidx);
    }
    return acc / std::pow(grid.length(), grid.d);
  }

  // Full displacement table gamma(x) for all m^d wrapped displacements by
  // direct Fourier sum (cost sites^2, guarded).  Real by k -> -k symmetry.
  std::vector<double> kernel_table() const {
    validate();
    const long long s = grid.sites();
    if (s * s > 40000000LL)
      throw resource_error("kernel table needs sites^2 Fourier work; grid too large");
    const auto occ = occupation_table();
    const auto ct = cos_table();
    std::vector<double> out(static_cast<std::size_t>(s), 0.0);
    std::array<int, 3> x = {0, 0, 0}, k = {0, 0, 0};
    const double scale = 1.0 / std::pow(grid.length(), grid.d);
    for (long long ix = 0; ix < s; ++ix) {
      grid.decode(ix, x);
      double acc = 0.0;
      for (long long ik = 0; ik < s; ++ik) {
        grid.decode(ik, k);
        long long phase = 0;
        for (int i = 0; i < grid.d; ++i)
          phase += static_cast<long long>(k[static_cast<std::size_t>(i)]) *
                   x[static_cast<std::size_t>(i)];
        acc += occ[static_cast<std::size_t>(ik)] *
               ct[static_cast<std::size_t>(phase % grid.m)];
      }
      out[static_cast<std::size_t>(ix)] = acc * scale;
    }
    return out;
  }

  // gamma(j h e_1) for j = 0..jmax without the full table: sum out the
  // transverse axes first (cost sites + jmax * m).
  std::vector<double> axis_kernel(int jmax) const {
    validate();
    if (grid.sites() > 40000000LL)
      throw resource_error("axis kernel sums every momentum site; grid too large");
    std::vector<double> profile(static_cast<std::size_t>(grid.m), 0.0);
    const long long s = grid.sites();
    std::array<int, 3> k = {0, 0, 0};
    for (long long ik = 0; ik < s; ++ik) {
      grid.decode(ik, k);
      profile[static_cast<std::size_t>(k[0])] += occupation(k);
    }
    const auto ct = cos_table();
    std::vector<double> out(static_cast<std::size_t>(jmax) + 1, 0.0);
    const double scale = 1.0 / std::pow(grid.length(), grid.d);
    for (int j = 0; j <= jmax; ++j) {
      double acc = 0.0;
      for (int k1 = 0; k1 < grid.m; ++k1)
        acc += profile[static_cast<std::size_t>(k1)] *
               ct[static_cast<std::size_t>((static_cast<long long>(k1) * j) % grid.m)];
      out[static_cast<std::size_t>(j)] = acc * scale;
    }
    return out;
  }

  // L^{-d} sum_k |k|^p w^n / (1+w)^m, evaluated through logs so large and
  // small activity weights are both safe.
  double momentum_moment(int p, int n, int m_pow) const {
    validate();
    if (p < 0 || n < 0 || m_pow < 0) throw input_error("momentum moment powers must be >= 0");
    if (grid.sites() > 40000000LL)
      throw resource_error("momentum moment sums every momentum site; grid too large");
    const long long s = grid.sites();
    std::array<int, 3> kidx = {0, 0, 0};
    double acc = 0.0;
    for (long long i = 0; i < s; ++i) {
      grid.decode(i, kidx);
      double k2 = 0.0;
      for (int ax = 0; ax < grid.d; ++ax) {
        const double k = grid.momentum(kidx[static_cast<std::size_t>(ax)]);
        k2 += k * k;
      }
      const double lw = log_weight(kidx);
      const double softplus = lw > 0.0 ? lw + std::log1p(std::exp(-lw)) : std::log1p(std::exp(lw));
      const double term = std::exp(n * lw - m_pow * softplus);
      acc += (p == 0 ? 1.0 : std::pow(std::sqrt(k2), p)) * term;
    }
    return acc / std::pow(grid.length(), grid.d);
  }

private:
  std::vector<double> cos_table() const {
    std::vector<double> ct(static_cast<std::size_t>(grid.m));
    for (int t = 0; t < grid.m; ++t)
      ct[static_cast<std::size_t>(t)] = std::cos(2.0 * M_PI * t / grid.m);
    return ct;
  }
};

// q-point correlation of the free state: rho^(q)(x_1..x_q) = det gamma(x_i - x_j).
inline double wick_density(const TorusGrid& grid, const std::vector<double>& kernel,
                           const std::vector<std::array<int, 3>>& points) {
  const int q = static_cast<int>(points.size());
  Eigen::MatrixXd A(q, q);
  std::array<int, 3> diff = {0, 0, 0};
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      for (int ax = 0; ax < grid.d; ++ax)
        diff[static_cast<std::size_t>(ax)] =
            points[static_cast<std::size_t>(i)][static_cast<std::size_t>(ax)] -
            points[static_cast<std::size_t>(j)][static_cast<std::size_t>(ax)];
      A(i, j) = kernel[static_cast<std::size_t>(grid.encode(diff))];
    }
  }
  return A.determinant();
}

// h^d sum_x |gamma(x)| |x|^n with minimum-image distances (n = 0 gives the
// kernel L1 mass that controls the expansion estimates).
inline double kernel_abs_moment(const TorusGrid& grid, const std::vector<double>& kernel,
                                int n) {
  double acc = 0.0;
  std::array<int, 3> x = {0, 0, 0};
  for (long long i = 0; i < grid.sites(); ++i) {
    grid.decode(i, x);
    const double r2 = grid.min_image_norm2(x);
    acc += std::abs(kernel[static_cast<std::size_t>(i)]) *
           (n == 0 ? 1.0 : std::pow(std::sqrt(r2), n));
  }
  return acc * std::pow(grid.h, grid.d);
}

// Thermodynamic-limit counterpart of DiscreteTorusModel::momentum_moment for
// the Gaussian dispersion:
//
//   (2 pi)^{-d} int |k|^p w^n / (1 + w)^m dk,   w(k) = z exp(-beta |k|^2).
//
// For n = m = 1 the integral is a complete Fermi-Dirac integral and is
// evaluated through the polylogarithm.  Otherwise it is computed by
// Gauss-Legendre panels in |k| with the panel layout adapted to the Fermi
// shell |k|^2 = mu, where the integrand varies on the scale 1/(beta |k|).
inline double continuum_momentum_moment(int d, double beta, double mu, int p, int n, int m_pow) {
  check_dimension(d);
  if (!(beta > 0.0) || !std::isfinite(mu)) throw input_error("need beta > 0 and finite mu");
  if (p < 0 || n < 1 || m_pow < n)
    throw input_error("continuum momentum moment needs p >= 0 and 1 <= n <= m");

  const double prefactor = sphere_area(d) / std::pow(2.0 * std::numbers::pi, d);
  if (n == 1 && m_pow == 1) {
    // (2 pi)^{-d} int |k|^p / (e^{beta(|k|^2 - mu)} + 1) dk
    //   = |S^{d-1}| / (2 (2 pi)^d) beta^{-(p+d)/2} Gamma((p+d)/2) (-Li_{(p+d)/2}(-z))
    const int twice_s = p + d;
    return 0.5 * prefactor * std::pow(beta, -0.5 * twice_s) *
           std::exp(std::lgamma(0.5 * twice_s)) * neg_polylog(twice_s, beta * mu);
  }

  // gamma_hat^n / (1 + gamma_hat)^m at u = beta(|k|^2 - mu), evaluated in logs
  auto weight = [&](double u) {
    const double sp = -u > 0.0 ? -u + std::log1p(std::exp(u)) : std::log1p(std::exp(-u));
    return std::exp(-n * u - m_pow * sp);
  };
  auto integrand = [&](double k) { return std::pow(k, p + d - 1) * weight(beta * (k * k - mu)); };

  // Panel edges: coarse below the shell, dense across it, geometric tail.
  const double u_shell = 30.0, u_tail = 200.0;
  const double k_lo = mu > u_shell / beta ? std::sqrt(mu - u_shell / beta) : 0.0;
  const double k_hi = std::sqrt(std::max(mu, 0.0) + u_tail / beta);
  const double k_shell_hi = std::sqrt(std::max(mu, 0.0) + u_shell / beta);
  std::vector<double> breaks;
  for (int i = 0; i <= 8; ++i) breaks.push_back(k_lo * i / 8.0);
  for (int i = 1; i <= 24; ++i) breaks.push_back(k_lo + (k_shell_hi - k_lo) * i / 24.0);
  for (int i = 1; i <= 12; ++i)
    breaks.push_back(k_shell_hi * std::pow(k_hi / k_shell_hi, i / 12.0));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  if (breaks.size() < 2) throw verify_error("degenerate panel layout for momentum moment");
  return prefactor * integrate_panels(integrand, breaks);
}

struct QuadraticFit {
  double fitted = 0.0;    // fitted r^2 coefficient of rho^(2)(0, r e_1)
  double predicted = 0.0; // thermodynamic prediction coeff * rho0^{2+2/d} / c_d
  double rho0 = 0.0;
  double window = 0.0;
  int points = 0;
};

// Fit rho^(2)(0, x) = rho0^2 - gamma(|x|)^2 ~ c |x|^2 on axis separations
// within |x| <= 0.05 rho0^{-1/d}, allowing an r^4 term to absorb curvature.
// The thermodynamic prediction for c follows from the small-x expansion of
// the kernel: c = (rho0/d) * (second momentum moment of gamma_hat), which in
// closed form is correction_coefficient(d, log z) rho0^{2+2/d} / c_d.
inline QuadraticFit rho2_quadratic_coefficient(const DiscreteTorusModel& model) {
  model.validate();
  const int d = model.grid.d;
  QuadraticFit fit;
  const double rho0 = model.density();
  fit.rho0 = rho0;
  fit.window = 0.05 * std::pow(rho0, -1.0 / d);
  const int jmax = static_cast<int>(fit.window / model.grid.h);
  if (jmax < 4) throw input_error("fit window covers fewer than 4 lattice separations");
  if (2 * jmax >= model.grid.m) throw input_error("fit window does not fit on the torus");
  const auto prof = model.axis_kernel(jmax);
  fit.points = jmax;
  Eigen::MatrixXd X(jmax, 2);
  Eigen::VectorXd y(jmax);
  for (int j = 1; j <= jmax; ++j) {
    const double r = j * model.grid.h;
    const double rho2 = rho0 * rho0 - prof[static_cast<std::size_t>(j)] * prof[static_cast<std::size_t>(j)];
    X(j - 1, 0) = r * r;
    X(j - 1, 1) = r * r * r * r;
    y(j - 1) = rho2;
  }
  Eigen::Vector2d c = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  fit.fitted = c(0);
  fit.predicted = correction_coefficient(d, model.beta * model.mu) *
                  std::pow(rho0, 2.0 + 2.0 / d) / pwave_energy_constant(d);
  return fit;
}

} // namespace ggr
