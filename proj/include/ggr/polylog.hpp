#pragma once

#include <cmath>
#include <numbers>

#include "ggr/errors.hpp"
#include "ggr/quadrature.hpp"

namespace ggr {

// Gamma(k/2) for positive integer k, by the half-integer recursion from
// Gamma(1/2) = sqrt(pi) and Gamma(1) = 1.
inline double gamma_half(int twice_s) {
  if (twice_s < 1) throw input_error("gamma_half: argument must be a positive half-integer");
  double g = (twice_s % 2 == 1) ? std::sqrt(std::numbers::pi) : 1.0;
  for (int k = twice_s % 2 == 1 ? 1 : 2; k < twice_s; k += 2) g *= 0.5 * k;
  return g;
}

namespace detail {

// Fermi factor 1/(e^u + 1), overflow-safe on both sides.
inline double fermi_factor(double u) {
  if (u > 36.0) return std::exp(-u);
  if (u < -36.0) return 1.0 - std::exp(u);
  return 1.0 / (std::exp(u) + 1.0);
}

// Alternating-series acceleration (Chebyshev-weighted partial sums) for
// sum_{k>=0} (-1)^k a_k with totally monotone a_k; error ~ (3+sqrt(8))^-n.
template <class A>
double alternating_sum_accelerated(A&& a, int n) {
  double d = std::pow(3.0 + std::sqrt(8.0), n);
  d = 0.5 * (d + 1.0 / d);
  double b = -1.0, c = -d, s = 0.0;
  for (int k = 0; k < n; ++k) {
    c = b - c;
    s += c * a(k);
    b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0));
  }
  return s / d;
}

} // namespace detail

// neg_polylog(s, x) = -Li_s(-e^x), the complete Fermi-Dirac integral
//
//   (1/Gamma(s)) * Int_0^inf t^(s-1) / (e^(t-x) + 1) dt .
//
// `twice_s` is 2s (the order is always an integer or half-integer here).
// Branch selection:
//   * x <= log(1/2): direct alternating series in z = e^x (geometric decay)
//   * log(1/2) < x <= 0: accelerated alternating series
//   * x > 0: the integral, split at t = max(x, 1); the [0, t_split] piece is
//     computed with t = u^2 (removes the t^(s-1) endpoint singularity) and
//     panel refinement around the Fermi edge u = sqrt(x).
inline double neg_polylog(int twice_s, double x) {
  if (twice_s < 1) throw input_error("neg_polylog: order must be positive");
  const double s = 0.5 * twice_s;

  if (x <= 0.0) {
    const double z = std::exp(x);
    if (z <= 0.5) {
      double sum = 0.0, term;
      for (int n = 1; n <= 200; ++n) {
        term = ((n & 1) ? 1.0 : -1.0) * std::exp(n * x) / std::pow(n, s);
        sum += term;
        if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
      }
      return sum;
    }
    return detail::alternating_sum_accelerated(
        [&](int k) { return std::exp((k + 1) * x) / std::pow(k + 1, s); }, 48);
  }

  const double t_split = std::max(x, 1.0);
  const double u_edge = std::sqrt(x);

  // [0, t_split] with t = u^2: 2 * Int u^(2s-1) fermi(u^2 - x) du.
  const double u_hi = std::sqrt(t_split);
  auto breaks_a = linear_breaks(0.0, u_hi, std::max(1, static_cast<int>(std::ceil(u_hi / 0.2))));
  breaks_a = refine_breaks(std::move(breaks_a), u_edge, 0.6, 0.05);
  const double piece_a =
      2.0 * integrate_panels(
                [&](double u) { return std::pow(u, twice_s - 1) * detail::fermi_factor(u * u - x); },
                breaks_a);

  // [t_split, t_split + 60]: exponential decay beyond the edge.
  std::vector<double> breaks_b = linear_breaks(t_split, t_split + 8.0, 16);
  for (double w = 8.0, step = 1.0; w < 60.0; w += step, step *= 1.25)
    breaks_b.push_back(t_split + std::min(w + step, 60.0));
  breaks_b = refine_breaks(std::move(breaks_b), t_split, 0.0, 1.0); // dedupe/sort only
  const double piece_b = integrate_panels(
      [&](double t) { return std::pow(t, s - 1.0) * detail::fermi_factor(t - x); }, breaks_b);

  return (piece_a + piece_b) / gamma_half(twice_s);
}

// Large-x expansion -Li_s(-e^x) = x^s/Gamma(s+1) * (1 + s(s-1) pi^2/6 x^-2
// + s(s-1)(s-2)(s-3) 7 pi^4/360 x^-4 + ...), used as an independent check.
inline double neg_polylog_asymptotic(int twice_s, double x) {
  if (x <= 0.0) throw input_error("neg_polylog_asymptotic: needs x > 0");
  const double s = 0.5 * twice_s;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double c2 = pi2 / 6.0;
  const double c4 = 7.0 * pi2 * pi2 / 360.0;
  double corr = 1.0 + c2 * s * (s - 1.0) / (x * x) +
                c4 * s * (s - 1.0) * (s - 2.0) * (s - 3.0) / (x * x * x * x);
  return std::pow(x, s) / gamma_half(twice_s + 2) * corr;
}

} // namespace ggr
