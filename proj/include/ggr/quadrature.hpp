#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ggr/errors.hpp"

namespace ggr {

// Composite 16-point Gauss-Legendre quadrature on explicit panel lists.
// Panels are chosen by the callers so that every integrand feature (endpoint
// singularities removed by substitution, smoothed steps, potential edges) is
// resolved by panel width rather than by adaptivity; this keeps evaluation
// order deterministic.

namespace gl16 {
// Positive-half abscissas and weights for n=16 on [-1, 1].
inline constexpr double nodes[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
inline constexpr double weights[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};
} // namespace gl16

template <class F>
double integrate_gl16(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = half * gl16::nodes[i];
    acc += gl16::weights[i] * (f(mid - dx) + f(mid + dx));
  }
  return acc * half;
}

template <class F>
double integrate_panels(F&& f, const std::vector<double>& breaks) {
  if (breaks.size() < 2) throw input_error("integrate_panels: need at least one panel");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) acc += integrate_gl16(f, breaks[i], breaks[i + 1]);
  return acc;
}

inline std::vector<double> linear_breaks(double a, double b, int n) {
  if (!(b > a) || n < 1) throw input_error("linear_breaks: need b > a and n >= 1");
  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / n;
  return v;
}

inline std::vector<double> geometric_breaks(double a, double b, int n) {
  if (!(b > a) || !(a > 0.0) || n < 1) throw input_error("geometric_breaks: need 0 < a < b and n >= 1");
  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  const double r = std::log(b / a) / n;
  for (int i = 0; i <= n; ++i) v[static_cast<std::size_t>(i)] = a * std::exp(r * i);
  v.front() = a;
  v.back() = b;
  return v;
}

// Merge panel breakpoints with extra refinement of width `fine` inside
// [c - halo, c + halo]; used to resolve a localized feature at c.
inline std::vector<double> refine_breaks(std::vector<double> breaks, double c, double halo, double fine) {
  const double lo = std::max(breaks.front(), c - halo);
  const double hi = std::min(breaks.back(), c + halo);
  for (double x = lo; x < hi + 0.5 * fine; x += fine) breaks.push_back(std::min(x, hi));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14 * (1.0 + std::abs(a)); }),
               breaks.end());
  return breaks;
}

} // namespace ggr
