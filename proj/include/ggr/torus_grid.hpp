#pragma once

#include <array>
#include <cmath>

#include "ggr/errors.hpp"

namespace ggr {

// Uniform periodic grid with m sites per axis and spacing h in dimension d:
// sites x = h n, n in Z_m^d, side length L = m h, momenta k = (2 pi / L) w
// with w the minimum-image integer representative in [-m/2, m/2).
struct TorusGrid {
  int d = 1;
  int m = 2;
  double h = 1.0;

  void validate() const {
    check_dimension(d);
    if (m < 2) throw input_error("torus needs at least two sites per axis");
    if (!(h > 0.0)) throw input_error("grid spacing must be positive");
  }

  double length() const { return m * h; }

  long long sites() const {
    long long s = 1;
    for (int i = 0; i < d; ++i) s *= m;
    return s;
  }

  int wrap(int j) const {
    int r = j % m;
    return r < 0 ? r + m : r;
  }

  // integer representative in [-m/2, m/2)
  int min_image(int j) const {
    const int r = wrap(j);
    return 2 * r >= m ? r - m : r;
  }

  double coordinate(int j) const { return h * min_image(j); }

  double momentum(int j) const { return 2.0 * M_PI / length() * min_image(j); }

  // flat row-major index <-> integer coordinates (first axis slowest)
  void decode(long long s, std::array<int, 3>& x) const {
    for (int i = d - 1; i >= 0; --i) {
      x[static_cast<std::size_t>(i)] = static_cast<int>(s % m);
      s /= m;
    }
  }

  long long encode(const std::array<int, 3>& x) const {
    long long s = 0;
    for (int i = 0; i < d; ++i) s = s * m + wrap(x[static_cast<std::size_t>(i)]);
    return s;
  }

  // squared Euclidean minimum-image distance of a displacement site
  double min_image_norm2(const std::array<int, 3>& x) const {
    double r2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double c = coordinate(x[static_cast<std::size_t>(i)]);
      r2 += c * c;
    }
    return r2;
  }
};

} // namespace ggr
