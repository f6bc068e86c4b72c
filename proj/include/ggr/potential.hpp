#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ggr/errors.hpp"

namespace ggr {

// Repulsive pair potentials with compact radial support.
//
//   HardCore        v = +inf on r < core_radius, 0 beyond
//   SoftSphere      v = height on r < range, 0 beyond
//   TabulatedRadial piecewise-linear samples (r_i, v_i); v = v.front() below
//                   the first node, 0 beyond the last
enum class PotentialKind { HardCore, SoftSphere, TabulatedRadial };

struct Potential {
  PotentialKind kind = PotentialKind::SoftSphere;
  double core_radius = 0.0; // HardCore
  double height = 0.0;      // SoftSphere
  double range = 0.0;       // SoftSphere
  std::vector<double> r;    // TabulatedRadial nodes (strictly increasing)
  std::vector<double> v;    // TabulatedRadial values (>= 0)

  void validate() const {
    switch (kind) {
      case PotentialKind::HardCore:
        if (!(core_radius > 0.0)) throw input_error("hard core radius must be positive");
        break;
      case PotentialKind::SoftSphere:
        if (!(range > 0.0)) throw input_error("soft sphere range must be positive");
        if (!(height >= 0.0)) throw input_error("potential must be repulsive (height >= 0)");
        break;
      case PotentialKind::TabulatedRadial: {
        if (r.size() != v.size() || r.size() < 2)
          throw input_error("tabulated potential needs matching r/v arrays with >= 2 nodes");
        for (std::size_t i = 0; i < r.size(); ++i) {
          if (!(v[i] >= 0.0)) throw input_error("potential must be repulsive (v >= 0)");
          if (i > 0 && !(r[i] > r[i - 1])) throw input_error("tabulated radii must increase");
        }
        if (!(r.front() >= 0.0)) throw input_error("tabulated radii must be nonnegative");
        break;
      }
    }
  }

  // Radius beyond which v vanishes identically.
  double support_radius() const {
    switch (kind) {
      case PotentialKind::HardCore: return core_radius;
      case PotentialKind::SoftSphere: return range;
      default: return r.back();
    }
  }

  bool has_hard_core() const { return kind == PotentialKind::HardCore; }

  // Finite part of v (callers handle the hard core by boundary condition).
  double operator()(double rr) const {
    switch (kind) {
      case PotentialKind::HardCore:
        return 0.0;
      case PotentialKind::SoftSphere:
        return rr < range ? height : 0.0;
      default: {
        if (rr <= r.front()) return v.front();
        if (rr >= r.back()) return 0.0;
        auto it = std::upper_bound(r.begin(), r.end(), rr);
        const std::size_t i = static_cast<std::size_t>(it - r.begin());
        const double t = (rr - r[i - 1]) / (r[i] - r[i - 1]);
        return v[i - 1] + t * (v[i] - v[i - 1]);
      }
    }
  }
};

} // namespace ggr
