#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "ggr/errors.hpp"

namespace ggr {

// Registry for the non-universal constants appearing in analytic envelopes and
// tail estimates. Every constant defaults to 1.0; calibration routines may
// overwrite entries with fitted values, and outputs report whatever was used.
// Keeping them in one named table makes each bound's provenance auditable and
// keeps "fitted" clearly separated from "proved" throughout the code.
class ConstantRegistry {
public:
  double get(const std::string& name) const {
    auto it = values_.find(name);
    return it == values_.end() ? 1.0 : it->second;
  }

  void set(const std::string& name, double value) {
    if (!(std::isfinite(value)) || value <= 0.0)
      throw input_error("registry constant '" + name + "' must be finite and positive");
    values_[name] = value;
  }

  bool has(const std::string& name) const { return values_.count(name) != 0; }

  // Raise `name` to at least `value` (used when fitting a constant as the
  // maximum implied value over a calibration set).
  void fit_max(const std::string& name, double value) {
    if (!std::isfinite(value)) throw verify_error("non-finite fit for registry constant '" + name + "'");
    double cur = has(name) ? get(name) : 0.0;
    values_[name] = std::max(cur, value);
  }

  // Sorted "name=value" lines, one per entry.
  std::string dump() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.12e", v);
      os << k << "=" << buf << "\n";
    }
    return os.str();
  }

private:
  std::map<std::string, double> values_;
};

} // namespace ggr
