#pragma once

#include <stdexcept>
#include <string>

namespace ggr {

// Error taxonomy shared by the library and the CLI.
//
// input_error    -> malformed configuration, out-of-domain parameters   (CLI exit 2)
// resource_error -> a size guard tripped (state space, tensor ranks)    (CLI exit 3)
// verify_error   -> an internal cross-check failed                      (CLI exit 1)

class input_error : public std::runtime_error {
public:
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

class resource_error : public std::runtime_error {
public:
  explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

class verify_error : public std::runtime_error {
public:
  explicit verify_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A bound was requested outside the temperature regime where it holds; the
// caller should switch to the other branch or report no bound.  Treated as a
// domain problem (CLI exit 2).
class regime_error : public input_error {
public:
  explicit regime_error(const std::string& msg) : input_error(msg) {}
};

} // namespace ggr
