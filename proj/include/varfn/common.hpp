#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace varfn {

/// A real-valued function on [-1,1]^M, evaluated at a point given as a span of
/// length M. Must be safe to call concurrently.
using Evaluable = std::function<double(std::span<const double>)>;

/// Raised when a computation fails for numerical rather than configuration
/// reasons (stagnation, envelope violation, degenerate sampling). The CLI maps
/// it to exit status 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Execution settings handed down from the caller. threads == 0 means the
/// OpenMP default; serial forces the reference kernels.
struct Exec {
  int threads = 0;
  bool serial = false;
};

}  // namespace varfn
