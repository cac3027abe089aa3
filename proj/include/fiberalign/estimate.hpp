#pragma once

#include <cstddef>
#include <span>

namespace fiberalign {

// Monte Carlo mean with its standard error.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares y = slope * x + intercept. Needs at least two
// distinct x values.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

}  // namespace fiberalign
