#pragma once

// Least-squares convergence-rate fits on (log h, log e) or
// (log |log h|, log e); the latter quantifies logarithmic rates
// e_h ~ C |log h|^-p.

#include <utility>
#include <vector>

namespace hardyfem {

enum class RateModel { power_in_h, power_in_log };

struct RateFit {
  RateModel model = RateModel::power_in_h;
  double exponent = 0.0;  // p in e ~ C h^p or e ~ C |log h|^-p
  double constant = 0.0;  // C
  double r_squared = 0.0;
  std::vector<double> scaled_residuals;  // e_h h^-p or e_h |log h|^p at the fitted p
};

/// Needs >= 3 points with distinct h and strictly positive errors.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points, RateModel model);

}  // namespace hardyfem
