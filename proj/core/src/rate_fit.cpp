#include "hardyfem/rate_fit.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace hardyfem {

RateFit fit_rate(const std::vector<std::pair<double, double>>& points, RateModel model) {
  if (points.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
  std::set<double> hs;
  for (const auto& [h, e] : points) {
    if (!(h > 0.0)) throw std::invalid_argument("fit_rate: h must be positive");
    if (!(e > 0.0)) throw std::invalid_argument("fit_rate: errors must be positive");
    hs.insert(h);
  }
  if (hs.size() != points.size()) throw std::invalid_argument("fit_rate: h values must be distinct");

  const int n = static_cast<int>(points.size());
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    const double h = points[i].first;
    xs[i] = model == RateModel::power_in_h ? std::log(h) : std::log(std::abs(std::log(h)));
    ys[i] = std::log(points[i].second);
  }
  double xm = 0.0, ym = 0.0;
  for (int i = 0; i < n; ++i) {
    xm += xs[i];
    ym += ys[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxy += (xs[i] - xm) * (ys[i] - ym);
    syy += (ys[i] - ym) * (ys[i] - ym);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: degenerate abscissae");
  const double slope = sxy / sxx;
  const double intercept = ym - slope * xm;

  RateFit fit;
  fit.model = model;
  fit.exponent = model == RateModel::power_in_h ? slope : -slope;
  fit.constant = std::exp(intercept);
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double pred = intercept + slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  fit.scaled_residuals.resize(n);
  for (int i = 0; i < n; ++i) {
    const double h = points[i].first;
    const double e = points[i].second;
    fit.scaled_residuals[i] = model == RateModel::power_in_h
                                  ? e * std::pow(h, -fit.exponent)
                                  : e * std::pow(std::abs(std::log(h)), fit.exponent);
  }
  return fit;
}

}  // namespace hardyfem
