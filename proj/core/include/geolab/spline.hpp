#pragma once

#include <vector>

namespace geolab {

// Natural cubic spline through strictly increasing knots. Evaluation outside
// the knot range extrapolates with the boundary cubic.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double value(double t) const;
  double deriv(double t) const;

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  bool valid() const { return x_.size() >= 2; }

 private:
  int segment(double t) const;
  std::vector<double> x_, y_, m_;  // m_ = second derivatives at knots
};

}  // namespace geolab
