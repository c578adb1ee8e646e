#include "geolab/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace geolab {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("spline: need >= 2 knots, matching sizes");
  for (size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("spline: knots must strictly increase");
  m_.assign(n, 0.0);
  if (n == 2) return;
  // Thomas solve of the natural-spline tridiagonal system for m'' at knots
  std::vector<double> diag(n - 2), rhs(n - 2), upper(n - 2);
  for (size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  for (size_t i = 1; i < diag.size(); ++i) {
    const double h0 = x_[i + 1] - x_[i];  // sub-diagonal entry for row i
    const double w = h0 / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (size_t i = diag.size(); i-- > 0;) {
    double v = rhs[i];
    if (i + 1 < diag.size()) v -= upper[i] * m_[i + 2];
    m_[i + 1] = v / diag[i];
  }
}

int CubicSpline::segment(double t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  int i = static_cast<int>(it - x_.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
}

double CubicSpline::value(double t) const {
  const int i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::deriv(double t) const {
  const int i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h / 6.0;
}

}  // namespace geolab
