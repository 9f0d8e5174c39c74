#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace qcm::kernels::detail {

struct Thresholds {
  double rel = 0.0;    // on |x·y| / (‖x‖‖y‖)
  double floor = 0.0;  // on |x·y| itself
};

// Relative threshold max(tol, √n·ε); absolute floor (n·ε·‖A‖_F)².
inline Thresholds thresholds(const std::vector<double>& buf, std::size_t n, double tol) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double frob = 0.0;
  for (double v : buf) frob += v * v;
  const double scale = static_cast<double>(n) * eps;
  return {std::max(tol, std::sqrt(static_cast<double>(n)) * eps), scale * scale * frob};
}

// Orthogonalize columns x and y (length n) in place. Returns false when the
// pair is already orthogonal to within the thresholds.
inline bool rotate_pair(double* x, double* y, std::size_t n, const Thresholds& tol) {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    alpha += x[k] * x[k];
    beta += y[k] * y[k];
    gamma += x[k] * y[k];
  }
  if (alpha == 0.0 || beta == 0.0) return false;
  if (std::abs(gamma) <= tol.floor) return false;
  if (std::abs(gamma) <= tol.rel * std::sqrt(alpha) * std::sqrt(beta)) return false;

  const double zeta = (beta - alpha) / (2.0 * gamma);
  const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = c * t;
  for (std::size_t k = 0; k < n; ++k) {
    const double xk = x[k];
    const double yk = y[k];
    x[k] = c * xk - s * yk;
    y[k] = s * xk + c * yk;
  }
  return true;
}

inline double column_norm(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += x[k] * x[k];
  return std::sqrt(s);
}

}  // namespace qcm::kernels::detail
