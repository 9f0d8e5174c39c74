#include <cmath>

#include "qcm/error.hpp"
#include "qcm/ideal_norms.hpp"

namespace qcm {

namespace {

constexpr std::int64_t kDirectSpan = 1'000'000;
constexpr std::int64_t kTailStart = 1000;

double pairwise(std::int64_t a, std::int64_t b, double s) {
  if (b - a < 32) {
    double acc = 0.0;
    for (std::int64_t j = a; j <= b; ++j) acc += std::pow(static_cast<double>(j), s);
    return acc;
  }
  const std::int64_t mid = a + (b - a) / 2;
  return pairwise(a, mid, s) + pairwise(mid + 1, b, s);
}

// Euler–Maclaurin with the B2 and B4 corrections; a ≥ kTailStart keeps the
// truncated remainder below 1e-16 relative.
double euler_maclaurin(std::int64_t a, std::int64_t b, double s) {
  const double x = static_cast<double>(a);
  const double y = static_cast<double>(b);
  const double q = 1.0 + s;
  // (y^q − x^q)/q without cancellation when y ≈ x.
  const double integral = std::pow(x, q) * std::expm1(q * std::log1p((y - x) / x)) / q;
  const double fx = std::pow(x, s);
  const double fy = std::pow(y, s);
  const double d1x = s * std::pow(x, s - 1.0);
  const double d1y = s * std::pow(y, s - 1.0);
  const double c3 = s * (s - 1.0) * (s - 2.0);
  const double d3x = c3 * std::pow(x, s - 3.0);
  const double d3y = c3 * std::pow(y, s - 3.0);
  return integral + 0.5 * (fx + fy) + (d1y - d1x) / 12.0 - (d3y - d3x) / 720.0;
}

}  // namespace

double power_weight_sum(std::int64_t a, std::int64_t b, double s) {
  if (a < 1 || b < a) throw Error(ErrorKind::InvalidParams, "power_weight_sum needs 1 <= a <= b");
  if (b - a + 1 <= kDirectSpan) return pairwise(a, b, s);
  double head = 0.0;
  if (a < kTailStart) {
    head = pairwise(a, kTailStart - 1, s);
    a = kTailStart;
  }
  return head + euler_maclaurin(a, b, s);
}

}  // namespace qcm
