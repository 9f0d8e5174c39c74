#pragma once

// Independent reference computations for the unit and acceptance tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "qcm/matrix.hpp"

namespace oracle {

// Frozen values, evaluated with mpmath at 40 digits through Hurwitz zeta:
// Σ_{j=a}^{b} j^s = ζ(−s, a) − ζ(−s, b + 1).
inline constexpr double kSumInvSqrt2Pow30 = 65534.53966074997947450287;   // Σ_{j ≤ 2^30} j^{-1/2}
inline constexpr double kAlphaP2L30 = 0.99997771699142424735;             // |S_30|, p = 2
inline constexpr double kAlphaP3L30 = 0.99920326163431103513;             // |S_30|, p = 3
inline constexpr double kLp3P2L24M25 = 2.04966973345087724029;            // |S_24 ⊕ T_25|, p = 2
inline constexpr double kLp3P2L20M20 = 2.14502965046311675714;
inline constexpr double kLp3P2L10M30 = 2.70778584664852335669;
inline constexpr double kLp3P3L34M35 = 1.62421614823213012703;
inline constexpr double kGasketConstant = 9.81765493774486761286;         // p·2^{1+1/p}·2, p = log3/log2

struct PowerSumCase {
  std::int64_t a, b;
  double s;
  double value;
};

inline constexpr PowerSumCase kPowerSums[] = {
    {1, 10'000'000, -0.5, 6323.095123941830767988},
    {1, 1'099'511'627'776, -0.5, 2097150.539645968027571},
    {1000, 1'000'000'000, -0.369070246428542525496, 755641.2110176347330738},
    {3, 2'000'000, -0.25, 70907.97108018546464503},
    {1, 10, 0.0, 10.0},
    {5, 17, -0.9, 1.688800994877323332133},
};

// Σ_{j=a}^{b} j^s term by term in long double with compensation.
inline double kahan_power_sum(std::int64_t a, std::int64_t b, double s) {
  long double sum = 0.0L, comp = 0.0L;
  for (std::int64_t j = b; j >= a; --j) {
    const long double y = std::pow(static_cast<long double>(j), static_cast<long double>(s)) - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return static_cast<double>(sum);
}

// Breadth-first expansion of the word tree under the stopping rule, sorted.
inline std::vector<std::vector<std::uint16_t>> brute_stopping_words(const std::vector<double>& ratios,
                                                                    double r) {
  struct Node {
    std::vector<std::uint16_t> w;
    double lambda;
  };
  std::vector<std::vector<std::uint16_t>> out;
  std::deque<Node> queue{{{}, 1.0}};
  while (!queue.empty()) {
    Node n = std::move(queue.front());
    queue.pop_front();
    if (n.lambda <= 1.0 / r) {
      out.push_back(std::move(n.w));
      continue;
    }
    for (std::size_t j = 0; j < ratios.size(); ++j) {
      Node c{n.w, n.lambda * ratios[j]};
      c.w.push_back(static_cast<std::uint16_t>(j + 1));
      queue.push_back(std::move(c));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline Eigen::MatrixXd to_eigen(const qcm::Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

// Singular values in decreasing order, min(rows, cols) of them.
inline std::vector<double> svd_values(const qcm::Matrix& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

inline qcm::Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> g;
  qcm::Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

inline qcm::Matrix random_symmetric(std::mt19937_64& rng, std::size_t d) {
  qcm::Matrix m = random_matrix(rng, d, d);
  qcm::Matrix s(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

// Haar-ish orthogonal matrix from a QR factorization.
inline qcm::Matrix random_orthogonal(std::mt19937_64& rng, std::size_t n) {
  const Eigen::MatrixXd g = to_eigen(random_matrix(rng, n, n));
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
  qcm::Matrix u(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u(i, j) = q(i, j);
  return u;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace oracle
