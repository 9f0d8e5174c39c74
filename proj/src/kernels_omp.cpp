#include <algorithm>
#include <numeric>

#include "jacobi_rotation.hpp"
#include "qcm/kernels.hpp"

namespace qcm::kernels {

namespace {

// Column-major copy of m, or of mᵀ when m is wide, so the working set
// has min(rows, cols) columns.
std::vector<double> columns_of(const Matrix& m, std::size_t& len, std::size_t& count) {
  const bool wide = m.rows() < m.cols();
  len = wide ? m.cols() : m.rows();
  count = wide ? m.rows() : m.cols();
  std::vector<double> buf(len * count);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (wide)
        buf[i * len + j] = m(i, j);
      else
        buf[j * len + i] = m(i, j);
    }
  return buf;
}

}  // namespace

Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t inner = a.cols();
  const std::size_t out = b.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto crow = c.row(static_cast<std::size_t>(i));
    auto arow = a.row(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < out; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix gram(const Matrix& a) {
  const std::size_t n = a.cols();
  Matrix at = a.transpose();
  Matrix g(n, n);
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t ii = 0; ii < nn; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto xi = at.row(i);
    for (std::size_t j = i; j < n; ++j) {
      auto xj = at.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < xi.size(); ++k) s += xi[k] * xj[k];
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

JacobiResult jacobi_singular_values(const Matrix& a, const JacobiOptions& opts) {
  std::size_t len = 0, count = 0;
  std::vector<double> buf = columns_of(a, len, count);
  const auto tol = detail::thresholds(buf, len, opts.tolerance);
  JacobiResult res;

  const std::size_t players = count + (count % 2);
  std::vector<std::ptrdiff_t> pos(players);
  std::iota(pos.begin(), pos.end(), 0);
  if (players != count) pos.back() = -1;  // bye
  const auto half = static_cast<std::ptrdiff_t>(players / 2);

  while (res.sweeps < opts.max_sweeps && count > 1) {
    ++res.sweeps;
    long rotations = 0;
    for (std::size_t round = 0; round + 1 < players; ++round) {
#pragma omp parallel for schedule(static) reduction(+ : rotations)
      for (std::ptrdiff_t k = 0; k < half; ++k) {
        std::ptrdiff_t p = pos[static_cast<std::size_t>(k)];
        std::ptrdiff_t q = pos[players - 1 - static_cast<std::size_t>(k)];
        if (p < 0 || q < 0) continue;
        if (p > q) std::swap(p, q);
        if (detail::rotate_pair(buf.data() + static_cast<std::size_t>(p) * len,
                                buf.data() + static_cast<std::size_t>(q) * len, len,
                                tol))
          ++rotations;
      }
      std::rotate(pos.begin() + 1, pos.end() - 1, pos.end());
    }
    if (rotations == 0) {
      res.converged = true;
      break;
    }
  }
  if (count <= 1) res.converged = true;

  res.singular_values.resize(count);
  const auto cc = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < cc; ++j)
    res.singular_values[static_cast<std::size_t>(j)] =
        detail::column_norm(buf.data() + static_cast<std::size_t>(j) * len, len);
  return res;
}

}  // namespace qcm::kernels
