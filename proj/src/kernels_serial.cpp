#include "jacobi_rotation.hpp"
#include "qcm/kernels.hpp"

namespace qcm::kernels::serial {

Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Matrix gram(const Matrix& a) {
  Matrix g(a.cols(), a.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
      g(i, j) = s;
    }
  return g;
}

JacobiResult jacobi_singular_values(const Matrix& a, const JacobiOptions& opts) {
  const Matrix m = a.rows() < a.cols() ? a.transpose() : a;
  const std::size_t len = m.rows();
  const std::size_t count = m.cols();
  std::vector<double> buf(len * count);
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < count; ++j) buf[j * len + i] = m(i, j);

  const auto tol = detail::thresholds(buf, len, opts.tolerance);
  JacobiResult res;
  while (res.sweeps < opts.max_sweeps) {
    ++res.sweeps;
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < count; ++p)
      for (std::size_t q = p + 1; q < count; ++q)
        rotated |= detail::rotate_pair(buf.data() + p * len, buf.data() + q * len, len,
                                       tol);
    if (!rotated) {
      res.converged = true;
      break;
    }
  }
  res.singular_values.resize(count);
  for (std::size_t j = 0; j < count; ++j)
    res.singular_values[j] = detail::column_norm(buf.data() + j * len, len);
  return res;
}

}  // namespace qcm::kernels::serial
