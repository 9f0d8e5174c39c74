#pragma once

// Dense linear-algebra kernels. The top-level functions are OpenMP-parallel;
// qcm::kernels::serial holds straightforward single-threaded reference
// versions that the tests compare against.

#include <cstddef>
#include <vector>

#include "qcm/matrix.hpp"

namespace qcm::kernels {

struct JacobiOptions {
  // Rotate columns (i, j) while |a_i·a_j| > tolerance·‖a_i‖‖a_j‖. The
  // effective tolerance is at least √rows·ε, and pairs with |a_i·a_j| below
  // (rows·ε·‖a‖_F)² count as orthogonal.
  double tolerance = 1e-15;
  int max_sweeps = 80;
};

struct JacobiResult {
  std::vector<double> singular_values;  // unsorted, one per column
  int sweeps = 0;
  bool converged = false;
};

Matrix multiply(const Matrix& a, const Matrix& b);

// aᵀa
Matrix gram(const Matrix& a);

// One-sided (Hestenes) Jacobi: cyclic Jacobi on the Gram matrix aᵀa applied
// implicitly to the columns of a. Pair order is a round-robin tournament so
// every step rotates disjoint column pairs in parallel; results do not depend
// on the thread count.
JacobiResult jacobi_singular_values(const Matrix& a, const JacobiOptions& opts = {});

namespace serial {

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix gram(const Matrix& a);

// Classic cyclic-by-row ordering.
JacobiResult jacobi_singular_values(const Matrix& a, const JacobiOptions& opts = {});

}  // namespace serial

}  // namespace qcm::kernels
