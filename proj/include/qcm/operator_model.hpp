#pragma once

#include <span>
#include <string>
#include <vector>

#include "qcm/fractal_geometry.hpp"
#include "qcm/matrix.hpp"

namespace qcm {

// n hermitian d×d matrices (T_1, …, T_n).
class OperatorTuple {
 public:
  OperatorTuple() = default;
  // Requires square matrices of a common size, symmetric to 1e-12.
  explicit OperatorTuple(std::vector<Matrix> matrices);

  std::size_t n_coords() const noexcept { return matrices_.size(); }
  std::size_t dim() const noexcept { return matrices_.empty() ? 0 : matrices_.front().rows(); }
  const Matrix& operator[](std::size_t i) const noexcept { return matrices_[i]; }
  std::span<const Matrix> matrices() const noexcept { return matrices_; }

 private:
  std::vector<Matrix> matrices_;
};

// Finite model of the multiplication tuple on a self-similar measure: one
// basis vector per cylinder word, anchored at its representative point.
struct DiscretizedModel {
  Ifs ifs;
  std::size_t level = 0;
  std::vector<Word> basis_words;  // lexicographic
  std::vector<double> weights;    // μ(K_v) = λ_v^p
  OperatorTuple tuple;            // (T_i)_{vv} = i-th coordinate of F_v(c)
  std::vector<double> cyclic;     // unit vector, entries √weight up to normalization

  std::size_t dim() const noexcept { return basis_words.size(); }
  double total_weight() const;
};

constexpr std::size_t kDefaultDimensionCap = 10'000;

DiscretizedModel discretize(const Ifs& ifs, std::size_t level,
                            std::size_t cap = kDefaultDimensionCap);

using Prefix = std::vector<Letter>;

// Sub-model on the basis words extending any of `prefixes` (the model of
// τ restricted to the union of those cylinders). The cyclic vector is
// renormalized; weights keep their absolute values.
DiscretizedModel restrict_model(const DiscretizedModel& model, std::span<const Prefix> prefixes);

// Diagonal 0/1 matrix E_w selecting basis words with the given prefix.
Matrix spectral_projection(const DiscretizedModel& model, std::span<const Letter> prefix);

// ([A, T_1], …, [A, T_n]) with [A, T] = AT − TA.
std::vector<Matrix> commutator(const Matrix& a, std::span<const Matrix> tuple);
inline std::vector<Matrix> commutator(const Matrix& a, const OperatorTuple& tuple) {
  return commutator(a, tuple.matrices());
}

Matrix block_diagonal(std::span<const Matrix> blocks);

OperatorTuple direct_sum(std::span<const OperatorTuple> tuples);

// ⊕_j a_j·τ, the matrix realization of τ ⊗ diag(a).
OperatorTuple tensor_diag(const OperatorTuple& tuple, std::span<const double> a);

// (Uτ)_i = Σ_k u_{ik} T_k
OperatorTuple rotate_tuple(const Matrix& u, const OperatorTuple& tuple);

// (scale·T_i + shift_i·I)_i
OperatorTuple affine_shift(const OperatorTuple& tuple, double scale, std::span<const double> shift);

struct MultiplicityPiece {
  std::vector<Prefix> prefixes;  // X_k as a union of cylinders
  int multiplicity = 1;
};

struct MultiplicityAssignment {
  std::vector<MultiplicityPiece> pieces;
};

// Throws OverlappingPieces / PrefixTooLong / InvalidParams.
void validate_assignment(const DiscretizedModel& model, const MultiplicityAssignment& assignment);

// ⊕_k (τ restricted to X_k)^{⊕k}
OperatorTuple apply_multiplicity(const DiscretizedModel& model,
                                 const MultiplicityAssignment& assignment);

// Σ_k k·μ(X_k), the discrete analogue of ∫ 𝔪 dμ.
double integral_proxy(const DiscretizedModel& model, const MultiplicityAssignment& assignment);

// CSV (word, weight, x_1..x_n) with a versioned header line.
std::string model_csv(const DiscretizedModel& model);

}  // namespace qcm
