#include "qcm/operator_model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "qcm/error.hpp"
#include "qcm/format.hpp"
#include "qcm/kernels.hpp"

namespace qcm {

namespace {

bool is_diagonal(const Matrix& t) {
  for (std::size_t i = 0; i < t.rows(); ++i) {
    auto r = t.row(i);
    for (std::size_t j = 0; j < r.size(); ++j)
      if (j != i && r[j] != 0.0) return false;
  }
  return true;
}

bool has_any_prefix(const Word& w, std::span<const Prefix> prefixes) {
  for (const auto& p : prefixes)
    if (is_prefix(p, w.letters)) return true;
  return false;
}

std::vector<std::size_t> selected_indices(const DiscretizedModel& model,
                                          std::span<const Prefix> prefixes) {
  std::vector<std::size_t> idx;
  for (std::size_t v = 0; v < model.dim(); ++v)
    if (has_any_prefix(model.basis_words[v], prefixes)) idx.push_back(v);
  return idx;
}

Matrix submatrix(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix s(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) s(a, b) = m(idx[a], idx[b]);
  return s;
}

void check_prefixes(const DiscretizedModel& model, std::span<const Prefix> prefixes) {
  for (const auto& p : prefixes) {
    if (p.size() > model.level)
      throw Error(ErrorKind::PrefixTooLong, "prefix longer than the model level");
    for (Letter l : p)
      if (l < 1 || l > model.ifs.size())
        throw Error(ErrorKind::LetterOutOfRange, "prefix letter out of range");
  }
}

}  // namespace

OperatorTuple::OperatorTuple(std::vector<Matrix> matrices) : matrices_(std::move(matrices)) {
  if (matrices_.empty()) return;
  const std::size_t d = matrices_.front().rows();
  for (const Matrix& m : matrices_) {
    if (!m.square() || m.rows() != d)
      throw Error(ErrorKind::ShapeMismatch, "tuple matrices must be square of equal size");
    if (symmetry_defect(m) > 1e-12)
      throw Error(ErrorKind::ShapeMismatch, "tuple matrices must be hermitian");
  }
}

double DiscretizedModel::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

DiscretizedModel discretize(const Ifs& ifs, std::size_t level, std::size_t cap) {
  double count = 1.0;
  for (std::size_t i = 0; i < level; ++i) count *= static_cast<double>(ifs.size());
  if (count > static_cast<double>(cap))
    throw Error(ErrorKind::DimensionCapExceeded,
                "m^level = " + fmt_double(count) + " exceeds dimension cap " + std::to_string(cap));

  DiscretizedModel model{ifs, level, words_of_length(ifs, level), {}, {}, {}};
  const std::size_t d = model.basis_words.size();
  const std::size_t n = ifs.dimension();
  std::vector<Matrix> diag(n, Matrix(d, d));
  model.weights.resize(d);
  model.cyclic.resize(d);
  for (std::size_t v = 0; v < d; ++v) {
    const Word& w = model.basis_words[v];
    const auto x = representative_point(ifs, w.letters);
    for (std::size_t i = 0; i < n; ++i) diag[i](v, v) = x[i];
    model.weights[v] = w.measure_weight;
    model.cyclic[v] = std::sqrt(w.measure_weight);
  }
  model.tuple = OperatorTuple(std::move(diag));
  return model;
}

DiscretizedModel restrict_model(const DiscretizedModel& model, std::span<const Prefix> prefixes) {
  check_prefixes(model, prefixes);
  const auto idx = selected_indices(model, prefixes);
  DiscretizedModel sub{model.ifs, model.level, {}, {}, {}, {}};
  double norm2 = 0.0;
  for (std::size_t v : idx) {
    sub.basis_words.push_back(model.basis_words[v]);
    sub.weights.push_back(model.weights[v]);
    sub.cyclic.push_back(model.cyclic[v]);
    norm2 += model.cyclic[v] * model.cyclic[v];
  }
  const double norm = std::sqrt(norm2);
  if (norm > 0.0)
    for (double& c : sub.cyclic) c /= norm;
  std::vector<Matrix> mats;
  for (const Matrix& t : model.tuple.matrices()) mats.push_back(submatrix(t, idx));
  sub.tuple = OperatorTuple(std::move(mats));
  return sub;
}

Matrix spectral_projection(const DiscretizedModel& model, std::span<const Letter> prefix) {
  if (prefix.size() > model.level)
    throw Error(ErrorKind::PrefixTooLong, "prefix longer than the model level");
  Matrix e(model.dim(), model.dim());
  for (std::size_t v = 0; v < model.dim(); ++v)
    if (is_prefix(prefix, model.basis_words[v].letters)) e(v, v) = 1.0;
  return e;
}

std::vector<Matrix> commutator(const Matrix& a, std::span<const Matrix> tuple) {
  std::vector<Matrix> out;
  out.reserve(tuple.size());
  for (const Matrix& t : tuple) {
    if (!a.square() || a.rows() != t.rows() || !t.square())
      throw Error(ErrorKind::ShapeMismatch, "commutator operands have different shapes");
    if (is_diagonal(t)) {
      // Same arithmetic as AT − TA with a diagonal T, in O(d²).
      Matrix c(a.rows(), a.cols());
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) * t(j, j) - t(i, i) * a(i, j);
      out.push_back(std::move(c));
    } else {
      out.push_back(kernels::multiply(a, t) - kernels::multiply(t, a));
    }
  }
  return out;
}

Matrix block_diagonal(std::span<const Matrix> blocks) {
  std::size_t rows = 0, cols = 0;
  for (const Matrix& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out(rows, cols);
  std::size_t r0 = 0, c0 = 0;
  for (const Matrix& b : blocks) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) out(r0 + i, c0 + j) = b(i, j);
    r0 += b.rows();
    c0 += b.cols();
  }
  return out;
}

OperatorTuple direct_sum(std::span<const OperatorTuple> tuples) {
  if (tuples.empty()) return {};
  const std::size_t n = tuples.front().n_coords();
  for (const auto& t : tuples)
    if (t.n_coords() != n)
      throw Error(ErrorKind::CoordCountMismatch, "direct_sum needs equal coordinate counts");
  if (tuples.size() == 1) return tuples.front();
  std::vector<Matrix> mats;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Matrix> blocks;
    for (const auto& t : tuples) blocks.push_back(t[i]);
    mats.push_back(block_diagonal(blocks));
  }
  return OperatorTuple(std::move(mats));
}

OperatorTuple tensor_diag(const OperatorTuple& tuple, std::span<const double> a) {
  if (a.empty()) throw Error(ErrorKind::InvalidParams, "tensor_diag needs a non-empty scale list");
  std::vector<OperatorTuple> copies;
  for (double aj : a) {
    if (!(aj >= 0.0)) throw Error(ErrorKind::NegativeScale, "tensor_diag scales must be >= 0");
    std::vector<Matrix> mats;
    for (const Matrix& t : tuple.matrices()) mats.push_back(aj * t);
    copies.emplace_back(std::move(mats));
  }
  return direct_sum(copies);
}

OperatorTuple rotate_tuple(const Matrix& u, const OperatorTuple& tuple) {
  if (u.rows() != tuple.n_coords() || !u.square())
    throw Error(ErrorKind::ShapeMismatch, "rotation size != coordinate count");
  if (orthogonality_defect(u) > 1e-12)
    throw Error(ErrorKind::NotOrthogonal, "rotate_tuple needs an orthogonal matrix");
  std::vector<Matrix> mats;
  for (std::size_t i = 0; i < u.rows(); ++i) {
    Matrix acc(tuple.dim(), tuple.dim());
    for (std::size_t k = 0; k < u.cols(); ++k)
      if (u(i, k) != 0.0) acc += u(i, k) * tuple[k];
    mats.push_back(std::move(acc));
  }
  return OperatorTuple(std::move(mats));
}

OperatorTuple affine_shift(const OperatorTuple& tuple, double scale, std::span<const double> shift) {
  if (shift.size() != tuple.n_coords())
    throw Error(ErrorKind::ShapeMismatch, "shift length != coordinate count");
  if (!(scale >= 0.0)) throw Error(ErrorKind::NegativeScale, "affine_shift needs scale >= 0");
  std::vector<Matrix> mats;
  for (std::size_t i = 0; i < tuple.n_coords(); ++i) {
    Matrix m = scale * tuple[i];
    for (std::size_t v = 0; v < m.rows(); ++v) m(v, v) += shift[i];
    mats.push_back(std::move(m));
  }
  return OperatorTuple(std::move(mats));
}

void validate_assignment(const DiscretizedModel& model, const MultiplicityAssignment& assignment) {
  std::vector<const Prefix*> all;
  for (const auto& piece : assignment.pieces) {
    if (piece.multiplicity < 1)
      throw Error(ErrorKind::InvalidParams, "multiplicities must be positive integers");
    check_prefixes(model, piece.prefixes);
    for (const auto& p : piece.prefixes) all.push_back(&p);
  }
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j)
      if (is_prefix(*all[i], *all[j]) || is_prefix(*all[j], *all[i]))
        throw Error(ErrorKind::OverlappingPieces, "multiplicity pieces overlap");
}

OperatorTuple apply_multiplicity(const DiscretizedModel& model,
                                 const MultiplicityAssignment& assignment) {
  validate_assignment(model, assignment);
  std::vector<OperatorTuple> blocks;
  for (const auto& piece : assignment.pieces) {
    const auto sub = restrict_model(model, piece.prefixes);
    for (int c = 0; c < piece.multiplicity; ++c) blocks.push_back(sub.tuple);
  }
  return direct_sum(blocks);
}

double integral_proxy(const DiscretizedModel& model, const MultiplicityAssignment& assignment) {
  validate_assignment(model, assignment);
  double total = 0.0;
  for (const auto& piece : assignment.pieces) {
    double mu = 0.0;
    for (std::size_t v : selected_indices(model, piece.prefixes)) mu += model.weights[v];
    total += piece.multiplicity * mu;
  }
  return total;
}

std::string model_csv(const DiscretizedModel& model) {
  std::ostringstream os;
  os << "# qcm-model v1\nword,weight";
  for (std::size_t i = 0; i < model.tuple.n_coords(); ++i) os << ",x_" << (i + 1);
  os << '\n';
  for (std::size_t v = 0; v < model.dim(); ++v) {
    os << model.basis_words[v].str() << ',' << fmt_double(model.weights[v]);
    for (std::size_t i = 0; i < model.tuple.n_coords(); ++i)
      os << ',' << fmt_double(model.tuple[i](v, v));
    os << '\n';
  }
  return os.str();
}

}  // namespace qcm
