#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qcm/error.hpp"
#include "qcm/ideal_norms.hpp"
#include "qcm/kernels.hpp"
#include "qcm/operator_model.hpp"

using namespace qcm;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidParams;
}

Matrix gram_sum(const OperatorTuple& t) {
  Matrix s(t.dim(), t.dim());
  for (const Matrix& m : t.matrices()) s += kernels::serial::multiply(m.transpose(), m);
  return s;
}

OperatorTuple random_tuple(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::vector<Matrix> m;
  for (std::size_t i = 0; i < n; ++i) m.push_back(oracle::random_symmetric(rng, d));
  return OperatorTuple(std::move(m));
}

}  // namespace

TEST_CASE("discretize: gasket, carpet, mixed") {
  const Ifs g = fixture("gasket");
  const DiscretizedModel m1 = discretize(g, 1);
  CHECK(m1.dim() == 3);
  CHECK(m1.tuple.n_coords() == 2);
  for (std::size_t v = 0; v < 3; ++v) {
    CHECK(m1.weights[v] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    const auto x = representative_point(g, m1.basis_words[v].letters);
    CHECK(m1.tuple[0](v, v) == x[0]);
    CHECK(m1.tuple[1](v, v) == x[1]);
  }
  const DiscretizedModel c1 = discretize(fixture("carpet"), 1);
  for (double w : c1.weights) CHECK(w == doctest::Approx(0.125).epsilon(1e-14));

  std::vector<Similitude> maps{Similitude(0.5, Matrix::identity(1), {0.0}),
                               Similitude(0.25, Matrix::identity(1), {0.75})};
  const Ifs ip = Ifs::build(maps, IfsClass::A1, true);
  const DiscretizedModel m2 = discretize(ip, 2);
  const double x = std::pow(2.0, -ip.hausdorff_dim());
  const double expect[] = {x * x, x * x * x, x * x * x, x * x * x * x};
  for (std::size_t v = 0; v < 4; ++v) CHECK(oracle::rel(m2.weights[v], expect[v]) < 1e-13);
  CHECK(std::abs(m2.total_weight() - 1.0) < 1e-12);

  CHECK(kind_of([&] { discretize(g, 9); }) == ErrorKind::DimensionCapExceeded);
}

TEST_CASE("model invariants") {
  for (const auto& [name, level] : {std::pair{"gasket", 4}, {"carpet", 2}, {"mixed", 3}, {"twisted-square", 3}}) {
    const DiscretizedModel m = discretize(fixture(name), static_cast<std::size_t>(level));
    CHECK(std::abs(m.total_weight() - 1.0) < 1e-12);
    double n2 = 0.0;
    for (double c : m.cyclic) n2 += c * c;
    CHECK(std::abs(n2 - 1.0) < 1e-12);
    const auto& c = m.ifs.enclosing_center();
    for (std::size_t v = 0; v < m.dim(); ++v) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < m.tuple.n_coords(); ++i) d2 += std::pow(m.tuple[i](v, v) - c[i], 2);
      CHECK(std::sqrt(d2) <= m.ifs.enclosing_radius() * (1 + 1e-12));
    }
    for (std::size_t i = 0; i < m.tuple.n_coords(); ++i)
      for (std::size_t j = 0; j < m.tuple.n_coords(); ++j) {
        const Matrix ti = m.tuple[i], tj = m.tuple[j];
        CHECK(max_abs(kernels::multiply(ti, tj) - kernels::multiply(tj, ti)) == 0.0);
      }
  }
}

TEST_CASE("spectral projections") {
  const DiscretizedModel m = discretize(fixture("gasket"), 3);
  CHECK(max_abs_diff(spectral_projection(m, {}), Matrix::identity(27)) == 0.0);
  const DiscretizedModel m2 = discretize(fixture("gasket"), 2);
  const Letter one[] = {1};
  const Matrix e1 = spectral_projection(m2, one);
  double tr = 0.0;
  for (std::size_t v = 0; v < 9; ++v) tr += e1(v, v);
  CHECK(tr == 3.0);

  const StoppingSet s = stopping_set(m.ifs, 4.0);
  Matrix sum(27, 27);
  for (const auto& w : s.words) {
    const Matrix e = spectral_projection(m, w.letters);
    double rank = 0.0;
    for (std::size_t v = 0; v < 27; ++v) rank += e(v, v);
    CHECK(rank == 3.0);
    sum += e;
  }
  CHECK(max_abs_diff(sum, Matrix::identity(27)) == 0.0);
  const Letter long_word[] = {1, 1, 1, 1};
  CHECK(kind_of([&] { spectral_projection(m, long_word); }) == ErrorKind::PrefixTooLong);
}

TEST_CASE("commutators") {
  std::mt19937_64 rng(31);
  const OperatorTuple t = random_tuple(rng, 2, 5);
  for (const Matrix& c : commutator(Matrix::identity(5), t)) CHECK(max_abs(c) < 1e-15);

  const double da[] = {1, 2, 3}, db[] = {4, -1, 0.5};
  const std::vector<Matrix> diag{Matrix::diagonal(db)};
  for (const Matrix& c : commutator(Matrix::diagonal(da), diag)) CHECK(max_abs(c) == 0.0);

  Matrix a(2, 2);
  a(0, 1) = a(1, 0) = 1.0;
  const double ab[] = {2.0, 7.0};
  const std::vector<Matrix> tt{Matrix::diagonal(ab)};
  const Matrix c = commutator(a, tt).front();
  CHECK(std::abs(c(0, 1)) == 5.0);
  CHECK(std::abs(c(1, 0)) == 5.0);
  CHECK(c(0, 1) == -c(1, 0));

  const Matrix h = oracle::random_symmetric(rng, 5);
  for (const Matrix& k : commutator(h, t)) CHECK(max_abs(k + k.transpose()) <= 1e-12);
  // The diagonal fast path agrees with the general product formula.
  const DiscretizedModel m = discretize(fixture("gasket"), 2);
  const Matrix hh = oracle::random_symmetric(rng, 9);
  const auto fast = commutator(hh, m.tuple);
  for (std::size_t i = 0; i < 2; ++i) {
    const Matrix slow = kernels::serial::multiply(hh, m.tuple[i]) - kernels::serial::multiply(m.tuple[i], hh);
    CHECK(max_abs_diff(fast[i], slow) < 1e-15);
  }
  CHECK(kind_of([&] { commutator(Matrix::identity(3), t); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("direct sums and tensor_diag") {
  std::mt19937_64 rng(32);
  const OperatorTuple a = random_tuple(rng, 2, 3), b = random_tuple(rng, 2, 4);
  const OperatorTuple single[] = {a};
  CHECK(max_abs_diff(direct_sum(single)[0], a[0]) == 0.0);
  const OperatorTuple pair[] = {a, b};
  const OperatorTuple s = direct_sum(pair);
  CHECK(s.dim() == 7);
  CHECK(s[1](4, 5) == b[1](1, 2));
  CHECK(s[0](0, 5) == 0.0);
  const OperatorTuple c = random_tuple(rng, 3, 2);
  const OperatorTuple bad[] = {a, c};
  CHECK(kind_of([&] { direct_sum(bad); }) == ErrorKind::CoordCountMismatch);

  const double one[] = {1.0};
  CHECK(max_abs_diff(tensor_diag(a, one)[0], a[0]) == 0.0);
  const double scales[] = {0.5, 2.0, 0.0};
  const OperatorTuple td = tensor_diag(a, scales);
  const auto got = singular_values(td[0]).values();
  std::vector<double> expect;
  for (double s0 : scales)
    for (double v : oracle::svd_values(a[0]))
      if (s0 * v > 0) expect.push_back(s0 * v);
  std::sort(expect.rbegin(), expect.rend());
  REQUIRE(got.size() == expect.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(oracle::rel(got[i], expect[i]) < 1e-12);
  const double neg[] = {1.0, -0.1};
  CHECK(kind_of([&] { tensor_diag(a, neg); }) == ErrorKind::NegativeScale);
}

TEST_CASE("commutator spectra of block sums are unions") {
  std::mt19937_64 rng(33);
  const OperatorTuple t1 = random_tuple(rng, 1, 4), t2 = random_tuple(rng, 1, 3);
  const Matrix a1 = oracle::random_symmetric(rng, 4), a2 = oracle::random_symmetric(rng, 3);
  const Matrix blocks[] = {a1, a2};
  const OperatorTuple ts[] = {t1, t2};
  const Matrix big = commutator(block_diagonal(blocks), direct_sum(ts)).front();
  const SpectrumRLE u = direct_sum_spectrum(singular_values(commutator(a1, t1).front()),
                                            singular_values(commutator(a2, t2).front()));
  const auto lhs = singular_values(big).values(), rhs = u.values();
  REQUIRE(lhs.size() == rhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(oracle::rel(lhs[i], rhs[i]) < 1e-10);
}

TEST_CASE("rotate_tuple") {
  std::mt19937_64 rng(34);
  const OperatorTuple t = random_tuple(rng, 2, 6);
  const OperatorTuple same = rotate_tuple(Matrix::identity(2), t);
  CHECK(max_abs_diff(same[0], t[0]) == 0.0);
  Matrix rot(2, 2);
  rot(0, 1) = 1.0;
  rot(1, 0) = -1.0;
  const OperatorTuple r = rotate_tuple(rot, t);
  CHECK(max_abs_diff(r[0], t[1]) == 0.0);
  CHECK(max_abs_diff(r[1], -1.0 * t[0]) == 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    const OperatorTuple t3 = random_tuple(rng, 3, 5);
    const Matrix u = oracle::random_orthogonal(rng, 3);
    CHECK(max_abs_diff(gram_sum(rotate_tuple(u, t3)), gram_sum(t3)) <= 1e-10);
  }
  Matrix skew = Matrix::identity(2);
  skew(0, 1) = 0.3;
  CHECK(kind_of([&] { rotate_tuple(skew, t); }) == ErrorKind::NotOrthogonal);
}

TEST_CASE("affine_shift") {
  std::mt19937_64 rng(35);
  const OperatorTuple t = random_tuple(rng, 2, 4);
  const double zero[] = {0.0, 0.0};
  CHECK(max_abs_diff(affine_shift(t, 1.0, zero)[1], t[1]) == 0.0);
  const double shift[] = {0.7, -1.3};
  const Matrix a = oracle::random_symmetric(rng, 4);
  const auto base = commutator(a, t);
  const auto shifted = commutator(a, affine_shift(t, 0.25, shift));
  for (std::size_t i = 0; i < 2; ++i) CHECK(max_abs_diff(shifted[i], 0.25 * base[i]) < 1e-12);
  CHECK(kind_of([&] { affine_shift(t, -1.0, shift); }) == ErrorKind::NegativeScale);
}

TEST_CASE("pushforward identity on cylinder sub-models") {
  for (const auto& name : {"gasket", "carpet", "twisted-square", "mixed"}) {
    const Ifs ifs = fixture(name);
    const std::size_t level = ifs.size() > 4 ? 1 : 2;
    const DiscretizedModel coarse = discretize(ifs, level);
    const DiscretizedModel fine = discretize(ifs, level + 1);
    for (Letter j = 1; j <= ifs.size(); ++j) {
      const std::vector<Prefix> pre{{j}};
      const DiscretizedModel sub = restrict_model(fine, pre);
      const Similitude& f = ifs.maps()[j - 1];
      const OperatorTuple pushed = affine_shift(rotate_tuple(f.rotation(), coarse.tuple), f.ratio(),
                                                f.translation());
      REQUIRE(sub.dim() == pushed.dim());
      for (std::size_t i = 0; i < pushed.n_coords(); ++i) CHECK(max_abs_diff(sub.tuple[i], pushed[i]) <= 1e-12);
    }
  }
}

TEST_CASE("multiplicity assignments") {
  const DiscretizedModel m = discretize(fixture("gasket"), 3);
  MultiplicityAssignment all{{MultiplicityPiece{{Prefix{}}, 1}}};
  const OperatorTuple t = apply_multiplicity(m, all);
  CHECK(max_abs_diff(t[0], m.tuple[0]) == 0.0);

  MultiplicityAssignment twice{{MultiplicityPiece{{Prefix{1}}, 2}}};
  CHECK(apply_multiplicity(m, twice).dim() == 2 * 9);

  MultiplicityAssignment mixed{{MultiplicityPiece{{Prefix{1}}, 2}, MultiplicityPiece{{Prefix{2}}, 1}}};
  CHECK(integral_proxy(m, mixed) == doctest::Approx(1.0).epsilon(1e-14));

  MultiplicityAssignment overlap{{MultiplicityPiece{{Prefix{1}}, 1}, MultiplicityPiece{{Prefix{1, 2}}, 1}}};
  CHECK(kind_of([&] { apply_multiplicity(m, overlap); }) == ErrorKind::OverlappingPieces);
  MultiplicityAssignment zero{{MultiplicityPiece{{Prefix{1}}, 0}}};
  CHECK(kind_of([&] { apply_multiplicity(m, zero); }) == ErrorKind::InvalidParams);
}

TEST_CASE("tuple validation and model CSV") {
  Matrix asym(2, 2);
  asym(0, 1) = 1.0;
  CHECK(kind_of([&] { OperatorTuple(std::vector<Matrix>{asym}); }) == ErrorKind::ShapeMismatch);
  CHECK(kind_of([] { OperatorTuple(std::vector<Matrix>{Matrix(2, 2), Matrix(3, 3)}); }) ==
        ErrorKind::ShapeMismatch);
  const std::string csv = model_csv(discretize(fixture("gasket"), 1));
  CHECK(csv.rfind("# qcm-model v1\nword,weight,x_1,x_2\n1,", 0) == 0);
}
