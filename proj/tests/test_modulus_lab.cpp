#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qcm/error.hpp"
#include "qcm/kernels.hpp"
#include "qcm/modulus_lab.hpp"

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

double p_of(const char* name) { return fixture(name).hausdorff_dim(); }

}  // namespace

TEST_CASE("Voiculescu projections") {
  const DiscretizedModel m = discretize(fixture("gasket"), 3);
  const ProjectionStage one = voiculescu_projection(m, 1.0);
  CHECK(one.rank == 1);
  Matrix xx(m.dim(), m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) xx(i, j) = m.cyclic[i] * m.cyclic[j];
  CHECK(max_abs_diff(one.projection, xx) < 1e-15);

  const ProjectionStage four = voiculescu_projection(m, 4.0);
  CHECK(four.rank == 9);
  CHECK(four.vectors.size() == 9);
  for (const auto& v : four.vectors) CHECK(v.word.length() == 2);

  const DiscretizedModel c = discretize(fixture("carpet"), 2);
  const ProjectionStage s = voiculescu_projection(c, 3.0);
  CHECK(max_abs_diff(kernels::multiply(s.projection, s.projection), s.projection) < 1e-12);
  CHECK(symmetry_defect(s.projection) == 0.0);
  const auto px = qcm::apply(s.projection, c.cyclic);
  for (std::size_t i = 0; i < c.dim(); ++i) CHECK(std::abs(px[i] - c.cyclic[i]) < 1e-12);

  CHECK(kind_of([&] { voiculescu_projection(m, 16.0); }) == ErrorKind::ResolutionExceedsLevel);
}

TEST_CASE("projections increase with r") {
  const DiscretizedModel m = discretize(fixture("mixed"), 4);
  const double grid[] = {1.0, 2.0, 3.0, 4.0, 6.0, 8.0};
  for (std::size_t a = 0; a + 1 < std::size(grid); ++a) {
    const Matrix p1 = voiculescu_projection(m, grid[a]).projection;
    const Matrix p2 = voiculescu_projection(m, grid[a + 1]).projection;
    // range(P1) ⊆ range(P2) ⇔ P2·P1 = P1.
    CHECK(max_abs_diff(kernels::multiply(p2, p1), p1) < 1e-9);
    const auto stage = voiculescu_projection(m, grid[a]);
    CHECK(stage.rank <= stage.stopping.words.size());
  }
}

TEST_CASE("explicit constant") {
  CHECK(oracle::rel(explicit_constant(p_of("gasket"), 0.5, 1.0), oracle::kGasketConstant) < 1e-14);
  double last = explicit_constant(1.7, 0.3, 1.0);
  for (double proxy : {2.0, 10.0, 1e3, 1e9}) {
    const double c = explicit_constant(1.7, 0.3, proxy);
    CHECK(c < last);
    last = c;
  }
  CHECK(oracle::rel(explicit_constant(1.7, 0.4, 2.0), 0.5 * explicit_constant(1.7, 0.2, 2.0)) < 1e-15);
  CHECK(kind_of([] { explicit_constant(1.0, 0.5, 1.0); }) == ErrorKind::InvalidParams);
  CHECK(kind_of([] { explicit_constant(2.0, 1.0, 1.0); }) == ErrorKind::InvalidParams);
  CHECK(kind_of([] { explicit_constant(2.0, 0.5, 0.0); }) == ErrorKind::InvalidParams);
}

TEST_CASE("upper statistic on the gasket") {
  const DiscretizedModel m = discretize(fixture("gasket"), 4);
  const double p = m.ifs.hausdorff_dim();
  const ModulusStatistic st = upper_statistic(m, 4.0, p);
  CHECK(st.rank == 9);
  CHECK(st.sup_norm > 0.0);
  CHECK(st.sup_norm <= 2.0 * diameter_bound(m.ifs) / 4.0);
  CHECK(st.u_lorentz <= st.bound_chain.rank_bound * (1 + 1e-9));
  CHECK(st.bound_chain.rank_bound <= st.bound_chain.count_bound);
  CHECK(st.bound_chain.count_bound <= st.bound_chain.const_bound);
  CHECK(st.const_bound_applicable);
  CHECK(st.commutator_rank <= 18);
  // Independent recomputation of the coordinate maximum.
  const auto comm = commutator(voiculescu_projection(m, 4.0).projection, m.tuple);
  double best = 0.0;
  for (const Matrix& c : comm) {
    double l = 0.0;
    const auto sv = oracle::svd_values(c);
    for (std::size_t j = 0; j < sv.size(); ++j)
      if (sv[j] > 1e-12 * sv[0]) l += sv[j] * std::pow(j + 1.0, -1.0 + 1.0 / p);
    best = std::max(best, l);
  }
  CHECK(oracle::rel(st.u_lorentz, best) < 1e-9);
}

TEST_CASE("upper statistic degenerate case is zero") {
  // One cylinder: P_1 = ξ⊗ξ* on a one-word model commutes with everything.
  const DiscretizedModel m = discretize(fixture("gasket"), 0);
  const ModulusStatistic st = upper_statistic(m, 1.0, 2.0);
  CHECK(st.u_lorentz == 0.0);
  CHECK(st.u_tilde == 0.0);
  CHECK(st.sup_norm == 0.0);
}

TEST_CASE("carpet level 3 is bounded by the constant bound") {
  const DiscretizedModel m = discretize(fixture("carpet"), 3);
  const double p = m.ifs.hausdorff_dim();
  for (double r : {3.0, 9.0, 27.0}) {
    const ModulusStatistic st = upper_statistic(m, r, p);
    CHECK(st.u_lorentz <= st.bound_chain.const_bound);
  }
}

TEST_CASE("descent never increases the seed value") {
  const DiscretizedModel m = discretize(fixture("gasket"), 3);
  const double p = m.ifs.hausdorff_dim();
  DescentOptions opts;
  opts.max_iterations = 4;
  const ProjectionStage seed = voiculescu_projection(m, 2.0);
  const DescentResult d = descent_refine(m, seed, p, 4, opts);
  const double seed_value = upper_statistic(m, 2.0, p).u_lorentz;
  CHECK(d.initial_value == seed_value);
  CHECK(d.value <= seed_value);
  for (std::size_t i = 1; i < d.trace.size(); ++i) CHECK(d.trace[i] <= d.trace[i - 1]);
  CHECK(orthogonality_defect(kernels::multiply(d.frame.transpose(), d.frame)) >= 0.0);
  const Matrix vtv = kernels::multiply(d.frame.transpose(), d.frame);
  CHECK(max_abs_diff(vtv, Matrix::identity(vtv.rows())) < 1e-10);
  for (double t : d.t) {
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
  }

  // Spectral seeds commute with the diagonal tuple, so nothing improves.
  const std::vector<Prefix> pre{{1}};
  const ProjectionStage diag = spectral_stage(m, pre);
  const DescentResult z = descent_refine(m, diag, p, 0, opts);
  CHECK(z.value == 0.0);
  CHECK(z.initial_value == 0.0);

  CHECK(kind_of([&] { descent_refine(m, ProjectionStage{1.0, {}, Matrix(m.dim(), m.dim()), 0, {}, 0.0}, p, 0); }) ==
        ErrorKind::BudgetZeroWithNoSeed);
  const DiscretizedModel other = discretize(fixture("gasket"), 2);
  CHECK(kind_of([&] { descent_refine(other, seed, p, 1); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("scaling law") {
  const Ifs g = fixture("gasket");
  const double p = g.hausdorff_dim();
  const ScalingReport e = scaling_experiment(g, {}, 3, 4.0, p);
  CHECK(std::abs(e.ratio - 1.0) < 1e-12);
  const Letter w2[] = {2};
  const ScalingReport r2 = scaling_experiment(g, w2, 3, 4.0, p);
  CHECK(oracle::rel(r2.ratio, 0.5) < 1e-9);
  const Ifs c = fixture("carpet");
  const Letter w15[] = {1, 5};
  const ScalingReport r15 = scaling_experiment(c, w15, 2, 3.0, c.hausdorff_dim());
  CHECK(oracle::rel(r15.ratio, 1.0 / 9.0) < 1e-9);
  const Ifs t = fixture("twisted-square");
  const Letter w42[] = {4, 2};
  const ScalingReport rt = scaling_experiment(t, w42, 3, 4.0, t.hausdorff_dim());
  CHECK(rt.expected == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(rt.rel_error < 1e-9);
  const Letter w11[] = {1, 1};
  CHECK(kind_of([&] { scaling_experiment(c, w11, 3, 3.0, 1.8, 1000); }) == ErrorKind::CapExceeded);
}

TEST_CASE("multiplicity experiments") {
  const DiscretizedModel m = discretize(fixture("gasket"), 3);
  const double p = m.ifs.hausdorff_dim();
  const MultiplicityAssignment all{{MultiplicityPiece{{Prefix{}}, 1}}};
  const MultiplicityReport a = multiplicity_experiment(m, all, 4.0, p);
  CHECK(oracle::rel(a.statistic, upper_statistic(m, 4.0, p).u_tilde) < 1e-12);

  const MultiplicityAssignment two{{MultiplicityPiece{{Prefix{1}}, 1}, MultiplicityPiece{{Prefix{2}}, 1}}};
  const MultiplicityReport b = multiplicity_experiment(m, two, 4.0, p);
  CHECK(b.sandwich_holds);
  CHECK(b.block_stats.size() == 2);

  const MultiplicityAssignment k2{{MultiplicityPiece{{Prefix{1}}, 2}, MultiplicityPiece{{Prefix{2}}, 1}}};
  const MultiplicityReport c = multiplicity_experiment(m, k2, 4.0, p);
  CHECK(c.integral_proxy == doctest::Approx(2.0 * b.integral_proxy - 1.0 / 3.0).epsilon(1e-14));
  CHECK(c.sandwich_holds);
}

TEST_CASE("ampliation probe") {
  const DiscretizedModel m = discretize(fixture("gasket"), 3);
  const double p = m.ifs.hausdorff_dim();
  for (std::size_t k : {1, 2, 3, 5}) {
    const AmpliationReport a = ampliation_probe(m, 4.0, p, k);
    CHECK(oracle::rel(a.count_bound_ratio, std::pow(static_cast<double>(k), 1.0 / p)) < 1e-14);
    CHECK(a.amplified_stat >= a.base_stat * (1 - 1e-12));
  }
  CHECK(kind_of([&] { ampliation_probe(m, 4.0, p, 0); }) == ErrorKind::InvalidParams);
}
