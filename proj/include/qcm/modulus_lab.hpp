#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qcm/fractal_geometry.hpp"
#include "qcm/ideal_norms.hpp"
#include "qcm/operator_model.hpp"

namespace qcm {

// e_w = E_wξ/‖E_wξ‖ stored on its support; an empty support means E_wξ = 0.
struct CellVector {
  Word word;
  std::vector<std::size_t> support;
  std::vector<double> values;
};

struct ProjectionStage {
  double r = 1.0;
  StoppingSet stopping;
  Matrix projection;  // P_r = Σ e_w ⊗ e_w*
  std::size_t rank = 0;
  std::vector<CellVector> vectors;
  double cell_measure = 0.0;  // Σ λ_w^p over cells with E_wξ ≠ 0
};

ProjectionStage voiculescu_projection(const DiscretizedModel& model, double r);
ProjectionStage voiculescu_projection(const DiscretizedModel& model, const StoppingSet& cells);

// Diagonal projection onto the basis vectors of the given cylinders; each
// basis vector is its own cell.
ProjectionStage spectral_stage(const DiscretizedModel& model, std::span<const Prefix> prefixes);

struct CommutatorStats {
  double u_lorentz = 0.0;  // max_i |[A, T_i]|_p^-
  double u_tilde = 0.0;    // |d_{[A,τ]}|_p^-
  double sup_norm = 0.0;   // max_i ‖[A, T_i]‖
  std::int64_t max_rank = 0;
  std::vector<SpectrumRLE> coordinate_spectra;
  SpectrumRLE tilde_spectrum;
};

CommutatorStats commutator_statistics(const OperatorTuple& tuple, const Matrix& a, double p);

struct BoundChain {
  double rank_bound = 0.0;   // Σ_{k ≤ 2|Ω|} k^{−1+1/p} · sup_norm
  double count_bound = 0.0;  // p(2|Ω|)^{1/p} · 2·diam/r
  double const_bound = 0.0;  // C·diam·μ(G(r))^{1/p}
};

struct ModulusStatistic {
  double r = 0.0;
  double p = 0.0;
  std::size_t rank = 0;   // rank P_r
  std::size_t cells = 0;  // |Ω(r)| restricted to cells meeting the spectrum
  double sup_norm = 0.0;
  double u_lorentz = 0.0;
  double u_tilde = 0.0;
  std::int64_t commutator_rank = 0;
  double sup_bound = 0.0;  // 2·diam/r
  BoundChain bound_chain;
  double measure_proxy = 1.0;
  bool const_bound_applicable = true;  // p equals the Hausdorff dimension
  std::string normalization_note;
};

// Verifies ‖[P_r,τ]‖ ≤ 2·diam/r, rank([P_r,T_i]) ≤ 2·rank(P_r), and
// u_lorentz ≤ rank ≤ count ≤ const (each with factor 1 + 1e-9); throws
// BoundChainViolation otherwise.
ModulusStatistic upper_statistic(const DiscretizedModel& model, double r, double p);

// p·2^{1+1/p}·λ_*^{−1}·measure_proxy^{−1/p}
double explicit_constant(double p, double lambda_star, double measure_proxy);

struct DescentOptions {
  int max_iterations = 20;
  double t_step = 0.25;
  double angle_step = 0.25;
  double min_step = 1.0 / 512.0;
  double rel_improvement = 1e-8;
  std::size_t pairs_per_iteration = 0;  // 0: frame size
  std::uint64_t seed = 1;
};

struct DescentResult {
  Matrix contraction;  // A = V·diag(t)·V*
  Matrix frame;        // V, orthonormal columns
  std::vector<double> t;
  double initial_value = 0.0;
  double value = 0.0;
  std::vector<double> trace;  // objective after each iteration, non-increasing
  int iterations = 0;
  long evaluations = 0;
};

// Coordinate descent of A ↦ max_i |[A, T_i]|_p^- over positive contractions
// with range inside span(seed) plus up to `budget` extra basis directions.
DescentResult descent_refine(const DiscretizedModel& model, const ProjectionStage& seed, double p,
                             std::size_t budget, const DescentOptions& opts = {});

struct ScalingReport {
  std::vector<Letter> word;
  std::size_t level = 0;
  double r = 0.0;
  double p = 0.0;
  double base_tilde = 0.0;
  double pushed_tilde = 0.0;
  double ratio = 0.0;
  double expected = 1.0;  // λ_w
  double rel_error = 0.0;
  bool degenerate = false;  // base statistic is 0; ratio is NaN
};

// Tilde statistic of the base model versus the pushed-forward model on the
// cylinder K_w, built independently from the level |w|+level discretization.
ScalingReport scaling_experiment(const Ifs& ifs, std::span<const Letter> word, std::size_t level,
                                 double r, double p, std::size_t cap = kDefaultDimensionCap);

struct MultiplicityReport {
  std::size_t dim = 0;
  double statistic = 0.0;
  double statistic_pow_p = 0.0;
  double integral_proxy = 0.0;
  std::vector<double> block_stats;  // one per copy
  double block_max = 0.0;
  double block_sum = 0.0;
  bool sandwich_holds = false;
};

MultiplicityReport multiplicity_experiment(const DiscretizedModel& model,
                                           const MultiplicityAssignment& assignment, double r,
                                           double p);

struct AmpliationReport {
  std::size_t copies = 1;
  double base_stat = 0.0;
  double amplified_stat = 0.0;
  double stat_ratio = 0.0;
  double m_pow = 1.0;  // copies^{1/p}
  double base_count_bound = 0.0;
  double amplified_count_bound = 0.0;
  double count_bound_ratio = 0.0;
};

// τ ⊗ I_m with the block-diagonal projection P_r ⊗ I_m.
AmpliationReport ampliation_probe(const DiscretizedModel& model, double r, double p,
                                  std::size_t copies);

// a ↦ tilde statistic of τ ⊗ diag(a) under P_r ⊗ I_N.
std::function<double(std::span<const double>)> tensor_diag_statistic(const DiscretizedModel& model,
                                                                      double r, double p);

}  // namespace qcm
