#include "qcm/modulus_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "qcm/error.hpp"
#include "qcm/format.hpp"

namespace qcm {

namespace {

constexpr double kChainSlack = 1e-9;

void require_modulus_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw Error(ErrorKind::InvalidP, "modulus statistics need 1 < p < inf");
}

Matrix projection_from(const std::vector<CellVector>& vectors, std::size_t d) {
  Matrix proj(d, d);
  for (const auto& cv : vectors)
    for (std::size_t a = 0; a < cv.support.size(); ++a)
      for (std::size_t b = 0; b < cv.support.size(); ++b)
        proj(cv.support[a], cv.support[b]) += cv.values[a] * cv.values[b];
  return proj;
}

std::string chain_failure(const std::string& what, double lhs, double rhs) {
  return what + ": " + fmt_double(lhs) + " > " + fmt_double(rhs);
}

}  // namespace

ProjectionStage voiculescu_projection(const DiscretizedModel& model, const StoppingSet& cells) {
  if (cells.max_length() > model.level)
    throw Error(ErrorKind::ResolutionExceedsLevel,
                "stopping words of length " + std::to_string(cells.max_length()) +
                    " exceed model level " + std::to_string(model.level));
  ProjectionStage st;
  st.r = cells.r;
  st.stopping = cells;
  for (const Word& w : cells.words) {
    CellVector cv{w, {}, {}};
    double norm2 = 0.0;
    for (std::size_t v = 0; v < model.dim(); ++v) {
      if (!is_prefix(w.letters, model.basis_words[v].letters)) continue;
      if (model.cyclic[v] == 0.0) continue;
      cv.support.push_back(v);
      cv.values.push_back(model.cyclic[v]);
      norm2 += model.cyclic[v] * model.cyclic[v];
    }
    if (norm2 > 0.0) {
      const double norm = std::sqrt(norm2);
      for (double& x : cv.values) x /= norm;
      ++st.rank;
      st.cell_measure += w.measure_weight;
    }
    st.vectors.push_back(std::move(cv));
  }
  st.projection = projection_from(st.vectors, model.dim());
  return st;
}

ProjectionStage voiculescu_projection(const DiscretizedModel& model, double r) {
  return voiculescu_projection(model, stopping_set(model.ifs, r));
}

ProjectionStage spectral_stage(const DiscretizedModel& model, std::span<const Prefix> prefixes) {
  ProjectionStage st;
  for (std::size_t v = 0; v < model.dim(); ++v) {
    bool hit = false;
    for (const auto& p : prefixes) hit = hit || is_prefix(p, model.basis_words[v].letters);
    if (!hit) continue;
    st.vectors.push_back(CellVector{model.basis_words[v], {v}, {1.0}});
    st.stopping.words.push_back(model.basis_words[v]);
    st.cell_measure += model.weights[v];
    ++st.rank;
  }
  st.projection = projection_from(st.vectors, model.dim());
  return st;
}

CommutatorStats commutator_statistics(const OperatorTuple& tuple, const Matrix& a, double p) {
  require_modulus_p(p);
  const auto comm = commutator(a, tuple);
  CommutatorStats s;
  for (const Matrix& c : comm) {
    auto spec = singular_values(c);
    s.u_lorentz = std::max(s.u_lorentz, lorentz_p1(spec, p));
    s.sup_norm = std::max(s.sup_norm, spec.leading());
    s.max_rank = std::max(s.max_rank, spec.total_rank());
    s.coordinate_spectra.push_back(std::move(spec));
  }
  s.tilde_spectrum = singular_values(d_operator(comm));
  s.u_tilde = lorentz_p1(s.tilde_spectrum, p);
  return s;
}

double explicit_constant(double p, double lambda_star, double measure_proxy) {
  if (!(p > 1.0) || !(lambda_star > 0.0 && lambda_star < 1.0) || !(measure_proxy > 0.0))
    throw Error(ErrorKind::InvalidParams,
                "explicit_constant needs p > 1, 0 < lambda_star < 1, measure_proxy > 0");
  return p * std::pow(2.0, 1.0 + 1.0 / p) / lambda_star * std::pow(measure_proxy, -1.0 / p);
}

ModulusStatistic upper_statistic(const DiscretizedModel& model, double r, double p) {
  require_modulus_p(p);
  const ProjectionStage stage = voiculescu_projection(model, r);
  const CommutatorStats cs = commutator_statistics(model.tuple, stage.projection, p);
  const double diam = diameter_bound(model.ifs);
  const auto omega = static_cast<std::int64_t>(stage.rank);

  ModulusStatistic st;
  st.r = r;
  st.p = p;
  st.rank = stage.rank;
  st.cells = stage.rank;
  st.sup_norm = cs.sup_norm;
  st.u_lorentz = cs.u_lorentz;
  st.u_tilde = cs.u_tilde;
  st.commutator_rank = cs.max_rank;
  st.sup_bound = 2.0 * diam / r;
  st.measure_proxy = stage.cell_measure;
  st.const_bound_applicable =
      std::abs(p - model.ifs.hausdorff_dim()) <= 1e-12 * model.ifs.hausdorff_dim();
  st.normalization_note =
      "normalized natural measure: mu(K) = 1, H_p(K) replaced by 1; diam(K) replaced by "
      "2*enclosing_radius";

  const double s = -1.0 + 1.0 / p;
  st.bound_chain.rank_bound = omega > 0 ? power_weight_sum(1, 2 * omega, s) * cs.sup_norm : 0.0;
  st.bound_chain.count_bound =
      p * std::pow(2.0 * static_cast<double>(omega), 1.0 / p) * 2.0 * diam / r;
  st.bound_chain.const_bound =
      omega > 0 ? explicit_constant(p, model.ifs.min_ratio(), 1.0) * diam *
                      std::pow(stage.cell_measure, 1.0 / p)
                : 0.0;

  const double up = 1.0 + kChainSlack;
  if (st.sup_norm > st.sup_bound * up)
    throw Error(ErrorKind::BoundChainViolation,
                chain_failure("sup norm exceeds 2 diam/r", st.sup_norm, st.sup_bound));
  if (cs.max_rank > 2 * omega)
    throw Error(ErrorKind::BoundChainViolation, "commutator rank exceeds 2 rank(P_r)");
  if (st.u_lorentz > st.bound_chain.rank_bound * up)
    throw Error(ErrorKind::BoundChainViolation,
                chain_failure("u_lorentz exceeds rank bound", st.u_lorentz, st.bound_chain.rank_bound));
  if (st.bound_chain.rank_bound > st.bound_chain.count_bound * up)
    throw Error(ErrorKind::BoundChainViolation,
                chain_failure("rank bound exceeds counting bound", st.bound_chain.rank_bound,
                              st.bound_chain.count_bound));
  if (st.const_bound_applicable && st.bound_chain.count_bound > st.bound_chain.const_bound * up)
    throw Error(ErrorKind::BoundChainViolation,
                chain_failure("counting bound exceeds constant bound", st.bound_chain.count_bound,
                              st.bound_chain.const_bound));
  return st;
}

ScalingReport scaling_experiment(const Ifs& ifs, std::span<const Letter> word, std::size_t level,
                                 double r, double p, std::size_t cap) {
  require_modulus_p(p);
  double big_dim = 1.0;
  for (std::size_t i = 0; i < word.size() + level; ++i) big_dim *= static_cast<double>(ifs.size());
  if (big_dim > static_cast<double>(cap))
    throw Error(ErrorKind::CapExceeded, "pushforward model dimension " + fmt_double(big_dim) +
                                            " exceeds cap " + std::to_string(cap));

  const Word w = ifs.word(std::vector<Letter>(word.begin(), word.end()));
  const StoppingSet omega = stopping_set(ifs, r);

  const DiscretizedModel base = discretize(ifs, level, cap);
  const ProjectionStage base_stage = voiculescu_projection(base, omega);
  const double base_tilde = commutator_statistics(base.tuple, base_stage.projection, p).u_tilde;

  // Cylinder model: the sub-block of the finer discretization under prefix w,
  // with the stopping cells pushed forward to w·v.
  const DiscretizedModel fine = discretize(ifs, word.size() + level, cap);
  const std::vector<Prefix> prefix{w.letters};
  const DiscretizedModel cylinder = restrict_model(fine, prefix);
  StoppingSet pushed;
  pushed.r = r;
  for (const Word& v : omega.words) {
    std::vector<Letter> letters = w.letters;
    letters.insert(letters.end(), v.letters.begin(), v.letters.end());
    pushed.words.push_back(ifs.word(std::move(letters)));
  }
  const ProjectionStage pushed_stage = voiculescu_projection(cylinder, pushed);
  const double pushed_tilde =
      commutator_statistics(cylinder.tuple, pushed_stage.projection, p).u_tilde;

  ScalingReport rep;
  rep.word = w.letters;
  rep.level = level;
  rep.r = r;
  rep.p = p;
  rep.base_tilde = base_tilde;
  rep.pushed_tilde = pushed_tilde;
  rep.expected = w.ratio_product;
  rep.degenerate = base_tilde == 0.0;
  if (rep.degenerate) {
    // Both statistics vanish when every cell is a single basis vector.
    rep.ratio = std::numeric_limits<double>::quiet_NaN();
    rep.rel_error = pushed_tilde == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    rep.ratio = pushed_tilde / base_tilde;
    rep.rel_error = std::abs(rep.ratio - rep.expected) / rep.expected;
  }
  return rep;
}

MultiplicityReport multiplicity_experiment(const DiscretizedModel& model,
                                           const MultiplicityAssignment& assignment, double r,
                                           double p) {
  require_modulus_p(p);
  validate_assignment(model, assignment);
  const StoppingSet omega = stopping_set(model.ifs, r);

  MultiplicityReport rep;
  std::vector<Matrix> projections;
  for (const auto& piece : assignment.pieces) {
    const DiscretizedModel sub = restrict_model(model, piece.prefixes);
    const ProjectionStage stage = voiculescu_projection(sub, omega);
    const double stat = commutator_statistics(sub.tuple, stage.projection, p).u_tilde;
    for (int c = 0; c < piece.multiplicity; ++c) {
      projections.push_back(stage.projection);
      rep.block_stats.push_back(stat);
    }
  }
  const OperatorTuple tuple = apply_multiplicity(model, assignment);
  const Matrix proj = block_diagonal(projections);
  rep.dim = tuple.dim();
  rep.statistic = commutator_statistics(tuple, proj, p).u_tilde;
  rep.statistic_pow_p = std::pow(rep.statistic, p);
  rep.integral_proxy = integral_proxy(model, assignment);
  for (double b : rep.block_stats) {
    rep.block_max = std::max(rep.block_max, b);
    rep.block_sum += b;
  }
  const double up = 1.0 + kChainSlack;
  rep.sandwich_holds = rep.block_max <= rep.statistic * up && rep.statistic <= rep.block_sum * up;
  return rep;
}

AmpliationReport ampliation_probe(const DiscretizedModel& model, double r, double p,
                                  std::size_t copies) {
  require_modulus_p(p);
  if (copies < 1) throw Error(ErrorKind::InvalidParams, "ampliation needs at least one copy");
  const ProjectionStage stage = voiculescu_projection(model, r);
  const double diam = diameter_bound(model.ifs);
  const std::vector<double> ones(copies, 1.0);
  const std::vector<Matrix> blocks(copies, stage.projection);

  AmpliationReport rep;
  rep.copies = copies;
  rep.base_stat = commutator_statistics(model.tuple, stage.projection, p).u_tilde;
  rep.amplified_stat =
      commutator_statistics(tensor_diag(model.tuple, ones), block_diagonal(blocks), p).u_tilde;
  rep.stat_ratio = rep.amplified_stat / rep.base_stat;
  rep.m_pow = std::pow(static_cast<double>(copies), 1.0 / p);
  const double omega = static_cast<double>(stage.rank);
  rep.base_count_bound = p * std::pow(2.0 * omega, 1.0 / p) * 2.0 * diam / r;
  rep.amplified_count_bound =
      p * std::pow(2.0 * static_cast<double>(copies) * omega, 1.0 / p) * 2.0 * diam / r;
  rep.count_bound_ratio = rep.amplified_count_bound / rep.base_count_bound;
  return rep;
}

std::function<double(std::span<const double>)> tensor_diag_statistic(const DiscretizedModel& model,
                                                                      double r, double p) {
  require_modulus_p(p);
  auto stage = std::make_shared<const ProjectionStage>(voiculescu_projection(model, r));
  auto tuple = std::make_shared<const OperatorTuple>(model.tuple);
  return [stage, tuple, p](std::span<const double> a) {
    const std::vector<Matrix> blocks(a.size(), stage->projection);
    return commutator_statistics(tensor_diag(*tuple, a), block_diagonal(blocks), p).u_tilde;
  };
}

}  // namespace qcm
