#include <algorithm>
#include <cmath>
#include <random>

#include "qcm/error.hpp"
#include "qcm/modulus_lab.hpp"

namespace qcm {

namespace {

// Columns of V stored contiguously.
struct Frame {
  std::size_t d = 0;
  std::vector<std::vector<double>> cols;

  Matrix as_matrix() const {
    Matrix v(d, cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k)
      for (std::size_t i = 0; i < d; ++i) v(i, k) = cols[k][i];
    return v;
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Gram–Schmidt with one reorthogonalization pass; false if the residual is
// numerically zero.
bool orthonormalize_into(Frame& f, std::vector<double> x) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& c : f.cols) {
      const double h = dot(c, x);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= h * c[i];
    }
  const double n = std::sqrt(dot(x, x));
  if (n < 1e-8) return false;
  for (double& v : x) v /= n;
  f.cols.push_back(std::move(x));
  return true;
}

Matrix contraction(const Frame& f, const std::vector<double>& t) {
  Matrix a(f.d, f.d);
  for (std::size_t k = 0; k < f.cols.size(); ++k) {
    if (t[k] == 0.0) continue;
    const auto& c = f.cols[k];
    for (std::size_t i = 0; i < f.d; ++i) {
      const double ci = t[k] * c[i];
      if (ci == 0.0) continue;
      auto row = a.row(i);
      for (std::size_t j = 0; j < f.d; ++j) row[j] += ci * c[j];
    }
  }
  return a;
}

}  // namespace

DescentResult descent_refine(const DiscretizedModel& model, const ProjectionStage& seed, double p,
                             std::size_t budget, const DescentOptions& opts) {
  if (seed.rank == 0 && budget == 0)
    throw Error(ErrorKind::BudgetZeroWithNoSeed, "empty seed and zero extra budget");
  if (seed.projection.rows() != model.dim())
    throw Error(ErrorKind::ShapeMismatch, "seed was not built on this model");

  Frame frame;
  frame.d = model.dim();
  std::vector<double> t;
  for (const auto& cv : seed.vectors) {
    if (cv.support.empty()) continue;
    std::vector<double> col(frame.d, 0.0);
    for (std::size_t a = 0; a < cv.support.size(); ++a) col[cv.support[a]] = cv.values[a];
    // Cell vectors have disjoint supports and unit norm already.
    frame.cols.push_back(std::move(col));
    t.push_back(1.0);
  }

  // Extra directions: basis vectors taken round-robin across the seed cells,
  // then any remaining basis vectors in index order.
  std::vector<std::size_t> candidates;
  std::size_t depth = 0;
  for (bool more = true; more; ++depth) {
    more = false;
    for (const auto& cv : seed.vectors)
      if (depth < cv.support.size()) {
        candidates.push_back(cv.support[depth]);
        more = true;
      }
  }
  for (std::size_t v = 0; v < frame.d; ++v) candidates.push_back(v);
  std::size_t added = 0;
  for (std::size_t v : candidates) {
    if (added == budget) break;
    std::vector<double> e(frame.d, 0.0);
    e[v] = 1.0;
    if (orthonormalize_into(frame, std::move(e))) {
      t.push_back(0.0);
      ++added;
    }
  }

  DescentResult res;
  auto objective = [&](const std::vector<double>& tt) {
    ++res.evaluations;
    const auto comm = commutator(contraction(frame, tt), model.tuple);
    double best = 0.0;
    for (const Matrix& c : comm) best = std::max(best, lorentz_p1(singular_values(c), p));
    return best;
  };

  double value = objective(t);
  res.initial_value = value;
  const std::size_t k = frame.cols.size();
  const std::size_t pairs = opts.pairs_per_iteration ? opts.pairs_per_iteration : k;
  std::mt19937_64 rng(opts.seed);
  double t_step = opts.t_step;
  double angle = opts.angle_step;

  while (res.iterations < opts.max_iterations && value > 0.0) {
    ++res.iterations;
    const double before = value;

    for (std::size_t c = 0; c < k; ++c) {
      for (double dir : {-1.0, 1.0}) {
        const double trial = std::clamp(t[c] + dir * t_step, 0.0, 1.0);
        if (trial == t[c]) continue;
        const double old = t[c];
        t[c] = trial;
        const double v = objective(t);
        if (v < value) {
          value = v;
          break;
        }
        t[c] = old;
      }
    }

    if (k >= 2) {
      std::uniform_int_distribution<std::size_t> pick(0, k - 1);
      for (std::size_t s = 0; s < pairs; ++s) {
        std::size_t i = pick(rng), j = pick(rng);
        if (i == j || std::abs(t[i] - t[j]) < 1e-12) continue;
        for (double dir : {-1.0, 1.0}) {
          const double cs = std::cos(dir * angle), sn = std::sin(dir * angle);
          auto ci = frame.cols[i];
          auto cj = frame.cols[j];
          for (std::size_t x = 0; x < frame.d; ++x) {
            frame.cols[i][x] = cs * ci[x] - sn * cj[x];
            frame.cols[j][x] = sn * ci[x] + cs * cj[x];
          }
          const double v = objective(t);
          if (v < value) {
            value = v;
            break;
          }
          frame.cols[i] = std::move(ci);
          frame.cols[j] = std::move(cj);
        }
      }
    }

    res.trace.push_back(value);
    if (before - value <= opts.rel_improvement * before) {
      t_step *= 0.5;
      angle *= 0.5;
      if (t_step < opts.min_step && angle < opts.min_step) break;
    }
  }

  res.value = value;
  res.t = t;
  res.frame = frame.as_matrix();
  res.contraction = contraction(frame, t);
  return res;
}

}  // namespace qcm
