#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcm/matrix.hpp"

namespace qcm {

struct Run {
  double value = 0.0;
  std::int64_t count = 0;
  bool operator==(const Run&) const = default;
};

// Non-increasing singular-value sequence stored as (value, count) runs with
// strictly decreasing values. Zero singular values carry no weight in any of
// the norms here and are not stored; total_rank() is the number of nonzero
// values.
class SpectrumRLE {
 public:
  SpectrumRLE() = default;
  // Requires strictly decreasing positive values and counts ≥ 1; runs with
  // value 0 are dropped.
  explicit SpectrumRLE(std::vector<Run> runs);

  // Sorts, drops zeros, merges neighbours within merge_rel_tol of the run's
  // leading value (the run keeps the mean of its members).
  static SpectrumRLE from_values(std::vector<double> values, double merge_rel_tol = 1e-10);

  const std::vector<Run>& runs() const noexcept { return runs_; }
  std::int64_t total_rank() const noexcept;
  bool empty() const noexcept { return runs_.empty(); }
  double leading() const noexcept { return runs_.empty() ? 0.0 : runs_.front().value; }

  // Σ_{j ≤ k} μ_j
  double kyfan(std::int64_t k) const;

  // Values multiplied by s ≥ 0.
  SpectrumRLE scaled(double s) const;

  // Explicit list of the first `limit` values (for tests and dumps).
  std::vector<double> values(std::size_t limit = SIZE_MAX) const;

  bool operator==(const SpectrumRLE&) const = default;

 private:
  std::vector<Run> runs_;
};

enum class NormMode { schatten, lorentz_p1, operator_sup };

std::string_view to_string(NormMode m) noexcept;
NormMode parse_norm_mode(std::string_view s);

struct IdealNormParams {
  double p = 2.0;
  NormMode mode = NormMode::lorentz_p1;
};

struct SingularValueOptions {
  double truncate_rel = 1e-12;  // values below truncate_rel·μ₁ become zero
  double merge_rel = 1e-10;
  // Split the matrix into the connected components of its nonzero pattern
  // before the eigensolve. Exact: singular values of a matrix that is block
  // diagonal up to row/column permutations are the union of block values.
  bool split_blocks = true;
};

SpectrumRLE singular_values(const Matrix& m, const SingularValueOptions& opts = {});

// Σ_{j=a}^{b} j^{s} for 1 ≤ a ≤ b and s ∈ (−1, 0]: pairwise summation for
// spans up to 10⁶, Euler–Maclaurin beyond.
double power_weight_sum(std::int64_t a, std::int64_t b, double s);

// Σ_j μ_j · j^{−1+1/p}
double lorentz_p1(const SpectrumRLE& spec, double p);
// (Σ_j μ_j^p)^{1/p}
double schatten_p(const SpectrumRLE& spec, double p);
// sup_j μ_j · j^{1/p}, a lower bound for lorentz_p1.
double weak_p_norm(const SpectrumRLE& spec, double p);

double spectrum_norm(const SpectrumRLE& spec, const IdealNormParams& params);

// Exact merge of the two multisets.
SpectrumRLE direct_sum_spectrum(const SpectrumRLE& a, const SpectrumRLE& b);

// True iff every Ky Fan partial sum of a is ≤ that of b.
bool kyfan_dominates(const SpectrumRLE& a, const SpectrumRLE& b);

// max over coordinates of the chosen norm.
double tuple_norm(std::span<const Matrix> tuple, const IdealNormParams& params,
                  const SingularValueOptions& opts = {});

// Stacked (n·d)×d column d_τ, with block i equal to T_i.
Matrix d_operator(std::span<const Matrix> tuple);

// Norm of (Σ T_i*T_i)^{1/2}, computed as the norm of d_τ.
double tilde_norm(std::span<const Matrix> tuple, const IdealNormParams& params,
                  const SingularValueOptions& opts = {});

// CSV (value,count) with a versioned header line.
std::string spectrum_csv(const SpectrumRLE& spec);

}  // namespace qcm
