#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qcm/ideal_norms.hpp"

namespace qcm {

// S_l = p^{-1}·2^{-l/p}·P_{2^l}: one run of count 2^l.
SpectrumRLE counterexample_s(double p, int l);
// T_m = 3^{1/p}·S_m
SpectrumRLE counterexample_t(double p, int m);

// |S_l|_p^-
double limit_alpha(double p, int l);
// |T_m|_p^-
double limit_beta(double p, int m);

// |S_l ⊕ T_m|_p^-
double lp3_value(double p, int l, int m);

struct Lp3Options {
  int d_min = -12;
  int d_max = 12;
  int l_start = 16;  // base index b = min(l, m)
  int l_cap = 40;
  double tolerance = 1e-4;
};

struct Lp3Row {
  double p = 0.0;
  int l = 0;
  int d = 0;
  double value = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

struct Lp3Report {
  double p = 0.0;
  double rhs = 0.0;  // (α^p + β^p)^{1/p} = 4^{1/p}
  double asymptotic_min = 0.0;
  int argmin = 0;
  int argmin_l = 0;
  double margin = 0.0;
  bool counterexample_confirmed = false;
  std::vector<Lp3Row> rows;  // one per offset, at its stabilized l
};

// For each offset d = m − l, raises the base index min(l, m) from l_start
// until consecutive values differ by less than the tolerance (NotStabilized
// past l_cap), then minimizes over d.
Lp3Report lp3_scan(double p, const Lp3Options& opts = {});

extern const char* const kConvexCombinationNote;

std::string lp3_csv(std::span<const Lp3Report> reports);

struct Lp4Row {
  std::size_t n = 0;
  std::size_t size = 0;  // N_n
  double statistic = 0.0;
  double base = 0.0;            // N = 1 statistic
  double amplified = 0.0;       // statistic of a = (1, …, 1)
  double lower = 0.0;           // min a · amplified
  double upper = 0.0;           // max a · amplified
  double ratio_to_base = 0.0;
  double n_pow = 0.0;           // N^{1/p}, reported only
};

struct Lp4Report {
  double p = 0.0;
  double c = 1.0;
  std::vector<Lp4Row> rows;
};

using TupleStatistic = std::function<double(std::span<const double>)>;

// Validates Σ a^p = 1 (1e-10) and max a ≤ c·min a for each family, then
// measures the statistic. The only assertion is the majorization sandwich
// min a·stat(1^N) ≤ stat(a) ≤ max a·stat(1^N).
Lp4Report lp4_family_check(double p, const TupleStatistic& stat,
                           std::span<const std::vector<double>> families, double c = 1.0);

std::vector<double> uniform_family(double p, std::size_t n);

std::string lp4_csv(const Lp4Report& report);

}  // namespace qcm
