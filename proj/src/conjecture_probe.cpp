#include "qcm/conjecture_probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qcm/error.hpp"
#include "qcm/format.hpp"

namespace qcm {

namespace {

void require_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorKind::InvalidP, "need 1 < p < inf");
}

void require_index(int l) {
  if (l < 0 || l > 62) throw Error(ErrorKind::InvalidParams, "index must lie in [0, 62]");
}

}  // namespace

const char* const kConvexCombinationNote =
    "convex combinations of {S_l} and {T_m} may be needed for a well-posed version of (lp3); "
    "no search over combinations is performed";

SpectrumRLE counterexample_s(double p, int l) {
  require_p(p);
  require_index(l);
  return SpectrumRLE({Run{std::pow(2.0, -l / p) / p, std::int64_t{1} << l}});
}

SpectrumRLE counterexample_t(double p, int m) { return counterexample_s(p, m).scaled(std::pow(3.0, 1.0 / p)); }

double limit_alpha(double p, int l) { return lorentz_p1(counterexample_s(p, l), p); }

double limit_beta(double p, int m) { return lorentz_p1(counterexample_t(p, m), p); }

double lp3_value(double p, int l, int m) {
  return lorentz_p1(direct_sum_spectrum(counterexample_s(p, l), counterexample_t(p, m)), p);
}

Lp3Report lp3_scan(double p, const Lp3Options& opts) {
  require_p(p);
  if (opts.d_min > opts.d_max) throw Error(ErrorKind::InvalidParams, "empty offset window");
  Lp3Report rep;
  rep.p = p;
  rep.rhs = std::pow(4.0, 1.0 / p);
  rep.asymptotic_min = std::numeric_limits<double>::infinity();

  const int span = opts.d_max - opts.d_min + 1;
  rep.rows.resize(static_cast<std::size_t>(span));
  int failed_d = 0;
  bool failed = false;

#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < span; ++k) {
    const int d = opts.d_min + k;
    // The base index b is the smaller of l and m = l + d.
    const int shift = d < 0 ? -d : 0;
    int b = opts.l_start;
    double v = lp3_value(p, b + shift, b + shift + d);
    bool ok = false;
    for (; b + 1 <= opts.l_cap && b + 1 + std::abs(d) <= 62; ++b) {
      const double next = lp3_value(p, b + 1 + shift, b + 1 + shift + d);
      const bool stable = std::abs(next - v) < opts.tolerance;
      v = next;
      if (stable) {
        ++b;
        ok = true;
        break;
      }
    }
    const int l = b + shift;
    if (!ok) {
#pragma omp critical
      {
        failed = true;
        failed_d = d;
      }
    }
    rep.rows[static_cast<std::size_t>(k)] = Lp3Row{p, l, d, v, rep.rhs, v - rep.rhs};
  }
  if (failed)
    throw Error(ErrorKind::NotStabilized, "offset d = " + std::to_string(failed_d) +
                                              " did not stabilize by base index " +
                                              std::to_string(opts.l_cap));

  for (const auto& row : rep.rows)
    if (row.value < rep.asymptotic_min) {
      rep.asymptotic_min = row.value;
      rep.argmin = row.d;
      rep.argmin_l = row.l;
    }
  rep.margin = rep.asymptotic_min - rep.rhs;
  rep.counterexample_confirmed = rep.margin > 0.0;
  return rep;
}

std::string lp3_csv(std::span<const Lp3Report> reports) {
  std::ostringstream os;
  os << "# qcm-lp3 v1\n# note: " << kConvexCombinationNote << "\np,l,d,value,rhs,margin\n";
  for (const auto& rep : reports)
    for (const auto& r : rep.rows)
      os << fmt_double(r.p) << ',' << r.l << ',' << r.d << ',' << fmt_double(r.value) << ','
         << fmt_double(r.rhs) << ',' << fmt_double(r.margin) << '\n';
  return os.str();
}

std::vector<double> uniform_family(double p, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidParams, "family size must be positive");
  return std::vector<double>(n, std::pow(static_cast<double>(n), -1.0 / p));
}

Lp4Report lp4_family_check(double p, const TupleStatistic& stat,
                           std::span<const std::vector<double>> families, double c) {
  require_p(p);
  if (!(c >= 1.0)) throw Error(ErrorKind::InvalidParams, "ratio bound c must be >= 1");
  for (const auto& a : families) {
    if (a.empty()) throw Error(ErrorKind::InvalidParams, "empty family");
    double total = 0.0;
    for (double x : a) total += std::pow(std::abs(x), p);
    if (std::abs(total - 1.0) > 1e-10)
      throw Error(ErrorKind::NormalizationViolation,
                  "sum |a_j|^p = " + fmt_double(total) + ", expected 1");
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    if (*lo < 0.0) throw Error(ErrorKind::NegativeScale, "family entries must be >= 0");
    if (*hi > c * *lo)
      throw Error(ErrorKind::RatioBoundViolation,
                  "max/min = " + fmt_double(*hi / *lo) + " exceeds c = " + fmt_double(c));
  }

  Lp4Report rep;
  rep.p = p;
  rep.c = c;
  const double one[] = {1.0};
  const double base = stat(one);
  for (std::size_t n = 0; n < families.size(); ++n) {
    const auto& a = families[n];
    const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
    Lp4Row row;
    row.n = n + 1;
    row.size = a.size();
    row.statistic = stat(a);
    row.base = base;
    const std::vector<double> ones(a.size(), 1.0);
    row.amplified = stat(ones);
    row.lower = *lo * row.amplified;
    row.upper = *hi * row.amplified;
    row.ratio_to_base = row.statistic / base;
    row.n_pow = std::pow(static_cast<double>(a.size()), 1.0 / p);
    const double slack = 1e-9 * row.upper;
    if (row.statistic < row.lower - slack || row.statistic > row.upper + slack)
      throw Error(ErrorKind::InvariantFailure,
                  "family " + std::to_string(row.n) + " statistic leaves the majorization sandwich");
    rep.rows.push_back(row);
  }
  return rep;
}

std::string lp4_csv(const Lp4Report& report) {
  std::ostringstream os;
  os << "# qcm-lp4 v1\nn,size,statistic,base,amplified,lower,upper,ratio_to_base,n_pow\n";
  for (const auto& r : report.rows)
    os << r.n << ',' << r.size << ',' << fmt_double(r.statistic) << ',' << fmt_double(r.base) << ','
       << fmt_double(r.amplified) << ',' << fmt_double(r.lower) << ',' << fmt_double(r.upper) << ','
       << fmt_double(r.ratio_to_base) << ',' << fmt_double(r.n_pow) << '\n';
  return os.str();
}

}  // namespace qcm
