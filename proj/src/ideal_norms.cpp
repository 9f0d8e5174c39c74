#include "qcm/ideal_norms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "qcm/error.hpp"
#include "qcm/format.hpp"
#include "qcm/kernels.hpp"

namespace qcm {

namespace {

void require_lorentz_p(double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw Error(ErrorKind::InvalidP, "the (p,1)-Lorentz norm needs 1 < p < inf");
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Connected components of the bipartite row/column graph of nonzeros,
// returned as (rows, cols) index lists in ascending order.
std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> components(
    const Matrix& m) {
  DisjointSets ds(m.cols());
  std::vector<std::ptrdiff_t> row_anchor(m.rows(), -1);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (r[j] == 0.0) continue;
      if (row_anchor[i] < 0)
        row_anchor[i] = static_cast<std::ptrdiff_t>(j);
      else
        ds.unite(static_cast<std::size_t>(row_anchor[i]), j);
    }
  }
  std::vector<std::ptrdiff_t> slot(m.cols(), -1);
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (row_anchor[i] < 0) continue;
    const std::size_t root = ds.find(static_cast<std::size_t>(row_anchor[i]));
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(slot[root])].first.push_back(i);
  }
  std::vector<bool> col_used(m.cols(), false);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j)
      if (r[j] != 0.0) col_used[j] = true;
  }
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (!col_used[j]) continue;
    const std::size_t root = ds.find(j);
    out[static_cast<std::size_t>(slot[root])].second.push_back(j);
  }
  return out;
}

}  // namespace

SpectrumRLE::SpectrumRLE(std::vector<Run> runs) {
  for (const Run& r : runs) {
    if (r.count < 1 || !(r.value >= 0.0) || !std::isfinite(r.value))
      throw Error(ErrorKind::InvalidParams, "spectrum runs need value >= 0 and count >= 1");
    if (r.value == 0.0) continue;
    if (!runs_.empty() && !(r.value < runs_.back().value))
      throw Error(ErrorKind::InvalidParams, "spectrum run values must be strictly decreasing");
    runs_.push_back(r);
  }
}

SpectrumRLE SpectrumRLE::from_values(std::vector<double> values, double merge_rel_tol) {
  for (double& v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteEntry, "non-finite singular value");
    v = std::abs(v);
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  SpectrumRLE s;
  std::size_t i = 0;
  while (i < values.size() && values[i] > 0.0) {
    const double lead = values[i];
    std::size_t j = i;
    double sum = 0.0;
    while (j < values.size() && values[j] > 0.0 && lead - values[j] <= merge_rel_tol * lead) {
      sum += values[j];
      ++j;
    }
    const auto count = static_cast<std::int64_t>(j - i);
    double mean = sum / static_cast<double>(count);
    if (!s.runs_.empty() && !(mean < s.runs_.back().value)) mean = s.runs_.back().value;
    if (!s.runs_.empty() && mean == s.runs_.back().value)
      s.runs_.back().count += count;
    else
      s.runs_.push_back({mean, count});
    i = j;
  }
  return s;
}

std::int64_t SpectrumRLE::total_rank() const noexcept {
  std::int64_t n = 0;
  for (const Run& r : runs_) n += r.count;
  return n;
}

double SpectrumRLE::kyfan(std::int64_t k) const {
  double s = 0.0;
  for (const Run& r : runs_) {
    if (k <= 0) break;
    const std::int64_t take = std::min(k, r.count);
    s += r.value * static_cast<double>(take);
    k -= take;
  }
  return s;
}

SpectrumRLE SpectrumRLE::scaled(double s) const {
  if (!(s >= 0.0)) throw Error(ErrorKind::NegativeScale, "spectrum scale must be >= 0");
  SpectrumRLE out;
  if (s == 0.0) return out;
  for (const Run& r : runs_) {
    const double v = r.value * s;
    if (v == 0.0) break;
    if (!out.runs_.empty() && v == out.runs_.back().value)
      out.runs_.back().count += r.count;
    else
      out.runs_.push_back({v, r.count});
  }
  return out;
}

std::vector<double> SpectrumRLE::values(std::size_t limit) const {
  std::vector<double> out;
  for (const Run& r : runs_)
    for (std::int64_t c = 0; c < r.count && out.size() < limit; ++c) out.push_back(r.value);
  return out;
}

std::string_view to_string(NormMode m) noexcept {
  switch (m) {
    case NormMode::schatten: return "schatten";
    case NormMode::lorentz_p1: return "lorentz_p1";
    case NormMode::operator_sup: return "operator_sup";
  }
  return "lorentz_p1";
}

NormMode parse_norm_mode(std::string_view s) {
  if (s == "schatten") return NormMode::schatten;
  if (s == "lorentz_p1") return NormMode::lorentz_p1;
  if (s == "operator_sup") return NormMode::operator_sup;
  throw Error(ErrorKind::ConfigError, "unknown norm mode '" + std::string(s) + "'");
}

SpectrumRLE singular_values(const Matrix& m, const SingularValueOptions& opts) {
  for (double v : m.data())
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteEntry, "matrix has a non-finite entry");

  std::vector<double> values;
  auto solve = [&](const Matrix& block) {
    auto res = kernels::jacobi_singular_values(block);
    values.insert(values.end(), res.singular_values.begin(), res.singular_values.end());
  };

  if (!opts.split_blocks) {
    solve(m);
  } else {
    for (const auto& [rows, cols] : components(m)) {
      Matrix block(rows.size(), cols.size());
      for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b) block(a, b) = m(rows[a], cols[b]);
      solve(block);
    }
  }

  double top = 0.0;
  for (double v : values) top = std::max(top, v);
  const double cutoff = opts.truncate_rel * top;
  for (double& v : values)
    if (v < cutoff) v = 0.0;
  return SpectrumRLE::from_values(std::move(values), opts.merge_rel);
}

double lorentz_p1(const SpectrumRLE& spec, double p) {
  require_lorentz_p(p);
  const double s = -1.0 + 1.0 / p;
  double total = 0.0;
  std::int64_t j = 1;
  for (const Run& r : spec.runs()) {
    total += r.value * power_weight_sum(j, j + r.count - 1, s);
    j += r.count;
  }
  return total;
}

double schatten_p(const SpectrumRLE& spec, double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw Error(ErrorKind::InvalidP, "the Schatten norm needs 1 <= p < inf");
  if (spec.empty()) return 0.0;
  const double top = spec.leading();
  double acc = 0.0;
  for (const Run& r : spec.runs()) acc += static_cast<double>(r.count) * std::pow(r.value / top, p);
  return top * std::pow(acc, 1.0 / p);
}

double weak_p_norm(const SpectrumRLE& spec, double p) {
  require_lorentz_p(p);
  double best = 0.0;
  std::int64_t end = 0;
  for (const Run& r : spec.runs()) {
    end += r.count;
    best = std::max(best, r.value * std::pow(static_cast<double>(end), 1.0 / p));
  }
  return best;
}

double spectrum_norm(const SpectrumRLE& spec, const IdealNormParams& params) {
  switch (params.mode) {
    case NormMode::schatten: return schatten_p(spec, params.p);
    case NormMode::lorentz_p1: return lorentz_p1(spec, params.p);
    case NormMode::operator_sup: return spec.leading();
  }
  return 0.0;
}

SpectrumRLE direct_sum_spectrum(const SpectrumRLE& a, const SpectrumRLE& b) {
  std::vector<Run> out;
  const auto& x = a.runs();
  const auto& y = b.runs();
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].value > y[j].value)) {
      out.push_back(x[i++]);
    } else if (i == x.size() || y[j].value > x[i].value) {
      out.push_back(y[j++]);
    } else {
      out.push_back({x[i].value, x[i].count + y[j].count});
      ++i;
      ++j;
    }
  }
  return SpectrumRLE(std::move(out));
}

bool kyfan_dominates(const SpectrumRLE& a, const SpectrumRLE& b) {
  const auto& x = a.runs();
  const auto& y = b.runs();
  std::size_t i = 0, j = 0;
  std::int64_t left_a = x.empty() ? 0 : x[0].count;
  std::int64_t left_b = y.empty() ? 0 : y[0].count;
  double sa = 0.0, sb = 0.0;
  // Partial sums are piecewise linear between the merged run boundaries, so
  // comparing at those boundaries is exact.
  while (i < x.size()) {
    const double va = x[i].value;
    const double vb = j < y.size() ? y[j].value : 0.0;
    const std::int64_t len = j < y.size() ? std::min(left_a, left_b) : left_a;
    sa += va * static_cast<double>(len);
    sb += vb * static_cast<double>(len);
    if (sa > sb) return false;
    left_a -= len;
    if (left_a == 0 && ++i < x.size()) left_a = x[i].count;
    if (j < y.size()) {
      left_b -= len;
      if (left_b == 0 && ++j < y.size()) left_b = y[j].count;
    }
  }
  return true;
}

double tuple_norm(std::span<const Matrix> tuple, const IdealNormParams& params,
                  const SingularValueOptions& opts) {
  if (tuple.empty()) throw Error(ErrorKind::ShapeMismatch, "tuple_norm of an empty tuple");
  double best = 0.0;
  for (const Matrix& t : tuple) best = std::max(best, spectrum_norm(singular_values(t, opts), params));
  return best;
}

Matrix d_operator(std::span<const Matrix> tuple) {
  if (tuple.empty()) throw Error(ErrorKind::ShapeMismatch, "d_operator of an empty tuple");
  const std::size_t rows = tuple.front().rows();
  const std::size_t cols = tuple.front().cols();
  for (const Matrix& t : tuple)
    if (t.rows() != rows || t.cols() != cols)
      throw Error(ErrorKind::ShapeMismatch, "tuple entries have different shapes");
  Matrix d(tuple.size() * rows, cols);
  for (std::size_t i = 0; i < tuple.size(); ++i)
    for (std::size_t a = 0; a < rows; ++a) {
      auto src = tuple[i].row(a);
      std::copy(src.begin(), src.end(), d.row(i * rows + a).begin());
    }
  return d;
}

double tilde_norm(std::span<const Matrix> tuple, const IdealNormParams& params,
                  const SingularValueOptions& opts) {
  return spectrum_norm(singular_values(d_operator(tuple), opts), params);
}

std::string spectrum_csv(const SpectrumRLE& spec) {
  std::ostringstream os;
  os << "# qcm-spectrum v1\nvalue,count\n";
  for (const Run& r : spec.runs()) os << fmt_double(r.value) << ',' << r.count << '\n';
  return os.str();
}

}  // namespace qcm
