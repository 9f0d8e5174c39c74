#include "qcm/fractal_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "qcm/error.hpp"

namespace qcm {

namespace {

constexpr double kOrthoTol = 1e-12;

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Smallest R with |F_j(c) − c| + λ_j R ≤ R for all j.
double ball_radius(const std::vector<Similitude>& maps, std::span<const double> c) {
  double r = 0.0;
  for (const auto& f : maps) r = std::max(r, distance(f(c), c) / (1.0 - f.ratio()));
  return r;
}

std::vector<double> fixed_point(const Similitude& f) {
  // Banach iteration; ratio < 1 so this converges geometrically.
  std::vector<double> x(f.dimension(), 0.0);
  for (int it = 0; it < 2000; ++it) {
    auto y = f(x);
    const double step = distance(x, y);
    x = std::move(y);
    if (step <= 1e-16 * (1.0 + std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0))))
      break;
  }
  return x;
}

// Seed at the mean of the fixed points, then coordinate descent on the
// max-constraint radius with step halving.
void enclosing_ball(const std::vector<Similitude>& maps, std::vector<double>& center,
                    double& radius) {
  const std::size_t n = maps.front().dimension();
  center.assign(n, 0.0);
  std::vector<std::vector<double>> fixed;
  for (const auto& f : maps) fixed.push_back(fixed_point(f));
  for (const auto& x : fixed)
    for (std::size_t i = 0; i < n; ++i) center[i] += x[i] / static_cast<double>(maps.size());

  double spread = 0.0;
  for (const auto& x : fixed) spread = std::max(spread, distance(x, center));
  double step = spread > 0.0 ? spread : 1.0;
  const double floor_step = 1e-15 * std::max(1.0, step);

  radius = ball_radius(maps, center);
  while (step > floor_step) {
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (double dir : {1.0, -1.0}) {
        auto trial = center;
        trial[i] += dir * step;
        const double rt = ball_radius(maps, trial);
        if (rt < radius) {
          radius = rt;
          center = std::move(trial);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  // Round outward so the radius stays an upper bound despite the rounding in
  // ball_radius.
  radius *= 1.0 + 64.0 * std::numeric_limits<double>::epsilon();
}

bool equal_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

Similitude::Similitude(double ratio, Matrix rotation, std::vector<double> translation,
                       bool allow_identity_ratio)
    : ratio_(ratio), rotation_(std::move(rotation)), translation_(std::move(translation)) {
  const bool ok = allow_identity_ratio ? (ratio > 0.0 && ratio <= 1.0) : (ratio > 0.0 && ratio < 1.0);
  if (!ok || !std::isfinite(ratio))
    throw Error(ErrorKind::RatioOutOfRange, "similitude ratio must lie in (0,1)");
  if (!rotation_.square() || rotation_.rows() != translation_.size())
    throw Error(ErrorKind::DimensionMismatch, "rotation and translation sizes disagree");
  if (orthogonality_defect(rotation_) > kOrthoTol)
    throw Error(ErrorKind::NotOrthogonal, "similitude rotation is not orthogonal");
}

Similitude Similitude::identity(std::size_t dimension) {
  Similitude s;
  s.ratio_ = 1.0;
  s.rotation_ = Matrix::identity(dimension);
  s.translation_.assign(dimension, 0.0);
  return s;
}

std::vector<double> Similitude::operator()(std::span<const double> x) const {
  std::vector<double> y = apply(rotation_, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = ratio_ * y[i] + translation_[i];
  return y;
}

Similitude Similitude::then_inner(const Similitude& inner) const {
  Similitude s;
  s.ratio_ = ratio_ * inner.ratio_;
  s.rotation_ = Matrix(dimension(), dimension());
  for (std::size_t i = 0; i < dimension(); ++i)
    for (std::size_t j = 0; j < dimension(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dimension(); ++k) acc += rotation_(i, k) * inner.rotation_(k, j);
      s.rotation_(i, j) = acc;
    }
  s.translation_ = (*this)(inner.translation_);
  return s;
}

std::string_view to_string(IfsClass c) noexcept {
  switch (c) {
    case IfsClass::A1: return "A1";
    case IfsClass::A2: return "A2";
    case IfsClass::A3: return "A3";
    case IfsClass::A4: return "A4";
  }
  return "A1";
}

IfsClass parse_ifs_class(std::string_view s) {
  if (s == "A1") return IfsClass::A1;
  if (s == "A2") return IfsClass::A2;
  if (s == "A3") return IfsClass::A3;
  if (s == "A4") return IfsClass::A4;
  throw Error(ErrorKind::ConfigError, "unknown IFS class '" + std::string(s) + "'");
}

std::string Word::str() const {
  if (letters.empty()) return "()";
  std::ostringstream os;
  for (std::size_t i = 0; i < letters.size(); ++i) os << (i ? "." : "") << letters[i];
  return os.str();
}

bool is_prefix(std::span<const Letter> prefix, std::span<const Letter> word) noexcept {
  return prefix.size() <= word.size() && std::equal(prefix.begin(), prefix.end(), word.begin());
}

std::size_t StoppingSet::max_length() const noexcept {
  std::size_t l = 0;
  for (const auto& w : words) l = std::max(l, w.length());
  return l;
}

double moran_dimension(std::span<const double> ratios) {
  if (ratios.size() < 2)
    throw Error(ErrorKind::EmptyOrSingleton, "the Moran equation needs at least two ratios");
  for (double r : ratios)
    if (!(r > 0.0 && r < 1.0))
      throw Error(ErrorKind::RatioOutOfRange, "every ratio must lie in (0,1)");

  auto excess = [&](double p) {
    double s = 0.0;
    for (double r : ratios) s += std::pow(r, p);
    return s - 1.0;
  };

  // p ↦ Σ λ_j^p is strictly decreasing from m at p = 0 to 0 at ∞.
  double lo = 0.0, hi = 1.0;
  while (excess(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (excess(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return std::abs(excess(lo)) <= std::abs(excess(hi)) ? lo : hi;
}

Ifs Ifs::build(std::vector<Similitude> maps, IfsClass declared, bool osc_declared) {
  if (maps.empty()) throw Error(ErrorKind::EmptyOrSingleton, "an IFS needs at least one map");
  const std::size_t n = maps.front().dimension();
  for (const auto& f : maps)
    if (f.dimension() != n)
      throw Error(ErrorKind::DimensionMismatch, "maps act on different ambient dimensions");

  if (declared != IfsClass::A1) {
    for (const auto& f : maps)
      if (!equal_rel(f.ratio(), maps.front().ratio(), 1e-12))
        throw Error(ErrorKind::ClassViolation, "declared class requires equal ratios");
  }
  if (declared == IfsClass::A3 || declared == IfsClass::A4) {
    const Matrix id = Matrix::identity(n);
    for (const auto& f : maps)
      if (max_abs_diff(f.rotation(), id) > kOrthoTol)
        throw Error(ErrorKind::ClassViolation, "declared class requires identity rotations");
  }

  Ifs ifs;
  ifs.maps_ = std::move(maps);
  ifs.class_ = declared;
  ifs.osc_declared_ = osc_declared;
  const auto rs = ifs.ratios();
  ifs.p_ = moran_dimension(rs);
  ifs.min_ratio_ = *std::min_element(rs.begin(), rs.end());
  enclosing_ball(ifs.maps_, ifs.center_, ifs.radius_);
  return ifs;
}

std::vector<double> Ifs::ratios() const {
  std::vector<double> r;
  r.reserve(maps_.size());
  for (const auto& f : maps_) r.push_back(f.ratio());
  return r;
}

Word Ifs::word(std::vector<Letter> letters) const {
  Word w;
  w.ratio_product = 1.0;
  for (Letter l : letters) {
    if (l < 1 || l > maps_.size())
      throw Error(ErrorKind::LetterOutOfRange, "letter " + std::to_string(l) + " not in 1.." +
                                                   std::to_string(maps_.size()));
    w.ratio_product *= maps_[l - 1].ratio();
  }
  w.measure_weight = std::pow(w.ratio_product, p_);
  w.letters = std::move(letters);
  return w;
}

Similitude compose_word(const Ifs& ifs, std::span<const Letter> word) {
  Similitude acc = Similitude::identity(ifs.dimension());
  for (Letter l : word) {
    if (l < 1 || l > ifs.size())
      throw Error(ErrorKind::LetterOutOfRange, "letter " + std::to_string(l) + " out of range");
    acc = acc.then_inner(ifs.maps()[l - 1]);
  }
  return acc;
}

StoppingSet stopping_set(const Ifs& ifs, double r, std::size_t cap) {
  if (!(r >= 1.0)) throw Error(ErrorKind::InvalidParams, "stopping_set requires r >= 1");
  const double estimate = std::pow(r / ifs.min_ratio(), ifs.hausdorff_dim());
  if (estimate > static_cast<double>(cap))
    throw Error(ErrorKind::ExplosionGuard, "estimated |Omega(r)| = " + std::to_string(estimate) +
                                               " exceeds cap " + std::to_string(cap));

  StoppingSet out;
  out.r = r;
  const double threshold = 1.0 / r;
  const double p = ifs.hausdorff_dim();
  const auto ratios = ifs.ratios();
  std::vector<double> weights;
  for (double q : ratios) weights.push_back(std::pow(q, p));

  if (1.0 <= threshold) {
    out.words.push_back(Word{{}, 1.0, 1.0});
    return out;
  }

  const std::size_t m = ifs.size();
  std::vector<std::vector<Word>> branches(m);
  const auto mm = static_cast<std::ptrdiff_t>(m);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t first = 0; first < mm; ++first) {
    auto& sink = branches[static_cast<std::size_t>(first)];
    std::vector<Letter> buf;
    auto dfs = [&](auto&& self, double lambda, double weight) -> void {
      if (lambda <= threshold) {
        sink.push_back(Word{buf, lambda, weight});
        return;
      }
      for (std::size_t j = 0; j < m; ++j) {
        buf.push_back(static_cast<Letter>(j + 1));
        self(self, lambda * ratios[j], weight * weights[j]);
        buf.pop_back();
      }
    };
    const auto f = static_cast<std::size_t>(first);
    buf.push_back(static_cast<Letter>(first + 1));
    dfs(dfs, ratios[f], weights[f]);
  }

  std::size_t total = 0;
  for (const auto& b : branches) total += b.size();
  out.words.reserve(total);
  for (auto& b : branches) std::move(b.begin(), b.end(), std::back_inserter(out.words));
  return out;
}

std::size_t stopping_depth(const Ifs& ifs, double r) {
  if (!(r >= 1.0)) throw Error(ErrorKind::InvalidParams, "stopping_depth requires r >= 1");
  const auto ratios = ifs.ratios();
  const double top = *std::max_element(ratios.begin(), ratios.end());
  const double threshold = 1.0 / r;
  std::size_t n = 0;
  for (double lambda = 1.0; lambda > threshold; lambda *= top) ++n;
  return n;
}

std::vector<double> representative_point(const Ifs& ifs, std::span<const Letter> word) {
  std::vector<double> x = ifs.enclosing_center();
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (*it < 1 || *it > ifs.size())
      throw Error(ErrorKind::LetterOutOfRange, "letter " + std::to_string(*it) + " out of range");
    x = ifs.maps()[*it - 1](x);
  }
  return x;
}

double diameter_bound(const Ifs& ifs) { return 2.0 * ifs.enclosing_radius(); }

std::vector<Word> words_of_length(const Ifs& ifs, std::size_t level) {
  const std::size_t m = ifs.size();
  std::size_t count = 1;
  for (std::size_t i = 0; i < level; ++i) count *= m;
  std::vector<Word> out;
  out.reserve(count);
  std::vector<Letter> letters(level, 1);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(ifs.word(letters));
    for (std::size_t pos = level; pos-- > 0;) {
      if (letters[pos] < m) {
        ++letters[pos];
        break;
      }
      letters[pos] = 1;
    }
  }
  return out;
}

}  // namespace qcm
