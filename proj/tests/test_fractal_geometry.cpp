#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qcm/error.hpp"
#include "qcm/fractal_geometry.hpp"

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

Ifs two_map(double a, double b) {
  std::vector<Similitude> maps{Similitude(a, Matrix::identity(1), {0.0}),
                               Similitude(b, Matrix::identity(1), {1.0 - b})};
  return Ifs::build(std::move(maps), IfsClass::A1, true);
}

double dist(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("Moran dimension closed forms") {
  const double half3[] = {0.5, 0.5, 0.5};
  CHECK(std::abs(moran_dimension(half3) - std::log(3.0) / std::log(2.0)) < 1e-12);
  const std::vector<double> third8(8, 1.0 / 3.0);
  CHECK(std::abs(moran_dimension(third8) - std::log(8.0) / std::log(3.0)) < 1e-12);
  const double mixed[] = {0.5, 0.5, 0.25, 0.25};
  const double x = (std::sqrt(3.0) - 1.0) / 2.0;
  CHECK(std::abs(moran_dimension(mixed) + std::log2(x)) < 1e-12);
}

TEST_CASE("Moran residual fuzz") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.01, 0.95);
  std::uniform_int_distribution<int> m(2, 9);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> r(static_cast<std::size_t>(m(rng)));
    for (double& x : r) x = u(rng);
    const double p = moran_dimension(r);
    double s = 0.0;
    for (double x : r) s += std::pow(x, p);
    REQUIRE(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("Moran errors") {
  const double one[] = {0.5};
  CHECK(kind_of([&] { moran_dimension(one); }) == ErrorKind::EmptyOrSingleton);
  const double bad[] = {0.5, 1.0};
  CHECK(kind_of([&] { moran_dimension(bad); }) == ErrorKind::RatioOutOfRange);
}

TEST_CASE("similitude validation and isometry scaling") {
  CHECK(kind_of([] { Similitude(1.5, Matrix::identity(2), {0.0, 0.0}); }) == ErrorKind::RatioOutOfRange);
  Matrix skew = Matrix::identity(2);
  skew(0, 1) = 0.1;
  CHECK(kind_of([&] { Similitude(0.5, skew, {0.0, 0.0}); }) == ErrorKind::NotOrthogonal);
  CHECK(kind_of([] { Similitude(0.5, Matrix::identity(2), {0.0}); }) == ErrorKind::DimensionMismatch);

  std::mt19937_64 rng(22);
  const Matrix u = oracle::random_orthogonal(rng, 3);
  const Similitude f(0.37, u, {0.1, -0.2, 0.3});
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> x{g(rng), g(rng), g(rng)}, y{g(rng), g(rng), g(rng)};
    CHECK(oracle::rel(dist(f(x), f(y)), 0.37 * dist(x, y)) < 1e-12);
  }
}

TEST_CASE("built-in fixtures") {
  const Ifs g = fixture("gasket");
  CHECK(g.size() == 3);
  CHECK(std::abs(g.hausdorff_dim() - std::log2(3.0)) < 1e-12);
  CHECK(g.min_ratio() == 0.5);
  CHECK(g.declared_class() == IfsClass::A3);
  CHECK(g.enclosing_radius() == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-6));
  CHECK(diameter_bound(g) >= 1.0);

  const Ifs c = fixture("carpet");
  CHECK(c.size() == 8);
  CHECK(std::abs(c.hausdorff_dim() - std::log(8.0) / std::log(3.0)) < 1e-12);
  CHECK(diameter_bound(c) >= std::sqrt(2.0));

  const Ifs d = fixture("cantor-dust-3");
  CHECK(std::abs(d.hausdorff_dim() - std::log(4.0) / std::log(3.0)) < 1e-12);

  const Ifs ip = fixture("interval-pair");
  CHECK_FALSE(ip.modulus_eligible());
  CHECK(fixture("twisted-square").declared_class() == IfsClass::A1);
  CHECK(kind_of([] { fixture("nope"); }) == ErrorKind::ConfigError);
}

TEST_CASE("enclosing ball is mapped into itself") {
  for (const auto& name : fixture_names()) {
    const Ifs ifs = fixture(name);
    const auto& c = ifs.enclosing_center();
    const double r = ifs.enclosing_radius();
    for (const auto& f : ifs.maps()) CHECK(dist(f(c), c) + f.ratio() * r <= r * (1.0 + 1e-12));
  }
}

TEST_CASE("class validation") {
  std::vector<Similitude> maps;
  for (int j = 0; j < 3; ++j) maps.emplace_back(0.5, Matrix::identity(2), std::vector<double>{0.5 * j, 0.0});
  Matrix rot(2, 2);
  rot(0, 1) = -1.0;
  rot(1, 0) = 1.0;
  auto rotated = maps;
  rotated[1] = Similitude(0.5, rot, {0.5, 0.0});
  CHECK(kind_of([&] { Ifs::build(rotated, IfsClass::A3, true); }) == ErrorKind::ClassViolation);
  CHECK_NOTHROW(Ifs::build(rotated, IfsClass::A2, true));
  auto unequal = maps;
  unequal[2] = Similitude(0.25, Matrix::identity(2), {0.5, 0.0});
  CHECK(kind_of([&] { Ifs::build(unequal, IfsClass::A2, true); }) == ErrorKind::ClassViolation);
  auto mixed_dim = maps;
  mixed_dim[0] = Similitude(0.5, Matrix::identity(1), {0.0});
  CHECK(kind_of([&] { Ifs::build(mixed_dim, IfsClass::A1, true); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("compose_word") {
  const Ifs g = fixture("gasket");
  const Similitude e = compose_word(g, {});
  CHECK(e.ratio() == 1.0);
  CHECK(max_abs_diff(e.rotation(), Matrix::identity(2)) == 0.0);
  CHECK(e.translation() == std::vector<double>{0.0, 0.0});

  const Letter w12[] = {1, 2};
  const Similitude f = compose_word(g, w12);
  CHECK(f.ratio() == 0.25);
  const auto b2 = g.maps()[1].translation();
  const auto expect = g.maps()[0](b2);
  CHECK(dist(f.translation(), expect) < 1e-15);

  const Ifs ip = two_map(0.5, 0.25);
  const Letter w221[] = {2, 2, 1};
  CHECK(compose_word(ip, w221).ratio() == doctest::Approx(1.0 / 32.0).epsilon(1e-15));
  const Letter bad[] = {3};
  CHECK(kind_of([&] { compose_word(ip, bad); }) == ErrorKind::LetterOutOfRange);

  std::mt19937_64 rng(23);
  const Ifs m = fixture("mixed");
  std::uniform_int_distribution<int> letter(1, 4), len(0, 6);
  for (int t = 0; t < 200; ++t) {
    std::vector<Letter> u(static_cast<std::size_t>(len(rng))), v(static_cast<std::size_t>(len(rng)));
    for (auto& l : u) l = static_cast<Letter>(letter(rng));
    for (auto& l : v) l = static_cast<Letter>(letter(rng));
    auto uv = u;
    uv.insert(uv.end(), v.begin(), v.end());
    CHECK(oracle::rel(m.word(uv).ratio_product, m.word(u).ratio_product * m.word(v).ratio_product) <
          1e-14);
    const Word w = m.word(uv);
    CHECK(oracle::rel(w.measure_weight, std::pow(w.ratio_product, m.hausdorff_dim())) < 1e-14);
  }
}

TEST_CASE("stopping sets: examples") {
  const Ifs g = fixture("gasket");
  const StoppingSet s4 = stopping_set(g, 4.0);
  CHECK(s4.words.size() == 9);
  for (const auto& w : s4.words) CHECK(w.length() == 2);
  const StoppingSet s5 = stopping_set(g, 5.0);
  CHECK(s5.words.size() == 27);
  CHECK(stopping_set(g, 1.0).words.size() == 1);
  CHECK(stopping_set(g, 1.0).words.front().length() == 0);

  const Ifs ip = two_map(0.5, 0.25);
  const StoppingSet t = stopping_set(ip, 4.0);
  REQUIRE(t.words.size() == 3);
  CHECK(t.words[0].letters == std::vector<Letter>{1, 1});
  CHECK(t.words[1].letters == std::vector<Letter>{1, 2});
  CHECK(t.words[2].letters == std::vector<Letter>{2});
  const double x = std::pow(2.0, -ip.hausdorff_dim());
  CHECK(std::abs(2 * x * x + x * x * x - 1.0) < 1e-12);
  double total = 0.0;
  for (const auto& w : t.words) total += w.measure_weight;
  CHECK(std::abs(total - 1.0) < 1e-12);

  CHECK(kind_of([&] { stopping_set(g, 0.5); }) == ErrorKind::InvalidParams);
  CHECK(kind_of([&] { stopping_set(g, 1e6, 1000); }) == ErrorKind::ExplosionGuard);
}

TEST_CASE("stopping sets match breadth-first enumeration and their invariants") {
  for (const auto& name : {"gasket", "carpet", "mixed", "twisted-square", "interval-pair"}) {
    const Ifs ifs = fixture(name);
    const auto ratios = ifs.ratios();
    for (double r : {1.0, 1.5, 2.0, 3.0, 4.0, 7.3, 9.0, 16.0, 31.0}) {
      const StoppingSet s = stopping_set(ifs, r);
      const auto brute = oracle::brute_stopping_words(ratios, r);
      REQUIRE(s.words.size() == brute.size());
      double total = 0.0;
      for (std::size_t i = 0; i < brute.size(); ++i) {
        CHECK(s.words[i].letters == brute[i]);
        total += s.words[i].measure_weight;
        const Word& w = s.words[i];
        CHECK(w.ratio_product <= 1.0 / r);
        if (w.length() > 0) {
          const std::vector<Letter> parent(w.letters.begin(), w.letters.end() - 1);
          CHECK(ifs.word(parent).ratio_product > 1.0 / r);
        }
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
      CHECK(static_cast<double>(s.words.size()) <=
            std::pow(r / ifs.min_ratio(), ifs.hausdorff_dim()));
      CHECK(stopping_depth(ifs, r) == s.max_length());
      for (std::size_t i = 0; i + 1 < s.words.size(); ++i) {
        CHECK(s.words[i] < s.words[i + 1]);
        CHECK_FALSE(is_prefix(s.words[i].letters, s.words[i + 1].letters));
      }
    }
  }
}

TEST_CASE("stopping sets refine as r grows") {
  const Ifs m = fixture("mixed");
  const double grid[] = {1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0};
  for (std::size_t a = 0; a + 1 < std::size(grid); ++a) {
    const StoppingSet coarse = stopping_set(m, grid[a]);
    const StoppingSet fine = stopping_set(m, grid[a + 1]);
    for (const auto& w : coarse.words) {
      bool covered = false;
      for (const auto& v : fine.words) covered = covered || is_prefix(w.letters, v.letters);
      CHECK(covered);
    }
  }
}

TEST_CASE("representative points") {
  const Ifs g = fixture("gasket");
  CHECK(representative_point(g, {}) == g.enclosing_center());
  std::vector<Letter> ones;
  for (int k = 1; k <= 20; ++k) {
    ones.push_back(1);
    const auto x = representative_point(g, ones);
    CHECK(dist(x, std::vector<double>{0.0, 0.0}) <= std::pow(0.5, k) * g.enclosing_radius() * (1 + 1e-12));
  }
  const Ifs c = fixture("carpet");
  const Letter w18[] = {1, 8};
  const auto inner = c.maps()[7](c.enclosing_center());
  const auto expect = c.maps()[0](inner);
  CHECK(dist(representative_point(c, w18), expect) < 1e-15);
}

TEST_CASE("diameter bound scales with translations") {
  const Ifs m = fixture("mixed");
  std::vector<Similitude> scaled;
  for (const auto& f : m.maps()) {
    auto b = f.translation();
    for (double& x : b) x *= 3.0;
    scaled.emplace_back(f.ratio(), f.rotation(), b);
  }
  const Ifs big = Ifs::build(scaled, IfsClass::A1, true);
  CHECK(diameter_bound(big) == doctest::Approx(3.0 * diameter_bound(m)).epsilon(1e-6));
}

TEST_CASE("IFS config files") {
  const char* text = R"({
    "dimension": 2,
    "class": "A2",
    "osc_declared": true,
    "maps": [
      {"ratio": 0.5, "rotation": "identity", "translation": [0, 0]},
      {"ratio": 0.5, "rotation": [0, -1, 1, 0], "translation": [1, 0]},
      {"ratio": 0.5, "rotation": "identity", "translation": [0, 0.5]}
    ]
  })";
  const Ifs ifs = parse_ifs_config(text);
  CHECK(ifs.size() == 3);
  CHECK(ifs.osc_declared());
  CHECK(ifs.declared_class() == IfsClass::A2);
  CHECK(ifs.maps()[1].rotation()(0, 1) == -1.0);
  CHECK(kind_of([] { parse_ifs_config("{"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_ifs_config(R"({"dimension": 1, "maps": []})"); }) ==
        ErrorKind::EmptyOrSingleton);
}
