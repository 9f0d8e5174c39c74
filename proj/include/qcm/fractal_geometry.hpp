#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcm/matrix.hpp"

namespace qcm {

// x ↦ ratio·rotation·x + translation on Euclidean n-space.
class Similitude {
 public:
  // Validates 0 < ratio < 1 (or ratio == 1 when allow_identity_ratio) and
  // orthogonality of rotation to 1e-12.
  Similitude(double ratio, Matrix rotation, std::vector<double> translation,
             bool allow_identity_ratio = false);

  static Similitude identity(std::size_t dimension);

  double ratio() const noexcept { return ratio_; }
  const Matrix& rotation() const noexcept { return rotation_; }
  const std::vector<double>& translation() const noexcept { return translation_; }
  std::size_t dimension() const noexcept { return translation_.size(); }

  std::vector<double> operator()(std::span<const double> x) const;

  // (*this) ∘ inner
  Similitude then_inner(const Similitude& inner) const;

 private:
  Similitude() = default;
  double ratio_ = 1.0;
  Matrix rotation_;
  std::vector<double> translation_;
};

enum class IfsClass { A1, A2, A3, A4 };

std::string_view to_string(IfsClass c) noexcept;
IfsClass parse_ifs_class(std::string_view s);

using Letter = std::uint16_t;  // 1-based map index

struct Word {
  std::vector<Letter> letters;
  double ratio_product = 1.0;   // λ_w
  double measure_weight = 1.0;  // λ_w^p, normalized natural measure of K_w

  std::size_t length() const noexcept { return letters.size(); }
  std::string str() const;  // "1.2.3"; empty word is "()"
  auto operator<=>(const Word& o) const { return letters <=> o.letters; }
  bool operator==(const Word& o) const { return letters == o.letters; }
};

bool is_prefix(std::span<const Letter> prefix, std::span<const Letter> word) noexcept;

// Prefix-free antichain Ω(r): words with λ_w ≤ 1/r < λ_{parent}.
struct StoppingSet {
  double r = 1.0;
  std::vector<Word> words;

  std::size_t max_length() const noexcept;
};

class Ifs {
 public:
  // Derives p, λ_*, and the enclosing ball; validates the declared class.
  static Ifs build(std::vector<Similitude> maps, IfsClass declared, bool osc_declared);

  const std::vector<Similitude>& maps() const noexcept { return maps_; }
  std::size_t size() const noexcept { return maps_.size(); }
  std::size_t dimension() const noexcept { return maps_.front().dimension(); }
  double hausdorff_dim() const noexcept { return p_; }
  double min_ratio() const noexcept { return min_ratio_; }
  const std::vector<double>& enclosing_center() const noexcept { return center_; }
  double enclosing_radius() const noexcept { return radius_; }
  bool osc_declared() const noexcept { return osc_declared_; }
  IfsClass declared_class() const noexcept { return class_; }
  // (A1) requires p > 1 for modulus experiments; word machinery works regardless.
  bool modulus_eligible() const noexcept { return p_ > 1.0; }
  std::vector<double> ratios() const;

  Word word(std::vector<Letter> letters) const;

 private:
  Ifs() = default;
  std::vector<Similitude> maps_;
  double p_ = 0.0;
  double min_ratio_ = 0.0;
  std::vector<double> center_;
  double radius_ = 0.0;
  bool osc_declared_ = false;
  IfsClass class_ = IfsClass::A1;
};

// Unique p > 0 with Σ ratios_j^p = 1.
double moran_dimension(std::span<const double> ratios);

inline Ifs build_ifs(std::vector<Similitude> maps, IfsClass declared, bool osc_declared) {
  return Ifs::build(std::move(maps), declared, osc_declared);
}

// F_w = F_{w_1} ∘ … ∘ F_{w_l}
Similitude compose_word(const Ifs& ifs, std::span<const Letter> word);

constexpr std::size_t kDefaultStoppingCap = 10'000'000;

StoppingSet stopping_set(const Ifs& ifs, double r, std::size_t cap = kDefaultStoppingCap);

// Length of the longest word in Ω(r), found along the largest ratio without
// enumerating Ω(r).
std::size_t stopping_depth(const Ifs& ifs, double r);

// F_w(c) for the enclosing-ball center c.
std::vector<double> representative_point(const Ifs& ifs, std::span<const Letter> word);

// 2·enclosing_radius ≥ diam(K).
double diameter_bound(const Ifs& ifs);

// All words of length `level` in lexicographic order.
std::vector<Word> words_of_length(const Ifs& ifs, std::size_t level);

// Built-in fixtures: gasket, carpet, cantor-dust-3, mixed, twisted-square,
// interval-pair.
Ifs fixture(std::string_view name);
std::vector<std::string> fixture_names();

// IFS configuration files (JSON): dimension, maps[{ratio, rotation, translation}],
// class, osc_declared.
Ifs parse_ifs_config(std::string_view text);
Ifs load_ifs_config(const std::string& path);
// Fixture name or path to a configuration file.
Ifs resolve_ifs(const std::string& name_or_path);

}  // namespace qcm
