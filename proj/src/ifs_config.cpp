#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "qcm/error.hpp"
#include "qcm/fractal_geometry.hpp"

namespace qcm {

namespace {

using nlohmann::json;

Matrix rotation2(double angle) {
  Matrix u(2, 2);
  u(0, 0) = std::cos(angle);
  u(0, 1) = -std::sin(angle);
  u(1, 0) = std::sin(angle);
  u(1, 1) = std::cos(angle);
  return u;
}

// Similitude mapping the unit square onto the square of side `ratio`
// centred at `centre`, with orientation `u`.
Similitude square_map(double ratio, const Matrix& u, double cx, double cy) {
  const double h[2] = {0.5, 0.5};
  const auto uh = apply(u, h);
  return Similitude(ratio, u, {cx - ratio * uh[0], cy - ratio * uh[1]});
}

Ifs gasket() {
  const double s = std::sqrt(3.0) / 2.0;
  const double vertices[3][2] = {{0.0, 0.0}, {1.0, 0.0}, {0.5, s}};
  std::vector<Similitude> maps;
  for (const auto& v : vertices)
    maps.emplace_back(0.5, Matrix::identity(2), std::vector<double>{v[0] / 2.0, v[1] / 2.0});
  return Ifs::build(std::move(maps), IfsClass::A3, true);
}

Ifs carpet() {
  std::vector<Similitude> maps;
  for (int iy = 0; iy < 3; ++iy)
    for (int ix = 0; ix < 3; ++ix) {
      if (ix == 1 && iy == 1) continue;
      maps.emplace_back(1.0 / 3.0, Matrix::identity(2), std::vector<double>{ix / 3.0, iy / 3.0});
    }
  return Ifs::build(std::move(maps), IfsClass::A3, true);
}

Ifs cantor_dust_3() {
  std::vector<Similitude> maps;
  for (int iy = 0; iy < 2; ++iy)
    for (int ix = 0; ix < 2; ++ix)
      maps.emplace_back(1.0 / 3.0, Matrix::identity(2),
                        std::vector<double>{2.0 * ix / 3.0, 2.0 * iy / 3.0});
  return Ifs::build(std::move(maps), IfsClass::A4, true);
}

// Two half squares on the diagonal and two quarter squares in the
// lower-right quadrant. Ratios (1/2, 1/2, 1/4, 1/4).
Ifs mixed() {
  const Matrix id = Matrix::identity(2);
  std::vector<Similitude> maps;
  maps.emplace_back(0.5, id, std::vector<double>{0.0, 0.0});
  maps.emplace_back(0.5, id, std::vector<double>{0.5, 0.5});
  maps.emplace_back(0.25, id, std::vector<double>{0.5, 0.0});
  maps.emplace_back(0.25, id, std::vector<double>{0.75, 0.25});
  return Ifs::build(std::move(maps), IfsClass::A1, true);
}

// Rotation- and reflection-bearing (A1) system on the unit square: three
// half squares in three quadrants, a third-size square in the fourth.
Ifs twisted_square() {
  Matrix reflect(2, 2);
  reflect(0, 0) = 1.0;
  reflect(1, 1) = -1.0;
  std::vector<Similitude> maps;
  maps.push_back(square_map(0.5, Matrix::identity(2), 0.25, 0.25));
  maps.push_back(square_map(0.5, rotation2(std::numbers::pi / 2.0), 0.75, 0.25));
  maps.push_back(square_map(0.5, reflect, 0.25, 0.75));
  maps.push_back(square_map(1.0 / 3.0, rotation2(std::numbers::pi), 0.75, 0.75));
  return Ifs::build(std::move(maps), IfsClass::A1, true);
}

// [0,1/2] ∪ [3/4,1] in one dimension: p < 1, usable for word machinery only.
Ifs interval_pair() {
  std::vector<Similitude> maps;
  maps.emplace_back(0.5, Matrix::identity(1), std::vector<double>{0.0});
  maps.emplace_back(0.25, Matrix::identity(1), std::vector<double>{0.75});
  return Ifs::build(std::move(maps), IfsClass::A1, true);
}

}  // namespace

std::vector<std::string> fixture_names() {
  return {"gasket", "carpet", "cantor-dust-3", "mixed", "twisted-square", "interval-pair"};
}

Ifs fixture(std::string_view name) {
  if (name == "gasket") return gasket();
  if (name == "carpet") return carpet();
  if (name == "cantor-dust-3") return cantor_dust_3();
  if (name == "mixed") return mixed();
  if (name == "twisted-square") return twisted_square();
  if (name == "interval-pair") return interval_pair();
  throw Error(ErrorKind::ConfigError, "unknown fixture '" + std::string(name) + "'");
}

Ifs parse_ifs_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("IFS config is not valid JSON: ") + e.what());
  }
  try {
    const auto n = doc.at("dimension").get<std::size_t>();
    if (n == 0) throw Error(ErrorKind::ConfigError, "dimension must be positive");
    std::vector<Similitude> maps;
    for (const auto& m : doc.at("maps")) {
      const double ratio = m.at("ratio").get<double>();
      Matrix rot;
      const auto& r = m.at("rotation");
      if (r.is_string()) {
        if (r.get<std::string>() != "identity")
          throw Error(ErrorKind::ConfigError, "rotation must be 'identity' or a row-major list");
        rot = Matrix::identity(n);
      } else {
        const auto flat = r.get<std::vector<double>>();
        if (flat.size() != n * n)
          throw Error(ErrorKind::DimensionMismatch, "rotation needs dimension^2 entries");
        rot = Matrix(n, n);
        for (std::size_t k = 0; k < flat.size(); ++k) rot(k / n, k % n) = flat[k];
      }
      auto b = m.at("translation").get<std::vector<double>>();
      if (b.size() != n) throw Error(ErrorKind::DimensionMismatch, "translation length != dimension");
      maps.emplace_back(ratio, std::move(rot), std::move(b));
    }
    const IfsClass cls = parse_ifs_class(doc.value("class", std::string("A1")));
    const bool osc = doc.value("osc_declared", false);
    return Ifs::build(std::move(maps), cls, osc);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed IFS config: ") + e.what());
  }
}

Ifs load_ifs_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open IFS config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ifs_config(ss.str());
}

Ifs resolve_ifs(const std::string& name_or_path) {
  for (const auto& n : fixture_names())
    if (n == name_or_path) return fixture(n);
  if (std::filesystem::exists(name_or_path)) return load_ifs_config(name_or_path);
  throw Error(ErrorKind::ConfigError,
              "'" + name_or_path + "' is neither a built-in fixture nor a readable file");
}

}  // namespace qcm
