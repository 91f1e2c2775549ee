#include "melnikov3d/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>

#include "melnikov3d/errors.hpp"

namespace melnikov3d {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const nlohmann::json& config, const std::vector<std::string>& columns)
    : path_(path), out_(path), columns_(columns.size()) {
  if (!out_) throw ConfigError("cannot write '" + path + "'");
  out_ << "# config: " << config.dump() << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != columns_) throw std::logic_error("CSV row width mismatch in " + path_);
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i].text;
  out_ << '\n';
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void write_mesh(const std::string& path, const nlohmann::json& config, const std::string& name,
                const std::vector<Vec3>& vertices, const std::vector<std::array<std::size_t, 3>>& triangles) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "# melnikov3d-mesh 1\n# config: " << config.dump() << "\n# name: " << name << '\n';
  out << "vertices " << vertices.size() << '\n';
  for (const auto& v : vertices)
    out << format_number(v.x()) << ' ' << format_number(v.y()) << ' ' << format_number(v.z()) << '\n';
  out << "triangles " << triangles.size() << '\n';
  for (const auto& t : triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

std::vector<std::array<std::size_t, 3>> periodic_grid_triangles(std::size_t n_p, std::size_t n_alpha) {
  std::vector<std::array<std::size_t, 3>> tris;
  if (n_p < 2 || n_alpha < 2) return tris;
  tris.reserve(2 * (n_p - 1) * n_alpha);
  for (std::size_t i = 0; i + 1 < n_p; ++i) {
    for (std::size_t j = 0; j < n_alpha; ++j) {
      const std::size_t j1 = (j + 1) % n_alpha;
      const std::size_t a = i * n_alpha + j, b = i * n_alpha + j1;
      const std::size_t c = (i + 1) * n_alpha + j1, d = (i + 1) * n_alpha + j;
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    }
  }
  return tris;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir + "'");
}

}  // namespace melnikov3d
