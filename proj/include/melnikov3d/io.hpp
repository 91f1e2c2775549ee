#pragma once

#include <array>
#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "melnikov3d/geometry.hpp"

namespace melnikov3d {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite.
std::string format_number(double v);

struct CsvCell {
  std::string text;
  CsvCell(double v) : text(format_number(v)) {}
  CsvCell(int v) : text(std::to_string(v)) {}
  CsvCell(std::size_t v) : text(std::to_string(v)) {}
  CsvCell(bool v) : text(v ? "1" : "0") {}
  CsvCell(const char* v) : text(v) {}
  CsvCell(std::string v) : text(std::move(v)) {}
};

/// CSV file whose first line is `# config: <compact JSON>`, followed by the
/// column header and rows.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const nlohmann::json& config, const std::vector<std::string>& columns);
  void row(const std::vector<CsvCell>& cells);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_;
};

void write_json(const std::string& path, const nlohmann::json& j);

/// Indexed triangle list:
///   # melnikov3d-mesh 1
///   # config: <JSON>
///   # name: <name>
///   vertices N
///   x y z            (N lines)
///   triangles K
///   i j k            (K lines, 0-based)
void write_mesh(const std::string& path, const nlohmann::json& config, const std::string& name,
                const std::vector<Vec3>& vertices, const std::vector<std::array<std::size_t, 3>>& triangles);

/// Two triangles per cell of an n_p × n_alpha grid stored row-major, with
/// the α direction closed periodically.
std::vector<std::array<std::size_t, 3>> periodic_grid_triangles(std::size_t n_p, std::size_t n_alpha);

/// Creates the directory (and parents) if needed; ConfigError on failure.
void ensure_directory(const std::string& dir);

}  // namespace melnikov3d
