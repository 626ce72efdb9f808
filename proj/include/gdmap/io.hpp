#pragma once

#include "gdmap/point_cloud.hpp"
#include "gdmap/trajectory.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace gdmap {

/// Numeric CSV contents. A first line with any non-numeric cell is taken as
/// the single header line.
struct CsvTable {
  RowMatrix values;
  std::vector<std::string> header;  // empty when the file has none
  bool has_header = false;
  std::filesystem::path source;
};

/// Strict reader: every cell must be a finite decimal, every row must have
/// the same column count. Errors are parse-error with the 1-based line number
/// as index. Whitespace around cells and a trailing CR are ignored; blank
/// lines are accepted only at the end of the file.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");

PointCloud ingest_points(const std::filesystem::path& path, CsvTable* info = nullptr);
TrajectoryData ingest_trajectory(const std::filesystem::path& path, double dt, CsvTable* info = nullptr);
/// Per-point values (pi, U, velocities, ...), one row per point.
RowMatrix ingest_field(const std::filesystem::path& path, CsvTable* info = nullptr);

/// "%.17g": 17 significant digits always read back to the same double.
std::string format_double(double v);

/// Writes values row by row; the header is written when non-empty.
void write_csv(const std::filesystem::path& path, const RowMatrix& values,
               const std::vector<std::string>& header = {});

}  // namespace gdmap
