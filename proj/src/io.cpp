#include "gdmap/io.hpp"

#include "gdmap/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace gdmap {
namespace {

constexpr const char* kModule = "io";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

// from_chars alone accepts "inf", "nan" and a bare numeric prefix;
// the full cell must be consumed and the value finite.
bool parse_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  const char* first = cell.data();
  if (*first == '+') {
    ++first;
    if (first != cell.data() + cell.size() && *first == '-') return false;
  }
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  table.source = source;

  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      lines.push_back(rest.substr(0, nl));
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorKind::parse_error, kModule, fmt::format("{}: empty file", source), 1);

  std::size_t first_data = 0;
  {
    const auto cells = split(lines[0]);
    double dummy;
    for (const auto c : cells) {
      if (!parse_number(c, dummy)) {
        table.has_header = true;
        break;
      }
    }
    if (table.has_header) {
      for (const auto c : cells) table.header.emplace_back(c);
      first_data = 1;
    }
  }
  if (first_data == lines.size())
    fail(ErrorKind::parse_error, kModule, fmt::format("{}: header but no data rows", source), 2);

  const std::size_t rows = lines.size() - first_data;
  const std::size_t cols = split(lines[first_data]).size();
  if (table.has_header && table.header.size() != cols)
    fail(ErrorKind::parse_error, kModule,
         fmt::format("{}: header has {} columns, data has {}", source, table.header.size(), cols), 1);

  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t line_no = first_data + r + 1;
    const auto line = lines[first_data + r];
    if (trim(line).empty())
      fail(ErrorKind::parse_error, kModule, fmt::format("{}:{}: empty row", source, line_no), line_no,
           "remove blank lines between data rows");
    const auto cells = split(line);
    if (cells.size() != cols)
      fail(ErrorKind::parse_error, kModule,
           fmt::format("{}:{}: ragged row with {} columns, expected {}", source, line_no, cells.size(), cols),
           line_no);
    for (std::size_t c = 0; c < cols; ++c) {
      double v;
      if (!parse_number(cells[c], v))
        fail(ErrorKind::parse_error, kModule,
             fmt::format("{}:{}: column {} is not a finite number: '{}'", source, line_no, c + 1, cells[c]),
             line_no);
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::parse_error, kModule, fmt::format("cannot open {}", path.string()), std::nullopt,
                "check the path");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

PointCloud ingest_points(const std::filesystem::path& path, CsvTable* info) {
  CsvTable t = read_csv(path);
  PointCloud cloud(t.values);
  if (info) *info = std::move(t);
  return cloud;
}

TrajectoryData ingest_trajectory(const std::filesystem::path& path, double dt, CsvTable* info) {
  CsvTable t = read_csv(path);
  TrajectoryData traj{t.values, dt};
  traj.validate();
  if (info) *info = std::move(t);
  return traj;
}

RowMatrix ingest_field(const std::filesystem::path& path, CsvTable* info) {
  CsvTable t = read_csv(path);
  RowMatrix values = t.values;
  if (info) *info = std::move(t);
  return values;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_csv(const std::filesystem::path& path, const RowMatrix& values, const std::vector<std::string>& header) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::invalid_argument, kModule, fmt::format("cannot write {}", path.string()));
  fmt::memory_buffer buf;
  if (!header.empty()) fmt::format_to(std::back_inserter(buf), "{}\n", fmt::join(header, ","));
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) buf.push_back(',');
      fmt::format_to(std::back_inserter(buf), "{:.17g}", values(r, c));
    }
    buf.push_back('\n');
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

}  // namespace gdmap
