#include "opo/scan_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "opo/errors.hpp"

namespace opo {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string format_cell(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.10g}", v);
}

}  // namespace

ScanTable::ScanTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw InvalidArgument("a table needs at least one column");
  for (const auto& name : header_) {
    if (name.empty() || name.find(',') != std::string::npos) {
      throw InvalidArgument(fmt::format("invalid column name '{}'", name));
    }
  }
}

void ScanTable::add_row(std::vector<double> row) {
  if (row.size() != header_.size()) {
    throw InvalidArgument(fmt::format("row has {} values, table has {} columns", row.size(), header_.size()));
  }
  rows_.push_back(std::move(row));
}

void ScanTable::set_metadata(const std::string& key, const std::string& value) {
  for (auto& [k, v] : metadata_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  metadata_.emplace_back(key, value);
}

std::size_t ScanTable::column_index(const std::string& name) const {
  const auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) throw InvalidArgument(fmt::format("no column named {}", name));
  return static_cast<std::size_t>(it - header_.begin());
}

std::vector<double> ScanTable::column(const std::string& name) const {
  const std::size_t j = column_index(name);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[j]);
  return out;
}

double ScanTable::at(std::size_t row, const std::string& name) const {
  if (row >= rows_.size()) throw InvalidArgument(fmt::format("row {} out of range", row));
  return rows_[row][column_index(name)];
}

void ScanTable::write_csv(std::ostream& out) const {
  for (const auto& [k, v] : metadata_) out << "# " << k << '=' << v << '\n';
  for (std::size_t j = 0; j < header_.size(); ++j) out << (j ? "," : "") << header_[j];
  out << '\n';
  for (const auto& r : rows_) {
    for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << format_cell(r[j]);
    out << '\n';
  }
}

std::string ScanTable::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

ScanTable ScanTable::read_csv(std::istream& in) {
  std::string line;
  std::vector<std::pair<std::string, std::string>> metadata;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] != '#') break;
    const std::string body = line.substr(line.find_first_not_of("# "));
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw InvalidArgument(fmt::format("malformed metadata line '{}'", line));
    metadata.emplace_back(body.substr(0, eq), body.substr(eq + 1));
  }
  if (line.empty() || line[0] == '#') throw InvalidArgument("CSV has no header row");
  ScanTable table(split(line));
  table.metadata_ = std::move(metadata);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      if (f == "nan") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw InvalidArgument(fmt::format("'{}' is not a number", f));
      }
      row.push_back(v);
    }
    table.add_row(std::move(row));
  }
  return table;
}

}  // namespace opo
