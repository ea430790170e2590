#pragma once

// Rectangular numeric table with '#' metadata lines, persisted as CSV.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace opo {

inline constexpr const char* kToolVersion = "1.0.0";

class ScanTable {
 public:
  explicit ScanTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }

  // Throws InvalidArgument unless the row has one value per column.
  void add_row(std::vector<double> row);
  void set_metadata(const std::string& key, const std::string& value);

  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  double at(std::size_t row, const std::string& name) const;

  // "# key=value" lines, the header row, then rows at 10 significant digits.
  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  static ScanTable read_csv(std::istream& in);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::pair<std::string, std::string>> metadata_;
};

}  // namespace opo
