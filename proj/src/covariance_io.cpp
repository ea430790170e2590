#include "opo/covariance_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "opo/errors.hpp"

namespace opo {

namespace {

constexpr const char* kHeader = "p0,q0,p1,q1,p2,q2";
constexpr const char* kFrequencyKey = "# analysis_frequency_hz=";

double parse_double(const std::string& text) {
  if (text == "nan") return std::nan("");
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw InvalidArgument(fmt::format("bad number '{}' in covariance CSV", text));
  return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

}  // namespace

void write_covariance_csv(std::ostream& out, const SpectralCovariance& s) {
  out << kFrequencyKey << fmt::format("{}", s.analysis_frequency_hz()) << '\n' << kHeader << '\n';
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      if (j > 0) out << ',';
      out << (s.known(i, j) ? fmt::format("{:.17g}", s.at(i, j)) : std::string("nan"));
    }
    out << '\n';
  }
}

SpectralCovariance read_covariance_csv(std::istream& in) {
  std::string line;
  double frequency = 0.0;
  bool have_frequency = false;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind(kFrequencyKey, 0) == 0) {
      frequency = parse_double(line.substr(std::string(kFrequencyKey).size()));
      have_frequency = true;
      continue;
    }
    if (line[0] == '#') continue;
    if (!have_header) {
      if (line != kHeader) throw InvalidArgument(fmt::format("expected header '{}', got '{}'", kHeader, line));
      have_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != kDim) throw InvalidArgument(fmt::format("covariance row has {} fields", fields.size()));
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_double(f));
    rows.push_back(std::move(row));
  }
  if (!have_frequency) throw InvalidArgument("covariance CSV lacks the analysis_frequency_hz line");
  if (rows.size() != kDim) throw InvalidArgument(fmt::format("covariance CSV has {} rows, expected 6", rows.size()));

  auto s = SpectralCovariance::unknown(frequency);
  for (int i = 0; i < kDim; ++i) {
    for (int j = i; j < kDim; ++j) {
      const double upper = rows[i][j];
      const double lower = rows[j][i];
      if (std::isnan(upper) != std::isnan(lower) || (!std::isnan(upper) && upper != lower)) {
        throw InvalidArgument(fmt::format("covariance CSV is not symmetric at {}", entry_label(i, j)));
      }
      if (!std::isnan(upper)) s.set(i, j, upper);
    }
  }
  return s;
}

}  // namespace opo
