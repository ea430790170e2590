#include "opo/measurement_terms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "opo/errors.hpp"

namespace opo {

namespace {

constexpr int kUnknowns = kDim * (kDim + 1) / 2;
constexpr double kRankTolerance = 1e-10;
constexpr double kConsistencyTolerance = 1e-9;

// Upper-triangle enumeration of the independent entries.
std::vector<std::pair<int, int>> unknown_entries() {
  std::vector<std::pair<int, int>> out;
  out.reserve(kUnknowns);
  for (int i = 0; i < kDim; ++i) {
    for (int j = i; j < kDim; ++j) out.emplace_back(i, j);
  }
  return out;
}

const std::map<std::string, QuadratureCombination>& named_combinations() {
  static const std::map<std::string, QuadratureCombination> table = [] {
    std::map<std::string, QuadratureCombination> t;
    for (int i = 0; i < kDim; ++i) {
      Vector6 c = Vector6::Zero();
      c(i) = 1.0;
      t.emplace(basis_label(i), QuadratureCombination(c));
    }
    t.emplace("p_minus", combos::twin_amplitude_difference());
    t.emplace("p_plus", combos::twin_amplitude_sum());
    t.emplace("q_plus", combos::twin_phase_sum());
    t.emplace("q_minus", combos::twin_phase_difference());
    t.emplace("p01", combos::pump_twin_amplitude_sum(Mode::Signal));
    t.emplace("p02", combos::pump_twin_amplitude_sum(Mode::Idler));
    t.emplace("q01", combos::pump_twin_phase_difference(Mode::Signal));
    t.emplace("q02", combos::pump_twin_phase_difference(Mode::Idler));
    return t;
  }();
  return table;
}

Vector6 unit(int i) {
  Vector6 c = Vector6::Zero();
  c(i) = 1.0;
  return c;
}

}  // namespace

MeasurementTerm MeasurementTerm::variance(std::string name, const QuadratureCombination& c, double value) {
  return MeasurementTerm{std::move(name), c, c, value};
}

MeasurementTerm MeasurementTerm::correlation(int i, int j, double value) {
  return MeasurementTerm{"C_" + entry_label(i, j), QuadratureCombination(unit(i)),
                         QuadratureCombination(unit(j)), value};
}

MeasurementTerm MeasurementTerm::named(const std::string& name, double value) {
  const auto& table = named_combinations();
  if (auto it = table.find(name); it != table.end()) return variance(name, it->second, value);
  if (name.size() == 6 && name.rfind("C_", 0) == 0) {
    const auto a = parse_basis_label(name.substr(2, 2));
    const auto b = parse_basis_label(name.substr(4, 2));
    if (a && b) return correlation(*a, *b, value);
  }
  throw InvalidArgument(fmt::format("unknown measurement term '{}'", name));
}

std::vector<std::string> term_vocabulary() {
  std::vector<std::string> names;
  for (const auto& [name, combo] : named_combinations()) names.push_back(name);
  return names;
}

Reconstruction reconstruct_from_measurements(const std::vector<MeasurementTerm>& terms,
                                             double analysis_frequency_hz) {
  if (terms.empty()) throw InvalidArgument("no measurement terms given");
  const auto entries = unknown_entries();
  const auto m = static_cast<Eigen::Index>(terms.size());

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, kUnknowns);
  Eigen::VectorXd b(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Vector6& left = terms[r].left.coefficients();
    const Vector6& right = terms[r].right.coefficients();
    for (int k = 0; k < kUnknowns; ++k) {
      const auto [i, j] = entries[k];
      a(r, k) = (i == j) ? left(i) * right(i) : left(i) * right(j) + left(j) * right(i);
    }
    b(r) = terms[r].value;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(kRankTolerance);
  const Eigen::Index rank = svd.rank();
  const Eigen::VectorXd x = svd.solve(b);

  const Eigen::VectorXd residual = a * x - b;
  if (residual.cwiseAbs().maxCoeff() > kConsistencyTolerance * (1.0 + b.cwiseAbs().maxCoeff())) {
    // Left null vectors expose which terms are tied by a linear dependency.
    const Eigen::MatrixXd left_null = svd.matrixU().rightCols(m - rank);
    Eigen::Index worst = 0;
    (left_null.transpose() * b).cwiseAbs().maxCoeff(&worst);
    std::vector<std::string> names;
    std::set<std::string> touched;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (std::abs(left_null(r, worst)) <= 1e-9) continue;
      names.push_back(terms[r].name);
      for (int k = 0; k < kUnknowns; ++k) {
        if (std::abs(a(r, k)) > 0.0) touched.insert(entry_label(entries[k].first, entries[k].second));
      }
    }
    throw InconsistentMeasurements(fmt::format("inconsistent measurement terms {} over entries {}",
                                               fmt::join(names, ", "), fmt::join(touched, ", ")));
  }

  const Eigen::MatrixXd kernel = svd.matrixV().rightCols(kUnknowns - rank);
  auto covariance = SpectralCovariance::unknown(analysis_frequency_hz);
  std::vector<std::pair<int, int>> undetermined;
  for (int k = 0; k < kUnknowns; ++k) {
    const auto [i, j] = entries[k];
    if (kernel.cols() > 0 && kernel.row(k).norm() > 1e-9) {
      undetermined.emplace_back(i, j);
    } else {
      covariance.set(i, j, x(k));
    }
  }
  if (undetermined.empty()) require_physical(covariance, "reconstruct_from_measurements");
  return Reconstruction{std::move(covariance), std::move(undetermined)};
}

std::vector<MeasurementTerm> extract_terms(const SpectralCovariance& s, const std::vector<std::string>& names) {
  std::vector<MeasurementTerm> out;
  out.reserve(names.size());
  for (const auto& name : names) {
    auto term = MeasurementTerm::named(name, 0.0);
    term.value = combination_covariance(s, term.left, term.right);
    out.push_back(std::move(term));
  }
  return out;
}

std::vector<MeasurementTerm> full_term_set(const SpectralCovariance& s) {
  std::vector<MeasurementTerm> out;
  for (int i = 0; i < kDim; ++i) {
    out.push_back(MeasurementTerm::variance(basis_label(i), QuadratureCombination(unit(i)), s.at(i, i)));
  }
  for (int i = 0; i < kDim; ++i) {
    for (int j = i + 1; j < kDim; ++j) out.push_back(MeasurementTerm::correlation(i, j, s.at(i, j)));
  }
  return out;
}

}  // namespace opo
