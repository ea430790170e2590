#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "opo/detection_chain.hpp"
#include "opo/errors.hpp"
#include "random_states.hpp"
#include "reference_fixture.hpp"

using namespace opo;

namespace {

const Eigen::Vector3d kDifference(0.0, 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0));

DetectionParams params(std::uint64_t seed = 1) {
  DetectionParams d;
  d.seed = seed;
  return d;
}

}  // namespace

TEST(Efficiency, UnitEfficiencyIsIdentity) {
  std::mt19937_64 rng(61);
  const auto s = fixtures::random_physical(rng);
  DetectionParams d;
  d.efficiency_pump = d.efficiency_twins = 1.0;
  EXPECT_TRUE(apply_efficiency(s, d).matrix().isApprox(s.matrix(), 1e-15));
}

TEST(Efficiency, TotalLossLimitIsVacuum) {
  std::mt19937_64 rng(67);
  const auto s = fixtures::random_physical(rng);
  DetectionParams d;
  d.efficiency_pump = d.efficiency_twins = 1e-12;
  EXPECT_LT((apply_efficiency(s, d).matrix() - Matrix6::Identity()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Efficiency, InvertedLossFormulaGivesMeasuredDifference) {
  const double raw = (0.45 - 0.13) / 0.87;
  EXPECT_NEAR(raw, 0.368, 5e-4);
  // Two-mode squeezed twins with (p1 - p2)/sqrt2 at the raw level.
  const double r = -0.5 * std::log(raw);
  auto m = Matrix6::Identity().eval();
  m(2, 2) = m(3, 3) = m(4, 4) = m(5, 5) = std::cosh(2 * r);
  m(2, 4) = m(4, 2) = std::sinh(2 * r);
  m(3, 5) = m(5, 3) = -std::sinh(2 * r);
  const auto detected = apply_efficiency(SpectralCovariance::from_matrix(m, 21e6), DetectionParams{});
  EXPECT_NEAR(combination_variance(detected, combos::twin_amplitude_difference()), 0.45, 1e-14);
}

TEST(Efficiency, VacuumMapsToVacuumAndCrossTermsScale) {
  EXPECT_TRUE(apply_efficiency(SpectralCovariance::vacuum(), DetectionParams{}).matrix().isApprox(Matrix6::Identity()));
  auto m = (2.0 * Matrix6::Identity()).eval();
  m(0, 2) = m(2, 0) = 0.5;
  const auto out = apply_efficiency(SpectralCovariance::from_matrix(m, 0.0), DetectionParams{});
  EXPECT_NEAR(out.at(0, 2), 0.5 * std::sqrt(0.87 * 0.74), 1e-15);
}

TEST(Efficiency, PreservesPhysicalityAndNeverOvershootsSql) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> eta(0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = fixtures::random_physical(rng);
    DetectionParams d;
    d.efficiency_twins = eta(rng);
    d.efficiency_pump = eta(rng);
    const auto out = apply_efficiency(s, d);
    EXPECT_TRUE(validate_physicality(out).physical);
    for (int i = 0; i < kDim; ++i) {
      const double before = s.at(i, i), after = out.at(i, i);
      if (before < 1.0) {
        EXPECT_GE(after, before);
        EXPECT_LE(after, 1.0);
      } else {
        EXPECT_LE(after, before);
        EXPECT_GE(after, 1.0);
      }
    }
  }
}

TEST(Efficiency, NonPhysicalInputIsRejected) {
  EXPECT_THROW(apply_efficiency(SpectralCovariance::from_matrix(0.5 * Matrix6::Identity(), 0.0), DetectionParams{}),
               NonPhysical);
}

TEST(DetectionParams, Validation) {
  DetectionParams d;
  EXPECT_NO_THROW(d.validate());
  d.block_size = 1;
  EXPECT_THROW(d.validate(), InvalidArgument);
  d = DetectionParams{};
  d.efficiency_pump = 0.0;
  EXPECT_THROW(d.validate(), InvalidArgument);
  d = DetectionParams{};
  d.sample_rate_hz = 0.0;
  EXPECT_THROW(d.validate(), InvalidArgument);
}

TEST(Synthesis, VacuumRecordReproducesSql) {
  const auto rec = synthesize_record(SpectralCovariance::vacuum(), params(3), 10000);
  EXPECT_EQ(rec.samples.size(), 10000u * 1000u);
  EXPECT_EQ(rec.block_count(), 10000u);
  const auto est = block_variances(rec, Eigen::Vector3d(0, 1, 0));
  EXPECT_NEAR(est.value, 1.0, 3.0 * est.standard_error);
  EXPECT_GT(est.standard_error, 0.0);
  EXPECT_EQ(est.blocks_used, 10000u);
}

TEST(Synthesis, TwinCorrelationIsReproduced) {
  auto m = Matrix6::Identity().eval();
  m(2, 4) = m(4, 2) = 0.55;
  const auto rec = synthesize_record(SpectralCovariance::from_matrix(m, 0.0), params(5), 10000);
  // Cov(x, y) = (Var(x + y) - Var(x - y)) / 4, each estimated by blocks.
  const auto plus = block_variances(rec, Eigen::Vector3d(0, 1, 1));
  const auto minus = block_variances(rec, Eigen::Vector3d(0, 1, -1));
  const double cov = (plus.value - minus.value) / 4.0;
  const double se = std::hypot(plus.standard_error, minus.standard_error) / 4.0;
  EXPECT_NEAR(cov, 0.55, 3.0 * se);
  EXPECT_NEAR(pooled_covariance(rec)(1, 2), 0.55, 0.01);
}

TEST(Synthesis, ZeroCovarianceGivesZeroSamples) {
  const auto rec = synthesize_record(SpectralCovariance::from_matrix_unchecked(Matrix6::Zero(), 0.0), params(), 3);
  for (const auto& x : rec.samples) EXPECT_TRUE(x.isZero(0.0));
  EXPECT_EQ(block_variances(rec, Eigen::Vector3d(1, 1, 1)).value, 0.0);
}

TEST(Synthesis, DeterministicForSeedAndSensitiveToIt) {
  std::mt19937_64 rng(73);
  const auto s = fixtures::random_physical(rng);
  const auto a = synthesize_record(s, params(9), 5);
  const auto b = synthesize_record(s, params(9), 5);
  const auto c = synthesize_record(s, params(10), 5);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  bool all_equal = true, any_diff = false;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    all_equal &= (a.samples[k].array() == b.samples[k].array()).all();
    any_diff |= (a.samples[k].array() != c.samples[k].array()).any();
  }
  EXPECT_TRUE(all_equal);
  EXPECT_TRUE(any_diff);
}

TEST(Synthesis, ZeroBlocksIsAnError) {
  EXPECT_THROW(synthesize_record(SpectralCovariance::vacuum(), params(), 0), InvalidArgument);
}

TEST(Synthesis, MappingSelectsQuadratures) {
  const auto fixture = fixtures::reference_fixture();
  const auto rec = synthesize_record(fixture, params(), 1, DetectorMapping::phase());
  EXPECT_NEAR(rec.generating_covariance(0, 0), fixture.at(1, 1), 1e-15);
  EXPECT_NEAR(rec.generating_covariance(1, 2), fixture.at(3, 5), 1e-15);
  EXPECT_EQ(rec.mapping.axes[2], Quadrature::Q);
}

TEST(BlockVariances, ConstantRecordIsZero) {
  PhotocurrentRecord rec;
  rec.params = DetectionParams{};
  rec.samples.assign(3000, Eigen::Vector3d(1.5, -2.0, 0.25));
  const auto est = block_variances(rec, Eigen::Vector3d(1, 1, 1));
  EXPECT_EQ(est.value, 0.0);
  EXPECT_EQ(est.standard_error, 0.0);
  EXPECT_EQ(est.blocks_used, 3u);
}

TEST(BlockVariances, EmptyRecordIsAnError) {
  PhotocurrentRecord rec;
  rec.params = DetectionParams{};
  EXPECT_THROW(block_variances(rec, Eigen::Vector3d(1, 0, 0)), InvalidArgument);
}

TEST(BlockVariances, FixtureDifferenceThroughTheChain) {
  const auto rec = synthesize_record(fixtures::reference_fixture(), params(13), 1000);
  const auto est = block_variances(rec, kDifference);
  EXPECT_NEAR(est.value, 0.45, 3.0 * est.standard_error);
}

TEST(BlockVariances, StandardErrorShrinksAsRootBlocks) {
  const auto s = fixtures::reference_fixture();
  double previous = 0.0;
  for (std::size_t blocks : {100u, 1000u, 10000u}) {
    const auto est = block_variances(synthesize_record(s, params(17), blocks), kDifference);
    if (previous > 0.0) {
      EXPECT_NEAR(previous / est.standard_error, std::sqrt(10.0), 0.2 * std::sqrt(10.0));
    }
    previous = est.standard_error;
  }
}

TEST(BlockVariances, BlocksAreSeriallyIndependent) {
  const auto v = per_block_variances(synthesize_record(fixtures::reference_fixture(), params(19), 4000), kDifference);
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    den += (v[k] - mean) * (v[k] - mean);
    if (k + 1 < v.size()) num += (v[k] - mean) * (v[k + 1] - mean);
  }
  EXPECT_LT(std::abs(num / den), 3.0 / std::sqrt(n));
}

TEST(SqlNormalize, DivisionAndErrorPropagation) {
  const VarianceEstimate ref{2.0, 0.02, 100};
  const auto same = sql_normalize(ref, ref);
  EXPECT_EQ(same.value, 1.0);
  const auto r = sql_normalize({0.90, 0.009, 100}, ref);
  EXPECT_DOUBLE_EQ(r.value, 0.45);
  EXPECT_NEAR(r.standard_error, 0.45 * std::hypot(0.01, 0.01), 1e-15);
  EXPECT_THROW(sql_normalize(ref, {0.0, 0.0, 1}), InvalidArgument);
  EXPECT_THROW(sql_normalize(ref, {-1.0, 0.0, 1}), InvalidArgument);
}

TEST(SqlNormalize, EndToEndRecoversDetectedEntries) {
  DetectionParams d = params(23);
  d.electronic_gain = 7.5;
  const auto detected = apply_efficiency(fixtures::reference_fixture(), d);
  const auto signal = synthesize_record(detected, d, 1000);
  d.seed = 24;
  const auto reference = synthesize_record(SpectralCovariance::vacuum(), d, 1000);
  const std::vector<Eigen::Vector3d> weights{Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0), kDifference,
                                             Eigen::Vector3d(1, 1, 0) / std::sqrt(2.0)};
  for (const auto& w : weights) {
    const auto est = sql_normalize(block_variances(signal, w), block_variances(reference, w));
    const double exact = w.dot(detector_covariance(detected, DetectorMapping::amplitude()) * w);
    EXPECT_NEAR(est.value, exact, 3.0 * est.standard_error);
  }
}

TEST(CorrectedBlockVariance, MatchesAnalyticCorrection) {
  const auto s = fixtures::reference_fixture();
  const auto rec = synthesize_record(s, params(29), 1000, DetectorMapping::phase());
  const Eigen::Vector3d w(0, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0));
  const auto c = corrected_block_variance(rec, w, Mode::Pump);
  EXPECT_NEAR(c.estimate.value, 0.84, 3.0 * c.estimate.standard_error + 0.005);
}

TEST(RecordCsv, HeaderAndRows) {
  const auto rec = synthesize_record(SpectralCovariance::vacuum(), params(), 1);
  std::stringstream out;
  write_record_csv(out, rec);
  std::string line;
  std::getline(out, line);
  EXPECT_EQ(line, "sample_index,i0,i1,i2");
  int rows = 0;
  while (std::getline(out, line)) ++rows;
  EXPECT_EQ(rows, 1000);
}
