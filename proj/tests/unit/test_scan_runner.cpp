#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "opo/errors.hpp"
#include "opo/scan_runner.hpp"

using namespace opo;

namespace {

ScanConfig detuning(double start = -8.0, double stop = 8.0, std::size_t points = 33) {
  ScanConfig cfg = parse_config("");
  cfg.range = {start, stop, points};
  return cfg;
}

ScanConfig sigma_sweep(double start = 1.05, double stop = 2.5, std::size_t points = 30) {
  ScanConfig cfg = parse_config("sweep.kind = sigma");
  cfg.range = {start, stop, points};
  return cfg;
}

std::size_t row_of(const ScanTable& t, const std::string& col, double value) {
  const auto c = t.column(col);
  const auto it = std::min_element(c.begin(), c.end(),
                                   [value](double a, double b) { return std::abs(a - value) < std::abs(b - value); });
  return static_cast<std::size_t>(it - c.begin());
}

}  // namespace

TEST(DetuningScan, ColumnsAndMetadata) {
  const auto t = run_detuning_scan(detuning());
  EXPECT_EQ(t.header(), detuning_scan_columns());
  EXPECT_EQ(t.header().front(), "delta");
  EXPECT_EQ(t.header().size(), 19u);
  EXPECT_EQ(t.rows().size(), 33u);
  std::vector<std::string> keys;
  for (const auto& [k, v] : t.metadata()) keys.push_back(k);
  for (const char* k : {"config_hash", "seed", "tool_version", "kind", "mode"}) {
    EXPECT_NE(std::find(keys.begin(), keys.end(), k), keys.end()) << k;
  }
}

TEST(DetuningScan, VacuumSourceIsFlatAtSql) {
  auto cfg = detuning();
  cfg.source = Source::Vacuum;
  const auto t = run_detuning_scan(cfg);
  for (std::size_t r = 0; r < t.rows().size(); ++r) {
    for (const char* c : {"si_sum", "si_diff", "ps_sum", "ps_diff", "pi_sum", "pi_diff"}) {
      EXPECT_NEAR(t.at(r, c), 1.0, 1e-12) << c << " at " << t.at(r, "delta");
    }
  }
}

TEST(DetuningScan, FarDetunedEdgesReadAmplitudes) {
  const auto cfg = detuning();
  const auto t = run_detuning_scan(cfg);
  const auto direct = detected_covariance(cfg, cfg.opo.sigma);
  const double p_minus = combination_variance(direct, combos::twin_amplitude_difference());
  for (double edge : {-8.0, 8.0}) {
    const auto r = row_of(t, "delta", edge);
    EXPECT_NEAR(t.at(r, "si_diff"), p_minus, 0.02);
    EXPECT_LT(t.at(r, "si_diff"), 1.0);
  }
}

TEST(DetuningScan, ResonanceKeepsDifferenceSqueezed) {
  const auto t = run_detuning_scan(detuning(-3, 3, 61));
  const auto r = row_of(t, "delta", 0.0);
  EXPECT_LT(t.at(r, "si_diff"), 1.0);
}

TEST(DetuningScan, CorrectedSumSqueezedNearHalfLinewidth) {
  const auto t = run_detuning_scan(detuning(-3, 3, 61));
  for (double d : {-0.5, 0.5}) {
    const auto r = row_of(t, "delta", d);
    EXPECT_LT(t.at(r, "si_sum_corr"), 1.0) << d;
  }
}

TEST(DetuningScan, CorrectionNeverIncreasesNoise) {
  const auto t = run_detuning_scan(detuning(-6, 6, 121));
  for (std::size_t r = 0; r < t.rows().size(); ++r) {
    EXPECT_LE(t.at(r, "si_sum_corr"), t.at(r, "si_sum") + 1e-12);
    EXPECT_LE(t.at(r, "ps_diff_corr"), t.at(r, "ps_diff") + 1e-12);
    EXPECT_LE(t.at(r, "pi_diff_corr"), t.at(r, "pi_diff") + 1e-12);
  }
}

TEST(DetuningScan, SymmetricInDetuningForTwinCurves) {
  const auto t = run_detuning_scan(detuning(-4, 4, 81));
  const auto n = t.rows().size();
  for (std::size_t r = 0; r < n; ++r) {
    EXPECT_NEAR(t.at(r, "si_diff"), t.at(n - 1 - r, "si_diff"), 1e-9);
    EXPECT_NEAR(t.at(r, "si_sum_corr"), t.at(n - 1 - r, "si_sum_corr"), 1e-9);
  }
}

TEST(DetuningScan, RangeMustCoverThreeLinewidths) {
  EXPECT_THROW(run_detuning_scan(detuning(-2, 8)), ConfigError);
  EXPECT_THROW(run_detuning_scan(detuning(-8, 2.9)), ConfigError);
  EXPECT_NO_THROW(run_detuning_scan(detuning(-3, 3, 3)));
}

TEST(DetuningScan, WrongKindIsRejected) {
  EXPECT_THROW(run_detuning_scan(sigma_sweep()), ConfigError);
  EXPECT_THROW(run_sigma_sweep(detuning()), ConfigError);
}

TEST(DetuningScan, MonteCarloAgreesWithAnalytic) {
  auto cfg = detuning(-3, 3, 5);
  const auto exact = run_detuning_scan(cfg);
  cfg.mode = RunMode::MonteCarlo;
  cfg.blocks_per_point = 200;
  const auto mc = run_detuning_scan(cfg);
  int outside = 0, total = 0;
  for (std::size_t r = 0; r < exact.rows().size(); ++r) {
    for (const char* c : {"si_sum", "si_diff", "si_sum_corr", "ps_diff_corr", "pi_sum"}) {
      const double se = mc.at(r, std::string(c) + "_se");
      EXPECT_GT(se, 0.0);
      ++total;
      if (std::abs(mc.at(r, c) - exact.at(r, c)) > 3.0 * se) ++outside;
    }
  }
  // Allow a single 3-sigma excursion among the correlated estimates.
  EXPECT_LE(outside, 1) << "of " << total;
}

TEST(DetuningScan, MonteCarloIsReproducible) {
  auto cfg = detuning(-3, 3, 4);
  cfg.mode = RunMode::MonteCarlo;
  cfg.blocks_per_point = 20;
  EXPECT_EQ(run_detuning_scan(cfg).to_csv(), run_detuning_scan(cfg).to_csv());
  auto other = cfg;
  other.detection.seed += 1;
  EXPECT_NE(run_detuning_scan(cfg).to_csv(), run_detuning_scan(other).to_csv());
}

TEST(SigmaSweep, ColumnsAndDifferenceIndependentOfPump) {
  const auto t = run_sigma_sweep(sigma_sweep());
  EXPECT_EQ(t.header(), sigma_sweep_columns());
  const auto p = t.column("p_minus");
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  EXPECT_LT(*hi - *lo, 1e-9);
  EXPECT_NEAR(*lo, 0.46, 0.04);
}

TEST(SigmaSweep, WitnessesSymmetricAndBelowBoundSomewhere) {
  const auto t = run_sigma_sweep(sigma_sweep());
  bool any_violation = false;
  for (std::size_t r = 0; r < t.rows().size(); ++r) {
    EXPECT_NEAR(t.at(r, "V1"), t.at(r, "V2"), 1e-9);
    any_violation |= t.at(r, "V0") < 2.0;
  }
  EXPECT_TRUE(any_violation);
}

TEST(SigmaSweep, PumpTwinAmplitudeSumDipsBelowSql) {
  const auto t = run_sigma_sweep(sigma_sweep(1.3, 2.5, 25));
  const auto p01 = t.column("p01");
  EXPECT_LT(*std::min_element(p01.begin(), p01.end()), 1.0);
}

TEST(SigmaSweep, ExcessPumpPhaseNoisePushesPhaseSumAboveSql) {
  auto cfg = sigma_sweep(1.15, 2.5, 15);
  cfg.opo.pump_excess_phase_in = 14.0;
  const auto t = run_sigma_sweep(cfg);
  for (std::size_t r = 0; r < t.rows().size(); ++r) EXPECT_GT(t.at(r, "q_plus"), 1.0) << t.at(r, "sigma");
}

TEST(SigmaSweep, MustStayAboveThreshold) {
  EXPECT_THROW(run_sigma_sweep(sigma_sweep(1.0, 2.0, 5)), ConfigError);
  EXPECT_THROW(run_sigma_sweep(sigma_sweep(0.5, 2.0, 5)), ConfigError);
}

TEST(SigmaSweep, MonteCarloTracksAnalytic) {
  auto cfg = sigma_sweep(1.14, 2.0, 3);
  const auto exact = run_sigma_sweep(cfg);
  cfg.mode = RunMode::MonteCarlo;
  cfg.blocks_per_point = 200;
  const auto mc = run_sigma_sweep(cfg);
  for (std::size_t r = 0; r < exact.rows().size(); ++r) {
    for (const char* c : {"p_minus", "q_plus", "p01"}) {
      EXPECT_NEAR(mc.at(r, c), exact.at(r, c), 4.0 * mc.at(r, std::string(c) + "_se")) << c;
    }
    for (const char* c : {"V0", "V1", "V2"}) EXPECT_NEAR(mc.at(r, c), exact.at(r, c), 0.1) << c;
  }
}

TEST(WitnessPoint, VacuumSourceSitsOnTheBound) {
  auto cfg = parse_config("sweep.kind = witness\nrun.source = vacuum");
  const auto report = run_witness_point(cfg);
  // Vacuum after losses is still vacuum; the optimal gains vanish.
  for (double v : report.v) EXPECT_NEAR(v, 2.0, 1e-12);
}

TEST(WitnessPoint, ShotLimitedReferencePoint) {
  const auto report = run_witness_point(parse_config("sweep.kind = witness"));
  EXPECT_NEAR(report.v[0], 0.875, 0.01);
  EXPECT_NEAR(report.v[1], report.v[2], 1e-12);
  EXPECT_LT(report.v[1], 2.0);
}

TEST(WitnessPoint, MeasuredTermsBypassTheModel) {
  const auto cfg = parse_config(R"(
sweep.kind = witness
run.source = measured
witness.measured.p_minus = 0.45
witness.measured.q_plus_corr = 0.84
witness.measured.p01 = 1.03
witness.measured.q01_corr = 1.01
witness.measured.p02 = 1.12
witness.measured.q02_corr = 0.97
)");
  const auto report = run_witness_point(cfg);
  EXPECT_NEAR(report.v[0], 1.29, 0.01);
  EXPECT_NEAR(report.v[1], 2.04, 0.01);
  EXPECT_NEAR(report.v[2], 2.09, 0.01);
}

TEST(CombSpectrum, ToothAtAnalysisFrequency) {
  auto cfg = parse_config("sweep.kind = comb\nsweep.start = 20.7e6\nsweep.stop = 21.3e6\nsweep.points = 61");
  const auto t = run_comb_spectrum(cfg);
  const auto r = row_of(t, "frequency_hz", 21e6);
  EXPECT_NEAR(t.at(r, "comb_factor"), std::pow(10.0, 1.5), 1e-6 * std::pow(10.0, 1.5));
  const auto between = row_of(t, "frequency_hz", 21e6 + 75e3);
  EXPECT_LT(t.at(between, "comb_factor"), t.at(r, "comb_factor"));
  EXPECT_GT(t.at(r, "q0"), t.at(between, "q0"));
  cfg.source = Source::Vacuum;
  for (double q : run_comb_spectrum(cfg).column("q0")) EXPECT_EQ(q, 1.0);
}

TEST(RunTable, DispatchesAndRejectsWitness) {
  EXPECT_EQ(run_table(detuning()).header().front(), "delta");
  EXPECT_EQ(run_table(sigma_sweep()).header().front(), "sigma");
  EXPECT_THROW(run_table(parse_config("sweep.kind = witness")), ConfigError);
  EXPECT_THROW(source_cross_spectrum(parse_config(R"(
sweep.kind = witness
run.source = measured
witness.measured.p_minus = 0.45
witness.measured.q_plus_corr = 0.84
witness.measured.p01 = 1.03
witness.measured.q01_corr = 1.01
witness.measured.p02 = 1.12
witness.measured.q02_corr = 0.97
)"), 1.2), ConfigError);
}
