#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "ehor/scenario.hpp"

using namespace ehor;

namespace {

const char* kReference = R"(# reference layout
s = 0, 0
r1 = 30, 20
r2 = 60, -20
d = 100, 0
alpha = -3
p_s_dbm = 12
n0_dbm = -50
r0 = 2
m_r1_mj = 12
m_r2_mj = 10
lambda1_db = -11
lambda2_db = -12
)";

std::string with_line(const std::string& base, const std::string& extra) { return base + extra + "\n"; }

std::string replace_line(std::string text, const std::string& key, const std::string& repl) {
  const auto pos = text.find(key + " =");
  const auto end = text.find('\n', pos);
  return text.replace(pos, end - pos, repl);
}

}  // namespace

TEST(Scenario, ReferenceLayoutLoads) {
  const Scenario sc = load_scenario(kReference);
  EXPECT_DOUBLE_EQ(sc.layout.r2.y, -20.0);
  EXPECT_DOUBLE_EQ(sc.radio.p_s_dbm, 12.0);
  EXPECT_EQ(sc.bins, kDefaultBins);
  EXPECT_DOUBLE_EQ(sc.energy.m_r1, 12.0);
}

TEST(Scenario, ThresholdFromRate) {
  EXPECT_EQ(snr_threshold(2.0), 3.0);
  EXPECT_EQ(snr_threshold(1.0), 1.0);
}

TEST(Scenario, Distance) { EXPECT_NEAR(distance({0, 0}, {30, 20}), std::sqrt(1300.0), 1e-12); }

TEST(Scenario, DirectLinkRate) {
  // 12 dBm over 100 m with exponent -3 against -50 dBm noise.
  const double mean_snr = std::pow(10.0, 1.2) * 1e-6 / 1e-5;
  const DerivedRates r = derive_rates(load_scenario(kReference));
  EXPECT_NEAR(r.w_sd, 1.0 / mean_snr, 1e-12);
  EXPECT_NEAR(r.w_sd, 0.6310, 5e-5);
  EXPECT_EQ(r.gamma_th, 3.0);
}

TEST(Scenario, RelayLinksUseEnergyCostAsPower) {
  const DerivedRates r = derive_rates(load_scenario(kReference));
  const double n0 = 1e-5;
  EXPECT_NEAR(r.w_r1d, n0 / (12.0 * std::pow(std::hypot(70.0, 20.0), -3.0)), 1e-15);
  EXPECT_NEAR(r.w_r2d, n0 / (10.0 * std::pow(std::hypot(40.0, 20.0), -3.0)), 1e-15);
  EXPECT_NEAR(r.w_r1r2, n0 / (12.0 * std::pow(std::hypot(30.0, 40.0), -3.0)), 1e-15);
}

TEST(Scenario, HarvestRateConvention) {
  EnergyParams e;
  e.lambda1_db = -15;
  EXPECT_NEAR(e.lambda1(), std::pow(10.0, 1.5), 1e-12);
}

TEST(Scenario, CoincidentSourceAndDestinationRejected) {
  EXPECT_THROW(load_scenario(replace_line(kReference, "d", "d = 0, 0")), ScenarioError);
}

TEST(Scenario, ZeroRateRejected) {
  EXPECT_THROW(load_scenario(replace_line(kReference, "r0", "r0 = 0")), ScenarioError);
}

TEST(Scenario, NonPositiveEnergyCostRejected) {
  EXPECT_THROW(load_scenario(replace_line(kReference, "m_r2_mj", "m_r2_mj = 0")), ScenarioError);
}

TEST(Scenario, KeyErrors) {
  EXPECT_THROW(load_scenario(with_line(kReference, "colour = red")), ScenarioError);
  EXPECT_THROW(load_scenario(with_line(kReference, "r0 = 2")), ScenarioError);
  EXPECT_THROW(load_scenario(replace_line(kReference, "alpha", "")), ScenarioError);
  EXPECT_THROW(load_scenario(replace_line(kReference, "n0_dbm", "n0_dbm = -50dB")), ScenarioError);
  EXPECT_THROW(load_scenario(replace_line(kReference, "s", "s = 0")), ScenarioError);
  EXPECT_THROW(load_scenario(with_line(kReference, "just words")), ScenarioError);
}

TEST(Scenario, BinsKey) {
  EXPECT_EQ(load_scenario(with_line(kReference, "bins = 40")).bins, 40u);
  EXPECT_THROW(load_scenario(with_line(kReference, "bins = 2.5")), ScenarioError);
  EXPECT_THROW(load_scenario(with_line(kReference, "bins = 0")), ScenarioError);
}

TEST(Scenario, CommentsAndBlankLines) {
  const Scenario sc = load_scenario(with_line(std::string("\n\n# header\n") + kReference, "   # trailing"));
  EXPECT_DOUBLE_EQ(sc.layout.d.x, 100.0);
}
