#include <gtest/gtest.h>

#include <string>

#include "ehor/protocol.hpp"
#include "protocol_grid.hpp"

using namespace ehor;

namespace {

const ProtocolParams kParams(3.0, 10.0, 8.0);

SlotDraws draws(double sd, double sr1, double sr2, double r1r2, double r1d, double r2d) {
  return {sd, sr1, sr2, r1r2, r1d, r2d};
}

}  // namespace

TEST(Residual, Values) {
  EXPECT_EQ(residual_threshold(3.0, 0.0), 3.0);
  EXPECT_NEAR(residual_threshold(3.0, 1.2), 1.8, 1e-15);
  EXPECT_THROW(residual_threshold(3.0, 3.0), ContractError);
  EXPECT_THROW(residual_threshold(3.0, -0.1), ContractError);
}

TEST(Protocol, DirectDelivery) {
  const auto out = decide_slot({TcState::S, 0.0}, draws(5, 0, 0, 0, 0, 0), 0, 0, kParams);
  EXPECT_EQ(out.transmitter, Transmitter::S);
  EXPECT_TRUE(out.delivered);
  EXPECT_EQ(out.next.tc, TcState::S);
  EXPECT_EQ(out.next.gamma_overall, 0.0);
}

TEST(Protocol, SourceReachesBothRelays) {
  const auto out = decide_slot({TcState::S, 0.0}, draws(1, 4, 4, 0, 0, 0), 0, 0, kParams);
  EXPECT_EQ(out.row, ProtocolRow::S_ToR1R2);
  EXPECT_FALSE(out.delivered);
  EXPECT_EQ(out.next.tc, TcState::SR1R2_3);
  EXPECT_DOUBLE_EQ(out.next.gamma_overall, 1.0);
}

TEST(Protocol, RelayOneCompletesCombining) {
  const auto out = decide_slot({TcState::SR1, 1.0}, draws(0.5, 0, 0, 0, 2.5, 0), 12, 0, kParams);
  EXPECT_EQ(out.transmitter, Transmitter::R1);
  EXPECT_TRUE(out.delivered);
  EXPECT_EQ(out.spend_r1, 10.0);
  EXPECT_EQ(out.spend_r2, 0.0);
  EXPECT_EQ(out.next.tc, TcState::S);
  EXPECT_DOUBLE_EQ(*out.delivered_snr, 3.5);
}

TEST(Protocol, DepletedRelayTwoStaysSilent) {
  const auto out = decide_slot({TcState::SR2, 2.0}, draws(0.1, 0, 0, 0, 0, 0.2), 0, 5, kParams);
  EXPECT_EQ(out.transmitter, Transmitter::Silent);
  EXPECT_EQ(out.next.tc, TcState::SR2);
  EXPECT_EQ(out.next.gamma_overall, 2.0);
}

TEST(Protocol, SourceForwardsToRelayTwoAndDestinationCombines) {
  const auto out = decide_slot({TcState::SR1, 1.0}, draws(0.5, 0, 3.2, 0, 0.3, 0), 12, 0, kParams);
  EXPECT_EQ(out.transmitter, Transmitter::S);
  EXPECT_EQ(out.row, ProtocolRow::SR1_SToR2_R1Charged);
  EXPECT_EQ(out.next.tc, TcState::SR1R2_1);
  EXPECT_DOUBLE_EQ(out.next.gamma_overall, 1.5);
  EXPECT_EQ(out.spend_r1, 0.0);
}

TEST(Protocol, ThresholdIsInclusive) {
  EXPECT_TRUE(decide_slot({TcState::S, 0.0}, draws(3.0, 0, 0, 0, 0, 0), 0, 0, kParams).delivered);
  EXPECT_TRUE(decide_slot({TcState::SR2, 1.0}, draws(0, 0, 0, 0, 0, 2.0), 0, 8.0, kParams).delivered);
}

TEST(Protocol, NonZeroCombinedSnrInSourceStateRejected) {
  EXPECT_THROW(decide_slot({TcState::S, 0.5}, draws(0, 0, 0, 0, 0, 0), 0, 0, kParams), ContractError);
  EXPECT_THROW(decide_slot({TcState::SR1, 3.0}, draws(0, 0, 0, 0, 0, 0), 0, 0, kParams), ContractError);
}

TEST(Protocol, ExhaustiveGrid) {
  std::size_t cases = 0;
  for (TcState state : kAllTcStates) {
    for (unsigned bits = 0; bits < grid::kPatterns; ++bits) {
      const auto bad = grid::check_case(state, bits);
      std::string why;
      for (const auto& b : bad) why += b + "; ";
      EXPECT_TRUE(bad.empty()) << name(state) << " pattern " << bits << ": " << why;
      ++cases;
    }
  }
  EXPECT_EQ(cases, 6u * 256u);
}
