#pragma once

// Exhaustive protocol grid shared by the unit and acceptance suites: every
// state x every pass/fail pattern of the six links x every charged/depleted
// pattern of the two relays. Each case is matched against a table of explicit
// firing conditions, one per row, written without any priority chain.

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "ehor/protocol.hpp"

namespace grid {

using namespace ehor;

struct Case {
  bool sd, sr1, sr2, r1r2, r1d, r2d, c1, c2;
};

struct Expect {
  TcState next;
  Transmitter tx;
  bool delivered;
};

struct Rule {
  std::vector<TcState> states;
  ProtocolRow row;
  std::function<bool(const Case&)> fires;
  std::function<Expect(TcState)> result;
};

inline const ProtocolParams kParams(3.0, 10.0, 8.0);

inline const std::vector<Rule>& table() {
  using enum TcState;
  static const auto to = [](TcState n, Transmitter tx) { return [=](TcState) { return Expect{n, tx, false}; }; };
  static const auto done = [](Transmitter tx) { return [=](TcState) { return Expect{S, tx, true}; }; };
  static const auto stay = [](TcState from) { return Expect{from, Transmitter::Silent, false}; };
  static const std::vector<TcState> trio{SR1R2_1, SR1R2_2, SR1R2_3};
  static const std::vector<Rule> rules{
      {{S}, ProtocolRow::S_ToD, [](const Case& c) { return c.sd; }, done(Transmitter::S)},
      {{S}, ProtocolRow::S_ToR1R2, [](const Case& c) { return !c.sd && c.sr1 && c.sr2; }, to(SR1R2_3, Transmitter::S)},
      {{S}, ProtocolRow::S_ToR2, [](const Case& c) { return !c.sd && !c.sr1 && c.sr2; }, to(SR2, Transmitter::S)},
      {{S}, ProtocolRow::S_ToR1, [](const Case& c) { return !c.sd && c.sr1 && !c.sr2; }, to(SR1, Transmitter::S)},
      {{S}, ProtocolRow::S_Silent, [](const Case& c) { return !c.sd && !c.sr1 && !c.sr2; }, stay},
      {{SR1}, ProtocolRow::SR1_SToD, [](const Case& c) { return c.sd; }, done(Transmitter::S)},
      {{SR1}, ProtocolRow::SR1_R1ToD, [](const Case& c) { return !c.sd && c.c1 && c.r1d; }, done(Transmitter::R1)},
      {{SR1}, ProtocolRow::SR1_SToR2_R1Charged, [](const Case& c) { return !c.sd && c.c1 && !c.r1d && c.sr2; },
       to(SR1R2_1, Transmitter::S)},
      {{SR1}, ProtocolRow::SR1_SToR2_R1Depleted, [](const Case& c) { return !c.sd && !c.c1 && c.sr2; },
       to(SR1R2_1, Transmitter::S)},
      {{SR1}, ProtocolRow::SR1_R1ToR2, [](const Case& c) { return !c.sd && c.c1 && !c.r1d && !c.sr2 && c.r1r2; },
       to(SR1R2_2, Transmitter::R1)},
      {{SR1}, ProtocolRow::SR1_Silent,
       [](const Case& c) { return !c.sd && !c.sr2 && (!c.c1 || (!c.r1d && !c.r1r2)); }, stay},
      {{SR2}, ProtocolRow::SR2_SToD, [](const Case& c) { return c.sd; }, done(Transmitter::S)},
      {{SR2}, ProtocolRow::SR2_R2ToD, [](const Case& c) { return !c.sd && c.c2 && c.r2d; }, done(Transmitter::R2)},
      {{SR2}, ProtocolRow::SR2_Silent, [](const Case& c) { return !c.sd && !(c.c2 && c.r2d); }, stay},
      {trio, ProtocolRow::Trio_SToD, [](const Case& c) { return c.sd; }, done(Transmitter::S)},
      {trio, ProtocolRow::Trio_R2ToD, [](const Case& c) { return !c.sd && c.c2 && c.r2d; }, done(Transmitter::R2)},
      {trio, ProtocolRow::Trio_R1ToD, [](const Case& c) { return !c.sd && !(c.c2 && c.r2d) && c.c1 && c.r1d; },
       done(Transmitter::R1)},
      {trio, ProtocolRow::Trio_Silent, [](const Case& c) { return !c.sd && !(c.c2 && c.r2d) && !(c.c1 && c.r1d); },
       stay},
  };
  return rules;
}

// Runs one grid case; returns a description of every violation (empty if clean).
inline std::vector<std::string> check_case(TcState state, unsigned bits) {
  using enum TcState;
  std::vector<std::string> bad;
  const auto bit = [&](int k) { return ((bits >> k) & 1u) != 0; };
  const Case c{bit(0), bit(1), bit(2), bit(3), bit(4), bit(5), bit(6), bit(7)};
  const double acc = state == S ? 0.0 : 1.0;
  const double residual = 3.0 - acc;
  const auto d_link = [&](bool ok) { return ok ? residual + 0.5 : 0.5 * residual; };
  const auto relay_link = [](bool ok) { return ok ? 4.0 : 1.0; };
  const SlotDraws g{d_link(c.sd),       relay_link(c.sr1), relay_link(c.sr2),
                    relay_link(c.r1r2), d_link(c.r1d),     d_link(c.r2d)};
  const double b1 = c.c1 ? 11.0 : 5.0, b2 = c.c2 ? 9.0 : 4.0;

  const Rule* match = nullptr;
  int fired = 0;
  for (const auto& rule : table()) {
    if (std::find(rule.states.begin(), rule.states.end(), state) == rule.states.end()) continue;
    if (rule.fires(c)) {
      ++fired;
      match = &rule;
    }
  }
  if (fired != 1) {
    bad.push_back(std::to_string(fired) + " table rows fire");
    return bad;
  }

  const SlotOutcome out = decide_slot({state, acc}, g, b1, b2, kParams);
  const Expect want = match->result(state);
  if (out.row != match->row) bad.emplace_back("wrong row");
  if (out.transmitter != want.tx) bad.emplace_back("wrong transmitter");
  if (out.delivered != want.delivered) bad.emplace_back("wrong delivery flag");
  if (out.next.tc != want.next) bad.emplace_back("wrong next state");

  // combined SNR resets exactly on delivery
  if (out.delivered) {
    if (out.next.gamma_overall != 0.0) bad.emplace_back("combined SNR not reset on delivery");
    if (!out.delivered_snr || *out.delivered_snr < 3.0) bad.emplace_back("delivered below threshold");
  } else {
    if (out.next.tc == S ? out.next.gamma_overall != 0.0
                         : !(out.next.gamma_overall > 0.0 && out.next.gamma_overall < 3.0)) {
      bad.emplace_back("combined SNR out of range");
    }
    if (out.delivered_snr) bad.emplace_back("delivered SNR set without delivery");
  }

  // spends only by the transmitter, only with balance
  if (out.spend_r1 != (out.transmitter == Transmitter::R1 ? 10.0 : 0.0)) bad.emplace_back("wrong R1 spend");
  if (out.spend_r2 != (out.transmitter == Transmitter::R2 ? 8.0 : 0.0)) bad.emplace_back("wrong R2 spend");
  if (out.spend_r1 > b1 || out.spend_r2 > b2) bad.emplace_back("spend above balance");
  return bad;
}

inline constexpr unsigned kPatterns = 256;

}  // namespace grid
