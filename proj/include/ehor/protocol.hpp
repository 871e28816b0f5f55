#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

#include "ehor/errors.hpp"
#include "ehor/scenario.hpp"

namespace ehor {

/// Transmitter-candidate set: which nodes hold the in-flight packet.
/// The three S,R1,R2 variants record how R2 obtained it:
///   SR1R2_1  S -> R2 while {S,R1} held it (D also heard S),
///   SR1R2_2  R1 -> R2 (D also heard R1),
///   SR1R2_3  S -> R1,R2 in one broadcast from {S}.
enum class TcState : std::size_t { S = 0, SR1, SR2, SR1R2_1, SR1R2_2, SR1R2_3 };

inline constexpr std::size_t kTcStates = 6;
inline constexpr std::array<TcState, kTcStates> kAllTcStates{TcState::S,       TcState::SR1,     TcState::SR2,
                                                             TcState::SR1R2_1, TcState::SR1R2_2, TcState::SR1R2_3};

inline constexpr std::size_t index(TcState s) { return static_cast<std::size_t>(s); }

inline constexpr bool holds_r1_and_r2(TcState s) {
  return s == TcState::SR1R2_1 || s == TcState::SR1R2_2 || s == TcState::SR1R2_3;
}

inline constexpr std::string_view name(TcState s) {
  constexpr std::array<std::string_view, kTcStates> names{"S", "SR1", "SR2", "SR1R2_1", "SR1R2_2", "SR1R2_3"};
  return names[index(s)];
}

enum class Transmitter { S, R1, R2, Silent };

/// One row of the protocol table per (state, action).
enum class ProtocolRow {
  S_ToD,
  S_ToR1R2,
  S_ToR2,
  S_ToR1,
  S_Silent,
  SR1_SToD,
  SR1_R1ToD,
  SR1_SToR2_R1Charged,
  SR1_SToR2_R1Depleted,
  SR1_R1ToR2,
  SR1_Silent,
  SR2_SToD,
  SR2_R2ToD,
  SR2_Silent,
  Trio_SToD,
  Trio_R2ToD,
  Trio_R1ToD,
  Trio_Silent,
};

/// This slot's link SNRs (linear).
struct SlotDraws {
  double gamma_sd = 0.0;
  double gamma_sr1 = 0.0;
  double gamma_sr2 = 0.0;
  double gamma_r1r2 = 0.0;
  double gamma_r1d = 0.0;
  double gamma_r2d = 0.0;
};

struct NetState {
  TcState tc = TcState::S;
  double gamma_overall = 0.0;  // SNR of the in-flight packet already combined at D
};

struct ProtocolParams {
  double gamma_th = 3.0;
  double m_r1 = 1.0;
  double m_r2 = 1.0;

  ProtocolParams() = default;
  ProtocolParams(double th, double m1, double m2) : gamma_th(th), m_r1(m1), m_r2(m2) {}
  ProtocolParams(const DerivedRates& rates, const EnergyParams& energy)
      : gamma_th(rates.gamma_th), m_r1(energy.m_r1), m_r2(energy.m_r2) {}
};

struct SlotOutcome {
  ProtocolRow row = ProtocolRow::S_Silent;
  Transmitter transmitter = Transmitter::Silent;
  bool delivered = false;
  double spend_r1 = 0.0;
  double spend_r2 = 0.0;
  NetState next;
  std::optional<double> delivered_snr;  // combined SNR at D when delivered
};

inline double residual_threshold(double gamma_th, double gamma_overall) {
  if (!(gamma_overall >= 0.0) || !(gamma_overall < gamma_th)) {
    throw ContractError("residual_threshold: gamma_overall must lie in [0, gamma_th)");
  }
  return gamma_th - gamma_overall;
}

/// Runs one slot of the opportunistic routing protocol. Priority among nodes
/// holding the packet is S, then R2, then R1; a relay transmits only if its
/// primary buffer holds at least its per-transmission cost. D combines every
/// broadcast of the packet it hears (MRC), so a broadcast that moves the
/// packet to a relay also adds its S->D or R1->D SNR to gamma_overall.
inline SlotOutcome decide_slot(const NetState& state, const SlotDraws& g, double b1, double b2,
                               const ProtocolParams& p) {
  const double th = p.gamma_th;
  const double acc = state.gamma_overall;
  if (state.tc == TcState::S) {
    if (acc != 0.0) throw ContractError("decide_slot: gamma_overall must be 0 in state S");
  } else {
    (void)residual_threshold(th, acc);
  }
  const bool r1_charged = b1 >= p.m_r1;
  const bool r2_charged = b2 >= p.m_r2;

  SlotOutcome out;
  const auto deliver = [&](ProtocolRow row, Transmitter tx, double link_snr) {
    out.row = row;
    out.transmitter = tx;
    out.delivered = true;
    out.next = {TcState::S, 0.0};
    out.delivered_snr = acc + link_snr;
    if (tx == Transmitter::R1) out.spend_r1 = p.m_r1;
    if (tx == Transmitter::R2) out.spend_r2 = p.m_r2;
    return out;
  };
  const auto forward = [&](ProtocolRow row, Transmitter tx, TcState next, double heard_at_d) {
    out.row = row;
    out.transmitter = tx;
    out.next = {next, acc + heard_at_d};
    if (tx == Transmitter::R1) out.spend_r1 = p.m_r1;
    return out;
  };
  const auto silent = [&](ProtocolRow row) {
    out.row = row;
    out.transmitter = Transmitter::Silent;
    out.next = state;
    return out;
  };

  const bool sd_ok = acc + g.gamma_sd >= th;
  switch (state.tc) {
    case TcState::S: {
      const bool r1_ok = g.gamma_sr1 >= th;
      const bool r2_ok = g.gamma_sr2 >= th;
      if (sd_ok) return deliver(ProtocolRow::S_ToD, Transmitter::S, g.gamma_sd);
      if (r1_ok && r2_ok) return forward(ProtocolRow::S_ToR1R2, Transmitter::S, TcState::SR1R2_3, g.gamma_sd);
      if (r2_ok) return forward(ProtocolRow::S_ToR2, Transmitter::S, TcState::SR2, g.gamma_sd);
      if (r1_ok) return forward(ProtocolRow::S_ToR1, Transmitter::S, TcState::SR1, g.gamma_sd);
      return silent(ProtocolRow::S_Silent);
    }
    case TcState::SR1: {
      const bool r1d_ok = acc + g.gamma_r1d >= th;
      const bool sr2_ok = g.gamma_sr2 >= th;
      if (sd_ok) return deliver(ProtocolRow::SR1_SToD, Transmitter::S, g.gamma_sd);
      if (r1_charged && r1d_ok) return deliver(ProtocolRow::SR1_R1ToD, Transmitter::R1, g.gamma_r1d);
      if (sr2_ok) {
        return forward(r1_charged ? ProtocolRow::SR1_SToR2_R1Charged : ProtocolRow::SR1_SToR2_R1Depleted,
                       Transmitter::S, TcState::SR1R2_1, g.gamma_sd);
      }
      if (r1_charged && g.gamma_r1r2 >= th) {
        return forward(ProtocolRow::SR1_R1ToR2, Transmitter::R1, TcState::SR1R2_2, g.gamma_r1d);
      }
      return silent(ProtocolRow::SR1_Silent);
    }
    case TcState::SR2: {
      if (sd_ok) return deliver(ProtocolRow::SR2_SToD, Transmitter::S, g.gamma_sd);
      if (r2_charged && acc + g.gamma_r2d >= th) return deliver(ProtocolRow::SR2_R2ToD, Transmitter::R2, g.gamma_r2d);
      return silent(ProtocolRow::SR2_Silent);
    }
    case TcState::SR1R2_1:
    case TcState::SR1R2_2:
    case TcState::SR1R2_3: {
      if (sd_ok) return deliver(ProtocolRow::Trio_SToD, Transmitter::S, g.gamma_sd);
      if (r2_charged && acc + g.gamma_r2d >= th) return deliver(ProtocolRow::Trio_R2ToD, Transmitter::R2, g.gamma_r2d);
      if (r1_charged && acc + g.gamma_r1d >= th) return deliver(ProtocolRow::Trio_R1ToD, Transmitter::R1, g.gamma_r1d);
      return silent(ProtocolRow::Trio_Silent);
    }
  }
  throw ContractError("decide_slot: unknown state");
}

}  // namespace ehor
