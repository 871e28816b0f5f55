#pragma once

#include <cmath>

#include "ehor/errors.hpp"

namespace ehor {

/// Harvest-store-use buffers of one relay (mJ, unbounded). Harvest lands in
/// the secondary buffer during a slot and moves to the primary buffer at the
/// end of it, so a slot's harvest never pays for that slot's transmission.
struct RelayBuffer {
  double peb = 0.0;
  double seb = 0.0;
};

inline double sample_harvest(double lambda, double draw) { return -std::log(draw) / lambda; }

inline RelayBuffer commit_slot(const RelayBuffer& buf, double spend, double harvest) {
  if (!(spend >= 0.0) || spend > buf.peb) {
    throw ContractError("commit_slot: spend exceeds primary buffer balance");
  }
  if (!(harvest >= 0.0)) throw ContractError("commit_slot: negative harvest");
  RelayBuffer during{buf.peb - spend, buf.seb + harvest};
  return {during.peb + during.seb, 0.0};
}

}  // namespace ehor
