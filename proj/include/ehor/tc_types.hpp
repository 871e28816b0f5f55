#pragma once

#include <array>
#include <cstddef>

#include "ehor/protocol.hpp"

namespace ehor {

/// Occupancy probabilities of the six transmitter-candidate states.
struct TcDist {
  std::array<double, kTcStates> p{};

  double operator[](TcState s) const { return p[index(s)]; }
  double& operator[](TcState s) { return p[index(s)]; }

  double p_s() const { return p[0]; }
  double p_sr1() const { return p[1]; }
  double p_sr2() const { return p[2]; }
  double p_trio() const { return p[3] + p[4] + p[5]; }

  static TcDist uniform() {
    TcDist d;
    d.p.fill(1.0 / static_cast<double>(kTcStates));
    return d;
  }
};

/// Probabilities that D still misses the threshold after combining one more
/// reception, per candidate state and transmitter:
///   c: ov1 + SD, d: ov1 + R1D, m: ov2 + SD, n: ov2 + R2D,
///   f: ov3 + R2D, g: ov3 + R1D, o: ov3 + SD.
struct ScalarSet {
  double c = 0.0, d = 0.0, f = 0.0, g = 0.0, m = 0.0, n = 0.0, o = 0.0;
};

}  // namespace ehor
