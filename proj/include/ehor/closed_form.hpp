#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ehor/errors.hpp"
#include "ehor/fading.hpp"
#include "ehor/scenario.hpp"
#include "ehor/tc_types.hpp"

namespace ehor {

/// Principal branch of the Lambert W function (w >= -1, w e^w = x), by Halley
/// iteration. Throws ContractError for x < -1/e.
inline double lambert_w0(double x) {
  constexpr double kInvE = 0.36787944117144233;  // 1/e
  if (std::isnan(x)) throw ContractError("lambert_w0: NaN argument");
  if (x < -kInvE) {
    // Allow a couple of ulps of slack so that -exp(-1) computed elsewhere is accepted.
    if (x < -kInvE * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) {
      throw ContractError("lambert_w0: argument below -1/e");
    }
    return -1.0;
  }
  if (x == 0.0) return 0.0;
  if (x == -kInvE) return -1.0;

  double w;
  if (x < -0.25) {
    // branch-point series in p = sqrt(2(e x + 1))
    const double p = std::sqrt(std::max(0.0, 2.0 * (std::exp(1.0) * x + 1.0)));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else if (x < std::exp(1.0)) {
    w = x / (1.0 + x);
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 <= 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (w < -1.0) w = -1.0;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(w))) break;
  }
  return w;
}

/// Stationary law of an infinite harvest-store-use buffer that spends m with
/// probability b per slot while holding at least m and harvests Exp(lambda).
/// psi = b*lambda*m; a limiting density exists iff psi > 1, and then the decay
/// constant q < 0 solves b*lambda*e^{q m} = b*lambda + q.
struct BufferLaw {
  double b = 0.0;
  double lambda = 0.0;
  double m = 0.0;
  double psi = 0.0;
  double q = std::numeric_limits<double>::quiet_NaN();
  double k = std::numeric_limits<double>::quiet_NaN();  // tail coefficient, density k e^{qx} for x >= m

  bool stationary() const { return psi > 1.0 && q < 0.0; }
};

inline BufferLaw solve_decay(double b, double lambda, double m) {
  if (!(b >= 0.0 && b <= 1.0) || !(lambda > 0.0) || !(m > 0.0)) {
    throw ContractError("solve_decay: need b in [0,1], lambda > 0, m > 0");
  }
  BufferLaw law;
  law.b = b;
  law.lambda = lambda;
  law.m = m;
  law.psi = b * lambda * m;
  if (!(law.psi > 1.0)) return law;

  const double psi = law.psi;
  const double w = lambert_w0(-psi * std::exp(-psi));
  // u = -q m solves psi (1 - e^{-u}) = u on (0, psi). Polish the Lambert-W
  // value with bracketed Newton steps; this matters only near psi = 1 where
  // W is ill-conditioned.
  double u = w + psi;
  double lo = 0.0, hi = psi;
  for (int it = 0; it < 60; ++it) {
    const double f = -psi * std::expm1(-u) - u;
    if (f > 0.0) lo = u; else hi = u;
    const double fp = psi * std::exp(-u) - 1.0;
    double next = (fp != 0.0) ? u - f / fp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = next - u;
    u = next;
    if (std::abs(step) <= 2.0 * std::numeric_limits<double>::epsilon() * u) break;
  }
  if (!(u > 0.0)) return law;
  law.q = -u / m;
  // b*lambda + q equals b*lambda*e^{qm}, which is tiny for large psi; use the
  // product form rather than the cancelling sum.
  law.k = -law.q / (m * b * lambda) * std::exp(u);
  return law;
}

inline double limiting_pdf(const BufferLaw& law, double x) {
  if (!law.stationary()) throw ContractError("limiting_pdf: buffer law has no stationary density");
  if (x < 0.0) return 0.0;
  if (x < law.m) return -std::expm1(law.q * x) / law.m;
  return -law.q / law.psi * std::exp(law.q * (x - law.m));
}

// CDF of the limiting density.
inline double limiting_cdf(const BufferLaw& law, double x) {
  if (!law.stationary()) throw ContractError("limiting_cdf: buffer law has no stationary density");
  if (x <= 0.0) return 0.0;
  const auto below = [&](double t) { return (t - std::expm1(law.q * t) / law.q) / law.m; };
  if (x < law.m) return below(x);
  return below(law.m) - std::expm1(law.q * (x - law.m)) / law.psi;
}

/// Pr{B >= m}. Equals 1/psi in the stationary regime; without a stationary
/// law the buffer eventually stays charged, so 1.
inline double prob_at_least_m(const BufferLaw& law) { return law.stationary() ? 1.0 / law.psi : 1.0; }

inline double outage_probability(const TcDist& tc, const ScalarSet& s, double pu1, double pu2,
                                 const DerivedRates& rates) {
  const double direct_miss = below_prob(rates.w_sd, rates.gamma_th);
  return tc.p_s() * direct_miss + tc.p_sr1() * s.c * (s.d * pu1 + 1.0 - pu1) +
         tc.p_sr2() * s.m * (s.n * pu2 + 1.0 - pu2) +
         tc.p_trio() * s.o * (s.f * pu2 + 1.0 - pu2) * (s.g * pu1 + 1.0 - pu1);
}

/// Mass of the limiting density in `n` bins of `width` starting at 0, plus a
/// final overflow entry holding everything at or above n*width.
inline std::vector<double> limiting_bin_masses(const BufferLaw& law, double width, std::size_t n) {
  std::vector<double> out(n + 1);
  double prev = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double cur = limiting_cdf(law, width * static_cast<double>(j + 1));
    out[j] = cur - prev;
    prev = cur;
  }
  out[n] = 1.0 - prev;
  return out;
}

inline double throughput(double op, double r0) { return (1.0 - op) * r0; }

/// Expected slots per delivered packet.
inline double timeslot_cost(double op) {
  if (!(op >= 0.0 && op < 1.0)) throw ContractError("timeslot_cost: outage probability must lie in [0,1)");
  return 1.0 / (1.0 - op);
}

}  // namespace ehor
