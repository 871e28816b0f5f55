#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ehor/closed_form.hpp"
#include "ehor/errors.hpp"
#include "ehor/fading.hpp"
#include "ehor/scenario.hpp"
#include "ehor/tc_types.hpp"

namespace ehor {

/// Dense row-major state transition matrix.
class Stm {
 public:
  Stm() = default;
  explicit Stm(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }

  double row_sum(std::size_t i) const {
    double s = 0.0;
    for (double v : row(i)) s += v;
    return s;
  }

  // Largest |row sum - 1| seen before renormalization.
  double pre_normalization_deviation() const { return pre_norm_dev_; }

  // Rescales every row to sum 1, remembering the largest correction.
  void renormalize_rows() {
    pre_norm_dev_ = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double s = row_sum(i);
      pre_norm_dev_ = std::max(pre_norm_dev_, std::abs(s - 1.0));
      if (s > 0.0) {
        for (std::size_t j = 0; j < n_; ++j) (*this)(i, j) /= s;
      }
    }
  }

  // p * T
  std::vector<double> left_multiply(std::span<const double> p) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const double pi = p[i];
      if (pi == 0.0) continue;
      const double* r = a_.data() + i * n_;
      for (std::size_t j = 0; j < n_; ++j) out[j] += pi * r[j];
    }
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
  double pre_norm_dev_ = 0.0;
};

inline constexpr double kStationaryTol = 1e-7;
inline constexpr std::size_t kInnerIterationCap = 100000;
inline constexpr std::size_t kTcIterationCap = 100000;
inline constexpr std::size_t kOuterIterationCap = 500;
inline constexpr double kPuDamping = 0.5;
inline constexpr double kMaxRowDeviation = 1e-2;

struct StationaryResult {
  std::vector<double> p;
  std::size_t iterations = 0;
  bool aborted = false;  // a non-admissible iterate appeared; p is the last admissible one
};

/// Power iteration p <- p T from `init`. Stops at the first iterate whose
/// one-step change is below `tol` in the L2 norm and returns that iterate,
/// so ||p T - p||_2 < tol holds for the result.
inline StationaryResult stationary(const Stm& stm, std::vector<double> init, double tol = kStationaryTol,
                                   std::size_t max_iter = kInnerIterationCap, const std::string& loop = "stationary") {
  if (init.size() != stm.size()) throw ContractError("stationary: init size does not match matrix");
  for (std::size_t i = 0; i < stm.size(); ++i) {
    for (double v : stm.row(i)) {
      if (!(v >= 0.0)) return {std::move(init), 0, true};
    }
  }
  StationaryResult res{std::move(init), 0, false};
  double change = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::vector<double> next = stm.left_multiply(res.p);
    double sq = 0.0;
    bool admissible = true;
    for (std::size_t j = 0; j < next.size(); ++j) {
      if (!(next[j] >= 0.0) || !std::isfinite(next[j])) admissible = false;
      const double dlt = next[j] - res.p[j];
      sq += dlt * dlt;
    }
    if (!admissible) {
      res.aborted = true;
      return res;
    }
    change = std::sqrt(sq);
    if (change < tol) return res;
    res.p = std::move(next);
    res.iterations = it + 1;
  }
  throw ConvergenceError(loop, change);
}

enum class OverallChain { SR1 = 1, SR2 = 2, Trio = 3 };

/// Transition matrix of the SNR already combined at D (binned on [0, gamma_th))
/// over the slots spent in one family of candidate states. Row i stays put
/// with the probability that every allowed transmitter misses the residual
/// (bin i taken at its upper edge); otherwise the packet leaves and the next
/// visit starts from the entry distribution of that family.
///
/// `overall1` is required for OverallChain::Trio: entries via S -> R2 from
/// {S,R1} start at ov1 + SD, entries via R1 -> R2 at ov1 + R1D.
inline Stm build_overall_chain(OverallChain variant, const DerivedRates& rates, std::size_t n_bins, double pu1,
                               double pu2, const TcDist& tc = TcDist::uniform(), const BinPdf* overall1 = nullptr) {
  if (n_bins == 0) throw ContractError("build_overall_chain: n_bins must be positive");
  if (!(pu1 >= 0.0 && pu1 <= 1.0) || !(pu2 >= 0.0 && pu2 <= 1.0)) {
    throw ContractError("build_overall_chain: pu1, pu2 must lie in [0,1]");
  }
  const double th = rates.gamma_th;
  const BinPdf p_sd = link_bin_pdf(rates.w_sd, n_bins, th);
  const BinPdf sd_entry = p_sd.normalized();

  std::vector<double> entry(n_bins);
  if (variant == OverallChain::Trio) {
    if (overall1 == nullptr || overall1->size() != n_bins) {
      throw ContractError("build_overall_chain: trio chain needs overall1 with matching bins");
    }
    const BinPdf via_s = convolve_truncated(*overall1, p_sd).normalized();
    const BinPdf via_r1 = convolve_truncated(*overall1, link_bin_pdf(rates.w_r1d, n_bins, th)).normalized();
    const double p1 = tc[TcState::SR1R2_1], p2 = tc[TcState::SR1R2_2], p3 = tc[TcState::SR1R2_3];
    const double trio = p1 + p2 + p3;
    for (std::size_t j = 0; j < n_bins; ++j) {
      entry[j] = trio > 0.0 ? (p3 * sd_entry[j] + p1 * via_s[j] + p2 * via_r1[j]) / trio : sd_entry[j];
    }
  } else {
    entry = sd_entry.mass;
  }

  const double sr2_miss = below_prob(rates.w_sr2, th);
  const double r1r2_miss = below_prob(rates.w_r1r2, th);
  Stm t(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    const double residual = th * static_cast<double>(n_bins - 1 - i) / static_cast<double>(n_bins);
    const double sd_miss = below_prob(rates.w_sd, residual);
    const double r1d_miss = below_prob(rates.w_r1d, residual);
    const double r2d_miss = below_prob(rates.w_r2d, residual);
    double stay = 0.0;
    switch (variant) {
      case OverallChain::SR1:
        stay = sd_miss * (pu1 * r1d_miss * sr2_miss * r1r2_miss + (1.0 - pu1) * sr2_miss);
        break;
      case OverallChain::SR2:
        stay = sd_miss * (pu2 * r2d_miss + (1.0 - pu2));
        break;
      case OverallChain::Trio:
        stay = sd_miss * (pu2 * r2d_miss + (1.0 - pu2)) * (pu1 * r1d_miss + (1.0 - pu1));
        break;
    }
    for (std::size_t j = 0; j < n_bins; ++j) {
      t(i, j) = (1.0 - stay) * entry[j] + (i == j ? stay : 0.0);
      if (t(i, j) < 0.0) throw ContractError("build_overall_chain: negative transition probability");
    }
  }
  t.renormalize_rows();
  if (t.pre_normalization_deviation() >= kMaxRowDeviation) {
    throw ContractError("build_overall_chain: row sums deviate from 1 before renormalization");
  }
  return t;
}

/// Each scalar is the mass of (combined SNR pdf) * (link pdf) that stays below
/// gamma_th, i.e. the probability the next reception still leaves D short.
inline ScalarSet derive_scalars(const BinPdf& overall1, const BinPdf& overall2, const BinPdf& overall3,
                                const BinPdf& p_sd, const BinPdf& p_r1d, const BinPdf& p_r2d) {
  const std::size_t n = overall1.size();
  for (const BinPdf* pdf : {&overall2, &overall3, &p_sd, &p_r1d, &p_r2d}) {
    if (pdf->size() != n) throw ContractError("derive_scalars: bin count mismatch");
  }
  const auto miss = [](const BinPdf& a, const BinPdf& b) { return std::clamp(convolve_truncated(a, b).total(), 0.0, 1.0); };
  ScalarSet s;
  s.c = miss(overall1, p_sd);
  s.d = miss(overall1, p_r1d);
  s.m = miss(overall2, p_sd);
  s.n = miss(overall2, p_r2d);
  s.f = miss(overall3, p_r2d);
  s.g = miss(overall3, p_r1d);
  s.o = miss(overall3, p_sd);
  return s;
}

/// 6x6 transition matrix over candidate states, rows/cols ordered as TcState.
inline Stm build_tc_stm(const DerivedRates& rates, const ScalarSet& s, double pu1, double pu2) {
  const double th = rates.gamma_th;
  const double e_sd = exceed_prob(rates.w_sd, th);
  const double e_sr1 = exceed_prob(rates.w_sr1, th);
  const double e_sr2 = exceed_prob(rates.w_sr2, th);
  const double e_r1r2 = exceed_prob(rates.w_r1r2, th);
  const double sd_miss = below_prob(rates.w_sd, th);
  const double sr1_miss = below_prob(rates.w_sr1, th);
  const double sr2_miss = below_prob(rates.w_sr2, th);

  Stm t(kTcStates);
  const auto at = [&](TcState from, TcState to) -> double& { return t(index(from), index(to)); };
  using enum TcState;

  at(S, S) = sd_miss * sr2_miss * sr1_miss + e_sd;
  at(S, SR1) = sd_miss * sr2_miss * e_sr1;
  at(S, SR2) = sd_miss * sr1_miss * e_sr2;
  at(S, SR1R2_3) = sd_miss * e_sr1 * e_sr2;

  at(SR1, S) = (1.0 - s.c) + s.c * pu1 * (1.0 - s.d);
  at(SR1, SR1R2_1) = s.c * e_sr2 * (pu1 * s.d + (1.0 - pu1));
  at(SR1, SR1R2_2) = s.c * pu1 * s.d * sr2_miss * e_r1r2;
  at(SR1, SR1) = 1.0 - at(SR1, S) - at(SR1, SR1R2_1) - at(SR1, SR1R2_2);

  at(SR2, S) = (1.0 - s.m) + pu2 * s.m * (1.0 - s.n);
  at(SR2, SR2) = 1.0 - at(SR2, S);

  const double trio_leave = (1.0 - s.o) + s.o * (pu2 * (1.0 - s.f) + (pu2 * s.f + (1.0 - pu2)) * pu1 * (1.0 - s.g));
  for (TcState k : {SR1R2_1, SR1R2_2, SR1R2_3}) {
    at(k, S) = trio_leave;
    at(k, k) = 1.0 - trio_leave;
  }

  constexpr double kSlack = 1e-12;
  for (std::size_t i = 0; i < kTcStates; ++i) {
    for (std::size_t j = 0; j < kTcStates; ++j) {
      double& v = t(i, j);
      if (!(v >= -kSlack && v <= 1.0 + kSlack)) {
        throw ContractError("build_tc_stm: entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside [0,1]");
      }
      v = std::clamp(v, 0.0, 1.0);
    }
  }
  t.renormalize_rows();
  return t;
}

/// Per-slot probability that R1 spends energy given it holds at least M_R1.
inline double spend_factor_r1(const TcDist& tc, const ScalarSet& s, double pu2, const DerivedRates& rates) {
  const double th = rates.gamma_th;
  const double sr2_miss = below_prob(rates.w_sr2, th);
  const double e_r1r2 = exceed_prob(rates.w_r1r2, th);
  return tc.p_sr1() * s.c * ((1.0 - s.d) + s.d * sr2_miss * e_r1r2) +
         pu2 * tc.p_trio() * s.o * s.f * (1.0 - s.g) + (1.0 - pu2) * tc.p_trio() * s.o * (1.0 - s.g);
}

/// Per-slot probability that R2 spends energy given it holds at least M_R2.
inline double spend_factor_r2(const TcDist& tc, const ScalarSet& s) {
  return tc.p_sr2() * s.m * (1.0 - s.n) + tc.p_trio() * s.o * (1.0 - s.f);
}

struct FixedPointResult {
  TcDist tc;
  BinPdf overall1, overall2, overall3;
  ScalarSet scalars;
  double pu1 = 0.5, pu2 = 0.5;
  double b1 = 0.0, b2 = 0.0;
  BufferLaw law1, law2;
  std::size_t iterations = 0;
  Stm t, t1, t2, t3;
};

namespace detail {

inline BinPdf stationary_pdf(const Stm& t, double width, const std::string& loop) {
  const std::size_t n = t.size();
  StationaryResult r = stationary(t, std::vector<double>(n, 1.0 / static_cast<double>(n)), kStationaryTol,
                                  kInnerIterationCap, loop);
  return {std::move(r.p), width};
}

inline double l2_distance(std::span<const double> a, std::span<const double> b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

}  // namespace detail

/// Nested fixed point for the candidate-state distribution, the three
/// combined-SNR pdfs and the miss scalars, closed by an outer damped
/// iteration on PU_k = Pr{B_k >= M_k} = min(1, 1/(b_k lambda_k M_k)).
inline FixedPointResult solve_fixed_point(const DerivedRates& rates, const EnergyParams& energy, std::size_t n_bins) {
  if (n_bins == 0) throw ContractError("solve_fixed_point: n_bins must be positive");
  const double th = rates.gamma_th;
  const double width = th / static_cast<double>(n_bins);
  const BinPdf p_sd = link_bin_pdf(rates.w_sd, n_bins, th);
  const BinPdf p_r1d = link_bin_pdf(rates.w_r1d, n_bins, th);
  const BinPdf p_r2d = link_bin_pdf(rates.w_r2d, n_bins, th);
  const double lambda1 = energy.lambda1(), lambda2 = energy.lambda2();

  FixedPointResult fp;
  fp.tc = TcDist::uniform();
  double pu_change = 0.0;
  for (std::size_t outer = 1; outer <= kOuterIterationCap; ++outer) {
    fp.iterations = outer;
    fp.t1 = build_overall_chain(OverallChain::SR1, rates, n_bins, fp.pu1, fp.pu2);
    fp.overall1 = detail::stationary_pdf(fp.t1, width, "overall1 chain");
    fp.t2 = build_overall_chain(OverallChain::SR2, rates, n_bins, fp.pu1, fp.pu2);
    fp.overall2 = detail::stationary_pdf(fp.t2, width, "overall2 chain");

    double tc_change = 0.0;
    bool tc_converged = false;
    for (std::size_t pass = 0; pass < kTcIterationCap; ++pass) {
      fp.t3 = build_overall_chain(OverallChain::Trio, rates, n_bins, fp.pu1, fp.pu2, fp.tc, &fp.overall1);
      fp.overall3 = detail::stationary_pdf(fp.t3, width, "overall3 chain");
      fp.scalars = derive_scalars(fp.overall1, fp.overall2, fp.overall3, p_sd, p_r1d, p_r2d);
      fp.t = build_tc_stm(rates, fp.scalars, fp.pu1, fp.pu2);
      StationaryResult r = stationary(fp.t, {fp.tc.p.begin(), fp.tc.p.end()}, kStationaryTol, kTcIterationCap,
                                      "transmitter-candidate chain");
      TcDist next;
      double total = 0.0;
      for (double v : r.p) total += v;
      for (std::size_t i = 0; i < kTcStates; ++i) next.p[i] = r.p[i] / total;
      tc_change = detail::l2_distance(next.p, fp.tc.p);
      fp.tc = next;
      if (tc_change < kStationaryTol) {
        tc_converged = true;
        break;
      }
    }
    if (!tc_converged) throw ConvergenceError("transmitter-candidate loop", tc_change);

    fp.b1 = std::clamp(spend_factor_r1(fp.tc, fp.scalars, fp.pu2, rates), 0.0, 1.0);
    fp.b2 = std::clamp(spend_factor_r2(fp.tc, fp.scalars), 0.0, 1.0);
    fp.law1 = solve_decay(fp.b1, lambda1, energy.m_r1);
    fp.law2 = solve_decay(fp.b2, lambda2, energy.m_r2);
    const double target1 = prob_at_least_m(fp.law1);
    const double target2 = prob_at_least_m(fp.law2);
    pu_change = std::max(std::abs(target1 - fp.pu1), std::abs(target2 - fp.pu2));
    if (pu_change < kStationaryTol) return fp;
    fp.pu1 = (1.0 - kPuDamping) * fp.pu1 + kPuDamping * target1;
    fp.pu2 = (1.0 - kPuDamping) * fp.pu2 + kPuDamping * target2;
  }
  throw ConvergenceError("outer PU fixed point", pu_change);
}

}  // namespace ehor
