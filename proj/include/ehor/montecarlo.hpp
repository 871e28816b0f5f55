#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ehor/energy.hpp"
#include "ehor/errors.hpp"
#include "ehor/fading.hpp"
#include "ehor/protocol.hpp"
#include "ehor/rng.hpp"
#include "ehor/scenario.hpp"

namespace ehor {

enum class SimMode { Mrc, NonMrc };

inline constexpr std::size_t kDefaultWarmup = 10000;
inline constexpr std::size_t kOpBatches = 100;

struct SimConfig {
  std::uint64_t slots = 1000000;  // total, warmup included
  std::uint64_t warmup = kDefaultWarmup;
  std::uint64_t seed = 1;
  SimMode mode = SimMode::Mrc;
  std::size_t overall_bins = kDefaultBins;   // bins on [0, gamma_th) for the combined-SNR histograms
  std::size_t energy_bins_per_m = 50;        // buffer histogram resolution
  std::size_t energy_range_m = 5;            // buffer histogram covers [0, range*M), plus overflow
};

// Streaming mean/variance.
struct RunningStats {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

/// Counts gathered over the post-warmup slots of one run.
struct SimStats {
  std::uint64_t slot_count = 0;  // total slots simulated
  std::uint64_t warmup = 0;
  std::uint64_t outage_slots = 0;
  std::uint64_t deliveries = 0;
  std::array<std::uint64_t, kTcStates> occupancy{};
  // Combined SNR at D at slot start: [0] over SR1 slots, [1] over SR2, [2] over the three S,R1,R2 states.
  std::array<std::vector<std::uint64_t>, 3> overall_hist;
  // Primary-buffer level at slot start; last entry is overflow.
  std::array<std::vector<std::uint64_t>, 2> buffer_hist;
  std::array<double, 2> buffer_bin_width{};
  std::array<std::uint64_t, 2> charged_slots{};  // slots with B_k >= M_k
  std::array<std::uint64_t, 2> relay_transmissions{};
  RunningStats slots_per_delivery;                // completed packets only
  std::vector<std::uint64_t> batch_outages;       // outage counts per equal batch, for standard errors
  std::uint64_t batch_len = 0;

  std::uint64_t measured() const { return slot_count - warmup; }

  double op() const { return measured() ? static_cast<double>(outage_slots) / static_cast<double>(measured()) : 0.0; }

  // Batch-means standard error of op().
  double op_std_error() const {
    if (batch_outages.size() < 2 || batch_len == 0) return 0.0;
    RunningStats rs;
    for (auto c : batch_outages) rs.add(static_cast<double>(c) / static_cast<double>(batch_len));
    return rs.std_error();
  }

  double occupancy_fraction(TcState s) const {
    return measured() ? static_cast<double>(occupancy[index(s)]) / static_cast<double>(measured()) : 0.0;
  }

  double charged_fraction(int relay) const {
    return measured() ? static_cast<double>(charged_slots[relay]) / static_cast<double>(measured()) : 0.0;
  }
};

inline SlotDraws draw_slot(Xoshiro256& rng, const DerivedRates& r) {
  SlotDraws g;
  g.gamma_sd = sample_link_snr(r.w_sd, rng.uniform());
  g.gamma_sr1 = sample_link_snr(r.w_sr1, rng.uniform());
  g.gamma_sr2 = sample_link_snr(r.w_sr2, rng.uniform());
  g.gamma_r1r2 = sample_link_snr(r.w_r1r2, rng.uniform());
  g.gamma_r1d = sample_link_snr(r.w_r1d, rng.uniform());
  g.gamma_r2d = sample_link_snr(r.w_r2d, rng.uniform());
  return g;
}

/// Slot-by-slot simulation. Per slot: draw the six link SNRs, decide the slot
/// with the protocol, then commit spends and this slot's harvests to both
/// relays. Non-MRC mode clears the combined SNR before every decision, so a
/// delivery needs a single reception at or above gamma_th.
inline SimStats run_simulation(const Scenario& sc, const SimConfig& cfg) {
  if (cfg.slots == 0 || cfg.warmup >= cfg.slots) throw ContractError("run_simulation: need 0 <= warmup < slots");
  if (cfg.overall_bins == 0 || cfg.energy_bins_per_m == 0 || cfg.energy_range_m == 0) {
    throw ContractError("run_simulation: histogram resolution must be positive");
  }
  const DerivedRates rates = derive_rates(sc);
  const ProtocolParams params(rates, sc.energy);
  const double lambda1 = sc.energy.lambda1(), lambda2 = sc.energy.lambda2();
  const std::array<double, 2> cost{sc.energy.m_r1, sc.energy.m_r2};

  SimStats st;
  st.slot_count = cfg.slots;
  st.warmup = cfg.warmup;
  for (auto& h : st.overall_hist) h.assign(cfg.overall_bins, 0);
  const std::size_t energy_bins = cfg.energy_bins_per_m * cfg.energy_range_m;
  for (int k = 0; k < 2; ++k) {
    st.buffer_hist[k].assign(energy_bins + 1, 0);
    st.buffer_bin_width[k] = cost[k] / static_cast<double>(cfg.energy_bins_per_m);
  }
  const std::uint64_t measured = cfg.slots - cfg.warmup;
  st.batch_len = measured >= kOpBatches ? measured / kOpBatches : 0;
  if (st.batch_len) st.batch_outages.assign(kOpBatches, 0);

  const double overall_width = rates.gamma_th / static_cast<double>(cfg.overall_bins);
  const auto overall_bin = [&](double v) {
    const auto j = static_cast<std::size_t>(v / overall_width);
    return j < cfg.overall_bins ? j : cfg.overall_bins - 1;
  };
  const auto energy_bin = [&](int k, double v) {
    const double j = v / st.buffer_bin_width[k];
    return j < static_cast<double>(energy_bins) ? static_cast<std::size_t>(j) : energy_bins;
  };

  Xoshiro256 rng(cfg.seed);
  NetState state;
  std::array<RelayBuffer, 2> buf{};
  std::uint64_t since_delivery = 0;
  bool packet_started_in_window = false;

  for (std::uint64_t slot = 0; slot < cfg.slots; ++slot) {
    const SlotDraws g = draw_slot(rng, rates);
    const double harvest1 = sample_harvest(lambda1, rng.uniform());
    const double harvest2 = sample_harvest(lambda2, rng.uniform());

    if (cfg.mode == SimMode::NonMrc) state.gamma_overall = 0.0;
    const bool record = slot >= cfg.warmup;
    if (record) {
      ++st.occupancy[index(state.tc)];
      switch (state.tc) {
        case TcState::S:
          break;
        case TcState::SR1:
          ++st.overall_hist[0][overall_bin(state.gamma_overall)];
          break;
        case TcState::SR2:
          ++st.overall_hist[1][overall_bin(state.gamma_overall)];
          break;
        default:
          ++st.overall_hist[2][overall_bin(state.gamma_overall)];
          break;
      }
      for (int k = 0; k < 2; ++k) {
        ++st.buffer_hist[k][energy_bin(k, buf[k].peb)];
        if (buf[k].peb >= cost[k]) ++st.charged_slots[k];
      }
    }

    const SlotOutcome out = decide_slot(state, g, buf[0].peb, buf[1].peb, params);
    buf[0] = commit_slot(buf[0], out.spend_r1, harvest1);
    buf[1] = commit_slot(buf[1], out.spend_r2, harvest2);
    state = out.next;

    if (record) {
      ++since_delivery;
      if (out.spend_r1 > 0.0) ++st.relay_transmissions[0];
      if (out.spend_r2 > 0.0) ++st.relay_transmissions[1];
      if (out.delivered) {
        ++st.deliveries;
        if (packet_started_in_window) st.slots_per_delivery.add(static_cast<double>(since_delivery));
        packet_started_in_window = true;
        since_delivery = 0;
      } else {
        ++st.outage_slots;
        if (st.batch_len) {
          const std::uint64_t b = (slot - cfg.warmup) / st.batch_len;
          if (b < kOpBatches) ++st.batch_outages[b];
        }
      }
    }
  }
  return st;
}

/// Normalizes histogram counts into a probability vector.
inline std::vector<double> empirical_pdf(std::span<const std::uint64_t> counts) {
  if (counts.empty()) throw ContractError("empirical_pdf: empty histogram");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total <= 0.0) throw ContractError("empirical_pdf: histogram holds no samples");
  std::vector<double> out(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) out[j] = static_cast<double>(counts[j]) / total;
  return out;
}

// Same, as a BinPdf over [0, gamma_th).
inline BinPdf empirical_pdf(std::span<const std::uint64_t> counts, double gamma_th) {
  return {empirical_pdf(counts), gamma_th / static_cast<double>(counts.size())};
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ContractError("total_variation: bin count mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) s += std::abs(p[j] - q[j]);
  return 0.5 * s;
}

inline double total_variation(const BinPdf& p, const BinPdf& q) { return total_variation(p.mass, q.mass); }

}  // namespace ehor
