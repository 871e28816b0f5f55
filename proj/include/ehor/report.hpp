#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ehor/analysis.hpp"
#include "ehor/errors.hpp"
#include "ehor/montecarlo.hpp"
#include "ehor/scenario.hpp"

namespace ehor {

/// Source-power sweep, `start:stop:step` in dBm.
struct SweepSpec {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  std::vector<double> points() const {
    std::vector<double> out;
    const double slack = 1e-9 * step;
    for (std::size_t i = 0;; ++i) {
      const double v = start + static_cast<double>(i) * step;
      if (v > stop + slack) break;
      out.push_back(v);
    }
    return out;
  }
};

inline SweepSpec parse_sweep(std::string_view text) {
  SweepSpec s;
  double* fields[3] = {&s.start, &s.stop, &s.step};
  for (int k = 0; k < 3; ++k) {
    const auto colon = text.find(':');
    if ((k < 2) != (colon != std::string_view::npos)) {
      throw ScenarioError("sweep: expected start:stop:step, got '" + std::string(text) + "'");
    }
    const std::string_view part = detail::trim(text.substr(0, colon));
    *fields[k] = detail::parse_number(part, "sweep");
    text = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  }
  if (!(s.step > 0.0)) throw ScenarioError("sweep: step must be positive");
  if (!(s.start <= s.stop)) throw ScenarioError("sweep: start must not exceed stop");
  return s;
}

enum class RunMode { Analytic, Simulate, Both };

struct ReportConfig {
  RunMode mode = RunMode::Analytic;
  bool sim_mrc = true;
  bool sim_non_mrc = false;
  SimConfig sim;  // mode field is overridden per group
  std::optional<SweepSpec> sweep;
  unsigned threads = 0;  // 0: hardware concurrency, capped by EHOR_THREADS
};

struct SimSummary {
  double op = 0.0, op_se = 0.0;
  double tau = 0.0;
  double tc_cost = 0.0, tc_cost_se = 0.0;
  std::array<double, kTcStates> occupancy{};
  std::array<double, 3> tv_overall{};
  std::array<double, 2> tv_buffer{};
};

struct ReportRow {
  double p_s_dbm = 0.0;
  std::optional<AnalysisReport> analytic;
  std::optional<SimSummary> mrc, non_mrc;
};

inline constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

/// TV distances of one run's histograms against the analytic model; nan where
/// either side has no distribution to compare.
inline void compare_to_analytic(SimSummary& out, const SimStats& st, const AnalysisReport& rep) {
  const BinPdf* ov[3] = {&rep.fp.overall1, &rep.fp.overall2, &rep.fp.overall3};
  for (int k = 0; k < 3; ++k) {
    std::uint64_t n = 0;
    for (auto c : st.overall_hist[k]) n += c;
    out.tv_overall[k] = (n > 0 && st.overall_hist[k].size() == ov[k]->size())
                            ? total_variation(empirical_pdf(st.overall_hist[k]), ov[k]->mass)
                            : kNan;
  }
  const BufferLaw* law[2] = {&rep.fp.law1, &rep.fp.law2};
  for (int k = 0; k < 2; ++k) {
    if (!law[k]->stationary()) {
      out.tv_buffer[k] = kNan;
      continue;
    }
    const std::size_t bins = st.buffer_hist[k].size() - 1;
    out.tv_buffer[k] =
        total_variation(empirical_pdf(st.buffer_hist[k]), limiting_bin_masses(*law[k], st.buffer_bin_width[k], bins));
  }
}

inline SimSummary summarize(const SimStats& st, double r0) {
  SimSummary s;
  s.op = st.op();
  s.op_se = st.op_std_error();
  s.tau = throughput(s.op, r0);
  s.tc_cost = st.slots_per_delivery.n ? st.slots_per_delivery.mean : kNan;
  s.tc_cost_se = st.slots_per_delivery.n > 1 ? st.slots_per_delivery.std_error() : kNan;
  for (auto state : kAllTcStates) s.occupancy[index(state)] = st.occupancy_fraction(state);
  s.tv_overall.fill(kNan);
  s.tv_buffer.fill(kNan);
  return s;
}

inline unsigned worker_count(unsigned requested, std::size_t tasks) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("EHOR_THREADS")) {
    unsigned cap = 0;
    const std::string_view sv(env);
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), cap);
    if (ec == std::errc{} && ptr == sv.data() + sv.size() && cap > 0) n = std::min(n, cap);
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, tasks)));
}

/// Runs every requested engine at every sweep point. Jobs go to a small pool;
/// rows come back in sweep order. The first failure in sweep order is rethrown.
inline std::vector<ReportRow> run_report(const Scenario& base, const ReportConfig& cfg) {
  const std::vector<double> powers = cfg.sweep ? cfg.sweep->points() : std::vector<double>{base.radio.p_s_dbm};
  const bool analytic = cfg.mode != RunMode::Simulate;
  const bool simulate = cfg.mode != RunMode::Analytic;

  struct Job {
    std::size_t row;
    int kind;  // 0 analytic, 1 mrc, 2 non-mrc
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < powers.size(); ++i) {
    if (analytic) jobs.push_back({i, 0});
    if (simulate && cfg.sim_mrc) jobs.push_back({i, 1});
    if (simulate && cfg.sim_non_mrc) jobs.push_back({i, 2});
  }

  std::vector<ReportRow> rows(powers.size());
  std::vector<std::optional<SimStats>> mrc_stats(powers.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      const Job job = jobs[j];
      Scenario sc = base;
      sc.radio.p_s_dbm = powers[job.row];
      try {
        validate(sc);
        if (job.kind == 0) {
          rows[job.row].analytic = analyze(sc);
        } else {
          SimConfig sim = cfg.sim;
          sim.mode = job.kind == 1 ? SimMode::Mrc : SimMode::NonMrc;
          sim.overall_bins = sc.bins;
          const SimStats st = run_simulation(sc, sim);
          if (job.kind == 1) {
            rows[job.row].mrc = summarize(st, sc.radio.r0);
            mrc_stats[job.row] = st;
          } else {
            rows[job.row].non_mrc = summarize(st, sc.radio.r0);
          }
        }
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = worker_count(cfg.threads, jobs.size());
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  pool.clear();

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].p_s_dbm = powers[i];
    if (rows[i].analytic && rows[i].mrc) compare_to_analytic(*rows[i].mrc, *mrc_stats[i], *rows[i].analytic);
  }
  return rows;
}

// Shortest round-trip text; "nan" / "inf" for non-finite values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

namespace detail {

inline constexpr std::array<std::string_view, kTcStates> kTcColumn{"s", "sr1", "sr2", "sr1r2_1", "sr1r2_2", "sr1r2_3"};

inline void sim_header(std::vector<std::string>& h, std::string_view prefix, bool with_tv) {
  const std::string p(prefix);
  for (auto c : {"op", "op_se", "tau", "tc_cost", "tc_cost_se"}) h.push_back(p + c);
  for (auto s : kTcColumn) h.push_back(p + "occ_" + std::string(s));
  if (with_tv) {
    for (auto c : {"tv_overall1", "tv_overall2", "tv_overall3", "tv_buffer1", "tv_buffer2"}) h.push_back(p + c);
  }
}

inline void sim_values(std::vector<std::string>& v, const SimSummary& s, bool with_tv) {
  for (double x : {s.op, s.op_se, s.tau, s.tc_cost, s.tc_cost_se}) v.push_back(format_number(x));
  for (double x : s.occupancy) v.push_back(format_number(x));
  if (with_tv) {
    for (double x : s.tv_overall) v.push_back(format_number(x));
    for (double x : s.tv_buffer) v.push_back(format_number(x));
  }
}

inline std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

}  // namespace detail

/// CSV with a fixed column order. Analytic columns appear for analytic/both,
/// mrc_ and non_mrc_ groups for each simulated mode; TV columns only on the
/// mrc_ group in `both` mode, since they compare against the analytic model.
inline std::string format_csv(const std::vector<ReportRow>& rows, const ReportConfig& cfg) {
  const bool analytic = cfg.mode != RunMode::Simulate;
  const bool simulate = cfg.mode != RunMode::Analytic;
  const bool with_tv = cfg.mode == RunMode::Both;

  std::vector<std::string> h{"p_s_dbm"};
  if (analytic) {
    for (auto c : {"op", "tau", "tc_cost", "pu1", "pu2", "b1", "b2", "psi1", "psi2", "q1", "q2"}) h.emplace_back(c);
    for (auto s : detail::kTcColumn) h.push_back("p_" + std::string(s));
    h.emplace_back("iterations");
  }
  if (simulate && cfg.sim_mrc) detail::sim_header(h, "mrc_", with_tv);
  if (simulate && cfg.sim_non_mrc) detail::sim_header(h, "non_mrc_", false);
  std::string out = detail::join(h);

  for (const auto& row : rows) {
    std::vector<std::string> v{format_number(row.p_s_dbm)};
    if (analytic) {
      const AnalysisReport& a = row.analytic.value();
      for (double x : {a.op, a.tau, a.tc_cost, a.fp.pu1, a.fp.pu2, a.fp.b1, a.fp.b2, a.fp.law1.psi, a.fp.law2.psi,
                       a.fp.law1.q, a.fp.law2.q}) {
        v.push_back(format_number(x));
      }
      for (double x : a.fp.tc.p) v.push_back(format_number(x));
      v.push_back(std::to_string(a.fp.iterations));
    }
    if (simulate && cfg.sim_mrc) detail::sim_values(v, row.mrc.value(), with_tv);
    if (simulate && cfg.sim_non_mrc) detail::sim_values(v, row.non_mrc.value(), false);
    out += detail::join(v);
  }
  return out;
}

}  // namespace ehor
