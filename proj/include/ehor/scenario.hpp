#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include "ehor/errors.hpp"

namespace ehor {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Positions (meters) of source, both relays and destination.
struct NodeLayout {
  Point s, r1, r2, d;
};

struct RadioParams {
  double p_s_dbm = 0.0;  // source transmit power
  double n0_dbm = 0.0;   // noise power
  double alpha = -3.0;   // path-loss exponent; negative means loss grows with distance
  double r0 = 2.0;       // target rate, bit/s/Hz
};

/// Per-transmission energy cost and harvest parameters of the two relays.
/// Harvest rates are given in dB and read as lambda = 10^(-dB/10) per mJ, so
/// the mean harvest per slot is 10^(dB/10) mJ.
struct EnergyParams {
  double m_r1 = 0.0;  // mJ
  double m_r2 = 0.0;  // mJ
  double lambda1_db = 0.0;
  double lambda2_db = 0.0;

  double lambda1() const { return std::pow(10.0, -lambda1_db / 10.0); }
  double lambda2() const { return std::pow(10.0, -lambda2_db / 10.0); }
};

inline constexpr std::size_t kDefaultBins = 100;

struct Scenario {
  NodeLayout layout;
  RadioParams radio;
  EnergyParams energy;
  std::size_t bins = kDefaultBins;
};

/// Exponential rate parameters of the six link SNRs plus the SNR threshold.
/// Each rate is the reciprocal of the link's mean SNR.
struct DerivedRates {
  double w_sd = 0.0;
  double w_sr1 = 0.0;
  double w_sr2 = 0.0;
  double w_r1r2 = 0.0;
  double w_r1d = 0.0;
  double w_r2d = 0.0;
  double gamma_th = 0.0;

  bool operator==(const DerivedRates&) const = default;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

inline double snr_threshold(double r0) { return std::exp2(r0) - 1.0; }

// Throws ScenarioError if any invariant of the scenario is violated.
inline void validate(const Scenario& sc) {
  const auto& l = sc.layout;
  const std::array<std::pair<const char*, double>, 6> dists{{
      {"s-r1", distance(l.s, l.r1)},
      {"s-r2", distance(l.s, l.r2)},
      {"s-d", distance(l.s, l.d)},
      {"r1-r2", distance(l.r1, l.r2)},
      {"r1-d", distance(l.r1, l.d)},
      {"r2-d", distance(l.r2, l.d)},
  }};
  for (const auto& [name, dist] : dists) {
    if (!(dist > 0.0) || !std::isfinite(dist)) {
      throw ScenarioError(std::string("distance ") + name + " must be positive");
    }
  }
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(sc.radio.p_s_dbm) || !finite(sc.radio.n0_dbm) || !finite(sc.radio.alpha)) {
    throw ScenarioError("radio parameters must be finite");
  }
  if (!(sc.radio.r0 > 0.0) || !finite(sc.radio.r0)) throw ScenarioError("r0 must be positive");
  if (!(sc.energy.m_r1 > 0.0) || !finite(sc.energy.m_r1)) throw ScenarioError("m_r1_mj must be positive");
  if (!(sc.energy.m_r2 > 0.0) || !finite(sc.energy.m_r2)) throw ScenarioError("m_r2_mj must be positive");
  if (!finite(sc.energy.lambda1_db) || !finite(sc.energy.lambda2_db)) {
    throw ScenarioError("harvest parameters must be finite");
  }
  if (!(sc.energy.lambda1() > 0.0) || !(sc.energy.lambda2() > 0.0) || !finite(sc.energy.lambda1()) ||
      !finite(sc.energy.lambda2())) {
    throw ScenarioError("harvest rates out of range");
  }
  if (sc.bins < 1) throw ScenarioError("bins must be at least 1");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view text, std::string_view key) {
  text = trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ScenarioError("bad number for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return value;
}

inline Point parse_point(std::string_view text, std::string_view key) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
    throw ScenarioError("'" + std::string(key) + "' expects 'x, y'");
  }
  return {parse_number(text.substr(0, comma), key), parse_number(text.substr(comma + 1), key)};
}

}  // namespace detail

/// Parses the line-oriented `key = value` scenario format and validates it.
/// Every key but `bins` is required; unknown or repeated keys are errors.
inline Scenario load_scenario(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ScenarioError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      throw ScenarioError("line " + std::to_string(line_no) + ": empty key or value");
    }
    if (!kv.emplace(key, value).second) throw ScenarioError("duplicate key '" + key + "'");
  }

  static constexpr std::array<std::string_view, 13> kKnown{
      "s", "r1", "r2", "d", "alpha", "p_s_dbm", "n0_dbm", "r0", "m_r1_mj", "m_r2_mj", "lambda1_db", "lambda2_db", "bins"};
  for (const auto& [key, _] : kv) {
    bool known = false;
    for (auto k : kKnown) known = known || k == key;
    if (!known) throw ScenarioError("unknown key '" + key + "'");
  }
  const auto need = [&](std::string_view key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ScenarioError("missing key '" + std::string(key) + "'");
    return it->second;
  };
  const auto num = [&](std::string_view key) { return detail::parse_number(need(key), key); };

  Scenario sc;
  sc.layout.s = detail::parse_point(need("s"), "s");
  sc.layout.r1 = detail::parse_point(need("r1"), "r1");
  sc.layout.r2 = detail::parse_point(need("r2"), "r2");
  sc.layout.d = detail::parse_point(need("d"), "d");
  sc.radio.alpha = num("alpha");
  sc.radio.p_s_dbm = num("p_s_dbm");
  sc.radio.n0_dbm = num("n0_dbm");
  sc.radio.r0 = num("r0");
  sc.energy.m_r1 = num("m_r1_mj");
  sc.energy.m_r2 = num("m_r2_mj");
  sc.energy.lambda1_db = num("lambda1_db");
  sc.energy.lambda2_db = num("lambda2_db");
  if (kv.contains("bins")) {
    const double bins = num("bins");
    if (!(bins >= 1.0) || bins != std::floor(bins) || bins > 1e6) throw ScenarioError("bins must be a positive integer");
    sc.bins = static_cast<std::size_t>(bins);
  }
  validate(sc);
  return sc;
}

/// Link SNR rates. Mean SNR of a link is P_tx * d^alpha / N0 with powers in
/// mW; relays transmit with their per-slot energy cost (mJ over a unit slot).
inline DerivedRates derive_rates(const Scenario& sc) {
  validate(sc);
  const auto& l = sc.layout;
  const double n0 = dbm_to_mw(sc.radio.n0_dbm);
  const double ps = dbm_to_mw(sc.radio.p_s_dbm);
  const double a = sc.radio.alpha;
  const auto rate = [&](double p_tx, const Point& from, const Point& to) {
    return n0 / (p_tx * std::pow(distance(from, to), a));
  };
  DerivedRates r;
  r.w_sd = rate(ps, l.s, l.d);
  r.w_sr1 = rate(ps, l.s, l.r1);
  r.w_sr2 = rate(ps, l.s, l.r2);
  r.w_r1r2 = rate(sc.energy.m_r1, l.r1, l.r2);
  r.w_r1d = rate(sc.energy.m_r1, l.r1, l.d);
  r.w_r2d = rate(sc.energy.m_r2, l.r2, l.d);
  r.gamma_th = snr_threshold(sc.radio.r0);
  return r;
}

}  // namespace ehor
