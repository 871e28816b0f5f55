#pragma once

#include <limits>

#include "ehor/chain_analysis.hpp"
#include "ehor/closed_form.hpp"
#include "ehor/scenario.hpp"

namespace ehor {

/// Everything the analytic engine reports for one scenario.
struct AnalysisReport {
  DerivedRates rates;
  FixedPointResult fp;
  double op = 0.0;
  double tau = 0.0;
  double tc_cost = 0.0;  // +inf when op == 1
};

inline AnalysisReport analyze(const Scenario& sc) {
  AnalysisReport rep;
  rep.rates = derive_rates(sc);
  rep.fp = solve_fixed_point(rep.rates, sc.energy, sc.bins);
  rep.op = std::clamp(outage_probability(rep.fp.tc, rep.fp.scalars, rep.fp.pu1, rep.fp.pu2, rep.rates), 0.0, 1.0);
  rep.tau = throughput(rep.op, sc.radio.r0);
  rep.tc_cost = rep.op < 1.0 ? timeslot_cost(rep.op) : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace ehor
