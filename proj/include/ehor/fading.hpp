#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "ehor/errors.hpp"

namespace ehor {

/// Probability mass over n equal-width SNR bins covering [0, gamma_th).
/// Bin j (0-based) is the half-open interval [j*width, (j+1)*width); mass at or
/// above gamma_th is never stored here.
struct BinPdf {
  std::vector<double> mass;
  double bin_width = 0.0;

  BinPdf() = default;
  BinPdf(std::vector<double> m, double width) : mass(std::move(m)), bin_width(width) {}

  std::size_t size() const { return mass.size(); }
  double total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }
  double operator[](std::size_t j) const { return mass[j]; }

  // Copy rescaled to unit total; a massless pdf becomes uniform.
  BinPdf normalized() const {
    BinPdf out = *this;
    const double t = total();
    if (t > 0.0) {
      for (auto& v : out.mass) v /= t;
    } else if (!out.mass.empty()) {
      for (auto& v : out.mass) v = 1.0 / static_cast<double>(out.mass.size());
    }
    return out;
  }
};

/// Inverse-CDF exponential draw of a link SNR.
inline double sample_link_snr(double rate, double draw) { return -std::log(draw) / rate; }

/// Pr{SNR >= x} for an exponential link SNR.
inline double exceed_prob(double rate, double x) { return std::exp(-rate * x); }

// Pr{SNR < x}, computed without cancellation for small rate*x.
inline double below_prob(double rate, double x) { return -std::expm1(-rate * x); }

inline BinPdf link_bin_pdf(double rate, std::size_t n_bins, double gamma_th) {
  if (!(rate > 0.0) || n_bins == 0 || !(gamma_th > 0.0)) {
    throw ContractError("link_bin_pdf: rate, n_bins and gamma_th must be positive");
  }
  const double width = gamma_th / static_cast<double>(n_bins);
  std::vector<double> m(n_bins);
  for (std::size_t j = 0; j < n_bins; ++j) {
    const double lo = width * static_cast<double>(j);
    const double hi = (j + 1 == n_bins) ? gamma_th : width * static_cast<double>(j + 1);
    // e^{-r lo} - e^{-r hi} = e^{-r lo} (1 - e^{-r (hi - lo)})
    m[j] = std::exp(-rate * lo) * -std::expm1(-rate * (hi - lo));
  }
  return {std::move(m), width};
}

/// Discrete convolution truncated to the first n bins: mass whose bin index
/// sum reaches n has crossed gamma_th and is dropped.
inline BinPdf convolve_truncated(const BinPdf& a, const BinPdf& b) {
  if (a.size() != b.size()) throw ContractError("convolve_truncated: bin count mismatch");
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (a.mass[i] == 0.0) continue;
    for (std::size_t l = 0; i + l < n; ++l) out[i + l] += a.mass[i] * b.mass[l];
  }
  return {std::move(out), a.bin_width};
}

}  // namespace ehor
