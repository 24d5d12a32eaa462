#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "symlat/error.hpp"

namespace symlat {

namespace detail {

inline double log_binomial_term(std::size_t m, std::size_t j, double log_p, double log_q) {
  const double md = static_cast<double>(m), jd = static_cast<double>(j);
  return std::lgamma(md + 1) - std::lgamma(jd + 1) - std::lgamma(md - jd + 1) + jd * log_p + (md - jd) * log_q;
}

// log sum_{j=lo}^{hi} C(m,j) p^j (1-p)^(m-j), for 0 < p < 1.
inline double log_binomial_range(std::size_t m, std::size_t lo, std::size_t hi, double p) {
  const double log_p = std::log(p), log_q = std::log1p(-p);
  std::vector<double> terms;
  terms.reserve(hi - lo + 1);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = lo; j <= hi; ++j) {
    terms.push_back(log_binomial_term(m, j, log_p, log_q));
    top = std::max(top, terms.back());
  }
  if (!std::isfinite(top)) return top;
  double s = 0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

}  // namespace detail

/// P(Binom(m, p) >= k), summed in log space. The smaller of the two tails is
/// always the one summed so that no cancellation occurs.
inline double binom_tail(std::size_t m, std::size_t k, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("binom_tail: p must lie in [0, 1]");
  if (k > m) throw ArgumentError("binom_tail: k must not exceed m");
  if (k == 0) return 1.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double mean = static_cast<double>(m) * p;
  if (static_cast<double>(k) > mean) return std::exp(detail::log_binomial_range(m, k, m, p));
  return 1.0 - std::exp(detail::log_binomial_range(m, 0, k - 1, p));
}

}  // namespace symlat
