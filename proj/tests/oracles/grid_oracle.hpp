#ifndef XLAYER_TESTS_GRID_ORACLE_HPP_
#define XLAYER_TESTS_GRID_ORACLE_HPP_

#include <algorithm>
#include <cmath>

#include "xlayer/capacity.hpp"

namespace xlayer::testing {

// Exhaustive search over bandwidth fractions k * step of W_max. Every node
// has a single outgoing link, so full power (capped by gamma w) is optimal.
inline double link_rate(double w, double q, double n0, double p_max, double gamma) {
  return capacity(w, std::min(p_max, gamma * w), q, n0);
}

// One user, one link.
inline double grid_single_link(double q, double n0, double p_max, double w_max, double gamma, double step = 1e-3) {
  double best = 0.0;
  const int K = static_cast<int>(std::lround(1.0 / step));
  for (int k = 0; k <= K; ++k) {
    const double w = w_max * k / K;
    for (int j = 0; j <= K; j += 10) {
      const double p = p_max * j / K;
      best = std::max(best, capacity(w, std::min(p, gamma * w), q, n0));
    }
  }
  return best;
}

// User B relays through user A: A -> BS carries both rates. A and B sit in
// different groups without reuse, so W_A + W_B = W_max.
inline double grid_two_user_chain(double qa, double qb, double n0, double p_max, double w_max, double gamma,
                                  double step = 1e-3) {
  double best = 0.0;
  const int K = static_cast<int>(std::lround(1.0 / step));
  for (int k = 0; k <= K; ++k) {
    const double wa = w_max * k / K;
    const double ca = link_rate(wa, qa, n0, p_max, gamma);
    const double cb = link_rate(w_max - wa, qb, n0, p_max, gamma);
    best = std::max(best, std::min(ca / 2.0, cb));
  }
  return best;
}

// Three direct users sharing W_max, each at full power.
inline double grid_direct_three(const double q[3], double n0, double p_max, double w_max, double step = 1e-3) {
  double best = 0.0;
  const int K = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= K; ++i) {
    const double r0 = capacity(w_max * i / K, p_max, q[0], n0);
    if (r0 <= best) continue;
    for (int j = 0; i + j <= K; ++j) {
      const double r1 = capacity(w_max * j / K, p_max, q[1], n0);
      const double r2 = capacity(w_max * (K - i - j) / K, p_max, q[2], n0);
      best = std::max(best, std::min({r0, r1, r2}));
    }
  }
  return best;
}

}  // namespace xlayer::testing

#endif  // XLAYER_TESTS_GRID_ORACLE_HPP_
