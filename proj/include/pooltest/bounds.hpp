// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>

#include "pooltest/model.hpp"

namespace pooltest {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// ln(1 - q^(w-1)): log-probability that a test of weight w disguises one of
/// its items. A weight-1 test never disguises, giving -inf.
inline double log_disguise_factor(double q, std::size_t w) {
  if (w <= 1) return kNegInf;
  return std::log1p(-std::pow(q, static_cast<double>(w - 1)));
}

/// w * ln(1 - q^(w-1)); the contribution of a weight-w test to the summed
/// log-bounds of its items. Weight 0 contributes nothing.
inline double weighted_test_term(double q, std::size_t w) {
  if (w == 0) return 0.0;
  if (w == 1) return kNegInf;
  return static_cast<double>(w) * log_disguise_factor(q, w);
}

/// Exponential with e^-inf = 0 spelled out.
inline double exp_or_zero(double x) { return x == kNegInf ? 0.0 : std::exp(x); }

/// Binary entropy in bits.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  const double q = 1.0 - p;
  return -p * std::log2(p) - q * std::log2(q);
}

struct LStar {
  double value;        // min over w >= 2 of w ln(1 - q^(w-1))
  std::size_t argmin;  // smallest minimising weight
  std::size_t scanned; // last weight evaluated
};

inline constexpr std::size_t kLStarWeightCap = 1'000'000;

/// Certified minimum of f(w) = w ln(1 - q^(w-1)) over integers w >= 2.
///
/// Since |ln(1-x)| <= x/(1-x), every f(w') is bounded below by
/// -g(w') with g(w) = w q^(w-1) / (1 - q^(w-1)). Once (w+1) q < w the factor
/// w q^(w-1) is decreasing from w on, and 1/(1-q^(w-1)) always is, so g is
/// decreasing for all larger weights. The scan stops at the first such w
/// with g(w) below the magnitude of the running minimum.
inline LStar l_star(const Prior& prior) {
  const double q = prior.q();
  LStar best{weighted_test_term(q, 2), 2, 2};
  for (std::size_t w = 3; w <= kLStarWeightCap; ++w) {
    const double f = weighted_test_term(q, w);
    if (f < best.value) {
      best.value = f;
      best.argmin = w;
    }
    best.scanned = w;
    const double qw = std::pow(q, static_cast<double>(w - 1));
    const double majorant = static_cast<double>(w) * qw / (1.0 - qw);
    const bool decreasing = static_cast<double>(w + 1) * q < static_cast<double>(w);
    if (decreasing && majorant < -best.value) return best;
  }
  throw std::runtime_error("minimum weight scan hit its cap; p is too small");
}

struct BoundReport {
  double p = 0.5;
  double q = 0.5;
  double l_star = 0.0;
  std::size_t w_star = 2;
  double epsilon = 0.0;
  std::optional<double> delta;
  std::optional<double> epsilon_delta;
  std::optional<std::size_t> n;
  std::optional<double> counting_bound;

  friend bool operator==(const BoundReport&, const BoundReport&) = default;
};

/// Error floor min{p,q} e^{L*} for any design with fewer tests than items.
inline BoundReport epsilon_bound(const Prior& prior) {
  const auto ls = l_star(prior);
  BoundReport r;
  r.p = prior.p();
  r.q = prior.q();
  r.l_star = ls.value;
  r.w_star = ls.argmin;
  r.epsilon = std::min(prior.p(), prior.q()) * std::exp(ls.value);
  return r;
}

/// Floor min{p,q} e^{(1-delta) L*} for designs with T < (1-delta) n.
inline double epsilon_bound_delta(const Prior& prior, double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in [0,1)");
  return std::min(prior.p(), prior.q()) * std::exp((1.0 - delta) * l_star(prior).value);
}

/// Information-theoretic requirement H(p) n on the number of tests.
inline double counting_bound(const Prior& prior, std::size_t n) {
  if (n == 0) throw std::invalid_argument("item count must be at least 1");
  return binary_entropy(prior.p()) * static_cast<double>(n);
}

/// (1 - q^(r-1))^l: disguise floor for an item of a doubly regular design.
inline double doubly_regular_disguise_bound(const Prior& prior, std::size_t l, std::size_t r) {
  if (l == 0 || r == 0) throw std::invalid_argument("l and r must be at least 1");
  if (r == 1) return 0.0;
  return std::pow(1.0 - std::pow(prior.q(), static_cast<double>(r - 1)), static_cast<double>(l));
}

/// Full report, optionally including the delta refinement and counting bound.
inline BoundReport bound_report(const Prior& prior, std::optional<double> delta = std::nullopt,
                                std::optional<std::size_t> n = std::nullopt) {
  auto r = epsilon_bound(prior);
  if (delta) {
    r.delta = *delta;
    r.epsilon_delta = epsilon_bound_delta(prior, *delta);
  }
  if (n) {
    r.n = *n;
    r.counting_bound = counting_bound(prior, *n);
  }
  return r;
}

struct FigurePoint {
  double p;
  double l_star;
  std::size_t w_star;
  double epsilon;
};

/// epsilon(p) sampled on `steps` evenly spaced points of [p_min, p_max].
inline std::vector<FigurePoint> figure_curve(double p_min, double p_max, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("steps must be at least 1");
  if (!(p_min > 0.0 && p_max < 1.0 && p_min <= p_max))
    throw std::invalid_argument("grid must satisfy 0 < p_min <= p_max < 1");
  std::vector<FigurePoint> curve;
  curve.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double p = steps == 1 ? p_min
                                : p_min + (p_max - p_min) * static_cast<double>(k) / static_cast<double>(steps - 1);
    const auto r = epsilon_bound(Prior(p));
    curve.push_back({p, r.l_star, r.w_star, r.epsilon});
  }
  return curve;
}

}  // namespace pooltest
