// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "pooltest/bounds.hpp"
#include "pooltest/design.hpp"
#include "pooltest/error.hpp"
#include "pooltest/model.hpp"

namespace pooltest {

// Item i is disguised in test t when another item of t is defective, and
// totally disguised when that holds for every test containing i.

struct DisguiseBound {
  double log_bound;  // sum over tests t containing i of ln(1 - q^(w_t - 1))
  double fkg_bound;  // e^log_bound
};

/// Product lower bound on P(item i totally disguised). The events "i is
/// disguised in t" are increasing, so by the FKG inequality the probability
/// of their intersection is at least the product of their probabilities.
inline DisguiseBound disguise_bound(const TestDesign& design, std::size_t i, const Prior& prior) {
  if (i >= design.items()) throw std::out_of_range("item index out of range");
  double sum = 0.0;
  for (std::size_t t = 0; t < design.tests(); ++t) {
    if (!design.contains(t, i)) continue;
    const double term = log_disguise_factor(prior.q(), design.weight(t));
    if (term == kNegInf) return {kNegInf, 0.0};
    sum += term;
  }
  return {sum, exp_or_zero(sum)};
}

inline constexpr std::size_t kDisguiseCoItemBudget = 25;
inline constexpr std::size_t kDisguiseLogSpaceThreshold = 20;

/// Items other than i that share at least one test with i, ascending.
inline std::vector<std::size_t> co_items(const TestDesign& design, std::size_t i) {
  if (i >= design.items()) throw std::out_of_range("item index out of range");
  Bits seen(design.items());
  for (std::size_t t = 0; t < design.tests(); ++t)
    if (design.contains(t, i)) seen |= design.row(t);
  seen.reset(i);
  std::vector<std::size_t> out;
  for (auto j = seen.find_first(); j != Bits::npos; j = seen.find_next(j)) out.push_back(j);
  return out;
}

/// Exact P(D_i) by enumerating the defectivity patterns of i's co-items.
///
/// Only items sharing a test with i can influence D_i, so with m co-items
/// the sum runs over 2^m patterns. Satisfying patterns are tallied by
/// popcount and weighted afterwards.
inline double exact_disguise_prob(const TestDesign& design, std::size_t i, const Prior& prior,
                                  std::size_t budget = kDisguiseCoItemBudget) {
  const auto others = co_items(design, i);
  const std::size_t m = others.size();
  if (m > budget || m >= 63) throw budget_exceeded("item shares tests with too many other items to enumerate");

  std::vector<std::uint64_t> masks;
  for (std::size_t t = 0; t < design.tests(); ++t) {
    if (!design.contains(t, i)) continue;
    std::uint64_t mask = 0;
    for (std::size_t k = 0; k < m; ++k)
      if (design.contains(t, others[k])) mask |= std::uint64_t{1} << k;
    masks.push_back(mask);
  }
  if (masks.empty()) return 1.0;
  // A test holding only i can never disguise it.
  if (std::find(masks.begin(), masks.end(), 0u) != masks.end()) return 0.0;

  std::vector<std::uint64_t> count(m + 1, 0);
  const std::uint64_t patterns = std::uint64_t{1} << m;
  for (std::uint64_t pattern = 0; pattern < patterns; ++pattern) {
    bool covered = true;
    for (auto mask : masks) {
      if ((mask & pattern) == 0) {
        covered = false;
        break;
      }
    }
    if (covered) ++count[static_cast<std::size_t>(std::popcount(pattern))];
  }

  double prob = 0.0;
  if (m > kDisguiseLogSpaceThreshold) {
    const double lp = std::log(prior.p()), lq = std::log(prior.q());
    for (std::size_t k = 0; k <= m; ++k)
      if (count[k] != 0)
        prob += std::exp(std::log(static_cast<double>(count[k])) + static_cast<double>(k) * lp +
                         static_cast<double>(m - k) * lq);
  } else {
    for (std::size_t k = 0; k <= m; ++k)
      if (count[k] != 0) prob += static_cast<double>(count[k]) * prior.weight(k, m);
  }
  return std::min(prob, 1.0);
}

struct ItemDisguise {
  std::size_t item = 0;
  double log_bound = 0.0;
  double fkg_bound = 1.0;
  std::optional<double> exact;

  friend bool operator==(const ItemDisguise&, const ItemDisguise&) = default;
};

/// Per-item log-bounds, their mean computed two ways, and the terms of the
/// inequality chain mean >= (T/n) min_t term >= min_t term >= L*.
struct DisguiseReport {
  double p = 0.5;
  std::size_t tests = 0;
  std::size_t items = 0;
  std::vector<ItemDisguise> per_item;
  double mean_log_bound = 0.0;          // (1/n) sum_i L_i
  double mean_log_bound_by_tests = 0.0; // (1/n) sum_t w_t ln(1 - q^(w_t-1))
  std::optional<double> min_test_term;  // min_t w_t ln(1 - q^(w_t-1)); absent when T = 0
  std::optional<double> scaled_min_test_term;  // (T/n) * min_test_term
  double l_star = 0.0;
  std::size_t w_star = 2;
  bool chain_applicable = false;        // T <= n and every weight >= 2

  double max_log_bound() const {
    double best = kNegInf;
    for (const auto& r : per_item) best = std::max(best, r.log_bound);
    return best;
  }

  friend bool operator==(const DisguiseReport&, const DisguiseReport&) = default;
};

struct DisguiseOptions {
  bool exact = false;
  std::size_t exact_budget = kDisguiseCoItemBudget;
};

inline DisguiseReport mean_log_bound(const TestDesign& design, const Prior& prior, DisguiseOptions options = {}) {
  DisguiseReport report;
  report.p = prior.p();
  report.tests = design.tests();
  report.items = design.items();

  double item_sum = 0.0;
  for (std::size_t i = 0; i < design.items(); ++i) {
    const auto b = disguise_bound(design, i, prior);
    ItemDisguise rec{i, b.log_bound, b.fkg_bound, std::nullopt};
    if (options.exact && co_items(design, i).size() <= options.exact_budget)
      rec.exact = exact_disguise_prob(design, i, prior, options.exact_budget);
    item_sum += b.log_bound;
    report.per_item.push_back(rec);
  }

  double test_sum = 0.0;
  for (std::size_t t = 0; t < design.tests(); ++t) {
    const double term = weighted_test_term(prior.q(), design.weight(t));
    test_sum += term;
    report.min_test_term = report.min_test_term ? std::min(*report.min_test_term, term) : term;
  }

  if (design.items() > 0) {
    const double n = static_cast<double>(design.items());
    report.mean_log_bound = item_sum / n;
    report.mean_log_bound_by_tests = test_sum / n;
    if (report.min_test_term)
      report.scaled_min_test_term = static_cast<double>(design.tests()) / n * *report.min_test_term;
  }

  const auto ls = l_star(prior);
  report.l_star = ls.value;
  report.w_star = ls.argmin;
  report.chain_applicable = design.tests() <= design.items() && (design.tests() == 0 || design.min_weight() >= 2);
  return report;
}

}  // namespace pooltest
