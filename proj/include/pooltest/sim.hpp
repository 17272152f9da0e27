// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <boost/functional/hash.hpp>

#include "pooltest/bounds.hpp"
#include "pooltest/decode.hpp"
#include "pooltest/design.hpp"
#include "pooltest/disguise.hpp"
#include "pooltest/error.hpp"
#include "pooltest/model.hpp"
#include "pooltest/rng.hpp"

namespace pooltest {

// ---------------------------------------------------------------------------
// Monte Carlo harness

struct SimResult {
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;  // trials in which the event occurred
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::uint64_t seed = 0;
  std::optional<DecoderId> decoder;

  double standard_error() const {
    return trials == 0 ? 0.0 : std::sqrt(estimate * (1.0 - estimate) / static_cast<double>(trials));
  }

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

inline constexpr double kWilsonZ95 = 1.959963984540054;

/// Wilson score interval for `successes` out of `trials`.
inline std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                                 double z = kWilsonZ95) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {std::min(lo, phat), std::max(hi, phat)};
}

inline SimResult make_result(std::uint64_t trials, std::uint64_t hits, std::uint64_t seed,
                             std::optional<DecoderId> decoder) {
  SimResult r;
  r.trials = trials;
  r.errors = hits;
  r.estimate = trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials);
  std::tie(r.ci_low, r.ci_high) = wilson_interval(hits, trials);
  r.seed = seed;
  r.decoder = decoder;
  return r;
}

inline constexpr std::uint64_t kTrialBlock = 1024;

/// Runs `trials` Bernoulli experiments and counts the ones returning true.
///
/// Trials are cut into fixed blocks of kTrialBlock; block b always draws
/// from substream (seed, b), and blocks are dealt round-robin to workers.
/// The tally therefore does not depend on scheduling or on the number of
/// workers. `trial` is invoked concurrently and must not mutate shared state.
template <typename Trial>
std::uint64_t count_events(std::uint64_t trials, std::uint64_t seed, unsigned workers, const Trial& trial) {
  if (workers == 0) throw std::invalid_argument("workers must be at least 1");
  const std::uint64_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
  std::vector<std::uint64_t> tally(blocks, 0);

  const unsigned used = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(blocks, 1)));
  auto work = [&](unsigned w) {
    for (std::uint64_t b = w; b < blocks; b += used) {
      Rng rng(seed, b);
      const std::uint64_t begin = b * kTrialBlock;
      const std::uint64_t end = std::min(trials, begin + kTrialBlock);
      std::uint64_t hits = 0;
      for (std::uint64_t k = begin; k < end; ++k)
        if (trial(rng)) ++hits;
      tally[b] = hits;
    }
  };

  if (used <= 1) {
    work(0);
  } else {
    std::vector<std::exception_ptr> failures(used);
    {
      std::vector<std::jthread> pool;
      pool.reserve(used);
      for (unsigned w = 0; w < used; ++w)
        pool.emplace_back([&, w] {
          try {
            work(w);
          } catch (...) {
            failures[w] = std::current_exception();
          }
        });
    }
    for (auto& f : failures)
      if (f) std::rethrow_exception(f);
  }

  std::uint64_t total = 0;
  for (auto h : tally) total += h;
  return total;
}

/// Monte Carlo estimate of the average error probability of `decoder`.
inline SimResult monte_carlo_error(const TestDesign& design, const Prior& prior, DecoderId decoder,
                                   std::uint64_t trials, std::uint64_t master_seed, unsigned workers = 1) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (decoder == DecoderId::MAP && design.items() > kMapItemBudget)
    throw budget_exceeded("MAP decoding is limited to 30 items");
  const auto errors = count_events(trials, master_seed, workers, [&](Rng& rng) {
    const auto truth = sample_defective_set(design.items(), prior, rng);
    const auto estimate = decode(decoder, design, outcomes(design, truth), prior);
    return estimate != truth;
  });
  return make_result(trials, errors, master_seed, decoder);
}

/// Monte Carlo frequency of item i being totally disguised.
inline SimResult disguise_frequency(const TestDesign& design, const Prior& prior, std::size_t i,
                                    std::uint64_t trials, std::uint64_t seed, unsigned workers = 1) {
  if (i >= design.items()) throw std::out_of_range("item index out of range");
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  const auto containing = design.tests_containing(i);
  std::vector<Bits> others;
  for (auto t : containing) {
    Bits row = design.row(t);
    row.reset(i);
    others.push_back(std::move(row));
  }
  const auto hits = count_events(trials, seed, workers, [&](Rng& rng) {
    const auto k = sample_defective_set(design.items(), prior, rng);
    for (const auto& row : others)
      if (!row.intersects(k.bits())) return false;
    return true;
  });
  return make_result(trials, hits, seed, std::nullopt);
}

// ---------------------------------------------------------------------------
// Exact enumeration

inline constexpr std::size_t kExactItemBudget = 20;
inline constexpr std::size_t kExactMapItemBudget = 14;

namespace detail {

struct VectorHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const noexcept {
    return boost::hash_range(v.begin(), v.end());
  }
};

/// Groups all 2^n defective sets by the outcome vector they produce.
struct OutcomeClasses {
  std::vector<std::uint32_t> class_of;        // indexed by defective-set mask
  std::vector<std::uint64_t> representative;  // one mask per class
};

inline std::vector<std::uint64_t> row_masks(const TestDesign& design) {
  std::vector<std::uint64_t> masks(design.tests(), 0);
  for (std::size_t t = 0; t < design.tests(); ++t)
    for (std::size_t i = 0; i < design.items(); ++i)
      if (design.contains(t, i)) masks[t] |= std::uint64_t{1} << i;
  return masks;
}

inline OutcomeClasses outcome_classes(const TestDesign& design) {
  const auto masks = row_masks(design);
  const std::size_t words = (design.tests() + 63) / 64;
  const std::uint64_t sets = std::uint64_t{1} << design.items();
  OutcomeClasses out;
  out.class_of.resize(sets);
  std::unordered_map<std::vector<std::uint64_t>, std::uint32_t, VectorHash> ids;
  std::vector<std::uint64_t> key(words);
  for (std::uint64_t k = 0; k < sets; ++k) {
    std::fill(key.begin(), key.end(), 0);
    for (std::size_t t = 0; t < masks.size(); ++t)
      if (masks[t] & k) key[t / 64] |= std::uint64_t{1} << (t % 64);
    auto [it, fresh] = ids.try_emplace(key, static_cast<std::uint32_t>(out.representative.size()));
    if (fresh) out.representative.push_back(k);
    out.class_of[k] = it->second;
  }
  return out;
}

inline std::uint64_t to_mask(const Bits& bits) {
  std::uint64_t m = 0;
  for (auto i = bits.find_first(); i != Bits::npos; i = bits.find_next(i)) m |= std::uint64_t{1} << i;
  return m;
}

/// Sum of prior weights of the sets whose class estimate differs from them.
inline double error_mass(const OutcomeClasses& classes, const std::vector<std::uint64_t>& estimate,
                         std::size_t n, const Prior& prior) {
  const auto weight = prior.weight_table(n);
  double err = 0.0;
  for (std::uint64_t k = 0; k < classes.class_of.size(); ++k)
    if (estimate[classes.class_of[k]] != k) err += weight[static_cast<std::size_t>(std::popcount(k))];
  return err;
}

}  // namespace detail

/// Exact average error probability of a deterministic decoder: the prior
/// mass of the defective sets it fails to recover.
inline double exact_average_error(const TestDesign& design, const Prior& prior, DecoderId decoder) {
  const std::size_t n = design.items();
  const std::size_t budget = decoder == DecoderId::MAP ? kExactMapItemBudget : kExactItemBudget;
  if (n > budget)
    throw budget_exceeded("exact error enumeration for " + std::string(to_string(decoder)) + " is limited to " +
                          std::to_string(budget) + " items");

  const auto classes = detail::outcome_classes(design);
  std::vector<std::uint64_t> estimate(classes.representative.size());
  if (decoder == DecoderId::MAP) {
    estimate = classes.representative;
    for (std::uint64_t k = 0; k < classes.class_of.size(); ++k) {
      auto& best = estimate[classes.class_of[k]];
      if (map_prefers(k, best, prior)) best = k;
    }
  } else {
    for (std::size_t c = 0; c < estimate.size(); ++c) {
      const auto y = outcomes(design, DefectiveSet::from_mask(n, classes.representative[c]));
      estimate[c] = detail::to_mask(decode(decoder, design, y, prior).bits());
    }
  }
  return detail::error_mass(classes, estimate, n, prior);
}

/// Exact error of the reduced instance, lifted back to the original items.
/// Reduced items are decoded by MAP from the reduced design's outcomes;
/// resolved items carry their true status, as in the reduction argument.
inline double lifted_reduction_error(const TestDesign& design, const Prior& prior) {
  const std::size_t n = design.items();
  if (n > kExactMapItemBudget) throw budget_exceeded("exact error enumeration for map is limited to 14 items");
  const auto reduction = reduce(design);
  const auto& log = reduction.log;

  std::map<std::string, Bits> cache;
  const auto weight = prior.weight_table(n);
  double err = 0.0;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k) {
    const auto truth = DefectiveSet::from_mask(n, k);
    DefectiveSet reduced_truth(log.item_map.size());
    for (std::size_t j = 0; j < log.item_map.size(); ++j)
      if (truth.contains(log.item_map[j])) reduced_truth.insert(j);
    const auto y = outcomes(reduction.design, reduced_truth);
    auto [it, fresh] = cache.try_emplace(y.to_string());
    if (fresh) it->second = decode_map(reduction.design, y, prior).bits();
    if (lift_estimate(log, it->second, truth.bits()) != truth.bits())
      err += weight[static_cast<std::size_t>(std::popcount(k))];
  }
  return err;
}

// ---------------------------------------------------------------------------
// Verification

inline constexpr double kFloorTolerance = 1e-12;

struct LemmaCheck {
  std::size_t item = 0;
  double exact = 0.0;
  double bound = 0.0;
  bool pass = true;

  friend bool operator==(const LemmaCheck&, const LemmaCheck&) = default;
};

struct VerificationReport {
  std::size_t tests = 0;
  std::size_t items = 0;
  std::size_t min_weight = 0;
  double p = 0.5;
  bool floor_applicable = false;  // T < n
  double epsilon_floor = 0.0;
  double observed_error = 0.0;    // exact, or the Wilson lower bound
  std::optional<double> observed_ci_high;
  std::string method;             // "exact" or "monte-carlo"
  DecoderId decoder = DecoderId::MAP;
  std::vector<LemmaCheck> lemma_checks;
  std::size_t lemma_skipped = 0;
  bool lemma_pass = true;
  bool theorem_pass = true;

  bool pass() const { return lemma_pass && theorem_pass; }

  friend bool operator==(const VerificationReport&, const VerificationReport&) = default;
};

struct VerifyOptions {
  std::uint64_t trials = 10'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::size_t lemma_budget = 20;
};

/// Checks the error floor and the per-item disguise bounds on one design.
///
/// With n <= 14 the MAP error is enumerated exactly. Larger designs fall back
/// to Monte Carlo, and the floor is only reported violated when the whole
/// confidence interval lies below it.
inline VerificationReport verify_theorem(const TestDesign& design, const Prior& prior, VerifyOptions options = {}) {
  VerificationReport r;
  r.tests = design.tests();
  r.items = design.items();
  r.min_weight = design.tests() == 0 ? 0 : design.min_weight();
  r.p = prior.p();
  r.floor_applicable = design.tests() < design.items();
  r.epsilon_floor = epsilon_bound(prior).epsilon;

  if (design.items() <= kExactMapItemBudget) {
    r.method = "exact";
    r.decoder = DecoderId::MAP;
    r.observed_error = exact_average_error(design, prior, DecoderId::MAP);
    if (r.floor_applicable) r.theorem_pass = r.observed_error >= r.epsilon_floor - kFloorTolerance;
  } else {
    r.method = "monte-carlo";
    r.decoder = design.items() <= kMapItemBudget ? DecoderId::MAP : DecoderId::DD;
    const auto sim = monte_carlo_error(design, prior, r.decoder, options.trials, options.seed, options.workers);
    r.observed_error = sim.ci_low;
    r.observed_ci_high = sim.ci_high;
    if (r.floor_applicable) r.theorem_pass = sim.ci_high >= r.epsilon_floor;
  }

  for (std::size_t i = 0; i < design.items(); ++i) {
    if (co_items(design, i).size() > options.lemma_budget) {
      ++r.lemma_skipped;
      continue;
    }
    LemmaCheck c;
    c.item = i;
    c.exact = exact_disguise_prob(design, i, prior, options.lemma_budget);
    c.bound = disguise_bound(design, i, prior).fkg_bound;
    c.pass = c.exact >= c.bound - kFloorTolerance;
    r.lemma_pass = r.lemma_pass && c.pass;
    r.lemma_checks.push_back(c);
  }
  return r;
}

}  // namespace pooltest
