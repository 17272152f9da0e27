// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "pooltest/error.hpp"
#include "pooltest/rng.hpp"

namespace pooltest {

using Bits = boost::dynamic_bitset<std::uint64_t>;

/// Nonadaptive test design: a T x n binary inclusion matrix.
///
/// Row t is the set of items pooled into test t. Test weights are cached at
/// construction; a design never changes afterwards.
class TestDesign {
 public:
  /// Builds a design from row bit vectors, each of length n. Requires n >= 1.
  static TestDesign from_rows(std::vector<Bits> rows, std::size_t n) {
    if (n == 0) throw std::invalid_argument("design must have at least one item");
    return TestDesign(std::move(rows), n);
  }

  std::size_t tests() const noexcept { return rows_.size(); }
  std::size_t items() const noexcept { return n_; }

  const Bits& row(std::size_t t) const { return rows_.at(t); }
  std::span<const Bits> rows() const noexcept { return rows_; }
  std::span<const std::size_t> weights() const noexcept { return weights_; }
  std::size_t weight(std::size_t t) const { return weights_.at(t); }

  bool contains(std::size_t t, std::size_t i) const { return rows_.at(t).test(i); }

  /// Indices of the tests that include item i, ascending.
  std::vector<std::size_t> tests_containing(std::size_t i) const {
    if (i >= n_) throw std::out_of_range("item index out of range");
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < rows_.size(); ++t)
      if (rows_[t].test(i)) out.push_back(t);
    return out;
  }

  /// Column weight: the number of tests containing item i.
  std::size_t item_degree(std::size_t i) const { return tests_containing(i).size(); }

  std::size_t min_weight() const {
    std::size_t m = n_;
    for (auto w : weights_) m = std::min(m, w);
    return m;
  }

  friend bool operator==(const TestDesign& a, const TestDesign& b) {
    return a.n_ == b.n_ && a.rows_ == b.rows_;
  }

 private:
  TestDesign(std::vector<Bits> rows, std::size_t n) : n_(n), rows_(std::move(rows)) {
    weights_.reserve(rows_.size());
    for (const auto& r : rows_) {
      if (r.size() != n_) throw std::invalid_argument("row length does not match item count");
      weights_.push_back(r.count());
    }
  }

  // Reduction may legitimately consume every item.
  static TestDesign unchecked(std::vector<Bits> rows, std::size_t n) {
    return TestDesign(std::move(rows), n);
  }
  friend struct Reducer;

  std::size_t n_ = 0;
  std::vector<Bits> rows_;
  std::vector<std::size_t> weights_;
};

/// Builds a design from explicit item-index lists, one per test.
inline TestDesign new_design(const std::vector<std::vector<std::size_t>>& rows, std::size_t n) {
  if (n == 0) throw std::invalid_argument("design must have at least one item");
  std::vector<Bits> bits;
  bits.reserve(rows.size());
  for (const auto& items : rows) {
    Bits row(n);
    for (auto i : items) {
      if (i >= n) throw std::out_of_range("item index " + std::to_string(i) + " out of range");
      row.set(i);
    }
    bits.push_back(std::move(row));
  }
  return TestDesign::from_rows(std::move(bits), n);
}

inline std::vector<std::size_t> row_weights(const TestDesign& design) {
  return {design.weights().begin(), design.weights().end()};
}

/// Individual testing: the n x n identity design.
inline TestDesign gen_individual(std::size_t n) {
  if (n == 0) throw std::invalid_argument("design must have at least one item");
  std::vector<Bits> rows(n, Bits(n));
  for (std::size_t i = 0; i < n; ++i) rows[i].set(i);
  return TestDesign::from_rows(std::move(rows), n);
}

/// Bernoulli design: every entry is 1 independently with probability nu.
inline TestDesign gen_bernoulli(std::size_t n, std::size_t tests, double nu, std::uint64_t seed) {
  if (!(nu >= 0.0 && nu <= 1.0)) throw std::invalid_argument("inclusion probability must lie in [0,1]");
  if (n == 0) throw std::invalid_argument("design must have at least one item");
  Rng rng(seed);
  std::vector<Bits> rows(tests, Bits(n));
  for (auto& row : rows)
    for (std::size_t i = 0; i < n; ++i)
      if (rng.bernoulli(nu)) row.set(i);
  return TestDesign::from_rows(std::move(rows), n);
}

inline constexpr int kDoublyRegularRetries = 1000;

/// Doubly regular design: every item in exactly l tests, every test holding
/// exactly r distinct items.
///
/// Configuration-model sampling: the n*l item stubs are shuffled and dealt r
/// at a time into the T = n*l/r tests. A matching that puts an item twice in
/// one test is discarded and the whole matching is redrawn.
inline TestDesign gen_doubly_regular(std::size_t n, std::size_t l, std::size_t r, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("design must have at least one item");
  if (l == 0) throw std::invalid_argument("tests per item must be at least 1");
  if (r == 0 || r > n) throw std::invalid_argument("items per test must lie in [1, n]");
  if ((n * l) % r != 0) throw std::invalid_argument("n*l must be divisible by r");
  const std::size_t tests = n * l / r;

  Rng rng(seed);
  std::vector<std::size_t> stubs;
  stubs.reserve(n * l);
  for (std::size_t i = 0; i < n; ++i) stubs.insert(stubs.end(), l, i);

  for (int attempt = 0; attempt < kDoublyRegularRetries; ++attempt) {
    rng.shuffle(std::span<std::size_t>(stubs));
    std::vector<Bits> rows(tests, Bits(n));
    bool simple = true;
    for (std::size_t s = 0; s < stubs.size() && simple; ++s) {
      auto& row = rows[s / r];
      if (row.test(stubs[s])) simple = false;
      row.set(stubs[s]);
    }
    if (simple) return TestDesign::from_rows(std::move(rows), n);
    // Reset to a canonical order so each attempt depends only on the stream.
    for (std::size_t i = 0, s = 0; i < n; ++i)
      for (std::size_t k = 0; k < l; ++k) stubs[s++] = i;
  }
  throw construction_failed("doubly regular construction exhausted its retry budget");
}

// ---------------------------------------------------------------------------
// Reduction

struct ReductionLog {
  /// Original indices of tests dropped for having weight 0 (in removal order).
  std::vector<std::size_t> removed_empty_tests;
  /// (original item, original test) in removal order; the test had weight
  /// exactly 1 among the surviving items when it was removed.
  std::vector<std::pair<std::size_t, std::size_t>> resolved_items;
  /// Reduced index -> original index.
  std::vector<std::size_t> item_map;
  std::vector<std::size_t> test_map;
  std::size_t original_items = 0;
  std::size_t original_tests = 0;

  friend bool operator==(const ReductionLog&, const ReductionLog&) = default;
};

struct Reduction {
  TestDesign design;
  ReductionLog log;
};

struct Reducer {
  static Reduction run(const TestDesign& design) {
    const std::size_t n = design.items();
    const std::size_t T = design.tests();
    ReductionLog log;
    log.original_items = n;
    log.original_tests = T;

    Bits alive_items(n);
    alive_items.set();
    std::vector<bool> alive_tests(T, true);

    auto current_weight = [&](std::size_t t) { return (design.row(t) & alive_items).count(); };

    for (;;) {
      for (std::size_t t = 0; t < T; ++t) {
        if (alive_tests[t] && current_weight(t) == 0) {
          alive_tests[t] = false;
          log.removed_empty_tests.push_back(t);
        }
      }
      std::optional<std::size_t> single;
      for (std::size_t t = 0; t < T && !single; ++t)
        if (alive_tests[t] && current_weight(t) == 1) single = t;
      if (!single) break;
      const std::size_t item = (design.row(*single) & alive_items).find_first();
      alive_tests[*single] = false;
      alive_items.reset(item);
      log.resolved_items.emplace_back(item, *single);
    }

    for (std::size_t i = 0; i < n; ++i)
      if (alive_items.test(i)) log.item_map.push_back(i);
    for (std::size_t t = 0; t < T; ++t)
      if (alive_tests[t]) log.test_map.push_back(t);

    std::vector<Bits> rows;
    rows.reserve(log.test_map.size());
    for (auto t : log.test_map) {
      Bits row(log.item_map.size());
      for (std::size_t j = 0; j < log.item_map.size(); ++j)
        if (design.contains(t, log.item_map[j])) row.set(j);
      rows.push_back(std::move(row));
    }
    return {TestDesign::unchecked(std::move(rows), log.item_map.size()), std::move(log)};
  }
};

/// Strips weight-0 tests, then repeatedly removes the lowest-indexed weight-1
/// test together with its item, until every remaining test has weight >= 2.
inline Reduction reduce(const TestDesign& design) { return Reducer::run(design); }

/// Reassembles an estimate over the original items: reduced items come from
/// `reduced_estimate` (indexed by reduced item), resolved items take their
/// status from `resolved_status` (indexed by original item).
inline Bits lift_estimate(const ReductionLog& log, const Bits& reduced_estimate, const Bits& resolved_status) {
  if (reduced_estimate.size() != log.item_map.size())
    throw std::invalid_argument("reduced estimate has the wrong universe");
  if (resolved_status.size() != log.original_items)
    throw std::invalid_argument("resolved status has the wrong universe");
  Bits out(log.original_items);
  for (std::size_t j = 0; j < log.item_map.size(); ++j)
    if (reduced_estimate.test(j)) out.set(log.item_map[j]);
  for (const auto& [item, test] : log.resolved_items)
    if (resolved_status.test(item)) out.set(item);
  return out;
}

// ---------------------------------------------------------------------------
// Text format
//
//   T n
//   <n characters of 0/1>   x T
//
// Lines starting with '#' are comments. Character c of row t is x_{tc}.

inline TestDesign read_design(std::istream& in) {
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw parse_error("design file is empty");

  std::istringstream header(lines.front());
  long long T = -1, n = -1;
  std::string extra;
  if (!(header >> T >> n) || (header >> extra) || T < 0 || n < 1)
    throw parse_error("design header must be 'T n' with T >= 0 and n >= 1");
  if (lines.size() != static_cast<std::size_t>(T) + 1)
    throw parse_error("expected " + std::to_string(T) + " rows, found " + std::to_string(lines.size() - 1));

  std::vector<Bits> rows;
  rows.reserve(static_cast<std::size_t>(T));
  for (std::size_t t = 1; t < lines.size(); ++t) {
    const auto& text = lines[t];
    if (text.size() != static_cast<std::size_t>(n))
      throw parse_error("row " + std::to_string(t - 1) + " must have exactly " + std::to_string(n) + " characters");
    Bits row(static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < text.size(); ++c) {
      if (text[c] == '1') row.set(c);
      else if (text[c] != '0') throw parse_error("row " + std::to_string(t - 1) + " contains a character other than 0/1");
    }
    rows.push_back(std::move(row));
  }
  return TestDesign::from_rows(std::move(rows), static_cast<std::size_t>(n));
}

inline void write_design(std::ostream& out, const TestDesign& design) {
  out << design.tests() << ' ' << design.items() << '\n';
  for (const auto& row : design.rows()) {
    for (std::size_t c = 0; c < design.items(); ++c) out << (row.test(c) ? '1' : '0');
    out << '\n';
  }
}

inline std::string to_text(const TestDesign& design) {
  std::ostringstream out;
  write_design(out, design);
  return out.str();
}

inline TestDesign parse_design(const std::string& text) {
  std::istringstream in(text);
  return read_design(in);
}

}  // namespace pooltest
