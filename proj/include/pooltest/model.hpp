// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pooltest/design.hpp"
#include "pooltest/error.hpp"
#include "pooltest/rng.hpp"

namespace pooltest {

/// Independent defectivity prior: each item is defective with probability p.
class Prior {
 public:
  explicit Prior(double p) : p_(p), q_(1.0 - p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("prevalence p must lie strictly between 0 and 1");
  }

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }

  /// p^k q^(n-k): prior probability of one particular set of size k.
  double weight(std::size_t k, std::size_t n) const {
    return std::pow(p_, static_cast<double>(k)) * std::pow(q_, static_cast<double>(n - k));
  }

  /// Table of weight(k, n) for k = 0..n.
  std::vector<double> weight_table(std::size_t n) const {
    std::vector<double> w(n + 1);
    for (std::size_t k = 0; k <= n; ++k) w[k] = weight(k, n);
    return w;
  }

 private:
  double p_;
  double q_;
};

/// A subset of the items [0, n), stored as a bit vector.
class DefectiveSet {
 public:
  explicit DefectiveSet(std::size_t n) : members_(n) {}
  explicit DefectiveSet(Bits members) : members_(std::move(members)) {}

  static DefectiveSet from_indices(std::size_t n, const std::vector<std::size_t>& indices) {
    DefectiveSet set(n);
    for (auto i : indices) {
      if (i >= n) throw std::out_of_range("defective index out of range");
      set.members_.set(i);
    }
    return set;
  }

  /// Low n bits of `mask`, bit i = item i.
  static DefectiveSet from_mask(std::size_t n, std::uint64_t mask) {
    DefectiveSet set(n);
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1u) set.members_.set(i);
    return set;
  }

  std::size_t universe() const noexcept { return members_.size(); }
  std::size_t size() const { return members_.count(); }
  bool empty() const { return members_.none(); }
  bool contains(std::size_t i) const { return members_.test(i); }
  void insert(std::size_t i) { members_.set(i); }
  void erase(std::size_t i) { members_.reset(i); }
  const Bits& bits() const noexcept { return members_; }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    for (auto i = members_.find_first(); i != Bits::npos; i = members_.find_next(i)) out.push_back(i);
    return out;
  }

  bool is_subset_of(const DefectiveSet& other) const { return members_.is_subset_of(other.members_); }

  /// Comma-separated ascending indices; the empty set is the empty string.
  std::string to_string() const {
    std::string out;
    for (auto i : indices()) {
      if (!out.empty()) out += ',';
      out += std::to_string(i);
    }
    return out;
  }

  friend bool operator==(const DefectiveSet&, const DefectiveSet&) = default;

 private:
  Bits members_;
};

/// Test results y, one bit per test.
class OutcomeVector {
 public:
  explicit OutcomeVector(std::size_t tests) : bits_(tests) {}
  explicit OutcomeVector(Bits bits) : bits_(std::move(bits)) {}

  /// Parses a 0/1 string; character t is y_t.
  static OutcomeVector parse(std::string_view text) {
    OutcomeVector y(text.size());
    for (std::size_t t = 0; t < text.size(); ++t) {
      if (text[t] == '1') y.bits_.set(t);
      else if (text[t] != '0') throw parse_error("outcome string may only contain 0 and 1");
    }
    return y;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t t) const { return bits_.test(t); }
  bool positive(std::size_t t) const { return bits_.test(t); }
  void set(std::size_t t, bool value = true) { bits_.set(t, value); }
  const Bits& bits() const noexcept { return bits_; }

  std::string to_string() const {
    std::string out(bits_.size(), '0');
    for (std::size_t t = 0; t < bits_.size(); ++t)
      if (bits_.test(t)) out[t] = '1';
    return out;
  }

  friend bool operator==(const OutcomeVector&, const OutcomeVector&) = default;

 private:
  Bits bits_;
};

/// Draws each item independently with probability p, from the given stream.
inline DefectiveSet sample_defective_set(std::size_t n, const Prior& prior, Rng& rng) {
  DefectiveSet set(n);
  for (std::size_t i = 0; i < n; ++i)
    if (rng.bernoulli(prior.p())) set.insert(i);
  return set;
}

inline DefectiveSet sample_defective_set(std::size_t n, const Prior& prior, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("item count must be at least 1");
  Rng rng(seed);
  return sample_defective_set(n, prior, rng);
}

/// OR channel: y_t = 1 iff test t contains a defective item.
inline OutcomeVector outcomes(const TestDesign& design, const DefectiveSet& defectives) {
  if (defectives.universe() != design.items())
    throw std::invalid_argument("defective set universe does not match the design");
  OutcomeVector y(design.tests());
  for (std::size_t t = 0; t < design.tests(); ++t)
    if (design.row(t).intersects(defectives.bits())) y.set(t);
  return y;
}

}  // namespace pooltest
