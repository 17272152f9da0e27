// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pooltest/design.hpp"
#include "pooltest/error.hpp"
#include "pooltest/model.hpp"

namespace pooltest {

enum class DecoderId { COMP, DD, MAP };

inline std::string_view to_string(DecoderId id) {
  switch (id) {
    case DecoderId::COMP: return "comp";
    case DecoderId::DD: return "dd";
    case DecoderId::MAP: return "map";
  }
  return "?";
}

inline std::optional<DecoderId> parse_decoder(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "comp") return DecoderId::COMP;
  if (lower == "dd") return DecoderId::DD;
  if (lower == "map") return DecoderId::MAP;
  return std::nullopt;
}

namespace detail {

inline void check_length(const TestDesign& design, const OutcomeVector& y) {
  if (y.size() != design.tests())
    throw std::invalid_argument("outcome vector has " + std::to_string(y.size()) + " entries, design has " +
                                std::to_string(design.tests()) + " tests");
}

}  // namespace detail

/// COMP: every item that appears in a negative test is cleared; all other
/// items (including untested ones) are declared defective.
inline DefectiveSet decode_comp(const TestDesign& design, const OutcomeVector& y) {
  detail::check_length(design, y);
  Bits possible(design.items());
  possible.set();
  for (std::size_t t = 0; t < design.tests(); ++t)
    if (!y.positive(t)) possible -= design.row(t);
  return DefectiveSet(std::move(possible));
}

/// DD: a possible defective is declared defective when it is the only
/// possible defective in some positive test.
inline DefectiveSet decode_dd(const TestDesign& design, const OutcomeVector& y) {
  const auto possible = decode_comp(design, y);
  Bits definite(design.items());
  for (std::size_t t = 0; t < design.tests(); ++t) {
    if (!y.positive(t)) continue;
    const Bits candidates = design.row(t) & possible.bits();
    if (candidates.count() == 1) definite.set(candidates.find_first());
  }
  return DefectiveSet(std::move(definite));
}

inline constexpr std::size_t kMapItemBudget = 30;

/// Total order used by MAP among sets consistent with the same outcome.
///
/// Higher prior weight wins. For p <= 1/2 the weight p^k q^(n-k) is
/// nonincreasing in k, so fewer defectives win; for p > 1/2 more defectives
/// win. Equal sizes fall back to lexicographic order of the sorted index
/// lists, i.e. the set holding the lowest index where they differ.
inline bool map_prefers(std::uint64_t a, std::uint64_t b, const Prior& prior) {
  const int ka = std::popcount(a), kb = std::popcount(b);
  if (ka != kb) return prior.p() <= 0.5 ? ka < kb : ka > kb;
  const std::uint64_t diff = a ^ b;
  if (diff == 0) return false;
  return (a & (diff & (~diff + 1))) != 0;
}

/// MAP: the consistent set of maximal prior weight, ties broken as in
/// map_prefers.
///
/// Any consistent set lies inside the COMP set, so only its subsets are
/// searched. Sizes are visited in order of decreasing prior weight and each
/// size in lexicographic order, so the first consistent set found is the
/// answer.
inline DefectiveSet decode_map(const TestDesign& design, const OutcomeVector& y, const Prior& prior) {
  detail::check_length(design, y);
  if (design.items() > kMapItemBudget) throw budget_exceeded("MAP decoding is limited to 30 items");

  const auto possible = decode_comp(design, y).indices();
  const std::size_t m = possible.size();

  // Positive tests projected onto the possible-defective positions.
  std::vector<std::uint64_t> needs;
  for (std::size_t t = 0; t < design.tests(); ++t) {
    if (!y.positive(t)) continue;
    std::uint64_t mask = 0;
    for (std::size_t k = 0; k < m; ++k)
      if (design.contains(t, possible[k])) mask |= std::uint64_t{1} << k;
    if (mask == 0) throw std::invalid_argument("no defective set is consistent with the outcomes");
    needs.push_back(mask);
  }

  auto consistent = [&](std::uint64_t pattern) {
    for (auto mask : needs)
      if ((mask & pattern) == 0) return false;
    return true;
  };

  auto to_set = [&](std::uint64_t pattern) {
    DefectiveSet out(design.items());
    for (std::size_t k = 0; k < m; ++k)
      if ((pattern >> k) & 1u) out.insert(possible[k]);
    return out;
  };

  // Visit k-subsets of [0, m) in lexicographic order of their index lists.
  auto search_level = [&](std::size_t k) -> std::optional<std::uint64_t> {
    if (k == 0) return consistent(0) ? std::optional<std::uint64_t>(0) : std::nullopt;
    std::vector<std::size_t> pick(k);
    for (std::size_t j = 0; j < k; ++j) pick[j] = j;
    for (;;) {
      std::uint64_t pattern = 0;
      for (auto j : pick) pattern |= std::uint64_t{1} << j;
      if (consistent(pattern)) return pattern;
      std::size_t j = k;
      while (j > 0 && pick[j - 1] == m - k + (j - 1)) --j;
      if (j == 0) return std::nullopt;
      ++pick[j - 1];
      for (std::size_t r = j; r < k; ++r) pick[r] = pick[r - 1] + 1;
    }
  };

  if (prior.p() <= 0.5) {
    for (std::size_t k = 0; k <= m; ++k)
      if (auto hit = search_level(k)) return to_set(*hit);
  } else {
    for (std::size_t k = m + 1; k-- > 0;)
      if (auto hit = search_level(k)) return to_set(*hit);
  }
  throw std::invalid_argument("no defective set is consistent with the outcomes");
}

inline DefectiveSet decode(DecoderId id, const TestDesign& design, const OutcomeVector& y, const Prior& prior) {
  switch (id) {
    case DecoderId::COMP: return decode_comp(design, y);
    case DecoderId::DD: return decode_dd(design, y);
    case DecoderId::MAP: return decode_map(design, y, prior);
  }
  throw std::invalid_argument("unknown decoder");
}

}  // namespace pooltest
