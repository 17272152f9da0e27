// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <type_traits>
#include <optional>
#include <string>

#include <json.hpp>

#include "pooltest/bounds.hpp"
#include "pooltest/design.hpp"
#include "pooltest/disguise.hpp"
#include "pooltest/sim.hpp"

// JSON (de)serialisation of the report types. Non-finite reals, which only
// arise as -inf log-bounds, are written as the strings "-inf"/"inf"/"nan".

namespace pooltest {

namespace detail {

inline nlohmann::json real_to_json(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x < 0 ? "-inf" : "inf";
}

inline double real_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw nlohmann::json::type_error::create(302, "expected a real number", &j);
}

template <typename T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (!v) {
    j[key] = nullptr;
  } else if constexpr (std::is_floating_point_v<T>) {
    j[key] = real_to_json(*v);
  } else {
    j[key] = *v;
  }
}

template <typename T>
void get_optional(const nlohmann::json& j, const char* key, std::optional<T>& v) {
  if (!j.contains(key) || j.at(key).is_null()) {
    v.reset();
  } else if constexpr (std::is_floating_point_v<T>) {
    v = real_from_json(j.at(key));
  } else {
    v = j.at(key).get<T>();
  }
}

}  // namespace detail

NLOHMANN_JSON_SERIALIZE_ENUM(DecoderId, {{DecoderId::COMP, "comp"}, {DecoderId::DD, "dd"}, {DecoderId::MAP, "map"}})

inline void to_json(nlohmann::json& j, const BoundReport& r) {
  j = {{"p", r.p}, {"q", r.q}, {"L_star", r.l_star}, {"w_star", r.w_star}, {"epsilon", r.epsilon}};
  detail::put_optional(j, "delta", r.delta);
  detail::put_optional(j, "epsilon_delta", r.epsilon_delta);
  detail::put_optional(j, "n", r.n);
  detail::put_optional(j, "counting_bound", r.counting_bound);
}

inline void from_json(const nlohmann::json& j, BoundReport& r) {
  r.p = j.at("p").get<double>();
  r.q = j.at("q").get<double>();
  r.l_star = detail::real_from_json(j.at("L_star"));
  r.w_star = j.at("w_star").get<std::size_t>();
  r.epsilon = j.at("epsilon").get<double>();
  detail::get_optional(j, "delta", r.delta);
  detail::get_optional(j, "epsilon_delta", r.epsilon_delta);
  detail::get_optional(j, "n", r.n);
  detail::get_optional(j, "counting_bound", r.counting_bound);
}

inline void to_json(nlohmann::json& j, const ItemDisguise& r) {
  j = {{"item", r.item}, {"L_i", detail::real_to_json(r.log_bound)}, {"bound", r.fkg_bound}};
  detail::put_optional(j, "exact", r.exact);
}

inline void from_json(const nlohmann::json& j, ItemDisguise& r) {
  r.item = j.at("item").get<std::size_t>();
  r.log_bound = detail::real_from_json(j.at("L_i"));
  r.fkg_bound = j.at("bound").get<double>();
  detail::get_optional(j, "exact", r.exact);
}

inline void to_json(nlohmann::json& j, const DisguiseReport& r) {
  j = {{"p", r.p},
       {"tests", r.tests},
       {"items", r.items},
       {"per_item", r.per_item},
       {"L_bar", detail::real_to_json(r.mean_log_bound)},
       {"L_bar_by_tests", detail::real_to_json(r.mean_log_bound_by_tests)},
       {"L_star", r.l_star},
       {"w_star", r.w_star},
       {"chain_applicable", r.chain_applicable}};
  detail::put_optional(j, "min_test_term", r.min_test_term);
  detail::put_optional(j, "scaled_min_test_term", r.scaled_min_test_term);
}

inline void from_json(const nlohmann::json& j, DisguiseReport& r) {
  r.p = j.at("p").get<double>();
  r.tests = j.at("tests").get<std::size_t>();
  r.items = j.at("items").get<std::size_t>();
  r.per_item = j.at("per_item").get<std::vector<ItemDisguise>>();
  r.mean_log_bound = detail::real_from_json(j.at("L_bar"));
  r.mean_log_bound_by_tests = detail::real_from_json(j.at("L_bar_by_tests"));
  r.l_star = j.at("L_star").get<double>();
  r.w_star = j.at("w_star").get<std::size_t>();
  r.chain_applicable = j.at("chain_applicable").get<bool>();
  detail::get_optional(j, "min_test_term", r.min_test_term);
  detail::get_optional(j, "scaled_min_test_term", r.scaled_min_test_term);
}

inline void to_json(nlohmann::json& j, const SimResult& r) {
  j = {{"trials", r.trials}, {"errors", r.errors},   {"estimate", r.estimate},
       {"ci_low", r.ci_low}, {"ci_high", r.ci_high}, {"seed", r.seed}};
  detail::put_optional(j, "decoder", r.decoder);
}

inline void from_json(const nlohmann::json& j, SimResult& r) {
  r.trials = j.at("trials").get<std::uint64_t>();
  r.errors = j.at("errors").get<std::uint64_t>();
  r.estimate = j.at("estimate").get<double>();
  r.ci_low = j.at("ci_low").get<double>();
  r.ci_high = j.at("ci_high").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  detail::get_optional(j, "decoder", r.decoder);
}

inline void to_json(nlohmann::json& j, const LemmaCheck& c) {
  j = {{"item", c.item}, {"exact", c.exact}, {"bound", c.bound}, {"pass", c.pass}};
}

inline void from_json(const nlohmann::json& j, LemmaCheck& c) {
  c.item = j.at("item").get<std::size_t>();
  c.exact = j.at("exact").get<double>();
  c.bound = j.at("bound").get<double>();
  c.pass = j.at("pass").get<bool>();
}

inline void to_json(nlohmann::json& j, const VerificationReport& r) {
  j = {{"tests", r.tests},
       {"items", r.items},
       {"min_weight", r.min_weight},
       {"p", r.p},
       {"floor_applicable", r.floor_applicable},
       {"epsilon_floor", r.epsilon_floor},
       {"observed_error", r.observed_error},
       {"method", r.method},
       {"decoder", r.decoder},
       {"lemma_checks", r.lemma_checks},
       {"lemma_skipped", r.lemma_skipped},
       {"lemma_pass", r.lemma_pass},
       {"theorem_pass", r.theorem_pass}};
  detail::put_optional(j, "observed_ci_high", r.observed_ci_high);
}

inline void from_json(const nlohmann::json& j, VerificationReport& r) {
  r.tests = j.at("tests").get<std::size_t>();
  r.items = j.at("items").get<std::size_t>();
  r.min_weight = j.at("min_weight").get<std::size_t>();
  r.p = j.at("p").get<double>();
  r.floor_applicable = j.at("floor_applicable").get<bool>();
  r.epsilon_floor = j.at("epsilon_floor").get<double>();
  r.observed_error = j.at("observed_error").get<double>();
  r.method = j.at("method").get<std::string>();
  r.decoder = j.at("decoder").get<DecoderId>();
  r.lemma_checks = j.at("lemma_checks").get<std::vector<LemmaCheck>>();
  r.lemma_skipped = j.at("lemma_skipped").get<std::size_t>();
  r.lemma_pass = j.at("lemma_pass").get<bool>();
  r.theorem_pass = j.at("theorem_pass").get<bool>();
  detail::get_optional(j, "observed_ci_high", r.observed_ci_high);
}

inline void to_json(nlohmann::json& j, const ReductionLog& log) {
  j = {{"removed_empty_tests", log.removed_empty_tests},
       {"resolved_items", log.resolved_items},
       {"item_map", log.item_map},
       {"test_map", log.test_map},
       {"original_items", log.original_items},
       {"original_tests", log.original_tests}};
}

inline void from_json(const nlohmann::json& j, ReductionLog& log) {
  log.removed_empty_tests = j.at("removed_empty_tests").get<std::vector<std::size_t>>();
  log.resolved_items = j.at("resolved_items").get<std::vector<std::pair<std::size_t, std::size_t>>>();
  log.item_map = j.at("item_map").get<std::vector<std::size_t>>();
  log.test_map = j.at("test_map").get<std::vector<std::size_t>>();
  log.original_items = j.at("original_items").get<std::size_t>();
  log.original_tests = j.at("original_tests").get<std::size_t>();
}

}  // namespace pooltest
