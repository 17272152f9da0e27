// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pooltest/pooltest.hpp"
#include "pooltest/serialize.hpp"

namespace pooltest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolation = 2;

/// Twelve significant digits, '.' separator, "-inf" for log(0).
inline std::string fmt_real(double x) {
  if (x == kNegInf) return "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string fmt_optional(const std::optional<double>& x) { return x ? fmt_real(*x) : ""; }

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

inline TestDesign load_design(const std::string& path, std::istream& in) {
  if (path == "-") return read_design(in);
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open design file '" + path + "'");
  return read_design(file);
}

/// Writes to `path`, or to the given stream when path is empty or "-".
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open output file '" + path + "'");
  fn(static_cast<std::ostream&>(file));
}

/// Parsed command line. Fields not used by the chosen subcommand keep their
/// defaults.
struct Config {
  std::string subcommand;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool json = false;
  std::string output;

  std::string design_path;
  double p = 0.5;
  std::optional<double> delta;
  std::optional<std::size_t> n;
  std::string decoder = "map";
  std::string outcome;
  std::uint64_t trials = 10'000;
  bool exact = false;

  std::string kind;
  std::size_t tests = 0;
  double nu = 0.5;
  std::size_t l = 0;
  std::size_t r = 0;

  double p_min = 0.01;
  double p_max = 0.99;
  std::size_t steps = 99;
};

namespace detail {

inline DecoderId decoder_or_throw(const std::string& name) {
  auto id = parse_decoder(name);
  if (!id) throw CLI::ValidationError("--decoder", "unknown decoder '" + name + "' (expected comp, dd or map)");
  return *id;
}

inline void print_bound(std::ostream& out, const BoundReport& r) {
  out << "p               " << fmt_real(r.p) << '\n'
      << "q               " << fmt_real(r.q) << '\n'
      << "L_star          " << fmt_real(r.l_star) << '\n'
      << "w_star          " << r.w_star << '\n'
      << "epsilon         " << fmt_real(r.epsilon) << '\n';
  if (r.delta) {
    out << "delta           " << fmt_real(*r.delta) << '\n'
        << "epsilon_delta   " << fmt_real(*r.epsilon_delta) << '\n';
  }
  if (r.n) {
    out << "n               " << *r.n << '\n'
        << "counting_bound  " << fmt_real(*r.counting_bound) << '\n';
  }
}

inline void print_sim(std::ostream& out, const SimResult& r) {
  out << "decoder   " << (r.decoder ? to_string(*r.decoder) : "-") << '\n'
      << "trials    " << r.trials << '\n'
      << "errors    " << r.errors << '\n'
      << "estimate  " << fmt_real(r.estimate) << '\n'
      << "ci_low    " << fmt_real(r.ci_low) << '\n'
      << "ci_high   " << fmt_real(r.ci_high) << '\n'
      << "seed      " << r.seed << '\n';
}

inline void print_disguise(std::ostream& out, const DisguiseReport& r) {
  out << "item,L_i,bound,exact\n";
  for (const auto& it : r.per_item)
    out << it.item << ',' << fmt_real(it.log_bound) << ',' << fmt_real(it.fkg_bound) << ','
        << fmt_optional(it.exact) << '\n';
  out << '\n'
      << "quantity,value\n"
      << "L_bar," << fmt_real(r.mean_log_bound) << '\n'
      << "L_bar_by_tests," << fmt_real(r.mean_log_bound_by_tests) << '\n'
      << "max_L_i," << (r.per_item.empty() ? "" : fmt_real(r.max_log_bound())) << '\n'
      << "scaled_min_test_term," << fmt_optional(r.scaled_min_test_term) << '\n'
      << "min_test_term," << fmt_optional(r.min_test_term) << '\n'
      << "L_star," << fmt_real(r.l_star) << '\n'
      << "w_star," << r.w_star << '\n'
      << "chain_applicable," << (r.chain_applicable ? "true" : "false") << '\n';
}

inline void print_verification(std::ostream& out, const VerificationReport& r) {
  out << "design          T=" << r.tests << " n=" << r.items << " min_weight=" << r.min_weight << '\n'
      << "p               " << fmt_real(r.p) << '\n'
      << "epsilon_floor   " << fmt_real(r.epsilon_floor) << '\n'
      << "observed_error  " << fmt_real(r.observed_error) << " (" << r.method << ", " << to_string(r.decoder)
      << ")\n";
  if (r.observed_ci_high) out << "observed_high   " << fmt_real(*r.observed_ci_high) << '\n';
  if (!r.floor_applicable)
    out << "theorem         not applicable (T >= n)\n";
  else
    out << "theorem         " << (r.theorem_pass ? "pass" : "FAIL") << '\n';
  out << "lemma           " << (r.lemma_pass ? "pass" : "FAIL") << " (" << r.lemma_checks.size() << " checked, "
      << r.lemma_skipped << " skipped)\n";
  for (const auto& c : r.lemma_checks)
    if (!c.pass) out << "  item " << c.item << ": exact " << fmt_real(c.exact) << " < bound " << fmt_real(c.bound) << '\n';
}

}  // namespace detail

inline int dispatch(const Config& cfg, Streams io) {
  const auto& cmd = cfg.subcommand;

  if (cmd == "gen") {
    TestDesign design = [&] {
      if (cfg.kind == "individual") return gen_individual(*cfg.n);
      if (cfg.kind == "bernoulli") return gen_bernoulli(*cfg.n, cfg.tests, cfg.nu, cfg.seed);
      if (cfg.kind == "doubly-regular") return gen_doubly_regular(*cfg.n, cfg.l, cfg.r, cfg.seed);
      throw CLI::ValidationError("--kind", "unknown design kind '" + cfg.kind + "'");
    }();
    with_output(cfg.output, io.out, [&](std::ostream& os) { write_design(os, design); });
    return kExitOk;
  }

  if (cmd == "reduce") {
    const auto reduction = reduce(load_design(cfg.design_path, io.in));
    with_output(cfg.output, io.out, [&](std::ostream& os) {
      if (cfg.json) {
        nlohmann::json rows = nlohmann::json::array();
        std::istringstream text(to_text(reduction.design));
        std::string line;
        std::getline(text, line);
        while (std::getline(text, line)) rows.push_back(line);
        nlohmann::json j = {{"tests", reduction.design.tests()},
                            {"items", reduction.design.items()},
                            {"rows", rows},
                            {"log", reduction.log}};
        os << j.dump(2) << '\n';
        return;
      }
      const auto& log = reduction.log;
      os << "# removed empty tests:";
      for (auto t : log.removed_empty_tests) os << ' ' << t;
      os << "\n# resolved (item:test):";
      for (const auto& [i, t] : log.resolved_items) os << ' ' << i << ':' << t;
      os << "\n# item map:";
      for (auto i : log.item_map) os << ' ' << i;
      os << "\n# test map:";
      for (auto t : log.test_map) os << ' ' << t;
      os << '\n';
      write_design(os, reduction.design);
    });
    return kExitOk;
  }

  if (cmd == "bound") {
    const auto report = bound_report(Prior(cfg.p), cfg.delta, cfg.n);
    if (cfg.json)
      io.out << nlohmann::json(report).dump(2) << '\n';
    else
      detail::print_bound(io.out, report);
    return kExitOk;
  }

  if (cmd == "figure") {
    const auto curve = figure_curve(cfg.p_min, cfg.p_max, cfg.steps);
    with_output(cfg.output, io.out, [&](std::ostream& os) {
      os << "p,L_star,w_star,epsilon\n";
      for (const auto& pt : curve)
        os << fmt_real(pt.p) << ',' << fmt_real(pt.l_star) << ',' << pt.w_star << ',' << fmt_real(pt.epsilon) << '\n';
    });
    return kExitOk;
  }

  if (cmd == "disguise") {
    const auto design = load_design(cfg.design_path, io.in);
    const auto report = mean_log_bound(design, Prior(cfg.p), DisguiseOptions{.exact = cfg.exact});
    with_output(cfg.output, io.out, [&](std::ostream& os) {
      if (cfg.json)
        os << nlohmann::json(report).dump(2) << '\n';
      else
        detail::print_disguise(os, report);
    });
    return kExitOk;
  }

  if (cmd == "decode") {
    const auto design = load_design(cfg.design_path, io.in);
    const auto estimate =
        decode(detail::decoder_or_throw(cfg.decoder), design, OutcomeVector::parse(cfg.outcome), Prior(cfg.p));
    if (cfg.json)
      io.out << nlohmann::json{{"decoder", cfg.decoder}, {"estimate", estimate.indices()}}.dump() << '\n';
    else
      io.out << estimate.to_string() << '\n';
    return kExitOk;
  }

  if (cmd == "exact-error") {
    const auto design = load_design(cfg.design_path, io.in);
    const auto id = detail::decoder_or_throw(cfg.decoder);
    const double err = exact_average_error(design, Prior(cfg.p), id);
    if (cfg.json)
      io.out << nlohmann::json{{"decoder", id}, {"p", cfg.p}, {"error", err}}.dump() << '\n';
    else
      io.out << fmt_real(err) << '\n';
    return kExitOk;
  }

  if (cmd == "simulate") {
    const auto design = load_design(cfg.design_path, io.in);
    const auto result = monte_carlo_error(design, Prior(cfg.p), detail::decoder_or_throw(cfg.decoder), cfg.trials,
                                          cfg.seed, cfg.workers);
    if (cfg.json)
      io.out << nlohmann::json(result).dump(2) << '\n';
    else
      detail::print_sim(io.out, result);
    return kExitOk;
  }

  if (cmd == "verify") {
    const auto design = load_design(cfg.design_path, io.in);
    const auto report = verify_theorem(
        design, Prior(cfg.p), VerifyOptions{.trials = cfg.trials, .seed = cfg.seed, .workers = cfg.workers});
    if (cfg.json)
      io.out << nlohmann::json(report).dump(2) << '\n';
    else
      detail::print_verification(io.out, report);
    return report.pass() ? kExitOk : kExitViolation;
  }

  throw CLI::ValidationError("subcommand", "unknown subcommand '" + cmd + "'");
}

/// Parses argv (argv[0] is the program name) and runs one subcommand.
/// Exit codes: 0 success, 1 usage or input error, 2 verification failure.
inline int run(const std::vector<std::string>& argv, Streams io) {
  Config cfg;
  CLI::App app{"Nonadaptive group testing: designs, decoders, error probabilities and lower bounds", "pooltest"};
  app.require_subcommand(1, 1);

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "Master seed")->envname("POOLTEST_SEED");
  };
  auto add_p = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("-p,--prevalence", cfg.p, "Defectivity probability p in (0,1)")
                    ->check(CLI::Range(0.0, 1.0));
    if (required) opt->required();
  };
  auto add_design = [&](CLI::App* sub) {
    sub->add_option("--design", cfg.design_path, "Design file ('-' for stdin)")->required();
  };
  auto add_decoder = [&](CLI::App* sub) {
    sub->add_option("--decoder", cfg.decoder, "comp, dd or map")->capture_default_str();
  };
  auto add_workers = [&](CLI::App* sub) {
    sub->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  };
  auto add_trials = [&](CLI::App* sub) {
    sub->add_option("--trials", cfg.trials, "Monte Carlo trials")->check(CLI::PositiveNumber)->capture_default_str();
  };
  auto add_json = [&](CLI::App* sub) { sub->add_flag("--json", cfg.json, "Emit JSON"); };
  auto add_output = [&](CLI::App* sub) { sub->add_option("-o,--output", cfg.output, "Output file ('-' for stdout)"); };

  auto* gen = app.add_subcommand("gen", "Generate a test design");
  gen->add_option("--kind", cfg.kind, "individual, bernoulli or doubly-regular")
      ->required()
      ->check(CLI::IsMember({"individual", "bernoulli", "doubly-regular"}));
  gen->add_option("-n,--items", cfg.n, "Number of items")->required()->check(CLI::PositiveNumber);
  gen->add_option("-T,--tests", cfg.tests, "Number of tests (bernoulli)");
  gen->add_option("--nu", cfg.nu, "Inclusion probability (bernoulli)")->check(CLI::Range(0.0, 1.0));
  gen->add_option("-l", cfg.l, "Tests per item (doubly-regular)");
  gen->add_option("-r", cfg.r, "Items per test (doubly-regular)");
  add_seed(gen);
  add_output(gen);

  auto* red = app.add_subcommand("reduce", "Strip weight-0 and weight-1 tests");
  add_design(red);
  add_output(red);
  add_json(red);

  auto* bnd = app.add_subcommand("bound", "Error floor epsilon(p) and related bounds");
  add_p(bnd, true);
  bnd->add_option("--delta", cfg.delta, "Rate slack delta in [0,1)");
  bnd->add_option("-n,--items", cfg.n, "Item count for the counting bound")->check(CLI::PositiveNumber);
  add_json(bnd);

  auto* fig = app.add_subcommand("figure", "Emit epsilon(p) curve data as CSV");
  fig->add_option("--p-min", cfg.p_min)->capture_default_str();
  fig->add_option("--p-max", cfg.p_max)->capture_default_str();
  fig->add_option("--steps", cfg.steps)->check(CLI::PositiveNumber)->capture_default_str();
  add_output(fig);

  auto* dis = app.add_subcommand("disguise", "Per-item disguise bounds and the mean-bound chain");
  add_design(dis);
  add_p(dis, true);
  dis->add_flag("--exact", cfg.exact, "Also enumerate exact disguise probabilities");
  add_output(dis);
  add_json(dis);

  auto* dec = app.add_subcommand("decode", "Decode one outcome vector");
  add_design(dec);
  dec->add_option("--outcome", cfg.outcome, "Outcome string, e.g. 0110")->required();
  add_decoder(dec);
  add_p(dec, false);
  add_json(dec);

  auto* ex = app.add_subcommand("exact-error", "Exact average error probability");
  add_design(ex);
  add_decoder(ex);
  add_p(ex, true);
  add_json(ex);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo average error probability");
  add_design(sim);
  add_decoder(sim);
  add_p(sim, true);
  add_trials(sim);
  add_seed(sim);
  add_workers(sim);
  add_json(sim);

  auto* ver = app.add_subcommand("verify", "Check the error floor and disguise bounds on a design");
  add_design(ver);
  add_p(ver, true);
  add_trials(ver);
  add_seed(ver);
  add_workers(ver);
  add_json(ver);

  std::vector<std::string> reversed(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
    cfg.subcommand = app.get_subcommands().front()->get_name();
    if (cfg.subcommand == "decode" && cfg.decoder == "map" && dec->count("-p") == 0)
      throw CLI::RequiredError("-p is required for the map decoder");
    if (cfg.subcommand == "gen" && cfg.kind == "bernoulli" && gen->count("-T") == 0)
      throw CLI::RequiredError("-T is required for bernoulli designs");
    if (cfg.subcommand == "gen" && cfg.kind == "doubly-regular" && (gen->count("-l") == 0 || gen->count("-r") == 0))
      throw CLI::RequiredError("-l and -r are required for doubly-regular designs");
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    io.out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    io.err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    io.err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    return dispatch(cfg, io);
  } catch (const CLI::Error& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace pooltest::cli
