#pragma once

// Declarative experiment files: which domain, strategies and schedule to use,
// the sweep of shop counts, and which checks to run.
//
//   {
//     "name": "copy-rival",
//     "domain": {"kind": "torus-grid", "resolution": 32, "dim": 2},
//     "ours": {"kind": "myopic"},
//     "rival": {"kind": "copy"},
//     "schedule": {"kind": "doubling"},
//     "rounds": 64,
//     "sweep": [8, 16, 32, 64],
//     "checks": ["thm44"],
//     "params": {"thm44": {"n_max": 64}},
//     "output": "report.jsonl",
//     "csv": "report.csv"
//   }
//
// "domain" may instead be {"file": "path"} (relative to the experiment file)
// or a built-in name string such as "torus-grid-16-d2".

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcs/domain.hpp"
#include "rcs/error.hpp"
#include "rcs/green.hpp"
#include "rcs/harness.hpp"
#include "rcs/placement.hpp"

namespace rcs {

/// Seed of the total-mass fuzz cases when the file gives none.
inline constexpr std::uint64_t kDefaultFuzzSeed = 20240611;

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{"lemma43", "prop41", "cor42", "decay",
                                              "thm32",   "prop34", "thm44", "thm46"};
  return names;
}

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << content;
  if (!out.flush()) throw IoError("cannot write " + p.string());
}

inline nlohmann::json parse_json(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

/// Domain from a JSON value: a built-in name, {"file": path}, or {"kind","resolution","dim"}.
inline Domain load_domain(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  try {
    if (j.is_string()) return domain_from_name(j.get<std::string>());
    if (j.contains("file")) {
      const std::filesystem::path p = base / j.at("file").get<std::string>();
      return Domain::from_json(parse_json(read_file(p), p.string()));
    }
    if (j.contains("sites")) return Domain::from_json(j);
    return build_domain(parse_domain_kind(j.at("kind").get<std::string>()), j.at("resolution").get<int>(),
                        j.value("dim", 2));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("domain spec: ") + e.what());
  }
}

struct ExperimentSpec {
  std::string name;
  nlohmann::json domain;
  StrategySpec ours;
  std::optional<StrategySpec> rival;
  std::optional<GrowthSchedule> schedule;
  long rounds = 0;
  std::vector<long> sweep;
  std::vector<std::string> checks;
  nlohmann::json params = nlohmann::json::object();
  Normalization normalization = Normalization::TotalCount;
  std::optional<std::string> output;
  std::optional<std::string> csv;
  std::filesystem::path base;

  static ExperimentSpec from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
    try {
      if (!j.is_object()) throw FormatError("experiment: expected a JSON object");
      ExperimentSpec s;
      s.base = base;
      s.name = j.value("name", std::string("experiment"));
      s.domain = j.at("domain");
      // Without an explicit choice our side plays myopically.
      s.ours.kind = StrategySpec::Kind::Myopic;
      if (j.contains("ours")) s.ours = StrategySpec::from_json(j.at("ours"));
      if (j.contains("rival")) s.rival = StrategySpec::from_json(j.at("rival"));
      if (j.contains("schedule")) s.schedule = GrowthSchedule::from_json(j.at("schedule"));
      s.rounds = j.value("rounds", 0L);
      if (s.rounds < 0) throw FormatError("experiment: rounds must be >= 0");
      if (j.contains("sweep")) s.sweep = j.at("sweep").get<std::vector<long>>();
      for (std::size_t i = 0; i < s.sweep.size(); ++i) {
        if (s.sweep[i] < 1) throw FormatError("experiment: sweep values must be positive");
        if (i > 0 && s.sweep[i] <= s.sweep[i - 1]) throw FormatError("experiment: sweep must be strictly increasing");
      }
      if (j.contains("checks")) s.checks = j.at("checks").get<std::vector<std::string>>();
      for (const auto& c : s.checks) {
        if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end()) {
          throw FormatError("experiment: unknown check '" + c + "'");
        }
      }
      if (j.contains("params")) {
        s.params = j.at("params");
        if (!s.params.is_object()) throw FormatError("experiment: params must be an object");
      }
      const auto norm = j.value("normalization", std::string("total-count"));
      if (norm == "total-count") s.normalization = Normalization::TotalCount;
      else if (norm == "per-brand") s.normalization = Normalization::PerBrand;
      else throw FormatError("experiment: unknown normalization '" + norm + "'");
      if (j.contains("output")) s.output = j.at("output").get<std::string>();
      if (j.contains("csv")) s.csv = j.at("csv").get<std::string>();
      return s;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("experiment: ") + e.what());
    }
  }

  static ExperimentSpec load(const std::filesystem::path& file) {
    return from_json(parse_json(read_file(file), file.string()), file.parent_path());
  }

  Domain build_domain() const { return load_domain(domain, base); }

  /// Parameters of one check (empty object when absent).
  nlohmann::json check_params(const std::string& check) const {
    return params.contains(check) ? params.at(check) : nlohmann::json::object();
  }

  std::filesystem::path resolve(const std::string& p) const { return base / p; }
};

namespace detail {

template <class T>
T param(const nlohmann::json& p, const char* key, T fallback) {
  try {
    return p.contains(key) ? p.at(key).get<T>() : fallback;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("parameter '") + key + "': " + e.what());
  }
}

inline ForbiddenRegion region_param(const nlohmann::json& p, const char* check) {
  if (!p.contains("region")) throw FormatError(std::string(check) + ": missing region");
  return ForbiddenRegion::from_json(p.at("region"));
}

inline std::vector<long> sweep_or(const ExperimentSpec& s, const nlohmann::json& p, const char* key,
                                  std::vector<long> fallback) {
  if (p.contains(key)) return param<std::vector<long>>(p, key, {});
  if (!s.sweep.empty()) return s.sweep;
  return fallback;
}

}  // namespace detail

/// Plays the configured match and reports one score record per round.
inline Report run_simulation(const ExperimentSpec& s, const Domain& d, const GreenKernel& g) {
  const long rounds = s.rounds > 0 ? s.rounds : (s.sweep.empty() ? 0 : s.sweep.back());
  if (rounds < 1) throw FormatError("simulate: experiment needs 'rounds' or a sweep");
  StrategySpec rival;
  if (s.rival) rival = *s.rival;
  const auto st = simulate(d, g, s.ours, rival, s.schedule, rounds, s.normalization);
  Report r;
  r.add_all(st.history);
  return r;
}

/// Runs every listed check in order and collects the records.
inline Report run_checks(const ExperimentSpec& s, const Domain& d, const GreenKernel& g) {
  if (s.checks.empty()) throw FormatError("check: experiment lists no checks");
  Report report;
  for (const auto& name : s.checks) {
    const auto p = s.check_params(name);
    if (name == "lemma43") {
      report.add_all(lemma43_fuzz(d, detail::param<std::size_t>(p, "cases", 200),
                                  detail::param<std::uint64_t>(p, "seed", kDefaultFuzzSeed),
                                  detail::param<std::size_t>(p, "atoms", 6)));
    } else if (name == "prop41") {
      const auto region = detail::region_param(p, "prop41");
      const auto ns = detail::sweep_or(s, p, "ns", {64});
      const auto seq = restricted_sequence(static_cast<std::size_t>(*std::max_element(ns.begin(), ns.end())), d, g,
                                           region);
      for (long n : ns) report.add(check_prop41(d, PlacementSeq{d.name(), {seq.sites.begin(), seq.sites.begin() + n}}, region));
    } else if (name == "cor42") {
      const auto region = detail::region_param(p, "cor42");
      const long n_max = detail::param<long>(p, "n_max", s.sweep.empty() ? 256 : s.sweep.back());
      report.add_all(check_cor42(d, g, n_max, region).records);
    } else if (name == "decay") {
      const auto ns = detail::sweep_or(s, p, "ns", {8, 16, 32, 64, 128});
      const double expect = -1.0 / d.dim();
      const auto slope = detail::param<std::vector<double>>(p, "slope", {expect - 0.15, expect + 0.15});
      if (slope.size() != 2) throw FormatError("decay: slope must be [lo, hi]");
      report.add_all(decay_sweep(d, g, ns, slope[0], slope[1], detail::param<double>(p, "spread", 5.0)).records);
    } else if (name == "thm32") {
      const auto totals = detail::sweep_or(s, p, "totals", {16, 32, 64, 128, 256});
      const auto n2 = detail::param<std::vector<long>>(p, "n2", {0, 1, 4});
      report.add_all(thm32_sweep(d, g, totals, n2, detail::param<double>(p, "cap", 10.0),
                                 detail::param<double>(p, "spread", 5.0)));
    } else if (name == "prop34") {
      const auto ns = detail::sweep_or(s, p, "ns", {8, 16, 32, 64});
      const double c = calibrate_inverse(d, g, ns);
      for (long n : ns) {
        const auto [ours, none] = split_greedy(g, n, 0);
        report.add(check_prop34(d, ours, none, c));
      }
      const auto pairs = detail::param<std::vector<std::vector<long>>>(p, "pairs", {{63, 1}});
      for (const auto& pr : pairs) {
        if (pr.size() != 2) throw FormatError("prop34: pairs must be [N1, N2]");
        const auto [ours, rivals] = split_greedy(g, pr[0], pr[1]);
        report.add(check_prop34(d, ours, rivals, c));
      }
    } else if (name == "thm44") {
      const auto schedule = s.schedule ? *s.schedule : GrowthSchedule::doubling();
      const long n_max = detail::param<long>(p, "n_max", s.sweep.empty() ? 64 : s.sweep.back());
      report.add_all(check_thm44(d, g, schedule, n_max).records);
    } else if (name == "thm46") {
      const auto res = check_thm46(d, g, detail::param<long>(p, "n0", 12), detail::param<long>(p, "k_max", 64));
      report.add_all(res.records);
    }
  }
  return report;
}

}  // namespace rcs
