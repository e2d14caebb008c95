#pragma once

// Greedy Green-function sequences, rival strategies and growth schedules.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rcs/domain.hpp"
#include "rcs/error.hpp"
#include "rcs/green.hpp"
#include "rcs/measure.hpp"

namespace rcs {

/// Number of rival shops f(N) once we have opened N.
struct GrowthSchedule {
  enum class Kind { Fixed, Affine, Doubling, LinearRatio, CustomTable };

  Kind kind = Kind::Doubling;
  long k = 0;            // fixed: f = K; affine: f(N) = N + K
  long num = 2, den = 1;  // linear-ratio: f(N) = ceil(num/den * N)
  std::vector<long> table;  // custom: table[N-1] = f(N), f(0) = 0

  static GrowthSchedule fixed(long K) { return make(Kind::Fixed, K); }
  static GrowthSchedule affine(long K) { return make(Kind::Affine, K); }
  static GrowthSchedule doubling() { return make(Kind::Doubling, 0); }
  static GrowthSchedule linear_ratio(long num, long den) {
    if (num < 0 || den <= 0) throw InvalidArgument("linear-ratio factor must be a nonnegative rational");
    GrowthSchedule s = make(Kind::LinearRatio, 0);
    s.num = num;
    s.den = den;
    return s;
  }
  static GrowthSchedule custom(std::vector<long> table) {
    long prev = 0;
    for (long v : table) {
      if (v < prev) throw InvalidArgument("custom schedule must be nondecreasing and nonnegative");
      prev = v;
    }
    GrowthSchedule s = make(Kind::CustomTable, 0);
    s.table = std::move(table);
    return s;
  }

  /// Rival never places a shop.
  bool is_sandbox() const { return kind == Kind::Fixed && k == 0; }

  nlohmann::json to_json() const {
    switch (kind) {
      case Kind::Fixed: return {{"kind", "fixed"}, {"K", k}};
      case Kind::Affine: return {{"kind", "affine"}, {"K", k}};
      case Kind::Doubling: return {{"kind", "doubling"}};
      case Kind::LinearRatio: return {{"kind", "linear-ratio"}, {"factor", std::to_string(num) + "/" + std::to_string(den)}};
      case Kind::CustomTable: return {{"kind", "custom-table"}, {"table", table}};
    }
    return {};
  }

  static GrowthSchedule from_json(const nlohmann::json& j) {
    try {
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "fixed") return fixed(j.value("K", 0L));
      if (kind == "affine") return affine(j.value("K", 0L));
      if (kind == "doubling") return doubling();
      if (kind == "linear-ratio") {
        const auto& f = j.at("factor");
        if (f.is_number_integer()) return linear_ratio(f.get<long>(), 1);
        const auto s = f.get<std::string>();
        const auto slash = s.find('/');
        if (slash == std::string::npos) return linear_ratio(std::stol(s), 1);
        return linear_ratio(std::stol(s.substr(0, slash)), std::stol(s.substr(slash + 1)));
      }
      if (kind == "custom-table") return custom(j.at("table").get<std::vector<long>>());
      throw FormatError("unknown schedule kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("schedule: ") + e.what());
    } catch (const std::logic_error& e) {
      throw FormatError(std::string("schedule: ") + e.what());
    }
  }

  bool operator==(const GrowthSchedule&) const = default;

 private:
  static GrowthSchedule make(Kind kind, long K) {
    if (K < 0) throw InvalidArgument("schedule constant K must be >= 0");
    GrowthSchedule s;
    s.kind = kind;
    s.k = K;
    return s;
  }
};

inline long eval_schedule(const GrowthSchedule& s, long n) {
  if (n < 0) throw InvalidArgument("eval_schedule: N must be >= 0");
  switch (s.kind) {
    case GrowthSchedule::Kind::Fixed: return s.k;
    case GrowthSchedule::Kind::Affine: return n + s.k;
    case GrowthSchedule::Kind::Doubling: return 2 * n;
    case GrowthSchedule::Kind::LinearRatio: return (s.num * n + s.den - 1) / s.den;
    case GrowthSchedule::Kind::CustomTable:
      if (n == 0) return 0;
      if (static_cast<std::size_t>(n) > s.table.size()) {
        throw OutOfRange("custom schedule has no entry for N=" + std::to_string(n));
      }
      return s.table[static_cast<std::size_t>(n - 1)];
  }
  return 0;
}

/// Open ball B_r(p) the restricted brand may not enter.
struct ForbiddenRegion {
  Site center = 0;
  double radius = 0.0;

  nlohmann::json to_json() const { return {{"p", center}, {"r", radius}}; }
  static ForbiddenRegion from_json(const nlohmann::json& j) {
    try {
      return {j.at("p").get<Site>(), j.at("r").get<double>()};
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("region: ") + e.what());
    }
  }
};

/// Relative tolerance under which two greedy scores count as tied.
inline constexpr double kTieTolerance = 1e-12;

namespace detail {

inline bool strictly_less(double v, double best) {
  return v < best - kTieTolerance * std::max(1.0, std::abs(best));
}

}  // namespace detail

/// Running sums S(x) = sum_k G(x, x_k) over all sites, updated one point at a time.
class GreedyAccumulator {
 public:
  explicit GreedyAccumulator(const GreenKernel& kernel) : kernel_(&kernel), sums_(kernel.size(), 0.0) {}

  void place(Site s) {
    const auto& g = kernel_->matrix();
    const auto col = static_cast<Eigen::Index>(s);
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += g(static_cast<Eigen::Index>(i), col);
    placed_.push_back(s);
  }

  /// Greedy choice among `allowed` (ascending site indices; empty span = all sites).
  Site next(std::span<const Site> allowed = {}) const {
    const std::size_t count = allowed.empty() ? sums_.size() : allowed.size();
    auto site_at = [&](std::size_t k) { return allowed.empty() ? static_cast<Site>(k) : allowed[k]; };
    Site best = site_at(0);
    if (placed_.empty()) {
      // Empty sum is constant: take the heaviest site, lowest index first.
      const auto& w = kernel_->weights();
      for (std::size_t k = 1; k < count; ++k) {
        if (w[site_at(k)] > w[best]) best = site_at(k);
      }
      return best;
    }
    double best_value = sums_[best];
    for (std::size_t k = 1; k < count; ++k) {
      const Site s = site_at(k);
      if (detail::strictly_less(sums_[s], best_value)) {
        best = s;
        best_value = sums_[s];
      }
    }
    return best;
  }

  const std::vector<Site>& placed() const { return placed_; }

 private:
  const GreenKernel* kernel_;
  std::vector<double> sums_;
  std::vector<Site> placed_;
};

namespace detail {

inline void check_allowed(std::span<const Site> allowed, const GreenKernel& kernel) {
  for (std::size_t k = 0; k < allowed.size(); ++k) {
    if (allowed[k] >= kernel.size()) throw InvalidArgument("allowed site out of range");
    if (k > 0 && allowed[k] <= allowed[k - 1]) throw InvalidArgument("allowed sites must be strictly ascending");
  }
}

inline std::vector<Site> all_sites(std::size_t n) {
  std::vector<Site> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace detail

/// argmin over allowed x of sum_k G(x, x_k), lowest index on ties; with no
/// existing points, the heaviest allowed site.
inline Site greedy_next(std::span<const Site> existing, const GreenKernel& kernel, std::span<const Site> allowed) {
  if (allowed.empty()) throw InvalidArgument("greedy_next: allowed set is empty");
  detail::check_allowed(allowed, kernel);
  GreedyAccumulator acc(kernel);
  for (Site s : existing) acc.place(s);
  return acc.next(allowed);
}

inline Site greedy_next(std::span<const Site> existing, const GreenKernel& kernel) {
  const auto all = detail::all_sites(kernel.size());
  return greedy_next(existing, kernel, all);
}

inline PlacementSeq greedy_sequence(std::size_t n, const GreenKernel& kernel, std::span<const Site> allowed) {
  if (n < 1) throw InvalidArgument("greedy_sequence: n must be >= 1");
  if (allowed.empty()) throw InvalidArgument("greedy_sequence: allowed set is empty");
  detail::check_allowed(allowed, kernel);
  GreedyAccumulator acc(kernel);
  for (std::size_t k = 0; k < n; ++k) acc.place(acc.next(allowed));
  return {kernel.domain(), acc.placed()};
}

inline PlacementSeq greedy_sequence(std::size_t n, const GreenKernel& kernel) {
  const auto all = detail::all_sites(kernel.size());
  return greedy_sequence(n, kernel, all);
}

/// Number of entries that repeat an earlier site.
inline std::size_t count_repeats(const PlacementSeq& seq) {
  std::vector<Site> s = seq.sites;
  std::sort(s.begin(), s.end());
  return static_cast<std::size_t>(s.end() - std::unique(s.begin(), s.end()));
}

/// Minimum per-round growth f(N) - f(N-1) a copying rival needs: two for
/// integer schedules (one copy plus one filler), one for linear-ratio
/// schedules with factor above 1, which fill more slowly.
inline long copy_growth_requirement(const GrowthSchedule& s) {
  return s.kind == GrowthSchedule::Kind::LinearRatio ? 1 : 2;
}

inline void check_copy_schedule(const GrowthSchedule& s, long n) {
  if (s.kind == GrowthSchedule::Kind::LinearRatio && !(s.num > s.den)) {
    throw PreconditionError("copy strategy: linear-ratio factor must exceed 1");
  }
  const long need = copy_growth_requirement(s);
  long prev = 0;
  for (long k = 1; k <= std::max(n, 1L); ++k) {
    const long f = eval_schedule(s, k);
    if (f < prev + need) {
      throw PreconditionError("copy strategy: schedule violates f(N) >= f(N-1) + " + std::to_string(need) +
                              " at N=" + std::to_string(k));
    }
    prev = f;
  }
}

/// Rival copies our k-th shop at (1-indexed) position f(k-1)+1, with f(0)=0,
/// and fills every other position greedily given all rival shops placed so far.
inline PlacementSeq copy_strategy(const PlacementSeq& our_moves, const GrowthSchedule& schedule,
                                  const GreenKernel& kernel) {
  const long n = static_cast<long>(our_moves.size());
  check_copy_schedule(schedule, n);
  const long length = n == 0 ? 0 : eval_schedule(schedule, n);
  std::vector<long> copy_at(static_cast<std::size_t>(length), -1);
  long prev = 0;
  for (long k = 1; k <= n; ++k) {
    copy_at[static_cast<std::size_t>(prev)] = k - 1;  // 0-indexed position f(k-1)
    prev = eval_schedule(schedule, k);
  }
  GreedyAccumulator acc(kernel);
  for (long pos = 0; pos < length; ++pos) {
    const long k = copy_at[static_cast<std::size_t>(pos)];
    acc.place(k >= 0 ? our_moves.sites[static_cast<std::size_t>(k)] : acc.next());
  }
  return {kernel.domain(), acc.placed()};
}

/// Rival opens K greedy shops first, then mirrors our sequence: y_{n+K} = x_n.
inline PlacementSeq headstart_strategy(const PlacementSeq& our_moves, long K, const GreenKernel& kernel) {
  if (K < 0) throw InvalidArgument("headstart: K must be >= 0");
  PlacementSeq out{kernel.domain(), {}};
  if (K > 0) out = greedy_sequence(static_cast<std::size_t>(K), kernel);
  out.sites.insert(out.sites.end(), our_moves.sites.begin(), our_moves.sites.end());
  return out;
}

/// Sites at distance >= r from the region centre.
inline std::vector<Site> allowed_outside(const Domain& d, const ForbiddenRegion& region) {
  if (!(region.radius > 0.0)) throw InvalidArgument("forbidden region radius must be positive");
  if (region.center >= d.size()) throw InvalidArgument("forbidden region centre out of range");
  std::vector<Site> out;
  for (Site s = 0; s < d.size(); ++s) {
    if (d.distance(s, region.center) >= region.radius) out.push_back(s);
  }
  return out;
}

inline PlacementSeq restricted_sequence(std::size_t n, const Domain& d, const GreenKernel& kernel,
                                        const ForbiddenRegion& region) {
  const auto allowed = allowed_outside(d, region);
  if (allowed.empty()) throw InvalidArgument("restricted_sequence: forbidden ball covers the domain");
  return greedy_sequence(n, kernel, allowed);
}

/// Declarative description of a placement policy.
struct StrategySpec {
  enum class Kind { Greedy, Myopic, Restricted, Copy, Headstart };

  Kind kind = Kind::Greedy;
  long k = 0;
  std::optional<GrowthSchedule> schedule;
  std::optional<ForbiddenRegion> region;

  static std::string_view kind_name(Kind k) {
    switch (k) {
      case Kind::Greedy: return "greedy";
      case Kind::Myopic: return "myopic";
      case Kind::Restricted: return "restricted";
      case Kind::Copy: return "copy";
      case Kind::Headstart: return "headstart";
    }
    return "";
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"kind", std::string(kind_name(kind))}};
    if (kind == Kind::Headstart) j["K"] = k;
    if (schedule) j["schedule"] = schedule->to_json();
    if (region) j["region"] = region->to_json();
    return j;
  }

  static StrategySpec from_json(const nlohmann::json& j) {
    try {
      StrategySpec s;
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "greedy") s.kind = Kind::Greedy;
      else if (kind == "myopic") s.kind = Kind::Myopic;
      else if (kind == "restricted") s.kind = Kind::Restricted;
      else if (kind == "copy") s.kind = Kind::Copy;
      else if (kind == "headstart") s.kind = Kind::Headstart;
      else throw FormatError("unknown strategy kind '" + kind + "'");
      if (j.contains("K")) s.k = j.at("K").get<long>();
      if (j.contains("schedule")) s.schedule = GrowthSchedule::from_json(j.at("schedule"));
      if (j.contains("region")) s.region = ForbiddenRegion::from_json(j.at("region"));
      if (s.kind == Kind::Restricted && !s.region) throw FormatError("restricted strategy needs a region");
      if (s.kind == Kind::Headstart && s.k < 0) throw FormatError("headstart K must be >= 0");
      return s;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("strategy: ") + e.what());
    }
  }
};

/// Growth schedule a rival strategy runs on: headstart implies f(N) = N + K;
/// otherwise the strategy's own schedule, falling back to `fallback`.
inline GrowthSchedule rival_schedule(const StrategySpec& rival, const std::optional<GrowthSchedule>& fallback) {
  if (rival.kind == StrategySpec::Kind::Headstart) {
    const auto implied = GrowthSchedule::affine(rival.k);
    const auto& given = rival.schedule ? rival.schedule : fallback;
    if (given && !(*given == implied) && !given->is_sandbox()) {
      throw PreconditionError("headstart rival requires schedule affine with K=" + std::to_string(rival.k));
    }
    if (given && given->is_sandbox()) return *given;
    return implied;
  }
  if (rival.schedule) return *rival.schedule;
  if (fallback) return *fallback;
  throw PreconditionError("rival strategy needs a growth schedule");
}

/// Checks the rival strategy's hypotheses without running it.
inline void validate_rival(const StrategySpec& rival, const GrowthSchedule& schedule, long horizon = 64) {
  if (schedule.is_sandbox()) return;
  if (rival.kind == StrategySpec::Kind::Restricted && !rival.region) {
    throw PreconditionError("restricted rival needs a forbidden region");
  }
  if (schedule.kind == GrowthSchedule::Kind::CustomTable) {
    horizon = std::min(horizon, static_cast<long>(schedule.table.size()));
  }
  switch (rival.kind) {
    case StrategySpec::Kind::Copy: check_copy_schedule(schedule, horizon); break;
    case StrategySpec::Kind::Myopic: throw PreconditionError("myopic is not a rival strategy");
    default: break;
  }
}

/// Full rival sequence after we have opened `our_moves.size()` shops.
inline PlacementSeq rival_moves(const StrategySpec& rival, const GrowthSchedule& schedule,
                                const PlacementSeq& our_moves, const Domain& d, const GreenKernel& kernel) {
  const long n = static_cast<long>(our_moves.size());
  if (schedule.is_sandbox()) return {d.name(), {}};
  switch (rival.kind) {
    case StrategySpec::Kind::Copy: return copy_strategy(our_moves, schedule, kernel);
    case StrategySpec::Kind::Headstart: return headstart_strategy(our_moves, rival.k, kernel);
    case StrategySpec::Kind::Greedy: {
      const long f = eval_schedule(schedule, n);
      if (f == 0) return {d.name(), {}};
      return greedy_sequence(static_cast<std::size_t>(f), kernel);
    }
    case StrategySpec::Kind::Restricted: {
      const long f = eval_schedule(schedule, n);
      if (f == 0) return {d.name(), {}};
      return restricted_sequence(static_cast<std::size_t>(f), d, kernel, *rival.region);
    }
    case StrategySpec::Kind::Myopic: break;
  }
  throw PreconditionError("myopic is not a rival strategy");
}

}  // namespace rcs
