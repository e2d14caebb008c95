#pragma once

// Two-brand match simulation and empirical checks of the bounds and winning
// strategies, with JSON-lines and CSV report output.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcs/domain.hpp"
#include "rcs/error.hpp"
#include "rcs/green.hpp"
#include "rcs/measure.hpp"
#include "rcs/placement.hpp"
#include "rcs/transport.hpp"

namespace rcs {

/// Slack applied to every bound comparison.
inline constexpr double kBoundTolerance = 1e-9;
/// Scores closer than this are a tie.
inline constexpr double kScoreTieTolerance = 1e-12;
/// Candidate sites for the myopic strategy on large domains.
inline constexpr std::size_t kMyopicFullScanLimit = 1024;
inline constexpr std::size_t kMyopicSubsample = 256;
/// Fixed seed of the stratified candidate subsample.
inline constexpr std::uint64_t kSubsampleSeed = 0x9E3779B97F4A7C15ULL;

enum class Winner { Ours, Rival, Tie };

inline std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::Ours: return "ours";
    case Winner::Rival: return "rival";
    case Winner::Tie: return "tie";
  }
  return "";
}

/// Lower score wins.
inline Winner decide(double w_ours, double w_rival) {
  if (std::abs(w_ours - w_rival) <= kScoreTieTolerance) return Winner::Tie;
  return w_ours < w_rival ? Winner::Ours : Winner::Rival;
}

struct ScoreRecord {
  long n = 0;
  long fn = 0;
  double w_ours = 0.0;
  double w_rival = 0.0;
  Winner winner = Winner::Tie;

  nlohmann::json to_json() const {
    return {{"type", "score"}, {"N", n}, {"fN", fn}, {"w_ours", w_ours}, {"w_rival", w_rival},
            {"winner", std::string(to_string(winner))}};
  }
};

namespace detail {

inline void assert_lemma43(double w, const SignedMeasure& mu, const SignedMeasure& nu) {
  if (w < std::abs(mu.total() - nu.total()) - kBoundTolerance) {
    throw std::logic_error("signed distance below the total-mass lower bound");
  }
}

}  // namespace detail

/// Scores both brands against dx: w_ours = W(mu, dx), w_rival = W(-mu, dx).
inline ScoreRecord score_round(const Domain& d, const PlacementSeq& ours, const PlacementSeq& rival,
                               Normalization norm = Normalization::TotalCount) {
  const auto mu = competition_measure(ours, rival, norm);
  const auto dx = uniform_measure(d);
  const auto neg = negate(mu);
  ScoreRecord r;
  r.n = static_cast<long>(ours.size());
  r.fn = static_cast<long>(rival.size());
  r.w_ours = signed_w(d, mu, dx).cost;
  r.w_rival = signed_w(d, neg, dx).cost;
  detail::assert_lemma43(r.w_ours, mu, dx);
  detail::assert_lemma43(r.w_rival, neg, dx);
  r.winner = decide(r.w_ours, r.w_rival);
  return r;
}

struct MatchState {
  std::string domain;
  PlacementSeq ours;
  PlacementSeq rival;
  GrowthSchedule schedule;
  long round = 0;
  std::vector<ScoreRecord> history;

  nlohmann::json to_json() const {
    nlohmann::json h = nlohmann::json::array();
    for (const auto& r : history) h.push_back(r.to_json());
    return {{"domain", domain},     {"ours", ours.sites},  {"rival", rival.sites},
            {"schedule", schedule.to_json()}, {"round", round}, {"history", h}};
  }
};

/// One match against an algorithmic rival. We move first each round; the
/// rival then extends its sequence to f(N) shops.
class Match {
 public:
  Match(const Domain& d, const GreenKernel& g, StrategySpec rival, const std::optional<GrowthSchedule>& schedule,
        Normalization norm = Normalization::TotalCount)
      : domain_(&d), kernel_(&g), rival_spec_(std::move(rival)), norm_(norm) {
    if (g.domain() != d.name() || g.size() != d.size()) throw DomainMismatch("kernel does not belong to domain");
    state_.domain = d.name();
    state_.schedule = rival_schedule(rival_spec_, schedule);
    validate_rival(rival_spec_, state_.schedule);
    if (rival_spec_.kind == StrategySpec::Kind::Restricted && allowed_outside(d, *rival_spec_.region).empty()) {
      throw PreconditionError("restricted rival: forbidden ball covers the domain");
    }
    state_.ours = {d.name(), {}};
    state_.rival = rival_moves(rival_spec_, state_.schedule, state_.ours, d, g);
  }

  const MatchState& state() const { return state_; }
  const Domain& domain() const { return *domain_; }
  const GreenKernel& kernel() const { return *kernel_; }
  const StrategySpec& rival_spec() const { return rival_spec_; }
  Normalization normalization() const { return norm_; }

  /// Places our shop at `s`, lets the rival respond, and records the scores.
  const ScoreRecord& play(Site s) {
    if (s >= domain_->size()) throw InvalidArgument("site " + std::to_string(s) + " out of range");
    PlacementSeq ours = state_.ours;
    ours.sites.push_back(s);
    PlacementSeq rival = rival_moves(rival_spec_, state_.schedule, ours, *domain_, *kernel_);
    if (rival.size() < state_.rival.size() ||
        !std::equal(state_.rival.sites.begin(), state_.rival.sites.end(), rival.sites.begin())) {
      throw std::logic_error("rival strategy rewrote earlier moves");
    }
    const auto rec = score_round(*domain_, ours, rival, norm_);
    state_.ours = std::move(ours);
    state_.rival = std::move(rival);
    state_.round += 1;
    state_.history.push_back(rec);
    return state_.history.back();
  }

  /// Scores a hypothetical shop at `s` against the rival's current shops,
  /// without a rival response and without changing the state.
  ScoreRecord preview(Site s) const {
    if (s >= domain_->size()) throw InvalidArgument("site " + std::to_string(s) + " out of range");
    PlacementSeq ours = state_.ours;
    ours.sites.push_back(s);
    return score_round(*domain_, ours, state_.rival, norm_);
  }

  /// Current competition measure (empty measure before any shop exists).
  SignedMeasure measure() const {
    if (state_.ours.empty() && state_.rival.empty()) return SignedMeasure(domain_->name());
    return competition_measure(state_.ours, state_.rival, norm_);
  }

 private:
  const Domain* domain_;
  const GreenKernel* kernel_;
  StrategySpec rival_spec_;
  Normalization norm_;
  MatchState state_;
};

/// Candidate sites for the myopic strategy: every site on small domains,
/// otherwise one site drawn from each of kMyopicSubsample equal index strata.
inline std::vector<Site> myopic_candidates(const Domain& d) {
  const std::size_t n = d.size();
  std::vector<Site> out;
  if (n <= kMyopicFullScanLimit) {
    out.resize(n);
    for (Site i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  std::mt19937_64 rng(kSubsampleSeed);
  for (std::size_t k = 0; k < kMyopicSubsample; ++k) {
    const std::size_t lo = k * n / kMyopicSubsample, hi = (k + 1) * n / kMyopicSubsample;
    out.push_back(lo + static_cast<Site>(rng() % (hi - lo)));
  }
  return out;
}

/// Candidate minimizing our score against the rival's current shops; lowest
/// index among ties.
inline Site myopic_choice(const Match& m, std::span<const Site> candidates) {
  Site best = candidates.front();
  double best_value = m.preview(best).w_ours;
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const double v = m.preview(candidates[k]).w_ours;
    if (detail::strictly_less(v, best_value)) {
      best = candidates[k];
      best_value = v;
    }
  }
  return best;
}

/// Our side of a match: greedy, restricted greedy, or myopic.
class OurPlayer {
 public:
  OurPlayer(const StrategySpec& spec, const Domain& d, const GreenKernel& g) : spec_(spec), acc_(g) {
    switch (spec.kind) {
      case StrategySpec::Kind::Greedy: break;
      case StrategySpec::Kind::Restricted:
        if (!spec.region) throw PreconditionError("restricted strategy needs a forbidden region");
        allowed_ = allowed_outside(d, *spec.region);
        if (allowed_.empty()) throw InvalidArgument("restricted strategy: forbidden ball covers the domain");
        break;
      case StrategySpec::Kind::Myopic: candidates_ = myopic_candidates(d); break;
      default: throw PreconditionError("'" + std::string(StrategySpec::kind_name(spec.kind)) + "' is not one of our strategies");
    }
  }

  Site next(const Match& m) const {
    if (spec_.kind == StrategySpec::Kind::Myopic) return myopic_choice(m, candidates_);
    return acc_.next(allowed_);
  }

  void observe(Site s) { acc_.place(s); }

 private:
  StrategySpec spec_;
  GreedyAccumulator acc_;
  std::vector<Site> allowed_;
  std::vector<Site> candidates_;
};

inline MatchState simulate(const Domain& d, const GreenKernel& g, const StrategySpec& ours, const StrategySpec& rival,
                           const std::optional<GrowthSchedule>& schedule, long rounds,
                           Normalization norm = Normalization::TotalCount) {
  if (rounds < 1) throw InvalidArgument("simulate: rounds must be >= 1");
  Match m(d, g, rival, schedule, norm);
  OurPlayer player(ours, d, g);
  for (long r = 0; r < rounds; ++r) {
    const Site s = player.next(m);
    player.observe(s);
    m.play(s);
  }
  return m.state();
}

// ---------------------------------------------------------------------------
// Bound checks

struct BoundCheck {
  enum class Sense { Upper, Lower, Ratio, Info };

  std::string name;
  std::optional<long> n;
  std::optional<long> fn;
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<double> fitted;
  Sense sense = Sense::Upper;
  bool satisfied = false;
  /// Informational checks are reported but never fail a run.
  bool enforced = true;
  nlohmann::json context = nlohmann::json::object();

  static BoundCheck upper(std::string name, double lhs, double rhs) {
    return make(std::move(name), lhs, rhs, Sense::Upper, lhs <= rhs + kBoundTolerance);
  }
  static BoundCheck lower(std::string name, double lhs, double rhs) {
    return make(std::move(name), lhs, rhs, Sense::Lower, lhs >= rhs - kBoundTolerance);
  }
  /// lhs against a fitted shape rhs; satisfied while lhs/rhs stays below cap.
  static BoundCheck ratio(std::string name, double lhs, double rhs, double cap) {
    const double r = lhs / rhs;
    auto c = make(std::move(name), lhs, rhs, Sense::Ratio, std::isfinite(r) && r <= cap);
    c.fitted = r;
    if (std::isfinite(cap)) c.context["cap"] = cap;
    return c;
  }
  static BoundCheck info(std::string name, double lhs, double rhs, bool holds) {
    auto c = make(std::move(name), lhs, rhs, Sense::Info, holds);
    c.enforced = false;
    return c;
  }

  BoundCheck& at(long N, std::optional<long> fN = std::nullopt) {
    n = N;
    fn = fN;
    return *this;
  }
  BoundCheck& with(const std::string& key, nlohmann::json value) {
    context[key] = std::move(value);
    return *this;
  }

  static std::string_view sense_name(Sense s) {
    switch (s) {
      case Sense::Upper: return "upper";
      case Sense::Lower: return "lower";
      case Sense::Ratio: return "ratio";
      case Sense::Info: return "info";
    }
    return "";
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"type", "check"}, {"name", name}, {"lhs", lhs}, {"rhs", rhs},
                        {"sense", std::string(sense_name(sense))}, {"satisfied", satisfied},
                        {"enforced", enforced}};
    j["N"] = n ? nlohmann::json(*n) : nlohmann::json(nullptr);
    j["fN"] = fn ? nlohmann::json(*fn) : nlohmann::json(nullptr);
    j["fitted"] = fitted ? nlohmann::json(*fitted) : nlohmann::json(nullptr);
    j["context"] = context;
    return j;
  }

 private:
  static BoundCheck make(std::string name, double lhs, double rhs, Sense s, bool ok) {
    BoundCheck c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.sense = s;
    c.satisfied = ok;
    return c;
  }
};

/// W(mu, nu) >= |mu(X) - nu(X)|.
inline BoundCheck check_lemma43(const Domain& d, const SignedMeasure& mu, const SignedMeasure& nu) {
  return BoundCheck::lower("lemma43", signed_w(d, mu, nu).cost, std::abs(mu.total() - nu.total()));
}

/// Seeded random signed pairs, each part up to `atoms` atoms of weight in (0, 2].
inline std::vector<BoundCheck> lemma43_fuzz(const Domain& d, std::size_t cases, std::uint64_t seed,
                                            std::size_t atoms = 6) {
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    std::vector<std::pair<Site, double>> raw;
    const std::size_t kp = rng() % (atoms + 1), kn = rng() % (atoms + 1);
    for (std::size_t i = 0; i < kp + kn; ++i) {
      const double w = static_cast<double>(1 + rng() % 64) / 32.0;
      raw.emplace_back(static_cast<Site>(rng() % d.size()), i < kp ? w : -w);
    }
    return jordan(d, raw);
  };
  std::vector<BoundCheck> out;
  for (std::size_t c = 0; c < cases; ++c) {
    const auto mu = draw(), nu = draw();
    out.push_back(check_lemma43(d, mu, nu).with("case", c));
  }
  return out;
}

/// Balanced W1 between the empirical measure of `points` and dx.
inline double empirical_w1(const Domain& d, const PlacementSeq& points) {
  return wp_balanced(d, empirical_measure(points), uniform_measure(d), 1).cost;
}

/// Total weight of sites strictly inside the open ball B_rho(p).
inline double ball_volume(const Domain& d, Site p, double rho) {
  double v = 0.0;
  for (Site s = 0; s < d.size(); ++s) {
    if (d.distance(s, p) < rho) v += d.weights()[s];
  }
  return v;
}

/// A sequence avoiding B_r(p) stays (r/2) vol(B_{r/2}(p)) away from dx in W1.
inline BoundCheck check_prop41(const Domain& d, const PlacementSeq& points, const ForbiddenRegion& region) {
  if (points.empty()) throw InvalidArgument("check_prop41: no points");
  for (Site s : points.sites) {
    if (d.distance(s, region.center) < region.radius) {
      throw PreconditionError("check_prop41: site " + std::to_string(s) + " lies inside the forbidden ball");
    }
  }
  const double half = region.radius / 2.0;
  const double vol = ball_volume(d, region.center, half);
  return BoundCheck::lower("prop41", empirical_w1(d, points), half * vol)
      .at(static_cast<long>(points.size()))
      .with("p", region.center)
      .with("r", region.radius)
      .with("ball_volume", vol);
}

struct Cor42Result {
  std::optional<long> crossover;
  std::vector<BoundCheck> records;
};

/// Smallest N0 <= n_max such that plain greedy is strictly closer to dx (in
/// W1) than the restricted sequence for every N in [N0, n_max].
inline Cor42Result check_cor42(const Domain& d, const GreenKernel& g, long n_max, const ForbiddenRegion& region) {
  if (n_max < 1) throw InvalidArgument("check_cor42: n_max must be >= 1");
  const auto plain = greedy_sequence(static_cast<std::size_t>(n_max), g);
  const auto restricted = restricted_sequence(static_cast<std::size_t>(n_max), d, g, region);
  Cor42Result res;
  std::vector<bool> beats(static_cast<std::size_t>(n_max) + 1, false);
  for (long n = 1; n <= n_max; ++n) {
    const PlacementSeq a{d.name(), {plain.sites.begin(), plain.sites.begin() + n}};
    const PlacementSeq b{d.name(), {restricted.sites.begin(), restricted.sites.begin() + n}};
    const double wa = empirical_w1(d, a), wb = empirical_w1(d, b);
    beats[static_cast<std::size_t>(n)] = wa < wb;
    res.records.push_back(BoundCheck::info("cor42-round", wa, wb, wa < wb).at(n));
  }
  for (long n = n_max; n >= 1 && beats[static_cast<std::size_t>(n)]; --n) res.crossover = n;
  const double n0 = res.crossover ? static_cast<double>(*res.crossover) : static_cast<double>(n_max + 1);
  res.records.push_back(BoundCheck::upper("cor42-crossover", n0, static_cast<double>(n_max))
                            .with("p", region.center)
                            .with("r", region.radius)
                            .with("found", res.crossover.has_value()));
  return res;
}

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double constant = 0.0;  // exp(intercept)
  double max_residual = 0.0;
};

/// Least-squares fit of log(dist) = intercept + slope * log(n).
inline DecayFit fit_decay(std::span<const double> ns, std::span<const double> dists) {
  if (ns.size() != dists.size()) throw InvalidArgument("fit_decay: length mismatch");
  if (ns.size() < 4) throw InvalidArgument("fit_decay: need at least 4 samples");
  const auto m = static_cast<double>(ns.size());
  double sx = 0, sy = 0;
  std::vector<double> x(ns.size()), y(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] > 0.0) || !(dists[i] > 0.0)) throw InvalidArgument("fit_decay: samples must be positive");
    x[i] = std::log(ns[i]);
    y[i] = std::log(dists[i]);
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_decay: sample counts must not all be equal");
  DecayFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.constant = std::exp(f.intercept);
  for (std::size_t i = 0; i < x.size(); ++i) {
    f.max_residual = std::max(f.max_residual, std::abs(y[i] - (f.intercept + f.slope * x[i])));
  }
  return f;
}

inline double max_min_spread(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

struct DecaySweep {
  std::vector<long> ns;
  std::vector<double> dists;
  DecayFit fit;
  std::vector<BoundCheck> records;
};

/// W1 between greedy prefixes and dx over `ns`, with the log-log fit. The
/// slope must fall in [slope_lo, slope_hi] and W1 * N^{1/d} may vary by at
/// most `spread` across the sweep.
inline DecaySweep decay_sweep(const Domain& d, const GreenKernel& g, std::span<const long> ns, double slope_lo,
                              double slope_hi, double spread) {
  if (ns.empty()) throw InvalidArgument("decay_sweep: empty sweep");
  DecaySweep out;
  out.ns.assign(ns.begin(), ns.end());
  const auto seq = greedy_sequence(static_cast<std::size_t>(*std::max_element(ns.begin(), ns.end())), g);
  const double inv_d = 1.0 / d.dim();
  std::vector<double> xs, scaled;
  for (long n : ns) {
    const PlacementSeq prefix{d.name(), {seq.sites.begin(), seq.sites.begin() + n}};
    const double w = empirical_w1(d, prefix);
    const double shape = std::pow(static_cast<double>(n), -inv_d);
    out.dists.push_back(w);
    xs.push_back(static_cast<double>(n));
    scaled.push_back(w / shape);
    out.records.push_back(BoundCheck::ratio("decay", w, shape, std::numeric_limits<double>::infinity())
                              .at(n)
                              .with("repeats", count_repeats(prefix)));
  }
  out.fit = fit_decay(xs, out.dists);
  const nlohmann::json ctx = {{"domain", d.name()}, {"constant", out.fit.constant},
                              {"max_residual", out.fit.max_residual}};
  out.records.push_back(BoundCheck::lower("decay-slope-min", out.fit.slope, slope_lo).with("fit", ctx));
  out.records.push_back(BoundCheck::upper("decay-slope-max", out.fit.slope, slope_hi).with("fit", ctx));
  out.records.push_back(BoundCheck::upper("decay-spread", max_min_spread(scaled), spread).with("fit", ctx));
  return out;
}

namespace detail {

inline bool overlaps(const PlacementSeq& a, const PlacementSeq& b) {
  const std::set<Site> s(a.sites.begin(), a.sites.end());
  return std::any_of(b.sites.begin(), b.sites.end(), [&](Site x) { return s.count(x) > 0; });
}

inline PlacementSeq concat(const PlacementSeq& a, const PlacementSeq& b) {
  PlacementSeq z = a;
  z.sites.insert(z.sites.end(), b.sites.begin(), b.sites.end());
  return z;
}

}  // namespace detail

/// Shape of the upper bound for disjoint our/rival sets:
///   2 N2/(N1+N2) + (N1+N2)^{-1/d} + (N1+N2)^{-1} |sum_{k != l} G(z_k, z_l)|^{1/2}.
inline double thm32_shape(const Domain& d, const GreenKernel& g, const PlacementSeq& ours,
                          const PlacementSeq& rivals) {
  const auto total = static_cast<double>(ours.size() + rivals.size());
  const double energy = green_energy(detail::concat(ours, rivals), g);
  return 2.0 * static_cast<double>(rivals.size()) / total + std::pow(total, -1.0 / d.dim()) +
         std::sqrt(std::abs(energy)) / total;
}

inline BoundCheck check_thm32(const Domain& d, const GreenKernel& g, const PlacementSeq& ours,
                              const PlacementSeq& rivals, double cap) {
  if (detail::overlaps(ours, rivals)) throw PreconditionError("check_thm32: our and rival sites must be distinct");
  const double lhs = signed_w(d, competition_measure(ours, rivals), uniform_measure(d)).cost;
  return BoundCheck::ratio("thm32", lhs, thm32_shape(d, g, ours, rivals), cap)
      .at(static_cast<long>(ours.size()), static_cast<long>(rivals.size()));
}

/// Our shops are the first N1 greedy points, the rival's the next N2.
inline std::pair<PlacementSeq, PlacementSeq> split_greedy(const GreenKernel& g, long n1, long n2) {
  const auto seq = greedy_sequence(static_cast<std::size_t>(n1 + n2), g);
  PlacementSeq a{g.domain(), {seq.sites.begin(), seq.sites.begin() + n1}};
  PlacementSeq b{g.domain(), {seq.sites.begin() + n1, seq.sites.end()}};
  return {a, b};
}

/// Ratio records over every (total, N2) pair plus the max/min spread check.
inline std::vector<BoundCheck> thm32_sweep(const Domain& d, const GreenKernel& g, std::span<const long> totals,
                                           std::span<const long> rival_counts, double cap, double spread) {
  std::vector<BoundCheck> out;
  std::vector<double> ratios;
  for (long n2 : rival_counts) {
    for (long t : totals) {
      if (n2 >= t) throw InvalidArgument("thm32 sweep: N2 must be below the total");
      const auto [ours, rivals] = split_greedy(g, t - n2, n2);
      out.push_back(check_thm32(d, g, ours, rivals, cap));
      ratios.push_back(*out.back().fitted);
    }
  }
  out.push_back(BoundCheck::upper("thm32-spread", max_min_spread(ratios), spread).with("domain", d.name()));
  return out;
}

/// c = min over the greedy sweep of W(empirical, dx) * N^{1/d}.
inline double calibrate_inverse(const Domain& d, const GreenKernel& g, std::span<const long> ns) {
  if (ns.empty()) throw InvalidArgument("calibrate_inverse: empty sweep");
  const auto seq = greedy_sequence(static_cast<std::size_t>(*std::max_element(ns.begin(), ns.end())), g);
  const auto dx = uniform_measure(d);
  double c = std::numeric_limits<double>::infinity();
  for (long n : ns) {
    const PlacementSeq prefix{d.name(), {seq.sites.begin(), seq.sites.begin() + n}};
    c = std::min(c, signed_w(d, empirical_measure(prefix), dx).cost * std::pow(static_cast<double>(n), 1.0 / d.dim()));
  }
  return c;
}

/// W(mu, dx) >= c (N1+N2)^{-1/d} - 2 N2/(N1+N2).
inline BoundCheck check_prop34(const Domain& d, const PlacementSeq& ours, const PlacementSeq& rivals,
                               double fitted_c) {
  const auto total = static_cast<double>(ours.size() + rivals.size());
  const double rhs = fitted_c * std::pow(total, -1.0 / d.dim()) - 2.0 * static_cast<double>(rivals.size()) / total;
  auto c = BoundCheck::lower("prop34", signed_w(d, competition_measure(ours, rivals), uniform_measure(d)).cost, rhs)
               .at(static_cast<long>(ours.size()), static_cast<long>(rivals.size()));
  c.fitted = fitted_c;
  return c;
}

struct GameCheckResult {
  std::optional<long> found;
  std::vector<ScoreRecord> rounds;
  std::vector<BoundCheck> records;
};

/// Smallest N0 with the rival strictly ahead for every recorded N >= N0.
inline std::optional<long> rival_lead_from(const std::vector<ScoreRecord>& rounds) {
  std::optional<long> n0;
  for (auto it = rounds.rbegin(); it != rounds.rend() && it->winner == Winner::Rival; ++it) n0 = it->n;
  return n0;
}

/// Copy-strategy rival under `schedule`, our shops greedy, for n_max rounds.
/// Per round: w_ours >= 2f/(N+f) >= 1, and the fitted rival constant
/// (w_rival - 2N/(f+N)) |J|^{1/d} is recorded.
inline GameCheckResult check_thm44(const Domain& d, const GreenKernel& g, const GrowthSchedule& schedule,
                                   long n_max) {
  if (n_max < 1) throw InvalidArgument("check_thm44: n_max must be >= 1");
  check_copy_schedule(schedule, n_max);
  StrategySpec rival;
  rival.kind = StrategySpec::Kind::Copy;
  const auto state = simulate(d, g, StrategySpec{}, rival, schedule, n_max);
  GameCheckResult res;
  res.rounds = state.history;
  for (const auto& r : state.history) {
    const double n = static_cast<double>(r.n), f = static_cast<double>(r.fn);
    const double bound = 2.0 * f / (n + f);
    res.records.push_back(BoundCheck::lower("thm44-ours", r.w_ours, bound).at(r.n, r.fn));
    res.records.push_back(BoundCheck::lower("thm44-ours-unit", bound, 1.0).at(r.n, r.fn));
    const double j = f - n;
    const double fitted = (r.w_rival - 2.0 * n / (f + n)) * std::pow(j, 1.0 / d.dim());
    auto shape = BoundCheck::info("thm44-rival-shape", r.w_rival, 2.0 * n / (f + n), true).at(r.n, r.fn);
    shape.fitted = fitted;
    res.records.push_back(shape);
  }
  res.found = rival_lead_from(res.rounds);
  const double n0 = res.found ? static_cast<double>(*res.found) : static_cast<double>(n_max + 1);
  res.records.push_back(BoundCheck::upper("thm44-crossover", n0, static_cast<double>(n_max))
                            .with("schedule", schedule.to_json())
                            .with("found", res.found.has_value()));
  return res;
}

/// Scans K = 0..k_max for the smallest head start with which the mirroring
/// rival wins every round N = 1..n0. Each scanned round asserts the exact
/// identity w_ours >= 1 + K/(2N+K); the continuum sufficient condition
/// c K^{slope} <= 2N/(2N+K) is reported with c and slope fitted on greedy
/// sequences of this domain.
inline GameCheckResult check_thm46(const Domain& d, const GreenKernel& g, long n0, long k_max) {
  if (n0 < 1) throw InvalidArgument("check_thm46: N0 must be >= 1");
  if (k_max < 0) throw InvalidArgument("check_thm46: k_max must be >= 0");
  GameCheckResult res;
  StrategySpec rival;
  rival.kind = StrategySpec::Kind::Headstart;
  for (long k = 0; k <= k_max && !res.found; ++k) {
    rival.k = k;
    const auto state = simulate(d, g, StrategySpec{}, rival, std::nullopt, n0);
    bool all_rival = true;
    for (const auto& r : state.history) {
      const double bound = 1.0 + static_cast<double>(k) / (2.0 * static_cast<double>(r.n) + static_cast<double>(k));
      res.records.push_back(BoundCheck::lower("thm46-ours", r.w_ours, bound).at(r.n, r.fn).with("K", k));
      all_rival = all_rival && r.winner == Winner::Rival;
    }
    if (all_rival) {
      res.found = k;
      res.rounds = state.history;
    }
  }
  const double kf = res.found ? static_cast<double>(*res.found) : static_cast<double>(k_max + 1);
  res.records.push_back(BoundCheck::upper("thm46-headstart", kf, static_cast<double>(k_max))
                            .with("N0", n0)
                            .with("found", res.found.has_value()));

  // Fitted form of the sufficient condition, informational only.
  std::vector<long> ks;
  for (long k = 4; k <= std::max<long>(k_max, 32); k *= 2) ks.push_back(k);
  const auto sweep = decay_sweep(d, g, ks, -std::numeric_limits<double>::infinity(),
                                 std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  if (res.found && *res.found > 0) {
    const double k = static_cast<double>(*res.found);
    const double term = sweep.fit.constant * std::pow(k, sweep.fit.slope);
    for (long n = 1; n <= n0; ++n) {
      const double rhs = 2.0 * static_cast<double>(n) / (2.0 * static_cast<double>(n) + k);
      res.records.push_back(BoundCheck::info("thm46-condition", term, rhs, term <= rhs + kBoundTolerance)
                                .at(n)
                                .with("K", *res.found)
                                .with("constant", sweep.fit.constant)
                                .with("slope", sweep.fit.slope));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Ordered collection of score and check records.
class Report {
 public:
  void add(const ScoreRecord& r) { lines_.push_back(r.to_json()); add_row("score", r.n, r.fn, r.w_ours, r.w_rival, std::nullopt, ""); }

  void add(const BoundCheck& c) {
    lines_.push_back(c.to_json());
    const double ratio = c.fitted ? *c.fitted : std::numeric_limits<double>::quiet_NaN();
    add_row(c.name, c.n, c.fn, c.lhs, c.rhs, c.fitted ? std::optional<double>(ratio) : std::nullopt,
            c.satisfied ? "true" : "false");
    if (c.enforced && !c.satisfied) ++failures_;
  }

  template <class Range>
  void add_all(const Range& items) {
    for (const auto& x : items) add(x);
  }

  std::size_t failures() const { return failures_; }
  bool all_satisfied() const { return failures_ == 0; }
  std::size_t size() const { return lines_.size(); }

  std::string jsonl() const {
    std::string out;
    for (const auto& l : lines_) out += l.dump() + "\n";
    return out;
  }

  std::string csv() const {
    std::string out = "name,N,fN,lhs,rhs,ratio,satisfied\n";
    for (const auto& r : rows_) out += r + "\n";
    return out;
  }

 private:
  void add_row(const std::string& name, std::optional<long> n, std::optional<long> fn, double lhs, double rhs,
               std::optional<double> ratio, const std::string& satisfied) {
    std::string row = detail::csv_field(name) + ",";
    row += (n ? std::to_string(*n) : "") + ",";
    row += (fn ? std::to_string(*fn) : "") + ",";
    row += detail::format_number(lhs) + "," + detail::format_number(rhs) + ",";
    row += (ratio ? detail::format_number(*ratio) : "") + ",";
    row += satisfied;
    rows_.push_back(std::move(row));
  }

  std::vector<nlohmann::json> lines_;
  std::vector<std::string> rows_;
  std::size_t failures_ = 0;
};

}  // namespace rcs
