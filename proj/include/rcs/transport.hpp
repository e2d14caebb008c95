#pragma once

// Exact transport distances between discrete measures, all reduced to
// uncapacitated minimum-cost flow:
//   * balanced p-Wasserstein (p in {1,2}) between equal-mass positive measures,
//   * the generalized distance W1^{a,b} between positive measures of any mass,
//   * the signed distance on signed measures, obtained by cross-adding Jordan parts.

#include <cmath>
#include <algorithm>
#include <map>
#include <tuple>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcs/domain.hpp"
#include "rcs/error.hpp"
#include "rcs/measure.hpp"
#include "rcs/network_simplex.hpp"

namespace rcs {

struct Flow {
  Site source;
  Site sink;
  double amount;
  double unit_cost;
};

/// Optimal (sub-)coupling between a source and a sink measure. Mass that is
/// not transported is either discarded at the source side or created at the
/// sink side, each at unit cost a.
struct TransportPlan {
  std::vector<Flow> flows;
  double discarded = 0.0;
  double unfilled = 0.0;
  double total_cost = 0.0;

  nlohmann::json to_json(double cost) const {
    nlohmann::json f = nlohmann::json::array();
    for (const auto& fl : flows) f.push_back({fl.source, fl.sink, fl.amount, fl.unit_cost});
    return {{"cost", cost}, {"flows", f}, {"discarded", discarded}, {"unfilled", unfilled}};
  }
};

struct TransportResult {
  double cost = 0.0;
  TransportPlan plan;
};

/// Relative mass tolerance for the balanced solver.
inline constexpr double kMassTolerance = 1e-9;

namespace detail {

inline void check_on(const Domain& d, const SignedMeasure& mu) { mu.validate(d); }

inline std::vector<std::pair<Site, double>> atoms(const SignedMeasure::Atoms& a) {
  return {a.begin(), a.end()};
}

inline double sum(const std::vector<std::pair<Site, double>>& a) {
  double s = 0.0;
  for (const auto& [site, w] : a) s += w;
  return s;
}

}  // namespace detail

/// Balanced p-Wasserstein distance, p in {1,2}, between positive measures of
/// equal mass (within kMassTolerance).
inline TransportResult wp_balanced(const Domain& d, const SignedMeasure& mu, const SignedMeasure& nu,
                                   int p = 1) {
  if (p != 1 && p != 2) throw InvalidArgument("wp_balanced supports p in {1,2}");
  detail::check_on(d, mu);
  detail::check_on(d, nu);
  if (!mu.is_positive() || !nu.is_positive()) throw InvalidArgument("wp_balanced needs positive measures");
  const auto src = detail::atoms(mu.pos());
  const auto snk = detail::atoms(nu.pos());
  const double ms = detail::sum(src), mt = detail::sum(snk);
  if (std::abs(ms - mt) > kMassTolerance) {
    throw MassMismatch("wp_balanced: masses differ (" + std::to_string(ms) + " vs " + std::to_string(mt) + ")");
  }
  TransportResult r;
  if (src.empty() || snk.empty()) return r;

  const int ns = static_cast<int>(src.size()), nt = static_cast<int>(snk.size());
  NetworkSimplex net(ns + nt);
  net.reserve_arcs(static_cast<std::size_t>(ns) * nt);
  double max_cost = 0.0;
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nt; ++j) {
      const double dist = d.distance(src[i].first, snk[j].first);
      const double c = p == 1 ? dist : dist * dist;
      max_cost = std::max(max_cost, c);
      net.add_arc(i, ns + j, c);
    }
  }
  for (int i = 0; i < ns; ++i) net.set_supply(i, src[i].second);
  for (int j = 0; j < nt; ++j) net.set_supply(ns + j, -snk[j].second);
  net.set_artificial_cost(2.0 * max_cost + 1.0);
  net.run();

  int e = 0;
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nt; ++j, ++e) {
      const double f = net.flow(e);
      if (f > 0.0) r.plan.flows.push_back({src[i].first, snk[j].first, f, net.cost(e)});
    }
  }
  r.plan.total_cost = net.total_cost();
  r.cost = p == 1 ? r.plan.total_cost : std::sqrt(std::max(0.0, r.plan.total_cost));
  return r;
}

/// Generalized Wasserstein distance W1^{a,b} between positive measures of
/// possibly different mass, via the dustbin reduction: a virtual source
/// (supply |nu|) feeds every sink at cost a, every source drains into a
/// virtual sink (demand |mu|) at cost a, real arcs cost b * dist, and the
/// virtual source reaches the virtual sink for free.
inline TransportResult gw(const Domain& d, const SignedMeasure& mu, const SignedMeasure& nu, double a = 1.0,
                          double b = 1.0) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("gw: a and b must be positive");
  detail::check_on(d, mu);
  detail::check_on(d, nu);
  if (!mu.is_positive() || !nu.is_positive()) throw InvalidArgument("gw needs positive measures");
  const auto src = detail::atoms(mu.pos());
  const auto snk = detail::atoms(nu.pos());
  const double ms = detail::sum(src), mt = detail::sum(snk);

  TransportResult r;
  if (src.empty() && snk.empty()) return r;

  // Nodes: sources [0, ns), virtual source ns, sinks [ns+1, ns+1+nt), virtual sink last.
  const int ns = static_cast<int>(src.size()), nt = static_cast<int>(snk.size());
  const int vsrc = ns, sink0 = ns + 1, vsink = ns + 1 + nt;
  NetworkSimplex net(ns + nt + 2);
  net.reserve_arcs(static_cast<std::size_t>(ns + 1) * (nt + 1));
  double max_cost = a;
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nt; ++j) {
      const double c = b * d.distance(src[i].first, snk[j].first);
      max_cost = std::max(max_cost, c);
      net.add_arc(i, sink0 + j, c);
    }
    net.add_arc(i, vsink, a);
  }
  for (int j = 0; j < nt; ++j) net.add_arc(vsrc, sink0 + j, a);
  net.add_arc(vsrc, vsink, 0.0);

  for (int i = 0; i < ns; ++i) net.set_supply(i, src[i].second);
  net.set_supply(vsrc, mt);
  for (int j = 0; j < nt; ++j) net.set_supply(sink0 + j, -snk[j].second);
  net.set_supply(vsink, -ms);
  net.set_artificial_cost(2.0 * max_cost + 1.0);
  net.run();

  int e = 0;
  for (int i = 0; i < ns; ++i) {
    for (int j = 0; j < nt; ++j, ++e) {
      const double f = net.flow(e);
      if (f > 0.0) r.plan.flows.push_back({src[i].first, snk[j].first, f, net.cost(e)});
    }
    r.plan.discarded += net.flow(e++);
  }
  for (int j = 0; j < nt; ++j) r.plan.unfilled += net.flow(e++);
  r.plan.total_cost = net.total_cost();
  r.cost = r.plan.total_cost;
  return r;
}

/// Signed distance W1^{a,b}(mu_+ + nu_-, mu_- + nu_+).
///
/// The two cross sums are ordered canonically before solving, so swapping mu
/// and nu yields a bit-identical cost (the plan comes back transposed).
inline TransportResult signed_w(const Domain& d, const SignedMeasure& mu, const SignedMeasure& nu,
                                double a = 1.0, double b = 1.0) {
  if (mu.domain() != nu.domain()) throw DomainMismatch("signed_w: measures on different domains");
  SignedMeasure::Atoms left(mu.pos()), right(mu.neg());
  for (const auto& [s, w] : nu.neg()) left[s] += w;
  for (const auto& [s, w] : nu.pos()) right[s] += w;
  const bool swapped = right < left;
  if (swapped) std::swap(left, right);
  auto r = gw(d, SignedMeasure::from_parts(mu.domain(), std::move(left), {}),
              SignedMeasure::from_parts(mu.domain(), std::move(right), {}), a, b);
  if (swapped) {
    for (auto& f : r.plan.flows) std::swap(f.source, f.sink);
    std::sort(r.plan.flows.begin(), r.plan.flows.end(),
              [](const Flow& x, const Flow& y) { return std::tie(x.source, x.sink) < std::tie(y.source, y.sink); });
    std::swap(r.plan.discarded, r.plan.unfilled);
  }
  return r;
}

/// ||mu||^{a,b} = W1^{a,b}(mu_+, mu_-).
inline double flat_norm(const Domain& d, const SignedMeasure& mu, double a = 1.0, double b = 1.0) {
  return signed_w(d, mu, SignedMeasure(mu.domain()), a, b).cost;
}

}  // namespace rcs
