#pragma once

// Discrete signed measures in Jordan form and placement sequences.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rcs/domain.hpp"
#include "rcs/error.hpp"

namespace rcs {

/// Ordered list of shop locations on one domain; repeats are allowed.
struct PlacementSeq {
  std::string domain;
  std::vector<Site> sites;

  std::size_t size() const { return sites.size(); }
  bool empty() const { return sites.empty(); }

  void validate(const Domain& d) const {
    if (domain != d.name()) {
      throw DomainMismatch("placement on '" + domain + "' used with domain '" + d.name() + "'");
    }
    for (Site s : sites) {
      if (s >= d.size()) throw InvalidArgument("placement site " + std::to_string(s) + " out of range");
    }
  }

  nlohmann::json to_json() const { return {{"domain", domain}, {"sites", sites}}; }

  static PlacementSeq from_json(const nlohmann::json& j) {
    try {
      return {j.at("domain").get<std::string>(), j.at("sites").get<std::vector<Site>>()};
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("placement file: ") + e.what());
    }
  }

  bool operator==(const PlacementSeq&) const = default;
};

/// Signed measure mu = mu_+ - mu_- with mutually singular parts.
///
/// Every atom weight stored in either part is strictly positive and no site
/// carries both a positive and a negative atom. Instances are built through
/// jordan() or from_parts(), which enforce this.
class SignedMeasure {
 public:
  using Atoms = std::map<Site, double>;

  SignedMeasure() = default;
  explicit SignedMeasure(std::string domain) : domain_(std::move(domain)) {}

  static SignedMeasure from_parts(std::string domain, Atoms pos, Atoms neg) {
    for (const auto* part : {&pos, &neg}) {
      for (const auto& [s, w] : *part) {
        if (!(w > 0.0)) throw InvalidArgument("measure atom at site " + std::to_string(s) + " is not positive");
      }
    }
    for (const auto& [s, w] : pos) {
      if (neg.count(s)) throw InvalidArgument("site " + std::to_string(s) + " in both Jordan parts");
    }
    SignedMeasure m(std::move(domain));
    m.pos_ = std::move(pos);
    m.neg_ = std::move(neg);
    return m;
  }

  const std::string& domain() const { return domain_; }
  const Atoms& pos() const { return pos_; }
  const Atoms& neg() const { return neg_; }
  bool empty() const { return pos_.empty() && neg_.empty(); }
  bool is_positive() const { return neg_.empty(); }

  /// mu(X)
  double total() const { return sum(pos_) - sum(neg_); }
  /// |mu| = |mu_+| + |mu_-|
  double mass() const { return sum(pos_) + sum(neg_); }

  /// Positive part as a positive measure.
  SignedMeasure positive_part() const { return from_parts(domain_, pos_, {}); }
  SignedMeasure negative_part() const { return from_parts(domain_, neg_, {}); }

  nlohmann::json to_json() const {
    nlohmann::json p = nlohmann::json::object(), n = nlohmann::json::object();
    for (const auto& [s, w] : pos_) p[std::to_string(s)] = w;
    for (const auto& [s, w] : neg_) n[std::to_string(s)] = w;
    return {{"domain", domain_}, {"pos", p}, {"neg", n}};
  }

  static SignedMeasure from_json(const nlohmann::json& j) {
    try {
      auto read = [](const nlohmann::json& obj) {
        Atoms a;
        for (auto it = obj.begin(); it != obj.end(); ++it) {
          std::size_t used = 0;
          const auto site = static_cast<Site>(std::stoull(it.key(), &used));
          if (used != it.key().size()) throw FormatError("measure file: bad site key '" + it.key() + "'");
          a[site] = it.value().get<double>();
        }
        return a;
      };
      return from_parts(j.at("domain").get<std::string>(), read(j.at("pos")), read(j.at("neg")));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("measure file: ") + e.what());
    } catch (const std::logic_error& e) {
      throw FormatError(std::string("measure file: ") + e.what());
    }
  }

  void validate(const Domain& d) const {
    if (domain_ != d.name()) {
      throw DomainMismatch("measure on '" + domain_ + "' used with domain '" + d.name() + "'");
    }
    for (const auto* part : {&pos_, &neg_}) {
      if (!part->empty() && part->rbegin()->first >= d.size()) {
        throw InvalidArgument("measure site out of range for domain '" + d.name() + "'");
      }
    }
  }

  bool operator==(const SignedMeasure&) const = default;

 private:
  static double sum(const Atoms& a) {
    double s = 0.0;
    for (const auto& [site, w] : a) s += w;
    return s;
  }

  std::string domain_;
  Atoms pos_;
  Atoms neg_;
};

/// Merges raw (site, value) contributions and splits the result into its
/// Jordan parts. Sites whose contributions cancel exactly carry no atom.
inline SignedMeasure jordan(const Domain& d, std::span<const std::pair<Site, double>> raw) {
  std::map<Site, double> net;
  for (const auto& [s, v] : raw) {
    if (s >= d.size()) throw InvalidArgument("site " + std::to_string(s) + " out of range");
    net[s] += v;
  }
  SignedMeasure::Atoms pos, neg;
  for (const auto& [s, v] : net) {
    if (v > 0.0) pos.emplace(s, v);
    else if (v < 0.0) neg.emplace(s, -v);
  }
  return SignedMeasure::from_parts(d.name(), std::move(pos), std::move(neg));
}

inline SignedMeasure jordan(const Domain& d, const std::map<Site, double>& raw) {
  std::vector<std::pair<Site, double>> v(raw.begin(), raw.end());
  return jordan(d, v);
}

inline SignedMeasure negate(const SignedMeasure& mu) {
  return SignedMeasure::from_parts(mu.domain(), mu.neg(), mu.pos());
}

inline SignedMeasure scale(const SignedMeasure& mu, double c) {
  if (c == 0.0) return SignedMeasure(mu.domain());
  SignedMeasure::Atoms pos, neg;
  const double k = std::abs(c);
  for (const auto& [s, w] : mu.pos()) pos.emplace(s, w * k);
  for (const auto& [s, w] : mu.neg()) neg.emplace(s, w * k);
  if (c < 0.0) std::swap(pos, neg);
  return SignedMeasure::from_parts(mu.domain(), std::move(pos), std::move(neg));
}

inline double total(const SignedMeasure& mu) { return mu.total(); }
inline double mass(const SignedMeasure& mu) { return mu.mass(); }

/// mu + nu, re-canonicalized.
inline SignedMeasure add(const SignedMeasure& mu, const SignedMeasure& nu) {
  if (mu.domain() != nu.domain()) throw DomainMismatch("cannot add measures on different domains");
  std::map<Site, double> net;
  for (const auto& [s, w] : mu.pos()) net[s] += w;
  for (const auto& [s, w] : mu.neg()) net[s] -= w;
  for (const auto& [s, w] : nu.pos()) net[s] += w;
  for (const auto& [s, w] : nu.neg()) net[s] -= w;
  SignedMeasure::Atoms pos, neg;
  for (const auto& [s, v] : net) {
    if (v > 0.0) pos.emplace(s, v);
    else if (v < 0.0) neg.emplace(s, -v);
  }
  return SignedMeasure::from_parts(mu.domain(), std::move(pos), std::move(neg));
}

/// The normalized volume measure dx of the domain.
inline SignedMeasure uniform_measure(const Domain& d) {
  SignedMeasure::Atoms pos;
  for (Site i = 0; i < d.size(); ++i) {
    if (d.weights()[i] > 0.0) pos.emplace(i, d.weights()[i]);
  }
  return SignedMeasure::from_parts(d.name(), std::move(pos), {});
}

enum class Normalization {
  /// 1/(N1+N2) on every shop, the default.
  TotalCount,
  /// 1/N1 on our shops and 1/N2 on rival shops.
  PerBrand,
};

/// mu = c * (sum of deltas at our shops - sum of deltas at rival shops).
///
/// With the default normalization every shop weighs 1/(N1+N2) and shops of
/// both brands sharing a site cancel exactly.
inline SignedMeasure competition_measure(const PlacementSeq& ours, const PlacementSeq& rivals,
                                         Normalization norm = Normalization::TotalCount) {
  if (!ours.empty() && !rivals.empty() && ours.domain != rivals.domain) {
    throw DomainMismatch("our and rival placements are on different domains");
  }
  const std::size_t n1 = ours.size(), n2 = rivals.size();
  if (n1 + n2 == 0) throw InvalidArgument("competition measure needs at least one shop");
  const std::string& domain = n1 > 0 ? ours.domain : rivals.domain;

  SignedMeasure::Atoms pos, neg;
  if (norm == Normalization::TotalCount) {
    std::map<Site, long long> count;
    for (Site s : ours.sites) ++count[s];
    for (Site s : rivals.sites) --count[s];
    const auto denom = static_cast<double>(n1 + n2);
    for (const auto& [s, c] : count) {
      if (c > 0) pos.emplace(s, static_cast<double>(c) / denom);
      else if (c < 0) neg.emplace(s, static_cast<double>(-c) / denom);
    }
  } else {
    std::map<Site, double> net;
    for (Site s : ours.sites) net[s] += 1.0 / static_cast<double>(n1);
    for (Site s : rivals.sites) net[s] -= 1.0 / static_cast<double>(n2);
    for (const auto& [s, v] : net) {
      if (v > 0.0) pos.emplace(s, v);
      else if (v < 0.0) neg.emplace(s, -v);
    }
  }
  return SignedMeasure::from_parts(domain, std::move(pos), std::move(neg));
}

/// Empirical probability measure (1/N) sum delta_{x_i}.
inline SignedMeasure empirical_measure(const PlacementSeq& points) {
  return competition_measure(points, PlacementSeq{points.domain, {}});
}

}  // namespace rcs
