#pragma once

// Session-oriented game service: one human brand against an algorithmic
// rival. Transport-independent; gamesvc_http.hpp binds it to HTTP routes.

#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <utility>

#include "json.hpp"
#include "rcs/domain.hpp"
#include "rcs/error.hpp"
#include "rcs/experiment.hpp"
#include "rcs/green.hpp"
#include "rcs/harness.hpp"
#include "rcs/placement.hpp"

namespace rcs {

/// Largest domain a session may use; keeps per-move exact transport interactive.
inline constexpr std::size_t kMaxSessionSites = 4096;
inline constexpr std::size_t kDefaultMaxSessions = 64;
inline constexpr long kDefaultMaxRounds = 64;

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

inline ApiResponse api_error(int status, std::string code, std::string message) {
  return {status, {{"error", std::move(code)}, {"message", std::move(message)}}};
}

/// Domains and kernels shared by all sessions on the same domain.
class KernelStore {
 public:
  struct Entry {
    Domain domain;
    GreenKernel kernel;
  };

  std::shared_ptr<const Entry> get(Domain d) {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(d.hash());
    if (it != entries_.end()) return it->second;
    auto g = green_kernel(d);
    const auto key = d.hash();
    auto e = std::make_shared<const Entry>(Entry{std::move(d), std::move(g)});
    entries_.emplace(key, e);
    return e;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Entry>> entries_;
};

class Session {
 public:
  enum class Status { AwaitingHuman, Finished };

  Session(std::string id, std::shared_ptr<const KernelStore::Entry> env, const StrategySpec& rival,
          const std::optional<GrowthSchedule>& schedule, long max_rounds)
      : id_(std::move(id)),
        env_(std::move(env)),
        match_(env_->domain, env_->kernel, rival, schedule),
        max_rounds_(max_rounds) {}

  const std::string& id() const { return id_; }
  std::mutex& guard() { return guard_; }
  Match& match() { return match_; }
  const Match& match() const { return match_; }
  long max_rounds() const { return max_rounds_; }
  Status status() const { return match_.state().round >= max_rounds_ ? Status::Finished : Status::AwaitingHuman; }
  std::map<std::string, ApiResponse>& replies() { return replies_; }

  nlohmann::json state_json() const {
    auto j = match_.state().to_json();
    j["id"] = id_;
    j["rivalStrategy"] = match_.rival_spec().to_json();
    j["status"] = status() == Status::Finished ? "finished" : "awaiting-human";
    j["maxRounds"] = max_rounds_;
    return j;
  }

 private:
  std::string id_;
  std::shared_ptr<const KernelStore::Entry> env_;
  Match match_;
  long max_rounds_;
  std::mutex guard_;
  std::map<std::string, ApiResponse> replies_;
};

/// In-memory session table. Operations on one session are serialized by its
/// guard; a second concurrent operation is refused with 409 rather than queued.
class GameService {
 public:
  explicit GameService(std::size_t max_sessions = kDefaultMaxSessions) : max_sessions_(max_sessions) {}

  /// Domain used when a create request names none.
  void set_default_domain(nlohmann::json domain) { default_domain_ = std::move(domain); }

  /// POST /sessions
  ApiResponse create(const nlohmann::json& body) {
    if (!body.is_object()) return api_error(400, "malformed", "request body must be a JSON object");
    std::optional<Domain> d;
    StrategySpec rival;
    std::optional<GrowthSchedule> schedule;
    long max_rounds = kDefaultMaxRounds;
    try {
      if (!body.contains("domain") && default_domain_.is_null()) return api_error(400, "malformed", "missing 'domain'");
      if (!body.contains("rival")) return api_error(400, "malformed", "missing 'rival'");
      d = load_domain(body.contains("domain") ? body.at("domain") : default_domain_);
      rival = StrategySpec::from_json(body.at("rival"));
      if (body.contains("schedule")) schedule = GrowthSchedule::from_json(body.at("schedule"));
      if (body.contains("maxRounds")) max_rounds = body.at("maxRounds").get<long>();
      if (max_rounds < 1) return api_error(400, "malformed", "maxRounds must be >= 1");
    } catch (const nlohmann::json::exception& e) {
      return api_error(400, "malformed", e.what());
    } catch (const FormatError& e) {
      return api_error(400, "malformed", e.what());
    } catch (const InvalidArgument& e) {
      return api_error(400, "malformed", e.what());
    } catch (const OutOfRange& e) {
      return api_error(400, "malformed", e.what());
    } catch (const IoError& e) {
      return api_error(400, "malformed", e.what());
    }
    if (d->size() > kMaxSessionSites) {
      return api_error(422, "domain-too-large",
                       "domain has " + std::to_string(d->size()) + " sites; sessions allow at most " +
                           std::to_string(kMaxSessionSites));
    }
    {
      std::shared_lock lock(table_mutex_);
      if (sessions_.size() >= max_sessions_) return api_error(503, "too-many-sessions", "session limit reached");
    }
    std::shared_ptr<Session> session;
    try {
      auto env = kernels_.get(std::move(*d));
      session = std::make_shared<Session>(new_id(), env, rival, schedule, max_rounds);
    } catch (const PreconditionError& e) {
      return api_error(422, "precondition", e.what());
    } catch (const InvalidArgument& e) {
      return api_error(422, "precondition", e.what());
    } catch (const OutOfRange& e) {
      return api_error(422, "precondition", e.what());
    }
    {
      std::unique_lock lock(table_mutex_);
      if (sessions_.size() >= max_sessions_) return api_error(503, "too-many-sessions", "session limit reached");
      sessions_.emplace(session->id(), session);
    }
    const auto& dom = session->match().domain();
    nlohmann::json sites = nlohmann::json::array();
    for (Site i = 0; i < dom.size(); ++i) {
      const auto c = dom.site(i);
      sites.push_back(std::vector<double>(c.begin(), c.end()));
    }
    return {201,
            {{"id", session->id()},
             {"board", {{"domain", dom.name()}, {"sites", sites}, {"weights", dom.weights()}}},
             {"state", session->state_json()}}};
  }

  /// POST /sessions/{id}/move. A non-empty idempotency key replays the stored
  /// response of an earlier move with the same key.
  ApiResponse move(const std::string& id, const nlohmann::json& body, const std::string& idempotency_key = {}) {
    auto s = find(id);
    if (!s) return not_found(id);
    std::unique_lock guard(s->guard(), std::try_to_lock);
    if (!guard.owns_lock()) return api_error(409, "busy", "another operation on this session is in flight");
    if (!idempotency_key.empty()) {
      auto it = s->replies().find(idempotency_key);
      if (it != s->replies().end()) return it->second;
    }
    if (s->status() == Session::Status::Finished) return api_error(409, "finished", "the match is over");
    Site site = 0;
    try {
      if (!body.is_object() || !body.contains("site")) return api_error(400, "malformed", "missing 'site'");
      const auto& v = body.at("site");
      if (!v.is_number_integer() || v.get<long long>() < 0) return api_error(400, "invalid-site", "site must be a non-negative integer");
      site = v.get<Site>();
    } catch (const nlohmann::json::exception& e) {
      return api_error(400, "malformed", e.what());
    }
    if (site >= s->match().domain().size()) {
      return api_error(400, "invalid-site", "site " + std::to_string(site) + " out of range");
    }
    const auto before = s->match().state().rival.size();
    const auto rec = s->match().play(site);
    const auto& rival = s->match().state().rival.sites;
    ApiResponse r{200,
                  {{"ourScore", rec.w_ours},
                   {"rivalScore", rec.w_rival},
                   {"rivalMoves", std::vector<Site>(rival.begin() + static_cast<std::ptrdiff_t>(before), rival.end())},
                   {"winner", std::string(to_string(rec.winner))},
                   {"round", s->match().state().round},
                   {"N", rec.n},
                   {"fN", rec.fn}}};
    if (!idempotency_key.empty()) s->replies().emplace(idempotency_key, r);
    return r;
  }

  /// GET /sessions/{id}
  ApiResponse state(const std::string& id) {
    return with_session(id, [](Session& s) { return ApiResponse{200, s.state_json()}; });
  }

  /// GET /sessions/{id}/history
  ApiResponse history(const std::string& id) {
    return with_session(id, [](Session& s) {
      nlohmann::json h = nlohmann::json::array();
      for (const auto& r : s.match().state().history) h.push_back(r.to_json());
      return ApiResponse{200, h};
    });
  }

  /// GET /sessions/{id}/whatif?site=k. Scores a hypothetical shop at k
  /// against the rival's current shops; never changes the session.
  ApiResponse whatif(const std::string& id, const std::string& site_text) {
    Site site = 0;
    const auto* end = site_text.data() + site_text.size();
    const auto r = std::from_chars(site_text.data(), end, site);
    if (site_text.empty() || r.ec != std::errc() || r.ptr != end) {
      return api_error(400, "invalid-site", "query parameter 'site' must be a non-negative integer");
    }
    return with_session(id, [site](Session& s) {
      if (site >= s.match().domain().size()) {
        return api_error(400, "invalid-site", "site " + std::to_string(site) + " out of range");
      }
      const auto rec = s.match().preview(site);
      return ApiResponse{200,
                         {{"site", site},
                          {"ourScore", rec.w_ours},
                          {"rivalScore", rec.w_rival},
                          {"winner", std::string(to_string(rec.winner))}}};
    });
  }

  /// GET /sessions/{id}/measure. Exports mu, -mu and dx in the measure file
  /// format so scores can be recomputed offline.
  ApiResponse measure(const std::string& id) {
    return with_session(id, [](Session& s) {
      const auto mu = s.match().measure();
      return ApiResponse{200,
                         {{"ours", mu.to_json()},
                          {"rival", negate(mu).to_json()},
                          {"uniform", uniform_measure(s.match().domain()).to_json()}}};
    });
  }

  std::size_t session_count() const {
    std::shared_lock lock(table_mutex_);
    return sessions_.size();
  }

  /// All sessions, ordered by id; sessions busy with a move are skipped.
  nlohmann::json snapshot() const {
    nlohmann::json out = nlohmann::json::array();
    std::shared_lock lock(table_mutex_);
    for (const auto& [id, s] : sessions_) {
      std::unique_lock guard(s->guard(), std::try_to_lock);
      if (guard.owns_lock()) out.push_back(s->state_json());
    }
    return out;
  }

 private:
  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(table_mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  static ApiResponse not_found(const std::string& id) { return api_error(404, "not-found", "no session '" + id + "'"); }

  template <class F>
  ApiResponse with_session(const std::string& id, F&& f) {
    auto s = find(id);
    if (!s) return not_found(id);
    std::unique_lock guard(s->guard(), std::try_to_lock);
    if (!guard.owns_lock()) return api_error(409, "busy", "another operation on this session is in flight");
    return f(*s);
  }

  /// 128 random bits as 32 hex digits.
  std::string new_id() {
    std::lock_guard lock(rng_mutex_);
    std::string id;
    for (int k = 0; k < 4; ++k) {
      char buf[9];
      std::snprintf(buf, sizeof(buf), "%08x", static_cast<unsigned>(entropy_()));
      id += buf;
    }
    return id;
  }

  std::size_t max_sessions_;
  nlohmann::json default_domain_;
  KernelStore kernels_;
  mutable std::shared_mutex table_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex rng_mutex_;
  std::random_device entropy_;
};

}  // namespace rcs
