#pragma once

// HTTP/1.1 routes for GameService.

#include <string>

#include "httplib.h"
#include "json.hpp"
#include "rcs/gamesvc.hpp"

namespace rcs {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_sessions = kDefaultMaxSessions;
  std::string cors_origin;
};

namespace detail {

inline void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

inline std::optional<nlohmann::json> parse_body(const httplib::Request& req, httplib::Response& res) {
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded()) {
    send(res, api_error(400, "malformed", "request body is not valid JSON"));
    return std::nullopt;
  }
  return j;
}

}  // namespace detail

inline void install_routes(httplib::Server& svr, GameService& svc, const std::string& cors_origin = {}) {
  if (!cors_origin.empty()) {
    svr.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                             {"Access-Control-Allow-Headers", "Content-Type, Idempotency-Key"},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }
  svr.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    if (auto body = detail::parse_body(req, res)) detail::send(res, svc.create(*body));
  });
  svr.Post(R"(/sessions/([0-9a-f]+)/move)", [&svc](const httplib::Request& req, httplib::Response& res) {
    if (auto body = detail::parse_body(req, res)) {
      detail::send(res, svc.move(req.matches[1], *body, req.get_header_value("Idempotency-Key")));
    }
  });
  svr.Get(R"(/sessions/([0-9a-f]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    detail::send(res, svc.state(req.matches[1]));
  });
  svr.Get(R"(/sessions/([0-9a-f]+)/history)", [&svc](const httplib::Request& req, httplib::Response& res) {
    detail::send(res, svc.history(req.matches[1]));
  });
  svr.Get(R"(/sessions/([0-9a-f]+)/whatif)", [&svc](const httplib::Request& req, httplib::Response& res) {
    detail::send(res, svc.whatif(req.matches[1], req.get_param_value("site")));
  });
  svr.Get(R"(/sessions/([0-9a-f]+)/measure)", [&svc](const httplib::Request& req, httplib::Response& res) {
    detail::send(res, svc.measure(req.matches[1]));
  });
  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      detail::send(res, api_error(res.status, res.status == 404 ? "not-found" : "http-error", "no such route"));
    }
  });
  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    detail::send(res, api_error(500, "internal", msg));
  });
}

}  // namespace rcs
