#pragma once

#include <qforest/service.hpp>

#include "httplib.h"
#include "json.hpp"

#include <string>

namespace qforest {

namespace detail {

inline void reply(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

inline nlohmann::json parse_body(const httplib::Request& req) {
  return nlohmann::json::parse(req.body, nullptr, /*allow_exceptions=*/false);
}

inline HttpResponse malformed_body() { return {422, {{"error", "Malformed"}, {"message", "request body is not JSON"}}}; }

}  // namespace detail

/// Routes the /v1 API onto an httplib server.
inline void mount_routes(httplib::Server& server, SessionService& service) {
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.status = 200;
    res.set_content("ok", "text/plain");
  });
  server.Get("/v1/healthz", [](const httplib::Request&, httplib::Response& res) {
    detail::reply(res, SessionService::health());
  });
  server.Post("/v1/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
    const auto body = detail::parse_body(req);
    detail::reply(res, body.is_discarded() ? detail::malformed_body() : service.create(body));
  });
  server.Get(R"(/v1/sessions/([0-9a-f]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    detail::reply(res, service.get(req.matches[1]));
  });
  server.Post(R"(/v1/sessions/([0-9a-f]+)/results)", [&service](const httplib::Request& req, httplib::Response& res) {
    const auto body = detail::parse_body(req);
    detail::reply(res, body.is_discarded() ? detail::malformed_body() : service.post_result(req.matches[1], body));
  });
  server.Delete(R"(/v1/sessions/([0-9a-f]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    detail::reply(res, service.close(req.matches[1]));
  });
}

}  // namespace qforest
