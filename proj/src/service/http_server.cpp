#include "vtools/service/http_server.hpp"

namespace vtools::service {

namespace {

using nlohmann::json;

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const ServiceError& e) {
      send_json(res, e.body(), http_status(e.reason()));
    } catch (const json::exception& e) {
      send_json(res, {{"reason", "bad-request"}, {"detail", e.what()}}, 400);
    } catch (const std::exception& e) {
      send_json(res, {{"reason", "internal"}, {"detail", e.what()}}, 500);
    }
  };
}

json request_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

json session_json(const SessionView& s) {
  return {{"id", s.id}, {"participant", s.participant}, {"levels", s.levels}, {"closed", s.closed}};
}

}  // namespace

void install_routes(httplib::Server& server, PlayService& service) {
  server.Get("/levels", guarded([&](const httplib::Request&, httplib::Response& res) {
    send_json(res, service.list_levels());
  }));
  server.Get(R"(/levels/([^/]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
    res.set_content(service.level_document(req.matches[1]), "application/json");
  }));
  server.Post("/sessions", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const json body = request_body(req);
    const auto participant = body.value("participant", std::string("anonymous"));
    const auto levels = body.value("levels", std::vector<std::string>{});
    send_json(res, session_json(service.create_session(participant, levels)), 201);
  }));
  server.Get(R"(/sessions/([^/]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
    send_json(res, session_json(service.session(req.matches[1])));
  }));
  server.Post(R"(/sessions/([^/]+)/close)", guarded([&](const httplib::Request& req, httplib::Response& res) {
    service.close_session(req.matches[1]);
    send_json(res, session_json(service.session(req.matches[1])));
  }));
  server.Get(R"(/sessions/([^/]+)/levels/([^/]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
    send_json(res, service.view_level(req.matches[1], req.matches[2]));
  }));
  server.Post(R"(/sessions/([^/]+)/levels/([^/]+)/attempts)",
              guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto result = service.post_attempt(req.matches[1], req.matches[2], request_body(req));
                json body = to_json(result.record);
                body["accepted"] = true;
                body["trajectory"] = result.trajectory;
                send_json(res, body);
              }));
  server.Get(R"(/sessions/([^/]+)/log)", guarded([&](const httplib::Request& req, httplib::Response& res) {
    json out = json::array();
    for (const auto& r : service.log(req.matches[1])) out.push_back(to_json(r));
    send_json(res, out);
  }));
}

}  // namespace vtools::service
