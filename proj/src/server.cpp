#include "capcom/server.hpp"

#include "httplib.h"

#include "capcom/errors.hpp"

namespace capcom::human_eval {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

// Maps service exceptions to HTTP status codes.
template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const PoolExhaustedError& e) {
    send_json(res, 409, {{"error", "pool_exhausted"}, {"message", e.what()}});
  } catch (const DuplicateSubmissionError& e) {
    send_json(res, 409, {{"error", "duplicate_submission"}, {"message", e.what()}});
  } catch (const RatingRangeError& e) {
    send_json(res, 422, {{"error", "rating_out_of_range"}, {"message", e.what()}});
  } catch (const ProtocolError& e) {
    send_json(res, 409, {{"error", "protocol"}, {"message", e.what()}});
  } catch (const UnknownIdError& e) {
    send_json(res, 404, {{"error", "not_found"}, {"message", e.what()}});
  } catch (const ValidationError& e) {
    send_json(res, 400, {{"error", "invalid_request"}, {"message", e.what()}});
  } catch (const json::exception& e) {
    send_json(res, 400, {{"error", "invalid_json"}, {"message", e.what()}});
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", "internal"}, {"message", e.what()}});
  }
}

json parse_body(const httplib::Request& req) {
  auto j = json::parse(req.body);
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

}  // namespace

struct RatingServer::Impl {
  explicit Impl(RatingService& s) : service(s) {}
  RatingService& service;
  httplib::Server server;
};

RatingServer::RatingServer(RatingService& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  auto& svc = impl_->service;
  // httplib's defaults add SO_REUSEPORT, which lets a second server share the
  // port silently.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });

  srv.Post("/api/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = parse_body(req);
      const auto activity = parse_activity(body.at("activity").get<std::string>());
      send_json(res, 201, svc.create_session(activity, body.at("rater_id").get<std::string>()));
    });
  });
  srv.Post(R"(/api/sessions/([^/]+)/ratings)",
           [&svc](const httplib::Request& req, httplib::Response& res) {
             guarded(res, [&] {
               const auto body = parse_body(req);
               send_json(res, 200,
                         svc.submit(req.matches[1], body.at("task_id").get<std::string>(),
                                    body.at("payload")));
             });
           });
  srv.Get(R"(/api/sessions/([^/]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc.session_view(req.matches[1])); });
  });
  srv.Get("/api/reports/glicko", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc.glicko_report()); });
  });
  srv.Get("/api/reports/tests", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto pair = req.get_param_value("pair");
      const auto comma = pair.find(',');
      if (comma == std::string::npos || comma == 0 || comma + 1 == pair.size())
        throw ValidationError("pair must be \"model_a,model_b\"");
      send_json(res, 200, svc.tests_report(pair.substr(0, comma), pair.substr(comma + 1)));
    });
  });
  if (!static_dir.empty() && std::filesystem::is_directory(static_dir))
    srv.set_mount_point("/", static_dir.string());
}

RatingServer::~RatingServer() { stop(); }

int RatingServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
  return bound;
}

void RatingServer::listen() { impl_->server.listen_after_bind(); }

void RatingServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool RatingServer::running() const { return impl_->server.is_running(); }

}  // namespace capcom::human_eval
