// Copyright 2026 The Sketchguess Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Eigen must precede httplib: <resolv.h> defines a `_res` macro.
#include "sketchguess/error.hpp"
#include "sketchguess/gateway.hpp"
#include "sketchguess/stats.hpp"

#include "httplib.h"

namespace sketchguess::gateway {

using json = nlohmann::json;

namespace {

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kFailedPrecondition:
      return 409;
    default:
      return 500;
  }
}

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, ErrorCode code, const std::string& message) {
  Reply(res, StatusFor(code), {{"code", ErrorCodeName(code)}, {"message", message}});
}

json Body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  }
  return j;
}

template <typename T>
std::optional<T> Optional(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kInvalidArgument, std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T Required(const json& j, const char* key) {
  auto v = Optional<T>(j, key);
  if (!v) throw Error(ErrorCode::kInvalidArgument, std::string("missing field '") + key + "'");
  return *v;
}

// Wraps a handler so library errors become {code, message} replies.
httplib::Server::Handler Guard(std::function<void(const httplib::Request&, httplib::Response&)> fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      ReplyError(res, e.code(), e.what());
    } catch (const std::exception& e) {
      Reply(res, 500, {{"code", "internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

struct HttpServer::Impl {
  SessionStore& store;
  httplib::Server server;

  explicit Impl(SessionStore& s) : store(s) { Routes(); }

  void Routes() {
    server.Post("/sessions", Guard([this](const auto& req, auto& res) {
      json b = Body(req);
      CreateRequest cr;
      const std::string mode = Optional<std::string>(b, "mode").value_or("replay");
      if (mode != "replay" && mode != "free") {
        throw Error(ErrorCode::kInvalidArgument, "mode must be replay or free");
      }
      cr.free_draw = mode == "free";
      const std::string selector = Optional<std::string>(b, "selector").value_or("random");
      if (selector == "id") {
        cr.sketch_id = Required<std::string>(b, "sketch_id");
      } else if (selector == "category") {
        cr.category = Required<std::string>(b, "category");
      } else if (selector != "random") {
        throw Error(ErrorCode::kInvalidArgument, "selector must be random, id or category");
      }
      if (auto s = Optional<std::string>(b, "subject")) cr.subject = *s;
      Reply(res, 201, SessionToJson(store.Create(cr)));
    }));

    server.Get(R"(/sessions/([^/]+))", Guard([this](const auto& req, auto& res) {
      Reply(res, 200, SessionToJson(store.Get(req.matches[1])));
    }));

    server.Post(R"(/sessions/([^/]+)/advance)", Guard([this](const auto& req, auto& res) {
      json b = Body(req);
      std::optional<corpus::Stroke> stroke;
      if (b.contains("stroke")) stroke = corpus::ParseStrokeJson(b["stroke"].dump());
      const std::string guess = Optional<std::string>(b, "guess").value_or("");
      Reply(res, 200, SessionToJson(store.Advance(req.matches[1], guess, stroke)));
    }));

    server.Post(R"(/sessions/([^/]+)/reveal)", Guard([this](const auto& req, auto& res) {
      json b = Body(req);
      Reply(res, 200, SessionToJson(store.Reveal(req.matches[1], Required<std::string>(b, "category"))));
    }));

    server.Post(R"(/sessions/([^/]+)/score)", Guard([this](const auto& req, auto& res) {
      json b = Body(req);
      lexnet::CriteriaSet criteria = lexnet::CriteriaSet::Default();
      if (auto c = Optional<std::string>(b, "criteria")) {
        criteria = lexnet::CriteriaSet::Parse(*c, Optional<double>(b, "wup_threshold").value_or(0.9));
      }
      json out = VerdictsToJson(store.Score(req.matches[1], criteria));
      out["criteria"] = criteria.ToString();
      Reply(res, 200, out);
    }));

    server.Post(R"(/sessions/([^/]+)/ratings)", Guard([this](const auto& req, auto& res) {
      json b = Body(req);
      const std::string judge = Required<std::string>(b, "judge");
      const GuesserType type = ParseGuesserType(Required<std::string>(b, "type"));
      RatingAck ack = store.SubmitRating(req.matches[1], judge, type, Required<int>(b, "rating"),
                                         Optional<bool>(b, "scale_reversed").value_or(false));
      json out{{"stored", ack.stored}};
      if (ack.replaced) {
        out["replaced"] = *ack.replaced;
        out["audit"] = "replaced earlier rating " + std::to_string(*ack.replaced) + " from judge " +
                       judge;
      }
      Reply(res, 200, out);
    }));

    server.Get("/export", Guard([this](const auto& req, auto& res) {
      ExportFilter f;
      if (req.has_param("category")) f.category = req.get_param_value("category");
      ExportBundle b = store.Export(f);
      Reply(res, 200, {{"sessions", b.sessions}, {"corpus", b.corpus}, {"ratings", b.ratings}});
    }));

    server.Get("/analytics/histogram", Guard([this](const auto&, auto& res) {
      auto h = stats::GuessCountHistogram(store.RevealedCorpus());
      Reply(res, 200, {{"buckets", {{"1", h[0]}, {"2", h[1]}, {"3", h[2]}, {"4+", h[3]}}}});
    }));

    server.Get("/analytics/first-guess", Guard([this](const auto&, auto& res) {
      json rows = json::array();
      for (const auto& r : stats::FirstGuessByCategory(store.RevealedCorpus())) {
        rows.push_back({{"category", r.category},
                        {"n", r.locations.size()},
                        {"median", r.median},
                        {"mad", r.mad}});
      }
      Reply(res, 200, {{"categories", rows}});
    }));

    server.Get("/healthz", Guard([this](const auto&, auto& res) {
      Reply(res, 200, {{"status", "ok"},
                       {"sessions", store.size()},
                       {"model", store.resources().model != nullptr}});
    }));

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        json body{{"code", res.status == 404 ? "not_found" : "http_error"},
                  {"message", "no route"}};
        res.set_content(body.dump(), "application/json");
      }
    });
  }
};

HttpServer::HttpServer(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {}
HttpServer::~HttpServer() = default;

bool HttpServer::Listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int HttpServer::BindAnyPort(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool HttpServer::ListenAfterBind() { return impl_->server.listen_after_bind(); }

void HttpServer::Stop() { impl_->server.stop(); }

}  // namespace sketchguess::gateway
