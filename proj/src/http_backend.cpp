#include "scalarexp/http_backend.hpp"

#include <mutex>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace scalarexp {

using json = nlohmann::json;

namespace {

template <class Call>
std::string with_retries(const HttpBackendOptions& opt, const std::string& what, Call&& call) {
  std::string last_error;
  for (int attempt = 1; attempt <= std::max(1, opt.max_attempts); ++attempt) {
    httplib::Client client(opt.url);
    client.set_connection_timeout(opt.timeout);
    client.set_read_timeout(opt.timeout);
    client.set_write_timeout(opt.timeout);
    httplib::Result res = call(client);
    if (res && res->status == 200) return res->body;
    if (res && res->status >= 400 && res->status < 500) {
      throw ScoringError(what + " rejected (" + std::to_string(res->status) + "): " + res->body);
    }
    last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    spdlog::warn("{} {} failed (attempt {}/{}): {}", what, opt.url, attempt, opt.max_attempts,
                 last_error);
    if (attempt < opt.max_attempts) std::this_thread::sleep_for(opt.retry_delay * attempt);
  }
  throw TransportError(what + " " + opt.url + ": " + last_error);
}

}  // namespace

HttpScorerBackend::HttpScorerBackend(HttpBackendOptions options) : options_(std::move(options)) {
  json info;
  try {
    info = json::parse(get("/info"));
    model_id_ = info.at("model_id").get<std::string>();
    mode_ = parse_scoring_mode(info.at("mode").get<std::string>());
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed /info reply: ") + e.what());
  }
  if (!options_.model_id.empty() && options_.model_id != model_id_) {
    throw ScoringError("server at " + options_.url + " serves '" + model_id_ + "', expected '" +
                       options_.model_id + "'");
  }
}

HttpScorerBackend::~HttpScorerBackend() = default;

std::string HttpScorerBackend::get(const std::string& path) const {
  ++requests_;
  return with_retries(options_, "GET " + path,
                      [&](httplib::Client& c) { return c.Get(path); });
}

std::string HttpScorerBackend::post(const std::string& path, const std::string& body) const {
  ++requests_;
  return with_retries(options_, "POST " + path, [&](httplib::Client& c) {
    return c.Post(path, body, "application/json");
  });
}

std::vector<std::string> HttpScorerBackend::vocabulary() const {
  try {
    return json::parse(get("/vocabulary")).get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed /vocabulary reply: ") + e.what());
  }
}

std::vector<CandidateScore> HttpScorerBackend::score(const ScoreRequest& request) {
  const std::string body = post("/score", to_json(request).dump());
  const json reply = json::parse(body, nullptr, false);
  if (reply.is_discarded() || !reply.is_array()) throw TransportError("malformed /score reply");
  auto out = response_from_json(reply);
  if (out.size() != request.candidates.size()) {
    throw TransportError("/score answered " + std::to_string(out.size()) + " of " +
                         std::to_string(request.candidates.size()) + " candidates");
  }
  return out;
}

struct BackendServer::Impl {
  std::shared_ptr<ScorerBackend> backend;
  std::mutex backend_mutex;
  httplib::Server server;
  std::thread thread;
};

BackendServer::BackendServer(std::shared_ptr<ScorerBackend> backend, const std::string& host, int port)
    : impl_(std::make_unique<Impl>()), host_(host) {
  impl_->backend = std::move(backend);
  Impl* impl = impl_.get();
  impl->server.Get("/info", [impl](const httplib::Request&, httplib::Response& res) {
    json j{{"model_id", impl->backend->model_id()},
           {"mode", to_string(impl->backend->supported_mode())}};
    res.set_content(j.dump(), "application/json");
  });
  impl->server.Get("/vocabulary", [impl](const httplib::Request&, httplib::Response& res) {
    res.set_content(json(impl->backend->vocabulary()).dump(), "application/json");
  });
  impl->server.Post("/score", [impl](const httplib::Request& req, httplib::Response& res) {
    try {
      const json request = json::parse(req.body);
      std::lock_guard lock(impl->backend_mutex);
      res.set_content(handle_wire_request(*impl->backend, request).dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
    }
  });
  port_ = port == 0 ? impl->server.bind_to_any_port(host) : port;
  if (port != 0 && !impl->server.bind_to_port(host, port)) {
    throw TransportError("cannot bind " + host + ":" + std::to_string(port));
  }
  if (port_ <= 0) throw TransportError("cannot bind " + host);
  impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
  impl->server.wait_until_ready();
}

BackendServer::~BackendServer() { stop(); }

void BackendServer::stop() {
  if (impl_ && impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

std::string BackendServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace scalarexp
