// JSON-over-HTTP transport for the scoring contract.
//
//   GET  /info        -> {"model_id": ..., "mode": "masked_slot" | "continuation"}
//   GET  /vocabulary  -> ["unit", ...]
//   POST /score       -> ScoreRequest in, response array out (see scoring.hpp)
#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "scalarexp/scoring.hpp"

namespace scalarexp {

struct HttpBackendOptions {
  std::string url;           // e.g. "http://127.0.0.1:8600"
  std::string model_id;      // expected model; empty = accept what /info reports
  int max_attempts = 3;
  std::chrono::milliseconds retry_delay{250};
  std::chrono::seconds timeout{300};
};

class HttpScorerBackend : public ScorerBackend {
 public:
  /// Queries /info; throws TransportError when the server cannot be reached.
  explicit HttpScorerBackend(HttpBackendOptions options);
  ~HttpScorerBackend() override;

  std::string model_id() const override { return model_id_; }
  ScoringMode supported_mode() const override { return mode_; }
  std::vector<std::string> vocabulary() const override;
  std::vector<CandidateScore> score(const ScoreRequest& request) override;

  std::size_t requests_sent() const { return requests_; }

 private:
  std::string get(const std::string& path) const;
  std::string post(const std::string& path, const std::string& body) const;

  HttpBackendOptions options_;
  std::string model_id_;
  ScoringMode mode_ = ScoringMode::Continuation;
  mutable std::size_t requests_ = 0;
};

/// Serves a backend over HTTP on a background thread until destroyed.
class BackendServer {
 public:
  BackendServer(std::shared_ptr<ScorerBackend> backend, const std::string& host, int port = 0);
  ~BackendServer();
  BackendServer(const BackendServer&) = delete;
  BackendServer& operator=(const BackendServer&) = delete;

  int port() const { return port_; }
  std::string url() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_ = 0;
};

}  // namespace scalarexp
