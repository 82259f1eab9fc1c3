// Backend-agnostic scoring of candidate strong scalemates in a construction's slot.
//
// A ScorerBackend answers ScoreRequests in exactly one mode. The JSON wire
// form of requests and responses (see to_json / *_from_json) is the contract
// for out-of-process backends:
//
//   request  {"model_id", "mode", "prefix", "full_text", "slot_span": [b, e], "candidates": [...]}
//   response [{"candidate", "logprob", "token_count"}, ...]
//
// logprob is a natural-log probability; it is null when the backend cannot
// read a single position for the candidate (masked mode, multi-unit words).
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scalarexp/templates.hpp"

namespace scalarexp {

class ScoringError : public Error {
 public:
  using Error::Error;
};

/// Backend unreachable or returned a malformed reply; the request may be retried.
class TransportError : public ScoringError {
 public:
  using ScoringError::ScoringError;
};

struct ScoredAlternative {
  std::string word;
  double surprisal = 0.0;    // nats
  double probability = 1.0;  // exp(-surprisal)
  int token_count = 1;
};

/// Validates a natural-log probability and derives surprisal/probability.
ScoredAlternative make_scored(std::string word, double logprob, int token_count);

struct ScoreRequest {
  std::string model_id;
  ScoringMode mode = ScoringMode::Continuation;
  std::string prefix;
  std::string full_text;
  SlotSpan slot;
  std::vector<std::string> candidates;
};

struct CandidateScore {
  std::string candidate;
  std::optional<double> logprob;
  int token_count = 1;
};

class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;
  virtual std::string model_id() const = 0;
  virtual ScoringMode supported_mode() const = 0;
  virtual std::vector<std::string> vocabulary() const = 0;
  /// Returns one entry per requested candidate, in request order.
  virtual std::vector<CandidateScore> score(const ScoreRequest& request) = 0;
};

ScoreRequest make_request(std::string model_id, const ScalarConstruction& construction,
                          std::span<const std::string> candidates);

nlohmann::json to_json(const ScoreRequest& request);
ScoreRequest request_from_json(const nlohmann::json& j);
nlohmann::json to_json(std::span<const CandidateScore> response);
std::vector<CandidateScore> response_from_json(const nlohmann::json& j);

/// Server-side dispatch of one wire request against a backend.
nlohmann::json handle_wire_request(ScorerBackend& backend, const nlohmann::json& request);

struct MaskedSlotScores {
  std::vector<ScoredAlternative> scored;
  std::vector<std::string> skipped;  // not a single vocabulary unit
};

MaskedSlotScores score_masked_slot(ScorerBackend& backend, const ScalarConstruction& construction,
                                   std::span<const std::string> candidates);

std::vector<ScoredAlternative> score_continuation(ScorerBackend& backend,
                                                  const ScalarConstruction& construction,
                                                  std::span<const std::string> candidates);

/// Total probability the backend puts on its whole vocabulary at the slot.
double masked_vocabulary_mass(ScorerBackend& backend, const ScalarConstruction& construction);

/// Rescales probabilities to sum to one over the given alternatives.
std::vector<ScoredAlternative> renormalized(std::span<const ScoredAlternative> scores);

}  // namespace scalarexp
