#include "scalarexp/scoring.hpp"

#include <cmath>
#include <unordered_map>

#include <spdlog/spdlog.h>

namespace scalarexp {

using json = nlohmann::json;

ScoredAlternative make_scored(std::string word, double logprob, int token_count) {
  // Backends computing log-softmax in floating point can overshoot zero slightly.
  if (std::isnan(logprob) || logprob > 1e-9 || std::isinf(logprob)) {
    throw ScoringError("invalid log probability for '" + word + "'");
  }
  if (token_count < 1) throw ScoringError("token_count must be >= 1 for '" + word + "'");
  logprob = std::min(logprob, 0.0);
  return ScoredAlternative{std::move(word), -logprob, std::exp(logprob), token_count};
}

ScoreRequest make_request(std::string model_id, const ScalarConstruction& construction,
                          std::span<const std::string> candidates) {
  return ScoreRequest{std::move(model_id),
                      construction.mode(),
                      std::string(construction.prefix()),
                      construction.full_text(),
                      construction.slot(),
                      {candidates.begin(), candidates.end()}};
}

json to_json(const ScoreRequest& r) {
  return json{{"model_id", r.model_id},
              {"mode", to_string(r.mode)},
              {"prefix", r.prefix},
              {"full_text", r.full_text},
              {"slot_span", {r.slot.begin, r.slot.end}},
              {"candidates", r.candidates}};
}

ScoreRequest request_from_json(const json& j) {
  try {
    ScoreRequest r;
    r.model_id = j.at("model_id").get<std::string>();
    r.mode = parse_scoring_mode(j.at("mode").get<std::string>());
    r.prefix = j.at("prefix").get<std::string>();
    r.full_text = j.at("full_text").get<std::string>();
    const auto& span = j.at("slot_span");
    r.slot = SlotSpan{span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
    r.candidates = j.at("candidates").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw ScoringError(std::string("malformed score request: ") + e.what());
  }
}

json to_json(std::span<const CandidateScore> response) {
  json arr = json::array();
  for (const auto& c : response) {
    json rec{{"candidate", c.candidate}, {"token_count", c.token_count}};
    rec["logprob"] = c.logprob ? json(*c.logprob) : json(nullptr);
    arr.push_back(std::move(rec));
  }
  return arr;
}

std::vector<CandidateScore> response_from_json(const json& j) {
  try {
    std::vector<CandidateScore> out;
    for (const auto& rec : j) {
      CandidateScore c;
      c.candidate = rec.at("candidate").get<std::string>();
      c.token_count = rec.at("token_count").get<int>();
      if (!rec.at("logprob").is_null()) c.logprob = rec["logprob"].get<double>();
      out.push_back(std::move(c));
    }
    return out;
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed score response: ") + e.what());
  }
}

json handle_wire_request(ScorerBackend& backend, const json& request) {
  const ScoreRequest r = request_from_json(request);
  if (r.model_id != backend.model_id()) {
    throw ScoringError("request for model '" + r.model_id + "' sent to '" + backend.model_id() + "'");
  }
  return to_json(backend.score(r));
}

namespace {

void require_mode(const ScorerBackend& backend, const ScalarConstruction& construction,
                  ScoringMode mode) {
  if (backend.supported_mode() != mode) {
    throw ScoringError("backend '" + backend.model_id() + "' does not answer " +
                       std::string(to_string(mode)) + " requests");
  }
  if (construction.mode() != mode) {
    throw ScoringError("construction is not in " + std::string(to_string(mode)) + " mode");
  }
}

// Pairs each requested candidate with the backend's answer for it.
std::vector<const CandidateScore*> align(std::span<const std::string> candidates,
                                         const std::vector<CandidateScore>& response) {
  std::unordered_map<std::string_view, const CandidateScore*> by_word;
  for (const auto& c : response) by_word.emplace(c.candidate, &c);
  std::vector<const CandidateScore*> out;
  out.reserve(candidates.size());
  for (const auto& w : candidates) {
    auto it = by_word.find(w);
    if (it == by_word.end()) throw TransportError("backend response lacks candidate '" + w + "'");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

MaskedSlotScores score_masked_slot(ScorerBackend& backend, const ScalarConstruction& construction,
                                   std::span<const std::string> candidates) {
  require_mode(backend, construction, ScoringMode::MaskedSlot);
  for (const auto& c : candidates) {
    if (c.empty()) throw ScoringError("empty candidate");
  }
  const auto response = backend.score(make_request(backend.model_id(), construction, candidates));
  const auto aligned = align(candidates, response);
  MaskedSlotScores out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const CandidateScore& c = *aligned[i];
    if (c.token_count != 1 || !c.logprob) {
      out.skipped.push_back(candidates[i]);
      continue;
    }
    out.scored.push_back(make_scored(candidates[i], *c.logprob, 1));
  }
  if (!out.skipped.empty()) {
    spdlog::info("masked scoring skipped {} multi-unit candidate(s)", out.skipped.size());
  }
  return out;
}

std::vector<ScoredAlternative> score_continuation(ScorerBackend& backend,
                                                  const ScalarConstruction& construction,
                                                  std::span<const std::string> candidates) {
  require_mode(backend, construction, ScoringMode::Continuation);
  for (const auto& c : candidates) {
    if (trim(c).empty()) throw ScoringError("empty candidate");
  }
  const auto response = backend.score(make_request(backend.model_id(), construction, candidates));
  const auto aligned = align(candidates, response);
  std::vector<ScoredAlternative> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!aligned[i]->logprob) {
      throw TransportError("continuation backend returned no logprob for '" + candidates[i] + "'");
    }
    out.push_back(make_scored(candidates[i], *aligned[i]->logprob, aligned[i]->token_count));
  }
  return out;
}

double masked_vocabulary_mass(ScorerBackend& backend, const ScalarConstruction& construction) {
  const auto vocab = backend.vocabulary();
  if (vocab.empty()) throw ScoringError("backend exposes an empty vocabulary");
  const auto scores = score_masked_slot(backend, construction, vocab);
  double mass = 0.0;
  for (const auto& s : scores.scored) mass += s.probability;
  return mass;
}

std::vector<ScoredAlternative> renormalized(std::span<const ScoredAlternative> scores) {
  double total = 0.0;
  for (const auto& s : scores) total += s.probability;
  if (!(total > 0.0)) throw ScoringError("cannot renormalize zero mass");
  std::vector<ScoredAlternative> out;
  for (const auto& s : scores) {
    out.push_back(make_scored(s.word, std::log(s.probability / total), s.token_count));
  }
  return out;
}

}  // namespace scalarexp
