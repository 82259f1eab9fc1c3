// In-process backends built from a token-level language model.
#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scalarexp/scoring.hpp"

namespace scalarexp {

/// Minimal token-level model interface. Logit vectors are indexed by token id
/// and have vocabulary().size() entries.
class TokenLanguageModel {
 public:
  virtual ~TokenLanguageModel() = default;
  virtual std::string model_id() const = 0;
  virtual ScoringMode mode() const = 0;
  virtual const std::vector<std::string>& vocabulary() const = 0;
  /// Token ids for `text`. Continuation scoring passes words with a leading
  /// space, matching how a sentence-internal word is tokenized.
  virtual std::vector<int> tokenize(std::string_view text) const = 0;

  /// Masked models: logits at the slot between `left` and `right`.
  virtual std::vector<double> masked_logits(std::string_view left, std::string_view right) const;
  /// Autoregressive models: logits for the token following `context` + `generated`.
  virtual std::vector<double> next_token_logits(std::string_view context,
                                                std::span<const int> generated) const;
};

/// Numerically stable log-softmax.
std::vector<double> log_softmax(std::span<const double> logits);

/// ScorerBackend over a TokenLanguageModel.
///
/// Masked mode reads one position: a candidate equal to a vocabulary unit (or
/// tokenizing to exactly one) gets that unit's log probability; others are
/// answered with token_count > 1 and no logprob.
///
/// Continuation mode conditions on the prefix with trailing whitespace removed,
/// tokenizes " " + candidate and sums per-token log probabilities, each
/// conditioned on the prefix and the candidate's earlier tokens. The suffix is
/// never seen by the model.
class LocalModelBackend : public ScorerBackend {
 public:
  explicit LocalModelBackend(std::shared_ptr<const TokenLanguageModel> model);

  std::string model_id() const override { return model_->model_id(); }
  ScoringMode supported_mode() const override { return model_->mode(); }
  std::vector<std::string> vocabulary() const override { return model_->vocabulary(); }
  std::vector<CandidateScore> score(const ScoreRequest& request) override;

 private:
  std::vector<CandidateScore> score_masked(const ScoreRequest& request) const;
  std::vector<CandidateScore> score_continuation(const ScoreRequest& request) const;

  std::shared_ptr<const TokenLanguageModel> model_;
  std::unordered_map<std::string, int> unit_index_;
};

}  // namespace scalarexp
