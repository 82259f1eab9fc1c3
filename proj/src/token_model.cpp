#include "scalarexp/token_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scalarexp {

std::vector<double> TokenLanguageModel::masked_logits(std::string_view, std::string_view) const {
  throw ScoringError(model_id() + " is not a masked model");
}

std::vector<double> TokenLanguageModel::next_token_logits(std::string_view,
                                                          std::span<const int>) const {
  throw ScoringError(model_id() + " is not an autoregressive model");
}

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw ScoringError("empty logit vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(mx)) throw ScoringError("non-finite logits");
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - mx);
  const double lse = mx + std::log(sum);
  std::vector<double> out(logits.size());
  std::transform(logits.begin(), logits.end(), out.begin(), [&](double l) { return l - lse; });
  return out;
}

LocalModelBackend::LocalModelBackend(std::shared_ptr<const TokenLanguageModel> model)
    : model_(std::move(model)) {
  if (!model_) throw ScoringError("null token model");
  const auto& vocab = model_->vocabulary();
  for (std::size_t i = 0; i < vocab.size(); ++i) unit_index_.emplace(vocab[i], static_cast<int>(i));
}

std::vector<CandidateScore> LocalModelBackend::score(const ScoreRequest& request) {
  if (request.mode != model_->mode()) {
    throw ScoringError(model_->model_id() + ": unsupported mode " +
                       std::string(to_string(request.mode)));
  }
  if (request.slot.begin > request.slot.end || request.slot.end > request.full_text.size() ||
      request.full_text.compare(0, request.slot.begin, request.prefix) != 0) {
    throw ScoringError("inconsistent prefix / slot span in request");
  }
  return request.mode == ScoringMode::MaskedSlot ? score_masked(request)
                                                 : score_continuation(request);
}

std::vector<CandidateScore> LocalModelBackend::score_masked(const ScoreRequest& request) const {
  const std::string_view text = request.full_text;
  const auto logp = log_softmax(model_->masked_logits(text.substr(0, request.slot.begin),
                                                      text.substr(request.slot.end)));
  std::vector<CandidateScore> out;
  out.reserve(request.candidates.size());
  for (const auto& cand : request.candidates) {
    int unit = -1;
    int count = 1;
    if (auto it = unit_index_.find(cand); it != unit_index_.end()) {
      unit = it->second;
    } else {
      const auto toks = model_->tokenize(cand);
      count = std::max<int>(1, static_cast<int>(toks.size()));
      if (toks.size() == 1) unit = toks.front();
    }
    CandidateScore cs{cand, std::nullopt, count};
    if (unit >= 0 && count == 1) cs.logprob = logp.at(static_cast<std::size_t>(unit));
    out.push_back(std::move(cs));
  }
  return out;
}

std::vector<CandidateScore> LocalModelBackend::score_continuation(const ScoreRequest& request) const {
  std::string_view context = request.prefix;
  while (!context.empty() && (context.back() == ' ' || context.back() == '\t')) {
    context.remove_suffix(1);
  }
  std::vector<CandidateScore> out;
  out.reserve(request.candidates.size());
  for (const auto& cand : request.candidates) {
    if (trim(cand).empty()) throw ScoringError("empty candidate");
    const auto toks = model_->tokenize(" " + cand);
    if (toks.empty()) throw ScoringError("candidate '" + cand + "' tokenizes to nothing");
    double total = 0.0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const auto logp = log_softmax(
          model_->next_token_logits(context, std::span<const int>(toks.data(), i)));
      total += logp.at(static_cast<std::size_t>(toks[i]));
    }
    out.push_back(CandidateScore{cand, total, static_cast<int>(toks.size())});
  }
  return out;
}

}  // namespace scalarexp
