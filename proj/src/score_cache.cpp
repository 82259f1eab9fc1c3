#include "scalarexp/score_cache.hpp"

#include <chrono>
#include <fstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "scalarexp/digest.hpp"

namespace scalarexp {

using json = nlohmann::json;

std::string construction_hash(ScoringMode mode, std::string_view full_text, SlotSpan slot) {
  return sha256_hex(fmt::format("{}\n{}\n{}:{}", to_string(mode), full_text, slot.begin, slot.end));
}

std::string construction_hash(const ScalarConstruction& c) {
  return construction_hash(c.mode(), c.full_text(), c.slot());
}

std::string CacheRecord::to_line() const {
  json j{{"model_id", key.model_id},
         {"construction", key.construction},
         {"candidate", key.candidate},
         {"mode", to_string(mode)},
         {"token_count", token_count},
         {"created_at", created_at}};
  j["logprob"] = logprob ? json(*logprob) : json(nullptr);
  return j.dump();
}

std::optional<CacheRecord> CacheRecord::from_line(std::string_view line) {
  const json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  try {
    CacheRecord r;
    r.key.model_id = j.at("model_id").get<std::string>();
    r.key.construction = j.at("construction").get<std::string>();
    r.key.candidate = j.at("candidate").get<std::string>();
    r.mode = parse_scoring_mode(j.at("mode").get<std::string>());
    r.token_count = j.at("token_count").get<int>();
    r.created_at = j.at("created_at").get<std::string>();
    if (!j.at("logprob").is_null()) r.logprob = j["logprob"].get<double>();
    if (r.token_count < 1 || (r.logprob && *r.logprob > 1e-9)) return std::nullopt;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

ScoreCache::ScoreCache(std::filesystem::path storage) : path_(std::move(storage)) {
  std::unique_lock lock(mutex_);
  reload_locked();
}

std::uintmax_t ScoreCache::current_file_size() const {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path_, ec);
  return ec ? 0 : size;
}

void ScoreCache::reload_locked() {
  index_.clear();
  discarded_ = 0;
  known_size_ = 0;
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (auto rec = CacheRecord::from_line(line)) {
      index_.insert_or_assign(rec->key, std::move(*rec));
    } else {
      ++discarded_;
    }
  }
  known_size_ = current_file_size();
  if (discarded_ > 0) {
    spdlog::warn("score cache {}: discarded {} corrupt record(s)", path_.string(), discarded_);
  }
}

std::optional<CacheRecord> ScoreCache::lookup(const CacheKey& key) {
  {
    std::shared_lock lock(mutex_);
    if (current_file_size() == known_size_) {
      auto it = index_.find(key);
      if (it == index_.end()) return std::nullopt;
      return it->second;
    }
  }
  std::unique_lock lock(mutex_);
  if (current_file_size() != known_size_) reload_locked();
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::store(CacheRecord record) {
  std::unique_lock lock(mutex_);
  if (current_file_size() != known_size_) reload_locked();
  if (!path_.parent_path().empty()) std::filesystem::create_directories(path_.parent_path());
  {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw ScoringError("cannot write score cache " + path_.string());
    out << record.to_line() << '\n';
    out.flush();
    if (!out) throw ScoringError("write to score cache failed: " + path_.string());
  }
  known_size_ = current_file_size();
  index_.insert_or_assign(record.key, std::move(record));
}

std::size_t ScoreCache::size() const {
  std::shared_lock lock(mutex_);
  return index_.size();
}

std::size_t ScoreCache::discarded_records() const {
  std::shared_lock lock(mutex_);
  return discarded_;
}

CachedBackend::CachedBackend(std::shared_ptr<ScorerBackend> inner, std::shared_ptr<ScoreCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {
  if (!inner_ || !cache_) throw ScoringError("cached backend needs a backend and a cache");
  model_id_ = inner_->model_id();
  mode_ = inner_->supported_mode();
}

CachedBackend::CachedBackend(std::string model_id, ScoringMode mode, std::shared_ptr<ScoreCache> cache)
    : cache_(std::move(cache)), model_id_(std::move(model_id)), mode_(mode) {
  if (!cache_) throw ScoringError("cache-only backend needs a cache");
}

std::vector<std::string> CachedBackend::vocabulary() const {
  if (!inner_) throw CacheMissError("vocabulary unavailable in cache-only mode");
  return inner_->vocabulary();
}

std::vector<CandidateScore> CachedBackend::score(const ScoreRequest& request) {
  if (request.mode != mode_) throw ScoringError("cached backend: mode mismatch");
  const std::string chash = construction_hash(request.mode, request.full_text, request.slot);
  std::vector<std::optional<CandidateScore>> answers(request.candidates.size());
  ScoreRequest misses = request;
  misses.candidates.clear();
  std::vector<std::size_t> miss_index;
  for (std::size_t i = 0; i < request.candidates.size(); ++i) {
    const auto& cand = request.candidates[i];
    if (auto rec = cache_->lookup({model_id_, chash, cand})) {
      answers[i] = CandidateScore{cand, rec->logprob, rec->token_count};
    } else {
      misses.candidates.push_back(cand);
      miss_index.push_back(i);
    }
  }
  if (!misses.candidates.empty()) {
    if (!inner_) {
      throw CacheMissError(fmt::format("{} candidate(s) for '{}' missing from cache (offline)",
                                       misses.candidates.size(), request.full_text));
    }
    const auto fresh = inner_->score(misses);
    if (fresh.size() != misses.candidates.size()) {
      throw TransportError("backend answered " + std::to_string(fresh.size()) + " of " +
                           std::to_string(misses.candidates.size()) + " candidates");
    }
    const std::string now =
        fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                 std::chrono::system_clock::now())));
    for (std::size_t k = 0; k < fresh.size(); ++k) {
      const std::size_t i = miss_index[k];
      if (fresh[k].candidate != request.candidates[i]) {
        throw TransportError("backend reordered candidates");
      }
      CacheRecord rec{{model_id_, chash, fresh[k].candidate}, mode_, fresh[k].logprob,
                      fresh[k].token_count, now};
      cache_->store(rec);
      answers[i] = fresh[k];
    }
  }
  std::vector<CandidateScore> out;
  out.reserve(answers.size());
  for (auto& a : answers) out.push_back(std::move(*a));
  return out;
}

std::shared_ptr<CachedBackend> cached(std::shared_ptr<ScorerBackend> inner,
                                      std::shared_ptr<ScoreCache> cache) {
  return std::make_shared<CachedBackend>(std::move(inner), std::move(cache));
}

}  // namespace scalarexp
