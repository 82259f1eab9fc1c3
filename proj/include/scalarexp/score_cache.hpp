// Persistent, append-only cache of backend scores.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <tuple>

#include "scalarexp/scoring.hpp"

namespace scalarexp {

class CacheMissError : public ScoringError {
 public:
  using ScoringError::ScoringError;
};

/// Digest of (mode, full text, slot span) identifying a construction.
std::string construction_hash(ScoringMode mode, std::string_view full_text, SlotSpan slot);
std::string construction_hash(const ScalarConstruction& construction);

struct CacheKey {
  std::string model_id;
  std::string construction;
  std::string candidate;
  friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

struct CacheRecord {
  CacheKey key;
  ScoringMode mode = ScoringMode::Continuation;
  std::optional<double> logprob;
  int token_count = 1;
  std::string created_at;

  /// One JSON line (no trailing newline); keys are emitted in sorted order.
  std::string to_line() const;
  /// nullopt for lines that do not parse as a complete record.
  static std::optional<CacheRecord> from_line(std::string_view line);
};

/// Line-delimited record file plus an in-memory index. Reads take a shared
/// lock, writes are serialized. The index follows the file: a deleted or
/// replaced file empties or reloads it on the next lookup. Later records for
/// a key shadow earlier ones; unparseable lines are counted and ignored.
class ScoreCache {
 public:
  explicit ScoreCache(std::filesystem::path storage);

  std::optional<CacheRecord> lookup(const CacheKey& key);
  void store(CacheRecord record);

  std::size_t size() const;
  std::size_t discarded_records() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::uintmax_t current_file_size() const;
  void reload_locked();

  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::map<CacheKey, CacheRecord> index_;
  std::uintmax_t known_size_ = 0;
  std::size_t discarded_ = 0;
};

/// Decorator answering from the cache and forwarding only misses (as a single
/// request) to the wrapped backend. With no wrapped backend every miss throws
/// CacheMissError: the precomputed-score mode.
class CachedBackend : public ScorerBackend {
 public:
  CachedBackend(std::shared_ptr<ScorerBackend> inner, std::shared_ptr<ScoreCache> cache);
  /// Cache-only backend for a model that is not reachable.
  CachedBackend(std::string model_id, ScoringMode mode, std::shared_ptr<ScoreCache> cache);

  std::string model_id() const override { return model_id_; }
  ScoringMode supported_mode() const override { return mode_; }
  std::vector<std::string> vocabulary() const override;
  std::vector<CandidateScore> score(const ScoreRequest& request) override;

  bool offline() const { return inner_ == nullptr; }

 private:
  std::shared_ptr<ScorerBackend> inner_;
  std::shared_ptr<ScoreCache> cache_;
  std::string model_id_;
  ScoringMode mode_;
};

std::shared_ptr<CachedBackend> cached(std::shared_ptr<ScorerBackend> inner,
                                      std::shared_ptr<ScoreCache> cache);

}  // namespace scalarexp
