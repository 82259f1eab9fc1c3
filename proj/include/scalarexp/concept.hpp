// Concept-based expectedness: similarity-weighted average surprisal over an
// alternative set, and top-k inspection of scored alternatives.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "scalarexp/alternatives.hpp"
#include "scalarexp/scoring.hpp"

namespace scalarexp {

class ConceptError : public Error {
 public:
  using Error::Error;
};

/// Word vectors of a single dimension. Zero vectors are never admitted.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dimension, std::string source);

  /// Standard pre-trained text format: "word v1 v2 ... vd" per line. A leading
  /// "count dim" header line is skipped. When `keep` is given, only those
  /// words are retained. Zero vectors are skipped and counted.
  static EmbeddingTable load_text(const std::filesystem::path& path,
                                  const std::unordered_set<std::string>* keep = nullptr);

  void add(std::string word, std::vector<double> vector);
  const std::vector<double>* find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word) != nullptr; }

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  const std::string& source() const { return source_; }
  std::size_t skipped_zero_vectors() const { return skipped_zero_; }

 private:
  std::size_t dimension_;
  std::string source_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::size_t skipped_zero_ = 0;
};

double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct WeightedSurprisalResult {
  double value = 0.0;  // nats
  std::size_t contributing = 0;
  std::vector<std::string> dropped_oov;
  std::vector<std::string> dropped_nonpositive_weight;
  std::vector<std::string> dropped_unscored;
};

using ScoreMap = std::map<std::string, ScoredAlternative, std::less<>>;

ScoreMap to_score_map(std::span<const ScoredAlternative> scores);

/// -ln( Σ P(a)·w_a / Σ w_a ) with w_a = cossim(v_strong, v_a) over alternatives
/// that have an embedding, a score, and a positive weight. Every other
/// alternative lands in exactly one dropped_* list.
WeightedSurprisalResult weighted_average_surprisal(std::string_view strong,
                                                   const AlternativeSet& alternatives,
                                                   const ScoreMap& scores,
                                                   const EmbeddingTable& embeddings);

/// The k most probable scored members of `alternatives`, descending; ties
/// broken lexicographically. Returns all when fewer than k are scored.
std::vector<std::pair<std::string, double>> top_k_alternatives(const AlternativeSet& alternatives,
                                                               const ScoreMap& scores,
                                                               std::size_t k);

}  // namespace scalarexp
