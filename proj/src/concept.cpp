#include "scalarexp/concept.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

namespace scalarexp {

EmbeddingTable::EmbeddingTable(std::size_t dimension, std::string source)
    : dimension_(dimension), source_(std::move(source)) {
  if (dimension_ == 0) throw ConceptError("embedding dimension must be positive");
}

void EmbeddingTable::add(std::string word, std::vector<double> vector) {
  if (vector.size() != dimension_) {
    throw ConceptError("vector for '" + word + "' has dimension " + std::to_string(vector.size()) +
                       ", table has " + std::to_string(dimension_));
  }
  if (std::all_of(vector.begin(), vector.end(), [](double x) { return x == 0.0; })) {
    throw ConceptError("zero vector for '" + word + "'");
  }
  vectors_.insert_or_assign(std::move(word), std::move(vector));
}

const std::vector<double>* EmbeddingTable::find(std::string_view word) const {
  auto it = vectors_.find(std::string(word));
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingTable EmbeddingTable::load_text(const std::filesystem::path& path,
                                         const std::unordered_set<std::string>* keep) {
  std::ifstream in(path);
  if (!in) throw ConceptError("cannot open embeddings " + path.string());
  std::optional<EmbeddingTable> table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> vec;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    vec.clear();
    double x;
    while (ss >> x) vec.push_back(x);
    if (!ss.eof()) throw ConceptError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    if (line_no == 1 && vec.size() == 1) continue;  // word2vec-style "count dim" header
    if (!table) table.emplace(vec.size(), path.filename().string());
    if (vec.size() != table->dimension()) {
      throw ConceptError(path.string() + ":" + std::to_string(line_no) + ": dimension " +
                         std::to_string(vec.size()) + " != " + std::to_string(table->dimension()));
    }
    if (keep && !keep->count(word)) continue;
    if (std::all_of(vec.begin(), vec.end(), [](double v) { return v == 0.0; })) {
      ++table->skipped_zero_;
      continue;
    }
    table->vectors_.insert_or_assign(std::move(word), vec);
  }
  if (!table) throw ConceptError("no vectors in " + path.string());
  if (table->skipped_zero_ > 0) {
    spdlog::warn("embeddings {}: skipped {} zero vector(s)", path.string(), table->skipped_zero_);
  }
  return std::move(*table);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ConceptError("cosine similarity: dimension mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw ConceptError("cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

ScoreMap to_score_map(std::span<const ScoredAlternative> scores) {
  ScoreMap out;
  for (const auto& s : scores) out.insert_or_assign(s.word, s);
  return out;
}

WeightedSurprisalResult weighted_average_surprisal(std::string_view strong,
                                                   const AlternativeSet& alternatives,
                                                   const ScoreMap& scores,
                                                   const EmbeddingTable& embeddings) {
  const auto* v_strong = embeddings.find(strong);
  if (!v_strong) throw ConceptError("no embedding for strong scalemate '" + std::string(strong) + "'");

  WeightedSurprisalResult r;
  double weighted = 0.0;
  double weight_sum = 0.0;
  for (const auto& a : alternatives.members()) {
    const auto* v_a = embeddings.find(a);
    if (!v_a) {
      r.dropped_oov.push_back(a);
      continue;
    }
    auto it = scores.find(a);
    if (it == scores.end()) {
      r.dropped_unscored.push_back(a);
      continue;
    }
    const double w = cosine_similarity(*v_strong, *v_a);
    if (!(w > 0.0)) {
      r.dropped_nonpositive_weight.push_back(a);
      continue;
    }
    weighted += it->second.probability * w;
    weight_sum += w;
    ++r.contributing;
  }
  if (r.contributing == 0) {
    throw ConceptError("no alternative of '" + std::string(strong) +
                       "' has a score and a positive weight");
  }
  const double mean = weighted / weight_sum;
  if (!(mean > 0.0)) throw ConceptError("weighted probability underflows for '" + std::string(strong) + "'");
  r.value = -std::log(mean);
  return r;
}

std::vector<std::pair<std::string, double>> top_k_alternatives(const AlternativeSet& alternatives,
                                                               const ScoreMap& scores,
                                                               std::size_t k) {
  if (k < 1) throw ConceptError("k must be >= 1");
  std::vector<std::pair<std::string, double>> ranked;
  for (const auto& a : alternatives.members()) {
    auto it = scores.find(a);
    if (it != scores.end()) ranked.emplace_back(a, it->second.probability);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

}  // namespace scalarexp
