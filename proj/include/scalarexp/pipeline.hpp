// End-to-end runs: ingest, template, score, weight, analyze.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scalarexp/alternatives.hpp"
#include "scalarexp/concept.hpp"
#include "scalarexp/ingest.hpp"
#include "scalarexp/score_cache.hpp"
#include "scalarexp/scoring.hpp"
#include "scalarexp/stats.hpp"
#include "scalarexp/templates.hpp"

namespace scalarexp {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct DatasetInput {
  std::filesystem::path path;
  std::optional<std::filesystem::path> stimuli;  // cross-scale frames (JSONL)
};

struct BackendConfig {
  std::string kind = "http";
  std::string url;
  std::string model_id;
};

struct LexiconConfig {
  std::filesystem::path lexicon;
  std::filesystem::path frequencies;
  std::map<Pos, std::filesystem::path> exclusions;
  std::size_t cutoff = 1000;
};

struct AnalysisToggles {
  bool string_based = true;
  bool concept_based = true;
  bool accessibility = true;
  bool topk = true;
};

struct RunConfig {
  std::map<DatasetId, DatasetInput> datasets;
  std::optional<std::filesystem::path> cloze;
  std::optional<BackendConfig> masked;
  std::optional<BackendConfig> autoregressive;
  std::optional<std::filesystem::path> embeddings;
  std::optional<LexiconConfig> lexicon;
  std::filesystem::path cache;
  std::filesystem::path output_dir = "report";
  bool offline = false;
  std::uint64_t seed = 1;
  AnalysisToggles analyses;
  std::size_t top_k = 5;
  std::size_t permutations = 1000;
  bool renormalize_within = false;
  bool enforce_expected_counts = true;
  std::vector<Scale> topk_scales;

  /// Relative paths resolve against `base_dir`.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  std::string digest() const;  // sha256 of to_json().dump()
};

enum class SectionKind { WithinScale, CrossScale, Accessibility };
std::string_view to_string(SectionKind kind);

struct CorrelationRow {
  std::string predictor;
  std::string against;
  Correlation result;
};

struct RegressionTable {
  std::string model;  // "full", "intercept_only"
  FitResult fit;
};

struct AnovaRow {
  std::string full;
  std::string reduced;
  AnovaResult result;
};

struct TopKEntry {
  Scale scale;
  std::vector<std::pair<std::string, double>> ranked;  // every scored alternative, by probability
};

struct ExcludedScale {
  Scale scale;
  std::string reason;
};

struct PermutationControl {
  std::size_t shuffles = 0;
  std::uint64_t seed = 0;
  double mean_rho = 0.0;
  double mean_abs_rho = 0.0;
};

/// Correlation recomputed without the point of maximum leverage.
struct LeverageCheck {
  std::string predictor;
  Scale dropped;
  Correlation with_point;
  Correlation without_point;
};

struct SectionResult {
  SectionKind kind = SectionKind::WithinScale;
  DatasetId dataset = DatasetId::Degen2015;
  bool skipped = false;
  std::vector<std::string> notices;
  std::vector<PredictorRow> predictors;
  std::vector<CorrelationRow> correlations;
  std::vector<RegressionTable> regressions;
  std::vector<AnovaRow> anovas;
  std::vector<TopKEntry> topk;
  std::vector<ExcludedScale> excluded;
  std::optional<PermutationControl> permutation;
  std::vector<LeverageCheck> leverage;

  const CorrelationRow* correlation(std::string_view predictor, std::string_view against = "human_si") const;
};

struct DatasetCounts {
  DatasetId id;
  LoadReport load;
  std::size_t expected_items = 0;
  std::size_t expected_scales = 0;
};

struct ReportBundle {
  std::vector<SectionResult> sections;
  nlohmann::json manifest;

  const SectionResult* find(SectionKind kind, DatasetId dataset) const;
};

class Pipeline {
 public:
  explicit Pipeline(RunConfig config);
  ~Pipeline();

  /// Injected backends replace the configured HTTP endpoints; both are still
  /// routed through the score cache.
  void set_masked_backend(std::shared_ptr<ScorerBackend> backend);
  void set_autoregressive_backend(std::shared_ptr<ScorerBackend> backend);
  void set_embeddings(std::shared_ptr<const EmbeddingTable> embeddings);

  const RunConfig& config() const { return config_; }
  const std::vector<StimulusItem>& items(DatasetId id);
  const AlternativeSet& pos_set(Pos pos);

  SectionResult run_within_scale();
  SectionResult run_cross_scale(DatasetId id);
  SectionResult run_accessibility();

  /// Every configured analysis, in a fixed order.
  ReportBundle run_all();
  nlohmann::json manifest();

 private:
  std::shared_ptr<ScorerBackend> backend(ScoringMode mode);
  const EmbeddingTable& embeddings();
  const SectionResult& score_cross_scale(DatasetId id);

  RunConfig config_;
  std::shared_ptr<ScoreCache> cache_;
  std::string cache_digest_at_start_;
  std::shared_ptr<ScorerBackend> masked_;
  std::shared_ptr<ScorerBackend> autoregressive_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  std::map<DatasetId, std::vector<StimulusItem>> items_;
  std::map<DatasetId, DatasetCounts> counts_;
  std::map<Pos, AlternativeSet> pos_sets_;
  std::map<DatasetId, SectionResult> cross_scored_;
  std::optional<std::size_t> cache_records_at_start_;
};

}  // namespace scalarexp
