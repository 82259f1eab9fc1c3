#include "scalarexp/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "scalarexp/digest.hpp"
#include "scalarexp/http_backend.hpp"

namespace scalarexp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
}

BackendConfig backend_from_json(const json& j, std::string_view where) {
  reject_unknown(j, {"kind", "url", "model_id"}, where);
  BackendConfig b;
  b.kind = j.value("kind", "http");
  b.url = j.value("url", "");
  b.model_id = j.value("model_id", "");
  if (b.kind != "http") throw ConfigError(fmt::format("{}: unsupported backend kind '{}'", where, b.kind));
  if (b.model_id.empty()) throw ConfigError(fmt::format("{}: model_id is required", where));
  return b;
}

json backend_to_json(const BackendConfig& b) {
  return json{{"kind", b.kind}, {"url", b.url}, {"model_id", b.model_id}};
}

std::string context_key(std::string_view context) { return sha256_hex(context).substr(0, 16); }

std::string scale_label(const Scale& s) { return s.weak + "/" + s.strong; }

std::string file_digest(const fs::path& p) {
  std::error_code ec;
  return fs::exists(p, ec) ? sha256_file(p) : std::string();
}

// Complete (predictor, against) pairs, in row order.
std::pair<std::vector<double>, std::vector<double>> pairs(std::span<const PredictorRow> rows,
                                                          std::string_view predictor,
                                                          std::string_view against) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    const auto a = r.value(predictor), b = r.value(against);
    if (a && b) {
      x.push_back(*a);
      y.push_back(*b);
    }
  }
  return {std::move(x), std::move(y)};
}

CorrelationRow correlate(std::span<const PredictorRow> rows, std::string_view predictor,
                         std::string_view against) {
  const auto [x, y] = pairs(rows, predictor, against);
  try {
    return CorrelationRow{std::string(predictor), std::string(against), pearson(x, y)};
  } catch (const StatsError& e) {
    throw StatsError(fmt::format("{} vs {}: {}", predictor, against, e.what()));
  }
}

// Cross-scale analyses are per scale; datasets with several contexts per
// scale are averaged.
std::vector<PredictorRow> aggregate_by_scale(std::span<const PredictorRow> rows) {
  std::vector<PredictorRow> out;
  std::map<Scale, std::size_t> index;
  std::vector<std::vector<const PredictorRow*>> groups;
  for (const auto& r : rows) {
    auto [it, inserted] = index.emplace(r.key.scale, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(&r);
  }
  for (const auto& g : groups) {
    if (g.size() == 1) {
      out.push_back(*g.front());
      continue;
    }
    PredictorRow agg;
    agg.key.dataset = g.front()->key.dataset;
    agg.key.scale = g.front()->key.scale;
    std::string contexts;
    double si = 0;
    for (const auto* r : g) {
      contexts += r->key.context_hash;
      si += r->human_si;
    }
    agg.key.context_hash = context_key(contexts);
    agg.human_si = si / static_cast<double>(g.size());
    auto mean_of = [&](std::optional<double> PredictorRow::*field) -> std::optional<double> {
      double sum = 0;
      for (const auto* r : g) {
        if (!(r->*field)) return std::nullopt;
        sum += *(r->*field);
      }
      return sum / static_cast<double>(g.size());
    };
    agg.string_surprisal = mean_of(&PredictorRow::string_surprisal);
    agg.string_probability = mean_of(&PredictorRow::string_probability);
    agg.concept_surprisal = mean_of(&PredictorRow::concept_surprisal);
    agg.cloze_accessibility = g.front()->cloze_accessibility;
    out.push_back(std::move(agg));
  }
  return out;
}

void add_leverage_check(SectionResult& section, std::string_view predictor) {
  std::vector<const PredictorRow*> complete;
  for (const auto& r : section.predictors) {
    if (r.value(predictor)) complete.push_back(&r);
  }
  if (complete.size() < 4) return;
  std::vector<double> x, y;
  for (const auto* r : complete) {
    x.push_back(*r->value(predictor));
    y.push_back(r->human_si);
  }
  const std::size_t drop = max_leverage_index(x);
  LeverageCheck check;
  check.predictor = std::string(predictor);
  check.dropped = complete[drop]->key.scale;
  check.with_point = pearson(x, y);
  x.erase(x.begin() + static_cast<std::ptrdiff_t>(drop));
  y.erase(y.begin() + static_cast<std::ptrdiff_t>(drop));
  check.without_point = pearson(x, y);
  section.leverage.push_back(check);
}

}  // namespace

// ---------------------------------------------------------------- config

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  reject_unknown(j,
                 {"datasets", "cloze", "backends", "embeddings", "lexicon", "cache", "output_dir", "offline",
                  "seed", "analyses", "top_k", "permutations", "renormalize_within",
                  "enforce_expected_counts", "topk_scales"},
                 "config");
  RunConfig c;
  try {
    const json datasets = j.value("datasets", json::object());
    for (const auto& [name, d] : datasets.items()) {
      const DatasetId id = parse_dataset_id(name);
      if (id == DatasetId::Ronai2022Cloze) throw ConfigError("cloze data goes under the 'cloze' key");
      reject_unknown(d, {"path", "stimuli"}, "datasets." + name);
      DatasetInput in;
      in.path = resolve(base_dir, d.at("path").get<std::string>());
      if (d.contains("stimuli")) in.stimuli = resolve(base_dir, d.at("stimuli").get<std::string>());
      c.datasets.emplace(id, std::move(in));
    }
    if (j.contains("cloze")) c.cloze = resolve(base_dir, j.at("cloze").get<std::string>());
    if (j.contains("backends")) {
      const auto& b = j.at("backends");
      reject_unknown(b, {"masked", "autoregressive"}, "backends");
      if (b.contains("masked")) c.masked = backend_from_json(b.at("masked"), "backends.masked");
      if (b.contains("autoregressive")) {
        c.autoregressive = backend_from_json(b.at("autoregressive"), "backends.autoregressive");
      }
    }
    if (j.contains("embeddings")) c.embeddings = resolve(base_dir, j.at("embeddings").get<std::string>());
    if (j.contains("lexicon")) {
      const auto& l = j.at("lexicon");
      reject_unknown(l, {"lexicon", "frequencies", "exclusions", "cutoff"}, "lexicon");
      LexiconConfig lc;
      lc.lexicon = resolve(base_dir, l.at("lexicon").get<std::string>());
      lc.frequencies = resolve(base_dir, l.at("frequencies").get<std::string>());
      lc.cutoff = l.value("cutoff", std::size_t{1000});
      const json exclusions = l.value("exclusions", json::object());
      for (const auto& [pos, path] : exclusions.items()) {
        lc.exclusions[parse_pos(pos)] = resolve(base_dir, path.get<std::string>());
      }
      c.lexicon = std::move(lc);
    }
    c.output_dir = resolve(base_dir, j.value("output_dir", std::string("report")));
    c.cache = j.contains("cache") ? resolve(base_dir, j.at("cache").get<std::string>())
                                  : c.output_dir / "score_cache.jsonl";
    c.offline = j.value("offline", false);
    c.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("analyses")) {
      const auto& a = j.at("analyses");
      reject_unknown(a, {"string", "concept", "accessibility", "topk"}, "analyses");
      c.analyses.string_based = a.value("string", true);
      c.analyses.concept_based = a.value("concept", true);
      c.analyses.accessibility = a.value("accessibility", true);
      c.analyses.topk = a.value("topk", true);
    }
    c.top_k = j.value("top_k", std::size_t{5});
    c.permutations = j.value("permutations", std::size_t{1000});
    c.renormalize_within = j.value("renormalize_within", false);
    c.enforce_expected_counts = j.value("enforce_expected_counts", true);
    if (j.contains("topk_scales")) {
      for (const auto& s : j.at("topk_scales")) {
        c.topk_scales.push_back(
            make_scale(s.at(0).get<std::string>(), s.at(1).get<std::string>(), parse_pos(s.at(2).get<std::string>())));
      }
    } else {
      c.topk_scales.push_back(make_scale("big", "enormous", Pos::Adj));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.top_k < 1) throw ConfigError("config: top_k must be at least 1");
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path());
}

json RunConfig::to_json() const {
  json j;
  j["datasets"] = json::object();
  for (const auto& [id, in] : datasets) {
    json d{{"path", in.path.string()}};
    if (in.stimuli) d["stimuli"] = in.stimuli->string();
    j["datasets"][std::string(scalarexp::to_string(id))] = d;
  }
  if (cloze) j["cloze"] = cloze->string();
  j["backends"] = json::object();
  if (masked) j["backends"]["masked"] = backend_to_json(*masked);
  if (autoregressive) j["backends"]["autoregressive"] = backend_to_json(*autoregressive);
  if (embeddings) j["embeddings"] = embeddings->string();
  if (lexicon) {
    json l{{"lexicon", lexicon->lexicon.string()},
           {"frequencies", lexicon->frequencies.string()},
           {"cutoff", lexicon->cutoff},
           {"exclusions", json::object()}};
    for (const auto& [pos, path] : lexicon->exclusions) l["exclusions"][std::string(scalarexp::to_string(pos))] = path.string();
    j["lexicon"] = l;
  }
  j["cache"] = cache.string();
  j["output_dir"] = output_dir.string();
  j["offline"] = offline;
  j["seed"] = seed;
  j["analyses"] = {{"string", analyses.string_based},
                   {"concept", analyses.concept_based},
                   {"accessibility", analyses.accessibility},
                   {"topk", analyses.topk}};
  j["top_k"] = top_k;
  j["permutations"] = permutations;
  j["renormalize_within"] = renormalize_within;
  j["enforce_expected_counts"] = enforce_expected_counts;
  j["topk_scales"] = json::array();
  for (const auto& s : topk_scales) {
    j["topk_scales"].push_back({s.weak, s.strong, std::string(scalarexp::to_string(s.pos))});
  }
  return j;
}

std::string RunConfig::digest() const { return sha256_hex(to_json().dump()); }

// ---------------------------------------------------------------- results

std::string_view to_string(SectionKind kind) {
  switch (kind) {
    case SectionKind::WithinScale: return "within_scale";
    case SectionKind::CrossScale: return "cross_scale";
    case SectionKind::Accessibility: return "accessibility";
  }
  return "?";
}

const CorrelationRow* SectionResult::correlation(std::string_view predictor, std::string_view against) const {
  for (const auto& c : correlations) {
    if (c.predictor == predictor && c.against == against) return &c;
  }
  return nullptr;
}

const SectionResult* ReportBundle::find(SectionKind kind, DatasetId dataset) const {
  for (const auto& s : sections) {
    if (s.kind == kind && s.dataset == dataset) return &s;
  }
  return nullptr;
}

// ---------------------------------------------------------------- pipeline

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {
  cache_digest_at_start_ = file_digest(config_.cache);
  if (config_.cache.has_parent_path()) fs::create_directories(config_.cache.parent_path());
  cache_ = std::make_shared<ScoreCache>(config_.cache);
  cache_records_at_start_ = cache_->size();
}

Pipeline::~Pipeline() = default;

void Pipeline::set_masked_backend(std::shared_ptr<ScorerBackend> backend) {
  masked_ = config_.offline ? nullptr : cached(std::move(backend), cache_);
}

void Pipeline::set_autoregressive_backend(std::shared_ptr<ScorerBackend> backend) {
  autoregressive_ = config_.offline ? nullptr : cached(std::move(backend), cache_);
}

void Pipeline::set_embeddings(std::shared_ptr<const EmbeddingTable> embeddings) {
  embeddings_ = std::move(embeddings);
}

std::shared_ptr<ScorerBackend> Pipeline::backend(ScoringMode mode) {
  auto& slot = mode == ScoringMode::MaskedSlot ? masked_ : autoregressive_;
  if (slot) return slot;
  const auto& cfg = mode == ScoringMode::MaskedSlot ? config_.masked : config_.autoregressive;
  const char* role = mode == ScoringMode::MaskedSlot ? "masked" : "autoregressive";
  if (!cfg) throw ConfigError(fmt::format("no {} backend configured", role));
  if (config_.offline) {
    slot = std::make_shared<CachedBackend>(cfg->model_id, mode, cache_);
  } else {
    if (cfg->url.empty()) throw ConfigError(fmt::format("backends.{}: url is required unless offline", role));
    auto http = std::make_shared<HttpScorerBackend>(HttpBackendOptions{.url = cfg->url, .model_id = cfg->model_id});
    if (http->supported_mode() != mode) {
      throw ConfigError(fmt::format("backends.{}: server reports mode {}", role, to_string(http->supported_mode())));
    }
    slot = cached(http, cache_);
  }
  return slot;
}

const std::vector<StimulusItem>& Pipeline::items(DatasetId id) {
  if (auto it = items_.find(id); it != items_.end()) return it->second;
  const auto in = config_.datasets.find(id);
  if (in == config_.datasets.end()) throw ConfigError(fmt::format("dataset {} not configured", to_string(id)));
  LoadReport report;
  auto loaded = load_dataset(make_dataset_spec(id, in->second.path),
                             LoadOptions{.enforce_expected_counts = config_.enforce_expected_counts}, &report);
  const auto& schema = schema_for(id);
  counts_[id] = DatasetCounts{id, report, schema.expected_items, schema.expected_scales};
  spdlog::info("{}: {} items, {} scales", to_string(id), report.items, report.scales);
  return items_.emplace(id, std::move(loaded)).first->second;
}

const AlternativeSet& Pipeline::pos_set(Pos pos) {
  if (auto it = pos_sets_.find(pos); it != pos_sets_.end()) return it->second;
  if (pos == Pos::Quant) return pos_sets_.emplace(pos, quantifier_set()).first->second;
  if (!config_.lexicon) throw ConfigError("no lexicon configured for POS alternative sets");
  const auto& lc = *config_.lexicon;
  const auto lexicon = load_lexicon(lc.lexicon);
  const auto freqs = load_frequencies(lc.frequencies);
  std::vector<std::string> exclusions;
  if (auto e = lc.exclusions.find(pos); e != lc.exclusions.end()) exclusions = load_word_list(e->second);
  auto set = build_pos_set(pos, lexicon, freqs, lc.cutoff, exclusions, lc.lexicon.filename().string(),
                           lc.frequencies.filename().string());
  spdlog::info("{} alternatives: {}", to_string(pos), set.size());
  return pos_sets_.emplace(pos, std::move(set)).first->second;
}

const EmbeddingTable& Pipeline::embeddings() {
  if (embeddings_) return *embeddings_;
  if (!config_.embeddings) throw ConfigError("concept analysis enabled but no embeddings configured");
  // Only words that can appear as alternatives or tested scalemates are kept.
  std::unordered_set<std::string> keep;
  const AlternativeSet quants = quantifier_set();
  keep.insert(quants.members().begin(), quants.members().end());
  for (const auto& [id, _] : config_.datasets) {
    for (const auto& item : items(id)) {
      keep.insert(item.scale.strong);
      if (id != DatasetId::Degen2015 && item.scale.pos != Pos::Quant && config_.lexicon) {
        for (const auto& w : pos_set(item.scale.pos).members()) keep.insert(w);
      }
    }
  }
  for (const auto& [id, in] : config_.datasets) {
    if (!in.stimuli || id == DatasetId::Degen2015) continue;
    for (const auto& rec : load_stimuli(*in.stimuli)) {
      if (rec.frame.strong_base) keep.insert(*rec.frame.strong_base);
    }
  }
  embeddings_ = std::make_shared<EmbeddingTable>(EmbeddingTable::load_text(*config_.embeddings, &keep));
  spdlog::info("embeddings: {} vectors of dimension {}", embeddings_->size(), embeddings_->dimension());
  return *embeddings_;
}

SectionResult Pipeline::run_within_scale() {
  SectionResult section;
  section.kind = SectionKind::WithinScale;
  section.dataset = DatasetId::Degen2015;
  const auto& data = items(DatasetId::Degen2015);
  auto masked = backend(ScoringMode::MaskedSlot);
  const AlternativeSet quants = quantifier_set();
  const bool want_concept = config_.analyses.concept_based;
  const EmbeddingTable* emb = want_concept ? &embeddings() : nullptr;

  std::size_t untemplated = 0;
  for (const auto& item : data) {
    std::optional<ScalarConstruction> construction;
    try {
      construction = build_within_scale(item);
    } catch (const TemplateError& e) {
      ++untemplated;
      spdlog::debug("within-scale: {}", e.what());
      continue;
    }
    auto scored = score_masked_slot(*masked, *construction, quants.members());
    std::vector<ScoredAlternative> dist =
        config_.renormalize_within ? renormalized(scored.scored) : std::move(scored.scored);
    const ScoreMap map = to_score_map(dist);
    const auto all = map.find(std::string_view("all"));
    if (all == map.end()) {
      section.notices.push_back("item without a single-unit score for 'all' excluded: " + item.context);
      continue;
    }
    PredictorRow row;
    row.key = ItemKey{DatasetId::Degen2015, item.scale, context_key(item.context)};
    row.human_si = item.human_si;
    row.string_surprisal = all->second.surprisal;
    row.string_probability = all->second.probability;
    row.covariates = item.covariates;
    if (emb) {
      try {
        row.concept_surprisal = weighted_average_surprisal("all", quants, map, *emb).value;
      } catch (const ConceptError& e) {
        section.notices.push_back(std::string("concept surprisal unavailable: ") + e.what());
      }
    }
    section.predictors.push_back(std::move(row));
  }
  if (untemplated > 0) {
    section.notices.push_back(fmt::format("{} item(s) without a unique templatable 'some' excluded", untemplated));
  }

  if (config_.analyses.string_based) {
    section.correlations.push_back(correlate(section.predictors, "string_surprisal", "human_si"));
    section.correlations.push_back(correlate(section.predictors, "string_probability", "human_si"));
  }
  if (want_concept) section.correlations.push_back(correlate(section.predictors, "concept_surprisal", "human_si"));

  std::vector<std::string> predictors;
  std::vector<std::string> missing;
  for (const auto& cov : within_scale_covariates()) {
    const bool present = std::any_of(section.predictors.begin(), section.predictors.end(),
                                     [&](const PredictorRow& r) { return r.covariates.count(cov) > 0; });
    if (!present) missing.push_back(cov);
    predictors.push_back(cov);
  }
  if (config_.analyses.string_based) predictors.emplace_back("string_surprisal");
  if (want_concept) predictors.emplace_back("concept_surprisal");
  if (!missing.empty()) {
    section.notices.push_back(
        fmt::format("within-scale regression not fitted: missing covariate(s) {}", fmt::join(missing, ", ")));
  } else {
    section.regressions.push_back(
        {"full", fit_linear(section.predictors, "human_si", predictors, within_scale_transforms())});
  }
  return section;
}

const SectionResult& Pipeline::score_cross_scale(DatasetId id) {
  if (auto it = cross_scored_.find(id); it != cross_scored_.end()) return it->second;
  if (id == DatasetId::Degen2015 || id == DatasetId::Ronai2022Cloze) {
    throw ConfigError(fmt::format("{} is not a cross-scale dataset", to_string(id)));
  }
  SectionResult section;
  section.kind = SectionKind::CrossScale;
  section.dataset = id;
  const auto& data = items(id);
  const auto& input = config_.datasets.at(id);
  if (!input.stimuli) throw ConfigError(fmt::format("datasets.{}: stimuli file is required", to_string(id)));
  const auto frames = load_stimuli(*input.stimuli);
  auto ar = backend(ScoringMode::Continuation);
  const bool want_concept = config_.analyses.concept_based;
  const EmbeddingTable* emb = want_concept ? &embeddings() : nullptr;

  std::vector<PredictorRow> per_item;
  std::set<Scale> excluded;
  std::set<Scale> topk_done;
  for (const auto& item : data) {
    if (excluded.count(item.scale)) continue;
    auto exclude = [&](std::string reason) {
      excluded.insert(item.scale);
      section.excluded.push_back({item.scale, std::move(reason)});
    };
    const CrossScaleFrame* frame = find_frame(frames, item);
    if (!frame) {
      exclude("no stimulus frame");
      continue;
    }
    std::optional<ScalarConstruction> construction;
    try {
      construction = build_cross_scale(item.scale, *frame);
    } catch (const TemplateError& e) {
      exclude(e.what());
      continue;
    }
    const std::string tested(construction->slot_text());
    if (!is_single_word(tested)) {
      exclude("tested scalemate is not a single word");
      continue;
    }
    const std::vector<std::string> forced{tested};
    const AlternativeSet alts = pos_set(item.scale.pos).with_forced(forced);
    std::vector<ScoredAlternative> scores;
    try {
      scores = score_continuation(*ar, *construction, alts.members());
    } catch (const CacheMissError&) {
      throw;
    } catch (const ScoringError& e) {
      exclude(std::string("unscorable: ") + e.what());
      continue;
    }
    const ScoreMap map = to_score_map(scores);
    const auto hit = map.find(tested);
    if (hit == map.end()) {
      exclude("tested scalemate not scored");
      continue;
    }
    PredictorRow row;
    row.key = ItemKey{id, item.scale, context_key(item.context)};
    row.human_si = item.human_si;
    row.string_surprisal = hit->second.surprisal;
    row.string_probability = hit->second.probability;
    if (emb) {
      try {
        row.concept_surprisal = weighted_average_surprisal(tested, alts, map, *emb).value;
      } catch (const ConceptError& e) {
        section.notices.push_back(fmt::format("{}: concept surprisal unavailable: {}", scale_label(item.scale), e.what()));
      }
    }
    if (config_.analyses.topk && !topk_done.count(item.scale) &&
        std::find(config_.topk_scales.begin(), config_.topk_scales.end(), item.scale) != config_.topk_scales.end()) {
      topk_done.insert(item.scale);
      section.topk.push_back({item.scale, top_k_alternatives(alts, map, map.size())});
    }
    per_item.push_back(std::move(row));
  }
  // A scale excluded in one context is dropped everywhere.
  std::erase_if(per_item, [&](const PredictorRow& r) { return excluded.count(r.key.scale) > 0; });
  section.predictors = aggregate_by_scale(per_item);
  for (const auto& e : section.excluded) {
    spdlog::warn("{}: excluded {}: {}", to_string(id), scale_label(e.scale), e.reason);
  }
  return cross_scored_.emplace(id, std::move(section)).first->second;
}

SectionResult Pipeline::run_cross_scale(DatasetId id) {
  SectionResult section = score_cross_scale(id);
  const bool want_string = config_.analyses.string_based;
  const bool want_concept = config_.analyses.concept_based;
  if (want_string) section.correlations.push_back(correlate(section.predictors, "string_surprisal", "human_si"));
  if (want_concept) section.correlations.push_back(correlate(section.predictors, "concept_surprisal", "human_si"));
  if (want_string) add_leverage_check(section, "string_surprisal");
  if (want_concept) add_leverage_check(section, "concept_surprisal");

  std::vector<std::string> predictors;
  if (want_string) predictors.emplace_back("string_surprisal");
  if (want_concept) predictors.emplace_back("concept_surprisal");
  if (!predictors.empty()) {
    const auto transforms = cross_scale_transforms();
    FitResult full = fit_linear(section.predictors, "human_si", predictors, transforms);
    // The intercept-only model must see exactly the rows of the full model.
    std::vector<PredictorRow> same_rows;
    for (const auto& r : section.predictors) {
      if (std::all_of(predictors.begin(), predictors.end(), [&](const auto& p) { return r.value(p).has_value(); })) {
        same_rows.push_back(r);
      }
    }
    FitResult reduced = fit_linear(same_rows, "human_si", {}, transforms);
    reduced.n_excluded = full.n_excluded;
    section.anovas.push_back({"full", "intercept_only", anova_nested(full, reduced)});
    section.regressions.push_back({"full", std::move(full)});
    section.regressions.push_back({"intercept_only", std::move(reduced)});
  }
  if (!config_.analyses.topk) section.topk.clear();
  return section;
}

SectionResult Pipeline::run_accessibility() {
  SectionResult section;
  section.kind = SectionKind::Accessibility;
  section.dataset = DatasetId::Ronai2022;
  std::error_code ec;
  if (!config_.cloze || !fs::exists(*config_.cloze, ec)) {
    section.skipped = true;
    section.notices.push_back("accessibility skipped: no cloze data available");
    spdlog::warn("{}", section.notices.back());
    return section;
  }
  const auto records = load_cloze(*config_.cloze);
  const auto joined = join_cloze(items(DatasetId::Ronai2022), records);
  std::map<Scale, double> access;
  for (const auto& item : joined) {
    if (item.cloze_accessibility) access.emplace(item.scale, *item.cloze_accessibility);
  }
  const auto& scored = score_cross_scale(DatasetId::Ronai2022);
  std::size_t unmatched = 0;
  for (auto row : scored.predictors) {
    auto it = access.find(row.key.scale);
    if (it == access.end()) {
      ++unmatched;
      continue;
    }
    row.cloze_accessibility = it->second;
    section.predictors.push_back(std::move(row));
  }
  if (unmatched > 0) section.notices.push_back(fmt::format("{} scale(s) without cloze data", unmatched));
  section.correlations.push_back(correlate(section.predictors, "string_surprisal", "cloze_accessibility"));

  if (config_.permutations > 0) {
    auto [x, y] = pairs(section.predictors, "string_surprisal", "cloze_accessibility");
    std::mt19937_64 rng(config_.seed);
    PermutationControl control{config_.permutations, config_.seed, 0.0, 0.0};
    for (std::size_t i = 0; i < config_.permutations; ++i) {
      std::shuffle(y.begin(), y.end(), rng);
      const double rho = pearson(x, y).rho;
      control.mean_rho += rho;
      control.mean_abs_rho += std::fabs(rho);
    }
    control.mean_rho /= static_cast<double>(config_.permutations);
    control.mean_abs_rho /= static_cast<double>(config_.permutations);
    section.permutation = control;
  }
  return section;
}

ReportBundle Pipeline::run_all() {
  ReportBundle bundle;
  auto guarded = [&](SectionKind kind, DatasetId id, auto&& fn) {
    try {
      bundle.sections.push_back(fn());
    } catch (const CacheMissError&) {
      throw;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      SectionResult failed;
      failed.kind = kind;
      failed.dataset = id;
      failed.skipped = true;
      failed.notices.push_back(std::string("analysis failed: ") + e.what());
      spdlog::error("{} {}: {}", to_string(kind), to_string(id), e.what());
      bundle.sections.push_back(std::move(failed));
    }
  };
  if (config_.datasets.count(DatasetId::Degen2015)) {
    guarded(SectionKind::WithinScale, DatasetId::Degen2015, [&] { return run_within_scale(); });
  }
  for (DatasetId id : cross_scale_datasets()) {
    if (config_.datasets.count(id)) guarded(SectionKind::CrossScale, id, [&] { return run_cross_scale(id); });
  }
  if (config_.analyses.accessibility && config_.datasets.count(DatasetId::Ronai2022)) {
    guarded(SectionKind::Accessibility, DatasetId::Ronai2022, [&] { return run_accessibility(); });
  }
  bundle.manifest = manifest();
  for (const auto& s : bundle.sections) {
    if (s.excluded.empty()) continue;
    auto& list = bundle.manifest["excluded_scales"][std::string(to_string(s.dataset))];
    for (const auto& e : s.excluded) list.push_back({{"scale", scale_label(e.scale)}, {"reason", e.reason}});
  }
  return bundle;
}

json Pipeline::manifest() {
  json m;
  m["config_digest"] = config_.digest();
  m["config"] = config_.to_json();
  m["models"] = json::object();
  if (config_.masked) m["models"]["masked"] = config_.masked->model_id;
  if (config_.autoregressive) m["models"]["autoregressive"] = config_.autoregressive->model_id;
  json inputs = json::array();
  auto add = [&](const std::string& role, const fs::path& p) {
    inputs.push_back({{"role", role}, {"path", p.string()}, {"sha256", file_digest(p)}});
  };
  for (const auto& [id, in] : config_.datasets) {
    add(fmt::format("dataset:{}", to_string(id)), in.path);
    if (in.stimuli) add(fmt::format("stimuli:{}", to_string(id)), *in.stimuli);
  }
  if (config_.cloze) add("cloze", *config_.cloze);
  if (config_.embeddings && (embeddings_ || config_.analyses.concept_based)) add("embeddings", *config_.embeddings);
  if (config_.lexicon) {
    add("lexicon", config_.lexicon->lexicon);
    add("frequencies", config_.lexicon->frequencies);
    for (const auto& [pos, p] : config_.lexicon->exclusions) add(fmt::format("exclusions:{}", to_string(pos)), p);
  }
  m["inputs"] = inputs;
  m["score_cache"] = {{"path", config_.cache.string()},
                      {"sha256_at_start", cache_digest_at_start_},
                      {"records_at_start", cache_records_at_start_.value_or(0)}};
  m["datasets"] = json::object();
  for (const auto& [id, c] : counts_) {
    m["datasets"][std::string(to_string(id))] = {{"items", c.load.items},
                                                  {"scales", c.load.scales},
                                                  {"expected_items", c.expected_items},
                                                  {"expected_scales", c.expected_scales},
                                                  {"matches_expected", c.load.items == c.expected_items &&
                                                                           c.load.scales == c.expected_scales},
                                                  {"rows_read", c.load.rows_read},
                                                  {"rows_rejected_bounds", c.load.rows_rejected_bounds},
                                                  {"rows_rejected_missing_weak", c.load.rows_rejected_missing_weak},
                                                  {"multiword_scales_dropped", c.load.multiword_scales_dropped}};
  }
  m["alternative_sets"] = json::object();
  for (const auto& [pos, set] : pos_sets_) m["alternative_sets"][std::string(to_string(pos))] = set.manifest();
  json transforms = json::object();
  for (const auto& [name, t] : within_scale_transforms()) transforms["within_scale"][name] = to_string(t);
  for (const auto& [name, t] : cross_scale_transforms()) transforms["cross_scale"][name] = to_string(t);
  m["transforms"] = transforms;
  if (embeddings_) m["embeddings"] = {{"vectors_loaded", embeddings_->size()}, {"dimension", embeddings_->dimension()}};
  return m;
}

}  // namespace scalarexp
