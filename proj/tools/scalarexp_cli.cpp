// scalarexp: command-line driver for the scalar-inference surprisal pipeline.
//
//   scalarexp ingest     --config run.json
//   scalarexp build-alts --config run.json
//   scalarexp score      --config run.json --dataset ronai2022
//   scalarexp analyze    --config run.json --out report/
//   scalarexp report     --config run.json            (cache only)
//   scalarexp reproduce  --config run.json

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "scalarexp/pipeline.hpp"
#include "scalarexp/report.hpp"
#include "scalarexp/reproduction.hpp"

namespace fs = std::filesystem;
using namespace scalarexp;

namespace {

struct CommonArgs {
  std::string config;
  std::string dataset;
  std::string cache;
  std::string out;
  bool offline = false;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--dataset", a.dataset, "restrict to one dataset id");
  cmd->add_option("--cache", a.cache, "score cache file (overrides config)");
  cmd->add_option("--out", a.out, "output directory (overrides config)");
  cmd->add_flag("--offline", a.offline, "use cached scores only; a miss is an error");
  cmd->add_option("--seed", a.seed, "seed for permutation controls");
  cmd->add_flag("-v,--verbose", a.verbose, "debug logging");
}

RunConfig effective_config(const CommonArgs& a) {
  RunConfig c = RunConfig::load(a.config);
  if (!a.dataset.empty()) {
    const DatasetId id = parse_dataset_id(a.dataset);
    auto it = c.datasets.find(id);
    if (it == c.datasets.end()) throw ConfigError("dataset " + a.dataset + " is not in the config");
    DatasetInput keep = it->second;
    c.datasets.clear();
    c.datasets.emplace(id, std::move(keep));
  }
  if (!a.cache.empty()) c.cache = fs::absolute(a.cache);
  if (!a.out.empty()) c.output_dir = fs::absolute(a.out);
  if (a.offline) c.offline = true;
  if (a.seed) c.seed = *a.seed;
  return c;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

int cmd_ingest(const RunConfig& c) {
  Pipeline pipe(c);
  for (const auto& [id, _] : c.datasets) {
    const auto& items = pipe.items(id);
    std::ostringstream store;
    write_item_store(store, items);
    write_file(c.output_dir / "items" / fmt::format("{}.jsonl", to_string(id)), store.str());
    const auto& schema = schema_for(id);
    fmt::print("{:<14} items {:>5} (expected {:>5})  scales {:>3} (expected {:>3})\n", to_string(id), items.size(),
               schema.expected_items, count_unique_scales(items), schema.expected_scales);
  }
  return 0;
}

int cmd_build_alts(const RunConfig& c) {
  Pipeline pipe(c);
  nlohmann::json manifest;
  for (Pos pos : {Pos::Adj, Pos::Adv, Pos::Verb, Pos::Quant}) {
    if (pos != Pos::Quant && !c.lexicon) continue;
    const auto& set = pipe.pos_set(pos);
    std::string text;
    for (const auto& w : set.members()) text += w + "\n";
    write_file(c.output_dir / "alternatives" / fmt::format("{}.txt", ascii_lower(to_string(pos))), text);
    manifest[std::string(to_string(pos))] = set.manifest();
    fmt::print("{:<6} {:>5} alternatives\n", to_string(pos), set.size());
  }
  write_file(c.output_dir / "alternatives" / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

int cmd_score(const RunConfig& c) {
  Pipeline pipe(c);
  ReportBundle bundle;
  if (c.datasets.count(DatasetId::Degen2015)) bundle.sections.push_back(pipe.run_within_scale());
  for (DatasetId id : cross_scale_datasets()) {
    if (c.datasets.count(id)) bundle.sections.push_back(pipe.run_cross_scale(id));
  }
  write_file(c.output_dir / "predictors.tsv", predictors_table(bundle));
  for (const auto& s : bundle.sections) {
    fmt::print("{:<14} {:>5} rows scored, {} scale(s) excluded\n", to_string(s.dataset), s.predictors.size(),
               s.excluded.size());
  }
  return 0;
}

int cmd_analyze(const RunConfig& c) {
  Pipeline pipe(c);
  const ReportBundle bundle = pipe.run_all();
  write_report(bundle, c.output_dir, ReportOptions{.top_k = c.top_k});
  std::cout << correlations_table(bundle);
  for (const auto& s : bundle.sections) {
    for (const auto& n : s.notices) fmt::print(stderr, "{} {}: {}\n", to_string(s.kind), to_string(s.dataset), n);
  }
  return 0;
}

int cmd_reproduce(const RunConfig& c) {
  Pipeline pipe(c);
  const ReportBundle bundle = pipe.run_all();
  write_report(bundle, c.output_dir, ReportOptions{.top_k = c.top_k});
  const auto results = evaluate_reproduction(bundle);
  const std::string text = format_criteria(results);
  write_file(c.output_dir / "reproduction.txt", text);
  std::cout << text;
  bool any_fail = false, any_not_run = false;
  for (const auto& r : results) {
    any_fail = any_fail || r.status == CriterionStatus::Fail;
    any_not_run = any_not_run || r.status == CriterionStatus::NotRun;
  }
  return any_fail ? 1 : (any_not_run ? 3 : 0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scalar inference surprisal pipeline"};
  app.require_subcommand(1);
  CommonArgs args;
  auto* ingest = app.add_subcommand("ingest", "load datasets and write normalized item stores");
  auto* alts = app.add_subcommand("build-alts", "build the alternative sets");
  auto* score = app.add_subcommand("score", "score constructions (fills the cache)");
  auto* analyze = app.add_subcommand("analyze", "score, analyze and write the report");
  auto* report = app.add_subcommand("report", "rebuild the report from the score cache only");
  auto* reproduce = app.add_subcommand("reproduce", "full run compared against published numbers");
  for (auto* cmd : {ingest, alts, score, analyze, report, reproduce}) add_common(cmd, args);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("scalarexp"));
  spdlog::set_level(args.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    RunConfig config = effective_config(args);
    if (*ingest) return cmd_ingest(config);
    if (*alts) return cmd_build_alts(config);
    if (*score) return cmd_score(config);
    if (*analyze) return cmd_analyze(config);
    if (*report) {
      config.offline = true;
      return cmd_analyze(config);
    }
    if (*reproduce) return cmd_reproduce(config);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
