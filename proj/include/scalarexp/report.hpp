// Writes a ReportBundle as delimited tables, summary.json, manifest.json and
// SVG figures. Output is a pure function of the bundle.
#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "scalarexp/pipeline.hpp"

namespace scalarexp {

struct ReportOptions {
  std::size_t top_k = 5;
  bool plots = true;
};

/// Table file names written under the output directory.
inline constexpr const char* kReportTables[] = {"correlations.tsv", "regression.tsv", "anova.tsv",
                                                 "predictors.tsv", "topk.tsv", "leverage.tsv"};

std::string correlations_table(const ReportBundle& bundle);
std::string regression_table(const ReportBundle& bundle);
std::string anova_table(const ReportBundle& bundle);
std::string predictors_table(const ReportBundle& bundle);
std::string topk_table(const ReportBundle& bundle, std::size_t k);
std::string leverage_table(const ReportBundle& bundle);
nlohmann::json summary_json(const ReportBundle& bundle, std::size_t k);

void write_report(const ReportBundle& bundle, const std::filesystem::path& out_dir,
                  const ReportOptions& options = {});

}  // namespace scalarexp
