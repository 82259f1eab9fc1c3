// Comparison of a full run against the published numbers.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "scalarexp/pipeline.hpp"

namespace scalarexp {

enum class CriterionStatus { Pass, Fail, NotRun };
std::string_view to_string(CriterionStatus status);

struct CriterionResult {
  int id = 0;
  std::string name;
  CriterionStatus status = CriterionStatus::NotRun;
  std::vector<std::string> details;  // one line per sub-check
};

/// Target correlation with tolerance and the significance class the
/// published value falls in.
struct PinnedCorrelation {
  double rho;
  double tolerance;
  bool significant;       // at alpha
  double alpha = 0.05;
};

/// Criteria 6-10; a criterion whose section is absent or skipped is NotRun.
std::vector<CriterionResult> evaluate_reproduction(const ReportBundle& bundle);

std::string format_criteria(std::span<const CriterionResult> results);

}  // namespace scalarexp
