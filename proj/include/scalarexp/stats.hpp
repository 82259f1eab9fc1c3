// Correlation, ordinary least squares with per-variable transforms, and
// nested-model F tests.
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "scalarexp/core.hpp"
#include "scalarexp/ingest.hpp"

namespace scalarexp {

class StatsError : public Error {
 public:
  using Error::Error;
};

struct Correlation {
  double rho = 0.0;
  double p = 1.0;  // two-sided, t distribution with n - 2 df
  std::size_t n = 0;
};

Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Index of the observation with the largest hat value in the simple
/// regression on x (the point farthest from the mean of x; first wins ties).
std::size_t max_leverage_index(std::span<const double> x);

enum class Transform { None, Center, Log, LogCenter };
std::string_view to_string(Transform t);
Transform parse_transform(std::string_view text);
using TransformMap = std::map<std::string, Transform, std::less<>>;

/// Default registry: every continuous predictor centered, sentence length
/// log-transformed then centered, binary covariates centered 0/1.
TransformMap within_scale_transforms();
TransformMap cross_scale_transforms();

struct ItemKey {
  DatasetId dataset = DatasetId::Degen2015;
  Scale scale;
  std::string context_hash;
};

/// Per-item predictors joined with the human response.
struct PredictorRow {
  ItemKey key;
  double human_si = 0.0;
  std::optional<double> string_surprisal;
  std::optional<double> string_probability;
  std::optional<double> concept_surprisal;
  std::optional<double> cloze_accessibility;
  std::map<std::string, double> covariates;

  /// Looks up human_si, string_surprisal, string_probability,
  /// concept_surprisal, cloze_accessibility, or a covariate by name.
  std::optional<double> value(std::string_view name) const;
};

struct FitResult {
  std::string response;
  std::vector<std::string> terms;  // "(Intercept)" then predictors, in order
  std::map<std::string, double> coefficients;
  std::map<std::string, double> std_errors;
  std::map<std::string, double> t_values;
  std::map<std::string, double> p_values;
  TransformMap transforms;
  double residual_ss = 0.0;
  long df_residual = 0;
  std::size_t n = 0;
  std::size_t n_excluded = 0;       // rows dropped for missing values
  std::string rows_fingerprint;     // digest of the rows entering the fit
};

struct OlsSolution {
  Eigen::VectorXd beta;
  Eigen::VectorXd std_error;
  Eigen::VectorXd t_value;
  Eigen::VectorXd p_value;
  Eigen::VectorXd residuals;
  double residual_ss = 0.0;
  long df_residual = 0;
};

/// OLS on an explicit design matrix (pivoted Householder QR). Throws
/// StatsError naming the collinear columns when X is rank deficient.
OlsSolution ordinary_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   std::span<const std::string> column_names);

/// Fits response ~ 1 + predictors after applying `transforms` (variables not
/// listed are used as-is). Rows missing any variable are excluded.
FitResult fit_linear(std::span<const PredictorRow> rows, std::string_view response,
                     std::span<const std::string> predictors, const TransformMap& transforms);

struct AnovaResult {
  double f_statistic = 0.0;
  double p_value = 1.0;
  long df_numerator = 0;
  long df_denominator = 0;
};

/// F test of `full` against `reduced`; the reduced predictors must be a subset
/// of the full ones and both fits must cover the same rows.
AnovaResult anova_nested(const FitResult& full, const FitResult& reduced);

}  // namespace scalarexp
