#include "scalarexp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "scalarexp/digest.hpp"
#include "scalarexp/distributions.hpp"

namespace scalarexp {

namespace {
constexpr const char* kIntercept = "(Intercept)";
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StatsError("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw StatsError("pearson: need at least 3 observations");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw StatsError("pearson: zero variance");
  const double rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  double p = 0.0;
  if (std::fabs(rho) < 1.0) {
    const double t = rho * std::sqrt(df / ((1.0 - rho) * (1.0 + rho)));
    p = dist::student_t_two_sided_p(t, df);
  }
  return Correlation{rho, p, n};
}

std::size_t max_leverage_index(std::span<const double> x) {
  if (x.empty()) throw StatsError("max_leverage_index: empty input");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (std::fabs(x[i] - mean) > std::fabs(x[best] - mean)) best = i;
  }
  return best;
}

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::None: return "none";
    case Transform::Center: return "center";
    case Transform::Log: return "log";
    case Transform::LogCenter: return "log_center";
  }
  return "?";
}

Transform parse_transform(std::string_view text) {
  for (auto t : {Transform::None, Transform::Center, Transform::Log, Transform::LogCenter}) {
    if (to_string(t) == text) return t;
  }
  throw StatsError("unknown transform '" + std::string(text) + "'");
}

TransformMap within_scale_transforms() {
  return {{"partitive", Transform::Center},       {"strength", Transform::Center},
          {"mention", Transform::Center},         {"subjecthood", Transform::Center},
          {"modification", Transform::Center},    {"sentence_length", Transform::LogCenter},
          {"string_surprisal", Transform::Center}, {"concept_surprisal", Transform::Center}};
}

TransformMap cross_scale_transforms() {
  return {{"string_surprisal", Transform::Center}, {"concept_surprisal", Transform::Center}};
}

std::optional<double> PredictorRow::value(std::string_view name) const {
  if (name == "human_si") return human_si;
  if (name == "string_surprisal") return string_surprisal;
  if (name == "string_probability") return string_probability;
  if (name == "concept_surprisal") return concept_surprisal;
  if (name == "cloze_accessibility") return cloze_accessibility;
  auto it = covariates.find(std::string(name));
  if (it == covariates.end()) return std::nullopt;
  return it->second;
}

OlsSolution ordinary_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   std::span<const std::string> column_names) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (y.size() != n) throw StatsError("ols: response length mismatch");
  if (static_cast<std::size_t>(p) != column_names.size()) throw StatsError("ols: name count mismatch");
  if (n < p) throw StatsError(fmt::format("ols: {} rows for {} coefficients", n, p));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::vector<std::string> collinear;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < p; ++k) collinear.push_back(column_names[perm[k]]);
    throw StatsError(fmt::format("design matrix is rank deficient; collinear column(s): {}",
                                 fmt::join(collinear, ", ")));
  }

  OlsSolution s;
  s.beta = qr.solve(y);
  s.residuals = y - x * s.beta;
  s.residual_ss = s.residuals.squaredNorm();
  s.df_residual = static_cast<long>(n - p);

  // (X'X)^-1 = P R^-1 R^-T P'
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd unpermuted = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation().indices();
  Eigen::VectorXd diag(p);
  for (Eigen::Index k = 0; k < p; ++k) diag[perm[k]] = unpermuted(k, k);

  const double sigma2 = s.df_residual > 0 ? s.residual_ss / static_cast<double>(s.df_residual)
                                          : std::numeric_limits<double>::quiet_NaN();
  s.std_error = (diag * sigma2).cwiseSqrt();
  s.t_value.resize(p);
  s.p_value.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double se = s.std_error[k];
    if (s.df_residual <= 0 || std::isnan(se)) {
      s.t_value[k] = s.p_value[k] = std::numeric_limits<double>::quiet_NaN();
    } else if (se == 0.0) {
      s.t_value[k] = s.beta[k] == 0.0 ? 0.0 : std::copysign(INFINITY, s.beta[k]);
      s.p_value[k] = s.beta[k] == 0.0 ? 1.0 : 0.0;
    } else {
      s.t_value[k] = s.beta[k] / se;
      s.p_value[k] = dist::student_t_two_sided_p(s.t_value[k], static_cast<double>(s.df_residual));
    }
  }
  return s;
}

FitResult fit_linear(std::span<const PredictorRow> rows, std::string_view response,
                     std::span<const std::string> predictors, const TransformMap& transforms) {
  {
    std::set<std::string_view> seen;
    for (const auto& p : predictors) {
      if (p == response) throw StatsError("predictor '" + p + "' is also the response");
      if (!seen.insert(p).second) throw StatsError("predictor '" + p + "' listed twice");
    }
  }
  std::vector<const PredictorRow*> used;
  std::size_t excluded = 0;
  for (const auto& row : rows) {
    bool complete = row.value(response).has_value();
    for (const auto& p : predictors) complete = complete && row.value(p).has_value();
    if (complete) {
      used.push_back(&row);
    } else {
      ++excluded;
    }
  }
  if (excluded > 0) {
    spdlog::info("fit {}: excluded {} row(s) with missing values", response, excluded);
  }
  const auto n = static_cast<Eigen::Index>(used.size());
  const auto k = static_cast<Eigen::Index>(predictors.size()) + 1;
  if (n == 0) throw StatsError("fit " + std::string(response) + ": no complete rows");

  auto transformed = [&](std::string_view name) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = *used[static_cast<std::size_t>(i)]->value(name);
    const auto it = transforms.find(name);
    const Transform t = it == transforms.end() ? Transform::None : it->second;
    if (t == Transform::Log || t == Transform::LogCenter) {
      if ((v.array() <= 0.0).any()) {
        throw StatsError("log transform of non-positive values in '" + std::string(name) + "'");
      }
      v = v.array().log();
    }
    if (t == Transform::Center || t == Transform::LogCenter) v.array() -= v.mean();
    return v;
  };

  Eigen::MatrixXd x(n, k);
  x.col(0).setOnes();
  std::vector<std::string> names{kIntercept};
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    x.col(static_cast<Eigen::Index>(j) + 1) = transformed(predictors[j]);
    names.push_back(predictors[j]);
  }
  const Eigen::VectorXd y = transformed(response);
  const OlsSolution s = ordinary_least_squares(x, y, names);

  FitResult fit;
  fit.response = std::string(response);
  fit.terms = names;
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& name = names[static_cast<std::size_t>(j)];
    fit.coefficients[name] = s.beta[j];
    fit.std_errors[name] = s.std_error[j];
    fit.t_values[name] = s.t_value[j];
    fit.p_values[name] = s.p_value[j];
  }
  for (const auto& [name, t] : transforms) {
    if (name == response || std::find(predictors.begin(), predictors.end(), name) != predictors.end()) {
      fit.transforms.emplace(name, t);
    }
  }
  fit.residual_ss = s.residual_ss;
  fit.df_residual = s.df_residual;
  fit.n = used.size();
  fit.n_excluded = excluded;
  std::string keys;
  for (const auto* row : used) {
    keys += fmt::format("{}\x1f{}\x1f{}\x1f{}\x1e", to_string(row->key.dataset), row->key.scale.weak,
                        row->key.scale.strong, row->key.context_hash);
  }
  fit.rows_fingerprint = sha256_hex(keys);
  return fit;
}

AnovaResult anova_nested(const FitResult& full, const FitResult& reduced) {
  for (const auto& term : reduced.terms) {
    if (std::find(full.terms.begin(), full.terms.end(), term) == full.terms.end()) {
      throw StatsError("models are not nested: '" + term + "' is not in the full model");
    }
  }
  if (full.response != reduced.response) throw StatsError("models have different responses");
  if (full.n != reduced.n || full.rows_fingerprint != reduced.rows_fingerprint) {
    throw StatsError("models were fitted on different rows");
  }
  if (full.df_residual <= 0) throw StatsError("full model has no residual degrees of freedom");
  AnovaResult r;
  r.df_numerator = reduced.df_residual - full.df_residual;
  r.df_denominator = full.df_residual;
  if (r.df_numerator == 0) {
    r.f_statistic = 0.0;
    r.p_value = 1.0;
    return r;
  }
  const double gain = std::max(0.0, reduced.residual_ss - full.residual_ss);
  if (full.residual_ss == 0.0) {
    r.f_statistic = gain > 0.0 ? INFINITY : 0.0;
    r.p_value = gain > 0.0 ? 0.0 : 1.0;
    return r;
  }
  r.f_statistic = (gain / static_cast<double>(r.df_numerator)) /
                  (full.residual_ss / static_cast<double>(r.df_denominator));
  r.p_value = dist::f_survival(r.f_statistic, static_cast<double>(r.df_numerator),
                               static_cast<double>(r.df_denominator));
  return r;
}

}  // namespace scalarexp
