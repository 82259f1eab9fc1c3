#include "scalarexp/report.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "scalarexp/plot.hpp"

namespace scalarexp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  return fmt::format("{:.10g}", v);
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string section_label(const SectionResult& s) {
  return fmt::format("{}\t{}", to_string(s.kind), to_string(s.dataset));
}

std::string scale_label(const Scale& s) { return s.weak + "/" + s.strong; }

std::string axis_label(std::string_view name) {
  if (name == "human_si") return "human SI rate";
  if (name == "string_surprisal") return "surprisal of tested scalemate (nats)";
  if (name == "string_probability") return "probability of tested scalemate";
  if (name == "concept_surprisal") return "similarity-weighted surprisal (nats)";
  if (name == "cloze_accessibility") return "Cloze accessibility";
  return std::string(name);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string correlations_table(const ReportBundle& bundle) {
  std::string t = "section\tdataset\tpredictor\tagainst\tn\trho\tp\n";
  for (const auto& s : bundle.sections) {
    for (const auto& c : s.correlations) {
      t += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", section_label(s), c.predictor, c.against, c.result.n,
                       num(c.result.rho), num(c.result.p));
    }
  }
  return t;
}

std::string regression_table(const ReportBundle& bundle) {
  std::string t = "section\tdataset\tmodel\tterm\ttransform\tbeta\tstd_error\tt\tp\tn\tdf_residual\tresidual_ss\n";
  for (const auto& s : bundle.sections) {
    for (const auto& r : s.regressions) {
      for (const auto& term : r.fit.terms) {
        const auto tr = r.fit.transforms.find(term);
        t += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", section_label(s), r.model, term,
                         tr == r.fit.transforms.end() ? "none" : to_string(tr->second),
                         num(r.fit.coefficients.at(term)), num(r.fit.std_errors.at(term)),
                         num(r.fit.t_values.at(term)), num(r.fit.p_values.at(term)), r.fit.n,
                         r.fit.df_residual, num(r.fit.residual_ss));
      }
    }
  }
  return t;
}

std::string anova_table(const ReportBundle& bundle) {
  std::string t = "section\tdataset\tfull\treduced\tF\tdf_numerator\tdf_denominator\tp\n";
  for (const auto& s : bundle.sections) {
    for (const auto& a : s.anovas) {
      t += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", section_label(s), a.full, a.reduced,
                       num(a.result.f_statistic), a.result.df_numerator, a.result.df_denominator,
                       num(a.result.p_value));
    }
  }
  return t;
}

std::string predictors_table(const ReportBundle& bundle) {
  std::string t =
      "section\tdataset\tweak\tstrong\tpos\tcontext\thuman_si\tstring_surprisal\tstring_probability\t"
      "concept_surprisal\tcloze_accessibility\tcovariates\n";
  for (const auto& s : bundle.sections) {
    for (const auto& r : s.predictors) {
      std::string cov;
      for (const auto& [k, v] : r.covariates) cov += fmt::format("{}{}={}", cov.empty() ? "" : ";", k, num(v));
      t += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", section_label(s), r.key.scale.weak,
                       r.key.scale.strong, to_string(r.key.scale.pos), r.key.context_hash, num(r.human_si),
                       opt(r.string_surprisal), opt(r.string_probability), opt(r.concept_surprisal),
                       opt(r.cloze_accessibility), cov.empty() ? "NA" : cov);
    }
  }
  return t;
}

std::string topk_table(const ReportBundle& bundle, std::size_t k) {
  std::string t = "dataset\tweak\tstrong\trank\talternative\tprobability\ttested\n";
  for (const auto& s : bundle.sections) {
    for (const auto& e : s.topk) {
      for (std::size_t i = 0; i < e.ranked.size() && i < k; ++i) {
        t += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", to_string(s.dataset), e.scale.weak, e.scale.strong, i + 1,
                         e.ranked[i].first, num(e.ranked[i].second), e.ranked[i].first == e.scale.strong ? 1 : 0);
      }
    }
  }
  return t;
}

std::string leverage_table(const ReportBundle& bundle) {
  std::string t = "dataset\tpredictor\tdropped_scale\tn_with\trho_with\tp_with\tn_without\trho_without\tp_without\n";
  for (const auto& s : bundle.sections) {
    for (const auto& l : s.leverage) {
      t += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", to_string(s.dataset), l.predictor,
                       scale_label(l.dropped), l.with_point.n, num(l.with_point.rho), num(l.with_point.p),
                       l.without_point.n, num(l.without_point.rho), num(l.without_point.p));
    }
  }
  return t;
}

json summary_json(const ReportBundle& bundle, std::size_t k) {
  json sections = json::array();
  for (const auto& s : bundle.sections) {
    json j{{"kind", to_string(s.kind)},
           {"dataset", to_string(s.dataset)},
           {"skipped", s.skipped},
           {"notices", s.notices},
           {"rows", s.predictors.size()}};
    j["correlations"] = json::array();
    for (const auto& c : s.correlations) {
      j["correlations"].push_back({{"predictor", c.predictor},
                                   {"against", c.against},
                                   {"rho", jnum(c.result.rho)},
                                   {"p", jnum(c.result.p)},
                                   {"n", c.result.n}});
    }
    j["regressions"] = json::array();
    for (const auto& r : s.regressions) {
      json terms = json::array();
      for (const auto& term : r.fit.terms) {
        terms.push_back({{"predictor", term}, {"beta", jnum(r.fit.coefficients.at(term))},
                         {"p", jnum(r.fit.p_values.at(term))}});
      }
      j["regressions"].push_back({{"model", r.model},
                                  {"terms", terms},
                                  {"n", r.fit.n},
                                  {"n_excluded", r.fit.n_excluded},
                                  {"df_residual", r.fit.df_residual},
                                  {"residual_ss", jnum(r.fit.residual_ss)}});
    }
    j["anova"] = json::array();
    for (const auto& a : s.anovas) {
      j["anova"].push_back({{"full", a.full},
                            {"reduced", a.reduced},
                            {"F", jnum(a.result.f_statistic)},
                            {"p", jnum(a.result.p_value)},
                            {"df_numerator", a.result.df_numerator},
                            {"df_denominator", a.result.df_denominator}});
    }
    if (!s.topk.empty()) {
      j["topk"] = json::array();
      for (const auto& e : s.topk) {
        json ranked = json::array();
        for (std::size_t i = 0; i < e.ranked.size() && i < k; ++i) {
          ranked.push_back({{"alternative", e.ranked[i].first}, {"probability", jnum(e.ranked[i].second)}});
        }
        j["topk"].push_back({{"scale", scale_label(e.scale)}, {"ranked", ranked}});
      }
    }
    if (!s.excluded.empty()) {
      j["excluded"] = json::array();
      for (const auto& e : s.excluded) j["excluded"].push_back({{"scale", scale_label(e.scale)}, {"reason", e.reason}});
    }
    if (s.permutation) {
      j["permutation_control"] = {{"shuffles", s.permutation->shuffles},
                                  {"seed", s.permutation->seed},
                                  {"mean_rho", jnum(s.permutation->mean_rho)},
                                  {"mean_abs_rho", jnum(s.permutation->mean_abs_rho)}};
    }
    if (!s.leverage.empty()) {
      j["leverage"] = json::array();
      for (const auto& l : s.leverage) {
        j["leverage"].push_back({{"predictor", l.predictor},
                                 {"dropped", scale_label(l.dropped)},
                                 {"rho_with", jnum(l.with_point.rho)},
                                 {"p_with", jnum(l.with_point.p)},
                                 {"rho_without", jnum(l.without_point.rho)},
                                 {"p_without", jnum(l.without_point.p)}});
      }
    }
    sections.push_back(std::move(j));
  }
  return json{{"sections", sections}, {"config_digest", bundle.manifest.value("config_digest", "")}};
}

void write_report(const ReportBundle& bundle, const fs::path& out_dir, const ReportOptions& options) {
  fs::create_directories(out_dir);
  write_text(out_dir / "correlations.tsv", correlations_table(bundle));
  write_text(out_dir / "regression.tsv", regression_table(bundle));
  write_text(out_dir / "anova.tsv", anova_table(bundle));
  write_text(out_dir / "predictors.tsv", predictors_table(bundle));
  write_text(out_dir / "topk.tsv", topk_table(bundle, options.top_k));
  write_text(out_dir / "leverage.tsv", leverage_table(bundle));
  write_text(out_dir / "summary.json", summary_json(bundle, options.top_k).dump(2) + "\n");
  write_text(out_dir / "manifest.json", bundle.manifest.dump(2) + "\n");
  if (!options.plots) return;

  const fs::path plots = out_dir / "plots";
  fs::create_directories(plots);
  for (const auto& s : bundle.sections) {
    for (const auto& c : s.correlations) {
      ScatterPlot p;
      p.title = fmt::format("{} {}: rho={:.3f}, p={:.3g}, n={}", to_string(s.dataset), c.predictor, c.result.rho,
                            c.result.p, c.result.n);
      p.x_label = axis_label(c.predictor);
      p.y_label = axis_label(c.against);
      for (const auto& r : s.predictors) {
        const auto x = r.value(c.predictor), y = r.value(c.against);
        if (x && y) {
          p.x.push_back(*x);
          p.y.push_back(*y);
        }
      }
      write_text(plots / fmt::format("{}_{}_{}_vs_{}.svg", to_string(s.kind), to_string(s.dataset), c.predictor,
                                     c.against),
                 render_scatter_svg(p));
    }
    for (const auto& e : s.topk) {
      BarChart b;
      b.title = fmt::format("{}, but not {}", e.scale.weak, e.scale.strong);
      b.y_label = "probability";
      for (std::size_t i = 0; i < e.ranked.size() && i < options.top_k; ++i) b.bars.push_back(e.ranked[i]);
      b.highlight = e.scale.strong;
      write_text(plots / fmt::format("topk_{}_{}_{}.svg", to_string(s.dataset), e.scale.weak, e.scale.strong),
                 render_bar_svg(b));
    }
  }
  spdlog::info("report written to {}", out_dir.string());
}

}  // namespace scalarexp
