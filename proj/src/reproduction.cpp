#include "scalarexp/reproduction.hpp"

#include <cmath>
#include <optional>

#include <fmt/format.h>

namespace scalarexp {

namespace {

struct Check {
  bool pass;
  std::string line;
};

// Sign and significance class must match; magnitude within tolerance.
Check check_correlation(const SectionResult& s, std::string_view predictor, std::string_view against,
                        const PinnedCorrelation& pin) {
  const auto* c = s.correlation(predictor, against);
  if (!c) return {false, fmt::format("{} {}: no correlation computed", to_string(s.dataset), predictor)};
  const double rho = c->result.rho, p = c->result.p;
  const bool sig = p < pin.alpha;
  const bool sign_ok = !pin.significant || std::signbit(rho) == std::signbit(pin.rho);
  const bool pass = sig == pin.significant && sign_ok && std::fabs(rho - pin.rho) <= pin.tolerance;
  return {pass, fmt::format("{} {}: rho={:.3f} p={:.3g} n={} (target {:.3f}±{:.2f}, {} at {:g})",
                            to_string(s.dataset), predictor, rho, p, c->result.n, pin.rho, pin.tolerance,
                            pin.significant ? "significant" : "non-significant", pin.alpha)};
}

// Only the significance class is pinned.
Check check_nonsignificant(const SectionResult& s, std::string_view predictor) {
  const auto* c = s.correlation(predictor);
  if (!c) return {false, fmt::format("{} {}: no correlation computed", to_string(s.dataset), predictor)};
  return {c->result.p >= 0.05, fmt::format("{} {}: rho={:.3f} p={:.3g} (target non-significant)",
                                           to_string(s.dataset), predictor, c->result.rho, c->result.p)};
}

const SectionResult* usable(const ReportBundle& b, SectionKind kind, DatasetId id) {
  const auto* s = b.find(kind, id);
  return s && !s->skipped ? s : nullptr;
}

CriterionResult finish(int id, std::string name, std::vector<Check> checks, std::vector<std::string> missing) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  bool all = true;
  for (auto& c : checks) {
    all = all && c.pass;
    r.details.push_back(fmt::format("{} {}", c.pass ? "ok  " : "FAIL", c.line));
  }
  for (auto& m : missing) r.details.push_back("missing " + m);
  if (!missing.empty()) {
    r.status = CriterionStatus::NotRun;
  } else {
    r.status = all ? CriterionStatus::Pass : CriterionStatus::Fail;
  }
  return r;
}

}  // namespace

std::string_view to_string(CriterionStatus status) {
  switch (status) {
    case CriterionStatus::Pass: return "PASS";
    case CriterionStatus::Fail: return "FAIL";
    case CriterionStatus::NotRun: return "NOT RUN";
  }
  return "?";
}

std::vector<CriterionResult> evaluate_reproduction(const ReportBundle& b) {
  std::vector<CriterionResult> out;

  {
    std::vector<Check> checks;
    std::vector<std::string> missing;
    if (const auto* s = usable(b, SectionKind::WithinScale, DatasetId::Degen2015)) {
      checks.push_back(check_correlation(*s, "string_surprisal", "human_si", {-0.400, 0.05, true, 1e-4}));
      checks.push_back(check_correlation(*s, "concept_surprisal", "human_si", {-0.432, 0.05, true, 1e-4}));
      checks.push_back(check_correlation(*s, "string_probability", "human_si", {0.482, 0.05, true}));
    } else {
      missing.emplace_back("within-scale section (degen2015)");
    }
    out.push_back(finish(6, "within-scale correlations", std::move(checks), std::move(missing)));
  }

  const DatasetId others[] = {DatasetId::Pankratz2021, DatasetId::Gotzner2018, DatasetId::VanTiel2016};
  {
    std::vector<Check> checks;
    std::vector<std::string> missing;
    if (const auto* s = usable(b, SectionKind::CrossScale, DatasetId::Ronai2022)) {
      checks.push_back(check_correlation(*s, "string_surprisal", "human_si", {-0.361, 0.07, true}));
    } else {
      missing.emplace_back("cross-scale section (ronai2022)");
    }
    for (DatasetId id : others) {
      if (const auto* s = usable(b, SectionKind::CrossScale, id)) {
        checks.push_back(check_nonsignificant(*s, "string_surprisal"));
      } else {
        missing.push_back(fmt::format("cross-scale section ({})", to_string(id)));
      }
    }
    out.push_back(finish(7, "cross-scale string surprisal", std::move(checks), std::move(missing)));
  }

  {
    std::vector<Check> checks;
    std::vector<std::string> missing;
    const std::pair<DatasetId, double> pinned[] = {
        {DatasetId::Ronai2022, -0.400}, {DatasetId::Pankratz2021, -0.342}, {DatasetId::Gotzner2018, -0.415}};
    for (const auto& [id, rho] : pinned) {
      const auto* s = usable(b, SectionKind::CrossScale, id);
      if (!s) {
        missing.push_back(fmt::format("cross-scale section ({})", to_string(id)));
        continue;
      }
      checks.push_back(check_correlation(*s, "concept_surprisal", "human_si", {rho, 0.07, true}));
    }
    if (const auto* s = usable(b, SectionKind::CrossScale, DatasetId::VanTiel2016)) {
      checks.push_back(check_nonsignificant(*s, "concept_surprisal"));
    } else {
      missing.emplace_back("cross-scale section (vantiel2016)");
    }
    for (DatasetId id : cross_scale_datasets()) {
      const auto* s = usable(b, SectionKind::CrossScale, id);
      if (!s) continue;
      const bool want_sig = id != DatasetId::VanTiel2016;
      if (s->anovas.empty()) {
        checks.push_back({false, fmt::format("{} anova: not computed", to_string(id))});
        continue;
      }
      const auto& a = s->anovas.front().result;
      checks.push_back({(a.p_value < 0.05) == want_sig,
                        fmt::format("{} anova full vs intercept-only: F={:.3f} p={:.3g} (target {})", to_string(id),
                                    a.f_statistic, a.p_value, want_sig ? "p < 0.05" : "p >= 0.05")});
    }
    out.push_back(finish(8, "cross-scale concept surprisal and anova", std::move(checks), std::move(missing)));
  }

  {
    std::vector<Check> checks;
    std::vector<std::string> missing;
    if (const auto* s = usable(b, SectionKind::Accessibility, DatasetId::Ronai2022)) {
      checks.push_back(check_correlation(*s, "string_surprisal", "cloze_accessibility", {-0.357, 0.07, true}));
    } else {
      missing.emplace_back("accessibility section (cloze data)");
    }
    out.push_back(finish(9, "accessibility", std::move(checks), std::move(missing)));
  }

  {
    std::vector<Check> checks;
    std::vector<std::string> missing;
    const Scale target{"big", "enormous", Pos::Adj};
    const TopKEntry* entry = nullptr;
    for (const auto& s : b.sections) {
      for (const auto& e : s.topk) {
        if (e.scale == target && !entry) entry = &e;
      }
    }
    if (!entry) {
      missing.emplace_back("scored alternatives for big/enormous");
    } else {
      std::optional<std::size_t> huge, enormous;
      for (std::size_t i = 0; i < entry->ranked.size(); ++i) {
        if (entry->ranked[i].first == "huge") huge = i + 1;
        if (entry->ranked[i].first == "enormous") enormous = i + 1;
      }
      const bool pass = huge && enormous && *huge < *enormous;
      checks.push_back({pass, fmt::format("big/enormous: rank(huge)={} rank(enormous)={}",
                                          huge ? std::to_string(*huge) : "absent",
                                          enormous ? std::to_string(*enormous) : "absent")});
    }
    out.push_back(finish(10, "qualitative top-k", std::move(checks), std::move(missing)));
  }
  return out;
}

std::string format_criteria(std::span<const CriterionResult> results) {
  std::string s;
  for (const auto& r : results) {
    s += fmt::format("[{}] criterion {}: {}\n", to_string(r.status), r.id, r.name);
    for (const auto& d : r.details) s += "    " + d + "\n";
  }
  return s;
}

}  // namespace scalarexp
