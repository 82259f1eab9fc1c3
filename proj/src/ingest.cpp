#include "scalarexp/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "scalarexp/delimited.hpp"

namespace scalarexp {
namespace {

using json = nlohmann::json;

constexpr std::array<DatasetId, 4> kCrossScale = {DatasetId::Ronai2022, DatasetId::Pankratz2021,
                                                  DatasetId::Gotzner2018, DatasetId::VanTiel2016};

const std::vector<DatasetSchema>& registry() {
  static const std::vector<DatasetSchema> schemas = [] {
    std::vector<DatasetSchema> s;
    s.push_back(DatasetSchema{
        .id = DatasetId::Degen2015,
        .si_scale = SiScale::Likert1To7,
        .per_response = true,
        .encoding = ResponseEncoding::Numeric,
        .weak_column = "",
        .strong_column = "",
        .pos_column = "",
        .context_column = "Sentence",
        .response_column = "Rating",
        .weak_offset_column = "WeakOffset",
        .fixed_scale = Scale{"some", "all", Pos::Quant},
        .covariates = {{"Partitive", "partitive", CovariateKind::Binary},
                       {"StrengthSome", "strength", CovariateKind::Continuous},
                       {"Mention", "mention", CovariateKind::Binary},
                       {"Subjecthood", "subjecthood", CovariateKind::Binary},
                       {"Modification", "modification", CovariateKind::Binary},
                       {"SentenceLength", "sentence_length", CovariateKind::Continuous}},
        .expected_items = 1363,
        .expected_scales = 1});
    s.push_back(DatasetSchema{.id = DatasetId::VanTiel2016,
                              .si_scale = SiScale::Proportion,
                              .per_response = true,
                              .encoding = ResponseEncoding::Binary,
                              .weak_column = "weak",
                              .strong_column = "strong",
                              .pos_column = "pos",
                              .context_column = "sentence",
                              .response_column = "response",
                              .weak_offset_column = "",
                              .fixed_scale = std::nullopt,
                              .covariates = {},
                              .expected_items = 117,
                              .expected_scales = 39});
    s.push_back(DatasetSchema{.id = DatasetId::Gotzner2018,
                              .si_scale = SiScale::Proportion,
                              .per_response = true,
                              .encoding = ResponseEncoding::Binary,
                              .weak_column = "WeakScalar",
                              .strong_column = "StrongScalar",
                              .pos_column = "POS",
                              .context_column = "Sentence",
                              .response_column = "Answer",
                              .weak_offset_column = "",
                              .fixed_scale = std::nullopt,
                              .covariates = {},
                              .expected_items = 67,
                              .expected_scales = 67});
    s.push_back(DatasetSchema{.id = DatasetId::Pankratz2021,
                              .si_scale = SiScale::Proportion,
                              .per_response = false,
                              .encoding = ResponseEncoding::Numeric,
                              .weak_column = "weak_term",
                              .strong_column = "strong_term",
                              .pos_column = "pos",
                              .context_column = "sentence",
                              .response_column = "si_rate",
                              .weak_offset_column = "",
                              .fixed_scale = std::nullopt,
                              .covariates = {},
                              .expected_items = 50,
                              .expected_scales = 50});
    s.push_back(DatasetSchema{.id = DatasetId::Ronai2022,
                              .si_scale = SiScale::Proportion,
                              .per_response = true,
                              .encoding = ResponseEncoding::Binary,
                              .weak_column = "Weak",
                              .strong_column = "Strong",
                              .pos_column = "POS",
                              .context_column = "Context",
                              .response_column = "Response",
                              .weak_offset_column = "",
                              .fixed_scale = std::nullopt,
                              .covariates = {},
                              .expected_items = 57,
                              .expected_scales = 57});
    return s;
  }();
  return schemas;
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<double> parse_binary(std::string_view text) {
  const std::string t = ascii_lower(trim(text));
  if (t == "yes" || t == "y" || t == "true" || t == "1") return 1.0;
  if (t == "no" || t == "n" || t == "false" || t == "0") return 0.0;
  return std::nullopt;
}

std::size_t require_column(const DelimitedTable& table, const std::string& name, DatasetId id) {
  auto col = table.column(name);
  if (!col) {
    throw IngestError(std::string(to_string(id)) + ": missing column '" + name + "'");
  }
  return *col;
}

bool within_bounds(double v, SiScale scale) {
  return scale == SiScale::Likert1To7 ? (v >= 1.0 && v <= 7.0) : (v >= 0.0 && v <= 1.0);
}

struct Accumulator {
  StimulusItem item;
  double sum = 0.0;
  std::size_t count = 0;
};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '\'' || c == '-' ||
         (static_cast<unsigned char>(c) & 0x80) != 0;
}

}  // namespace

std::string_view to_string(DatasetId id) {
  switch (id) {
    case DatasetId::Degen2015: return "degen2015";
    case DatasetId::VanTiel2016: return "vantiel2016";
    case DatasetId::Gotzner2018: return "gotzner2018";
    case DatasetId::Pankratz2021: return "pankratz2021";
    case DatasetId::Ronai2022: return "ronai2022";
    case DatasetId::Ronai2022Cloze: return "ronai2022_cloze";
  }
  return "?";
}

DatasetId parse_dataset_id(std::string_view text) {
  for (auto id : {DatasetId::Degen2015, DatasetId::VanTiel2016, DatasetId::Gotzner2018,
                  DatasetId::Pankratz2021, DatasetId::Ronai2022, DatasetId::Ronai2022Cloze}) {
    if (to_string(id) == text) return id;
  }
  throw IngestError("unknown dataset id '" + std::string(text) + "'");
}

std::span<const DatasetId> cross_scale_datasets() { return kCrossScale; }

const DatasetSchema& schema_for(DatasetId id) {
  for (const auto& s : registry()) {
    if (s.id == id) return s;
  }
  throw IngestError("no item schema registered for " + std::string(to_string(id)) +
                    " (use load_cloze for Cloze data)");
}

DatasetSpec make_dataset_spec(DatasetId id, std::filesystem::path path) {
  const SiScale scale =
      id == DatasetId::Degen2015 ? SiScale::Likert1To7 : SiScale::Proportion;
  return DatasetSpec{id, std::move(path), scale};
}

std::span<const std::string> within_scale_covariates() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : schema_for(DatasetId::Degen2015).covariates) n.push_back(c.name);
    return n;
  }();
  return names;
}

std::vector<std::size_t> find_word(std::string_view text, std::string_view word) {
  std::vector<std::size_t> hits;
  if (word.empty()) return hits;
  const std::string lt = ascii_lower(text);
  const std::string lw = ascii_lower(word);
  for (std::size_t pos = lt.find(lw); pos != std::string::npos; pos = lt.find(lw, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_char(lt[pos - 1]);
    const std::size_t end = pos + lw.size();
    const bool right_ok = end == lt.size() || !is_word_char(lt[end]);
    if (left_ok && right_ok) hits.push_back(pos);
  }
  return hits;
}

std::vector<StimulusItem> load_dataset(const DatasetSpec& spec, const LoadOptions& options,
                                       LoadReport* report) {
  const DatasetSchema& schema = schema_for(spec.id);
  if (spec.si_scale != schema.si_scale) {
    throw IngestError(std::string(to_string(spec.id)) + ": SI scale does not match registry");
  }
  if (!std::filesystem::exists(spec.source_path)) {
    throw IngestError(std::string(to_string(spec.id)) + ": no such file " +
                      spec.source_path.string());
  }
  DelimitedTable table = [&] {
    try {
      return DelimitedTable::read_file(spec.source_path);
    } catch (const IngestError&) {
      throw;
    } catch (const Error& e) {
      throw IngestError(std::string(to_string(spec.id)) + ": " + e.what());
    }
  }();
  if (table.header().empty() || table.row_count() == 0) {
    throw IngestError(std::string(to_string(spec.id)) + ": no rows");
  }

  const std::size_t ctx_col = require_column(table, schema.context_column, spec.id);
  const std::size_t resp_col = require_column(table, schema.response_column, spec.id);
  std::optional<std::size_t> weak_col, strong_col, pos_col;
  if (!schema.fixed_scale) {
    weak_col = require_column(table, schema.weak_column, spec.id);
    strong_col = require_column(table, schema.strong_column, spec.id);
    pos_col = require_column(table, schema.pos_column, spec.id);
  }
  // Covariate columns are optional; the within-scale regression reports what is missing.
  std::vector<std::optional<std::size_t>> cov_cols;
  for (const auto& c : schema.covariates) {
    cov_cols.push_back(table.column(c.column));
    if (!cov_cols.back()) spdlog::warn("{}: covariate column '{}' absent", to_string(spec.id), c.column);
  }
  std::optional<std::size_t> offset_col;
  if (!schema.weak_offset_column.empty()) offset_col = table.column(schema.weak_offset_column);

  LoadReport local;
  std::vector<Accumulator> groups;
  std::map<std::pair<Scale, std::string>, std::size_t> index;
  std::set<std::pair<std::string, std::string>> dropped_multiword;

  for (std::size_t r = 0; r < table.row_count(); ++r) {
    ++local.rows_read;
    Scale scale;
    if (schema.fixed_scale) {
      scale = *schema.fixed_scale;
    } else {
      std::string weak = ascii_lower(trim(table.cell(r, *weak_col)));
      std::string strong = ascii_lower(trim(table.cell(r, *strong_col)));
      if (!is_single_word(weak) || !is_single_word(strong)) {
        dropped_multiword.emplace(weak, strong);
        continue;
      }
      try {
        scale = make_scale(std::move(weak), std::move(strong), parse_pos(table.cell(r, *pos_col)));
      } catch (const Error& e) {
        throw IngestError(std::string(to_string(spec.id)) + ": row " + std::to_string(r + 2) +
                          ": " + e.what());
      }
    }

    const std::optional<double> value = schema.encoding == ResponseEncoding::Binary
                                            ? parse_binary(table.cell(r, resp_col))
                                            : parse_double(table.cell(r, resp_col));
    if (!value || !within_bounds(*value, schema.si_scale)) {
      ++local.rows_rejected_bounds;
      continue;
    }

    std::string context(trim(table.cell(r, ctx_col)));
    std::optional<std::size_t> weak_offset;
    const auto hits = find_word(context, scale.weak);
    if (offset_col && !trim(table.cell(r, *offset_col)).empty()) {
      const auto flagged = parse_double(table.cell(r, *offset_col));
      if (!flagged || *flagged < 0 ||
          std::find(hits.begin(), hits.end(), static_cast<std::size_t>(*flagged)) == hits.end()) {
        throw IngestError(std::string(to_string(spec.id)) + ": row " + std::to_string(r + 2) +
                          ": flagged offset does not point at '" + scale.weak + "'");
      }
      weak_offset = static_cast<std::size_t>(*flagged);
    } else if (hits.size() == 1) {
      weak_offset = hits.front();
    }
    if (schema.fixed_scale && hits.empty()) {
      ++local.rows_rejected_missing_weak;
      continue;
    }

    const auto key = std::make_pair(scale, context);
    auto it = index.find(key);
    if (it == index.end()) {
      Accumulator acc;
      acc.item.dataset_id = spec.id;
      acc.item.scale = scale;
      acc.item.context = context;
      acc.item.weak_offset = weak_offset;
      for (std::size_t c = 0; c < schema.covariates.size(); ++c) {
        const auto& cov = schema.covariates[c];
        if (!cov_cols[c] || trim(table.cell(r, *cov_cols[c])).empty()) continue;
        const auto cell = table.cell(r, *cov_cols[c]);
        const auto v = cov.kind == CovariateKind::Binary ? parse_binary(cell) : parse_double(cell);
        if (!v) {
          throw IngestError(std::string(to_string(spec.id)) + ": row " + std::to_string(r + 2) +
                            ": unparseable covariate '" + cov.column + "'");
        }
        acc.item.covariates[cov.name] = *v;
      }
      it = index.emplace(key, groups.size()).first;
      groups.push_back(std::move(acc));
    }
    Accumulator& acc = groups[it->second];
    acc.sum += *value;
    ++acc.count;
  }

  std::vector<StimulusItem> items;
  items.reserve(groups.size());
  for (auto& g : groups) {
    g.item.human_si = g.sum / static_cast<double>(g.count);
    items.push_back(std::move(g.item));
  }
  local.multiword_scales_dropped = dropped_multiword.size();
  local.items = items.size();
  local.scales = count_unique_scales(items);

  if (local.multiword_scales_dropped > 0) {
    spdlog::info("{}: dropped {} multi-word scale(s)", to_string(spec.id),
                 local.multiword_scales_dropped);
  }
  if (local.rows_rejected_bounds > 0) {
    spdlog::warn("{}: rejected {} row(s) with SI outside bounds", to_string(spec.id),
                 local.rows_rejected_bounds);
  }
  if (items.empty()) throw IngestError(std::string(to_string(spec.id)) + ": no rows");
  if (options.enforce_expected_counts &&
      (local.items != schema.expected_items || local.scales != schema.expected_scales)) {
    throw IngestError(std::string(to_string(spec.id)) + ": expected " +
                      std::to_string(schema.expected_items) + " items / " +
                      std::to_string(schema.expected_scales) + " scales, found " +
                      std::to_string(local.items) + " / " + std::to_string(local.scales));
  }
  if (report) *report = local;
  return items;
}

std::vector<ClozeRecord> load_cloze(const std::filesystem::path& path) {
  const auto table = DelimitedTable::read_file(path);
  if (table.header().empty() || table.row_count() == 0) throw IngestError("cloze: no rows");
  const auto id = DatasetId::Ronai2022Cloze;
  const auto weak = require_column(table, "Weak", id);
  const auto strong = require_column(table, "Strong", id);
  const auto acc = require_column(table, "Accessibility", id);
  const auto pos = table.column("POS");
  std::vector<ClozeRecord> out;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const auto v = parse_double(table.cell(r, acc));
    if (!v || *v < 0.0 || *v > 1.0) {
      throw IngestError("cloze: row " + std::to_string(r + 2) + ": accessibility not in [0,1]");
    }
    out.push_back(ClozeRecord{
        make_scale(ascii_lower(trim(table.cell(r, weak))), ascii_lower(trim(table.cell(r, strong))),
                   pos ? parse_pos(table.cell(r, *pos)) : Pos::Adj),
        *v});
  }
  return out;
}

std::vector<StimulusItem> join_cloze(std::vector<StimulusItem> items,
                                     std::span<const ClozeRecord> records) {
  std::map<std::pair<std::string, std::string>, double> by_key;
  for (const auto& rec : records) {
    if (!by_key.emplace(std::make_pair(rec.scale.weak, rec.scale.strong), rec.accessibility)
             .second) {
      throw IngestError("duplicate cloze record for " + to_string(rec.scale));
    }
  }
  for (auto& item : items) {
    auto it = by_key.find({item.scale.weak, item.scale.strong});
    if (it != by_key.end()) item.cloze_accessibility = it->second;
  }
  return items;
}

std::size_t count_unique_scales(std::span<const StimulusItem> items) {
  std::set<Scale> scales;
  for (const auto& i : items) scales.insert(i.scale);
  return scales.size();
}

void write_item_store(std::ostream& out, std::span<const StimulusItem> items) {
  for (const auto& item : items) {
    json rec;
    rec["dataset_id"] = to_string(item.dataset_id);
    rec["weak"] = item.scale.weak;
    rec["strong"] = item.scale.strong;
    rec["pos"] = to_string(item.scale.pos);
    rec["context"] = item.context;
    rec["human_si"] = item.human_si;
    rec["covariates"] = item.covariates;
    if (item.cloze_accessibility) rec["cloze_accessibility"] = *item.cloze_accessibility;
    if (item.weak_offset) rec["weak_offset"] = *item.weak_offset;
    out << rec.dump() << '\n';
  }
}

std::vector<StimulusItem> read_item_store(std::istream& in) {
  std::vector<StimulusItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json rec = json::parse(line);
      StimulusItem item;
      item.dataset_id = parse_dataset_id(rec.at("dataset_id").get<std::string>());
      item.scale = make_scale(rec.at("weak").get<std::string>(), rec.at("strong").get<std::string>(),
                              parse_pos(rec.at("pos").get<std::string>()));
      item.context = rec.at("context").get<std::string>();
      item.human_si = rec.at("human_si").get<double>();
      item.covariates = rec.at("covariates").get<std::map<std::string, double>>();
      if (rec.contains("cloze_accessibility")) {
        item.cloze_accessibility = rec["cloze_accessibility"].get<double>();
      }
      if (rec.contains("weak_offset")) item.weak_offset = rec["weak_offset"].get<std::size_t>();
      items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw IngestError("item store line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return items;
}

}  // namespace scalarexp
