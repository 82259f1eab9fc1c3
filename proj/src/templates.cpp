#include "scalarexp/templates.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

namespace scalarexp {

std::string_view to_string(ScoringMode mode) {
  return mode == ScoringMode::MaskedSlot ? "masked_slot" : "continuation";
}

ScoringMode parse_scoring_mode(std::string_view text) {
  if (text == "masked_slot") return ScoringMode::MaskedSlot;
  if (text == "continuation") return ScoringMode::Continuation;
  throw Error("unknown scoring mode '" + std::string(text) + "'");
}

ScalarConstruction::ScalarConstruction(std::string full_text, SlotSpan slot, ScoringMode mode)
    : full_text_(std::move(full_text)), slot_(slot), mode_(mode) {
  if (slot_.begin >= slot_.end || slot_.end > full_text_.size()) {
    throw TemplateError("slot span out of range");
  }
  if (mode_ == ScoringMode::Continuation && !suffix().empty() && suffix() != " it") {
    throw TemplateError("continuation constructions must end at the slot (or ' it')");
  }
}

std::string_view ScalarConstruction::prefix() const {
  return std::string_view(full_text_).substr(0, slot_.begin);
}

std::string_view ScalarConstruction::slot_text() const {
  return std::string_view(full_text_).substr(slot_.begin, slot_.end - slot_.begin);
}

std::string_view ScalarConstruction::suffix() const {
  return std::string_view(full_text_).substr(slot_.end);
}

std::string ScalarConstruction::with_slot(std::string_view word) const {
  std::string out(prefix());
  out += word;
  out += suffix();
  return out;
}

ScalarConstruction build_within_scale(const StimulusItem& item) {
  if (item.scale.weak != "some" || item.scale.strong != "all") {
    throw TemplateError("within-scale template requires the scale ⟨some, all⟩");
  }
  const auto hits = find_word(item.context, "some");
  if (hits.empty()) throw TemplateError("context has no 'some': " + item.context);
  std::size_t at;
  if (item.weak_offset) {
    if (std::find(hits.begin(), hits.end(), *item.weak_offset) == hits.end()) {
      throw TemplateError("flagged offset does not point at 'some'");
    }
    at = *item.weak_offset;
  } else if (hits.size() == 1) {
    at = hits.front();
  } else {
    throw TemplateError("context has several 'some' and none is flagged: " + item.context);
  }
  const std::size_t insert_at = at + 4;
  static constexpr std::string_view kLead = ", but not ";
  static constexpr std::string_view kSlot = "all";
  std::string text = item.context.substr(0, insert_at);
  text += kLead;
  const std::size_t slot_begin = text.size();
  text += kSlot;
  text += ",";
  text += item.context.substr(insert_at);
  return ScalarConstruction(std::move(text), {slot_begin, slot_begin + kSlot.size()},
                            ScoringMode::MaskedSlot);
}

ScalarConstruction build_cross_scale(const Scale& scale, const CrossScaleFrame& frame) {
  if (trim(frame.subject_np).empty()) throw TemplateError("empty subject NP");
  std::string text(trim(frame.subject_np));
  std::string strong = scale.strong;
  switch (scale.pos) {
    case Pos::Adj:
      text += " is " + scale.weak + ", but not ";
      break;
    case Pos::Adv:
      if (!frame.adj_for_adverb || trim(*frame.adj_for_adverb).empty()) {
        throw TemplateError("adverbial scale " + to_string(scale) + " needs a carrier adjective");
      }
      text += " is " + scale.weak + " " + std::string(trim(*frame.adj_for_adverb)) + ", but not ";
      break;
    case Pos::Verb:
      text += " " + frame.weak_past.value_or(scale.weak) + ", but did not ";
      strong = frame.strong_base.value_or(scale.strong);
      break;
    case Pos::Quant:
      throw TemplateError("no cross-scale template for part of speech QUANT");
  }
  const std::size_t begin = text.size();
  text += strong;
  const std::size_t end = text.size();
  if (frame.trailing_it) {
    if (scale.pos != Pos::Verb) throw TemplateError("trailing 'it' applies to verbal scales only");
    text += " it";
  }
  return ScalarConstruction(std::move(text), {begin, end}, ScoringMode::Continuation);
}

ScalarConstruction build_cross_scale(const Scale& scale, std::string_view subject_np,
                                     std::optional<std::string> adj_for_adverb) {
  CrossScaleFrame frame;
  frame.subject_np = std::string(subject_np);
  frame.adj_for_adverb = std::move(adj_for_adverb);
  return build_cross_scale(scale, frame);
}

std::vector<StimulusRecord> load_stimuli(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TemplateError("cannot open stimulus file " + path.string());
  std::vector<StimulusRecord> out;
  std::string line;
  std::size_t line_no = 0;
  auto opt = [](const nlohmann::json& j, const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    auto s = j[key].get<std::string>();
    if (s.empty()) return std::nullopt;
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      StimulusRecord rec;
      rec.scale = make_scale(ascii_lower(j.at("weak").get<std::string>()),
                             ascii_lower(j.at("strong").get<std::string>()),
                             parse_pos(j.at("pos").get<std::string>()));
      rec.frame.subject_np = j.at("subject_np").get<std::string>();
      rec.frame.adj_for_adverb = opt(j, "adj_for_adverb");
      rec.frame.weak_past = opt(j, "verb_past");
      rec.frame.strong_base = opt(j, "strong_base");
      rec.frame.trailing_it = j.value("trailing_it", false);
      out.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw TemplateError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

const CrossScaleFrame* find_frame(const std::vector<StimulusRecord>& records,
                                  const StimulusItem& item) {
  const CrossScaleFrame* sole = nullptr;
  std::size_t matches = 0;
  const std::string context = ascii_lower(item.context);
  for (const auto& rec : records) {
    if (rec.scale.weak != item.scale.weak || rec.scale.strong != item.scale.strong) continue;
    ++matches;
    sole = &rec.frame;
    if (context.rfind(ascii_lower(trim(rec.frame.subject_np)), 0) == 0) return &rec.frame;
  }
  return matches == 1 ? sole : nullptr;
}

}  // namespace scalarexp
