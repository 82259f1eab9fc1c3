#include "scalarexp/alternatives.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <unordered_set>


namespace scalarexp {
namespace {

bool valid_member(std::string_view w) {
  return is_single_word(w) && ascii_lower(w) == w;
}

}  // namespace

AlternativeSet::AlternativeSet(Pos pos, std::vector<std::string> members,
                               AlternativeProvenance provenance)
    : pos_(pos), members_(std::move(members)), provenance_(std::move(provenance)) {
  std::unordered_set<std::string_view> seen;
  for (const auto& m : members_) {
    if (!valid_member(m)) throw AlternativesError("invalid alternative '" + m + "'");
    if (!seen.insert(m).second) throw AlternativesError("duplicate alternative '" + m + "'");
  }
}

bool AlternativeSet::contains(std::string_view word) const {
  return std::find(members_.begin(), members_.end(), word) != members_.end();
}

AlternativeSet AlternativeSet::with_forced(std::span<const std::string> tested) const {
  auto members = members_;
  auto prov = provenance_;
  for (const auto& w : tested) {
    if (std::find(members.begin(), members.end(), w) == members.end()) {
      members.push_back(w);
      prov.force_included.push_back(w);
    }
  }
  return AlternativeSet(pos_, std::move(members), std::move(prov));
}

nlohmann::json AlternativeSet::manifest() const {
  return nlohmann::json{{"pos", to_string(pos_)},
                        {"size", members_.size()},
                        {"members", members_},
                        {"provenance",
                         {{"lexicon_source", provenance_.lexicon_source},
                          {"frequency_source", provenance_.frequency_source},
                          {"cutoff", provenance_.cutoff},
                          {"in_frequency", provenance_.in_frequency},
                          {"exclusions_applied", provenance_.exclusions_applied},
                          {"force_included", provenance_.force_included}}}};
}

AlternativeSet quantifier_set() {
  AlternativeProvenance prov;
  prov.lexicon_source = "closed quantifier list";
  return AlternativeSet(Pos::Quant,
                        {"each", "every", "few", "half", "much", "many", "most", "all"},
                        std::move(prov));
}

std::string_view fine_grained_tag(Pos pos) {
  switch (pos) {
    case Pos::Adj: return "JJ";
    case Pos::Adv: return "RB";
    case Pos::Verb: return "VB";
    case Pos::Quant: break;
  }
  throw AlternativesError("no fine-grained lexicon tag for QUANT");
}

std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AlternativesError("cannot open lexicon " + path.string());
  std::vector<LexiconEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string_view::npos) {
      throw AlternativesError("lexicon line without tab: '" + std::string(t) + "'");
    }
    out.push_back({std::string(trim(t.substr(0, tab))), std::string(trim(t.substr(tab + 1)))});
  }
  return out;
}

FrequencyTable load_frequencies(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AlternativesError("cannot open frequency table " + path.string());
  FrequencyTable out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto sep = t.find_first_of(" \t");
    if (sep == std::string_view::npos) {
      throw AlternativesError("frequency line without count: '" + std::string(t) + "'");
    }
    const auto num = trim(t.substr(sep + 1));
    std::uint64_t count = 0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), count);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      throw AlternativesError("bad count in frequency line: '" + std::string(t) + "'");
    }
    out[std::string(t.substr(0, sep))] += count;
  }
  return out;
}

std::vector<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AlternativesError("cannot open word list " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (!t.empty() && t.front() != '#') out.emplace_back(t);
  }
  return out;
}

AlternativeSet build_pos_set(Pos pos, std::span<const LexiconEntry> lexicon,
                             const FrequencyTable& frequencies, std::size_t cutoff,
                             std::span<const std::string> exclusions, std::string lexicon_source,
                             std::string frequency_source) {
  if (lexicon.empty()) throw AlternativesError("empty lexicon");
  if (cutoff < 1) throw AlternativesError("cutoff must be >= 1");
  const std::string_view tag = fine_grained_tag(pos);

  std::set<std::string> words;
  for (const auto& e : lexicon) {
    if (e.tag == tag && valid_member(e.word)) words.insert(e.word);
  }
  std::vector<std::pair<std::uint64_t, std::string>> ranked;
  for (const auto& w : words) {
    auto it = frequencies.find(w);
    if (it != frequencies.end() && it->second > 0) ranked.emplace_back(it->second, w);
  }
  if (ranked.empty()) {
    throw AlternativesError("no " + std::string(tag) + " lexicon word appears in the frequency table");
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  AlternativeProvenance prov;
  prov.lexicon_source = std::move(lexicon_source);
  prov.frequency_source = std::move(frequency_source);
  prov.cutoff = cutoff;
  prov.in_frequency = ranked.size();
  if (ranked.size() > cutoff) ranked.resize(cutoff);

  const std::set<std::string> excluded(exclusions.begin(), exclusions.end());
  std::vector<std::string> members;
  for (auto& [count, w] : ranked) {
    if (excluded.count(w)) {
      prov.exclusions_applied.push_back(w);
    } else {
      members.push_back(std::move(w));
    }
  }
  return AlternativeSet(pos, std::move(members), std::move(prov));
}

}  // namespace scalarexp
