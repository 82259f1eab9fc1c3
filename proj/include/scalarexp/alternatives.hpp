// Candidate alternative sets: the closed quantifier set and frequency-ranked
// part-of-speech sets.
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "scalarexp/core.hpp"

namespace scalarexp {

class AlternativesError : public Error {
 public:
  using Error::Error;
};

struct AlternativeProvenance {
  std::string lexicon_source;
  std::string frequency_source;
  std::size_t cutoff = 0;
  std::size_t in_frequency = 0;  // lexicon words with the tag that have a count
  std::vector<std::string> exclusions_applied;
  std::vector<std::string> force_included;
};

class AlternativeSet {
 public:
  AlternativeSet(Pos pos, std::vector<std::string> members, AlternativeProvenance provenance);

  Pos pos() const { return pos_; }
  const std::vector<std::string>& members() const { return members_; }
  const AlternativeProvenance& provenance() const { return provenance_; }
  std::size_t size() const { return members_.size(); }
  bool contains(std::string_view word) const;

  /// Copy with each missing `tested` word appended and recorded in provenance.
  AlternativeSet with_forced(std::span<const std::string> tested) const;

  nlohmann::json manifest() const;

 private:
  Pos pos_;
  std::vector<std::string> members_;
  AlternativeProvenance provenance_;
};

/// {each, every, few, half, much, many, most, all}
AlternativeSet quantifier_set();

struct LexiconEntry {
  std::string word;
  std::string tag;  // fine-grained: JJ, RB, VB
};

using FrequencyTable = std::unordered_map<std::string, std::uint64_t>;

std::string_view fine_grained_tag(Pos pos);

std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path);
FrequencyTable load_frequencies(const std::filesystem::path& path);
/// One word per line; blank lines and '#' comments ignored.
std::vector<std::string> load_word_list(const std::filesystem::path& path);

/// Lexicon words with the POS's fine-grained tag that appear in `frequencies`,
/// ranked by descending count (ties: lexicographic), truncated to `cutoff`,
/// then minus `exclusions`.
AlternativeSet build_pos_set(Pos pos, std::span<const LexiconEntry> lexicon,
                             const FrequencyTable& frequencies, std::size_t cutoff,
                             std::span<const std::string> exclusions,
                             std::string lexicon_source = "", std::string frequency_source = "");

}  // namespace scalarexp
