// Scalar constructions: "{WEAK}, but not {STRONG}" frames with a marked
// strong-scalemate slot.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scalarexp/core.hpp"
#include "scalarexp/ingest.hpp"

namespace scalarexp {

class TemplateError : public Error {
 public:
  using Error::Error;
};

enum class ScoringMode { MaskedSlot, Continuation };
std::string_view to_string(ScoringMode mode);
ScoringMode parse_scoring_mode(std::string_view text);

/// Half-open byte range [begin, end) into full_text.
struct SlotSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const SlotSpan&, const SlotSpan&) = default;
};

class ScalarConstruction {
 public:
  ScalarConstruction(std::string full_text, SlotSpan slot, ScoringMode mode);

  const std::string& full_text() const { return full_text_; }
  SlotSpan slot() const { return slot_; }
  ScoringMode mode() const { return mode_; }

  std::string_view prefix() const;
  std::string_view slot_text() const;
  std::string_view suffix() const;

  /// full_text with the slot replaced by `word`.
  std::string with_slot(std::string_view word) const;

  friend bool operator==(const ScalarConstruction&, const ScalarConstruction&) = default;

 private:
  std::string full_text_;
  SlotSpan slot_;
  ScoringMode mode_;
};

/// Inserts ", but not all," directly after the flagged "some" of a ⟨some, all⟩ item.
ScalarConstruction build_within_scale(const StimulusItem& item);

/// Stimulus material needed to render a cross-scale frame.
struct CrossScaleFrame {
  std::string subject_np;
  std::optional<std::string> adj_for_adverb;  // required for ADV
  std::optional<std::string> weak_past;       // VERB: rendered weak form (defaults to weak)
  std::optional<std::string> strong_base;     // VERB: rendered strong form (defaults to strong)
  bool trailing_it = false;                   // VERB: append " it" after the slot
};

/// ADJ:  "{NP} is {WEAK}, but not {STRONG}"
/// ADV:  "{NP} is {WEAK} {ADJ}, but not {STRONG}"
/// VERB: "{NP} {WEAK-past}, but did not {STRONG}"
ScalarConstruction build_cross_scale(const Scale& scale, const CrossScaleFrame& frame);
ScalarConstruction build_cross_scale(const Scale& scale, std::string_view subject_np,
                                     std::optional<std::string> adj_for_adverb = std::nullopt);

/// One line of a stimulus file.
struct StimulusRecord {
  Scale scale;
  CrossScaleFrame frame;
};

/// Reads line-delimited JSON records
/// {weak, strong, pos, subject_np, adj_for_adverb?, verb_past?, strong_base?, trailing_it?}.
std::vector<StimulusRecord> load_stimuli(const std::filesystem::path& path);

/// Chooses the frame for an item: the record for its (weak, strong) whose subject
/// NP starts the item's context, or the sole record for that scale.
const CrossScaleFrame* find_frame(const std::vector<StimulusRecord>& records,
                                  const StimulusItem& item);

}  // namespace scalarexp
