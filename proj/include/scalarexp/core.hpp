// Shared vocabulary types: parts of speech, lexical scales and the error
// hierarchy used across the library.
#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scalarexp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Pos { Adj, Adv, Verb, Quant };

std::string_view to_string(Pos pos);
/// Accepts ADJ/ADV/VERB/QUANT in any case, plus the usual short forms
/// (adjective, adverb, verb, a, r, v, jj, rb, vb).
Pos parse_pos(std::string_view text);

/// True for a nonempty token with no whitespace.
bool is_single_word(std::string_view word);

/// Lowercase ASCII copy.
std::string ascii_lower(std::string_view text);
std::string_view trim(std::string_view text);

/// An informativity-ordered pair ⟨weak, strong⟩.
struct Scale {
  std::string weak;
  std::string strong;
  Pos pos = Pos::Adj;

  friend auto operator<=>(const Scale&, const Scale&) = default;
  friend bool operator==(const Scale&, const Scale&) = default;
};

/// Validating constructor: members must differ and be single words.
Scale make_scale(std::string weak, std::string strong, Pos pos);

std::string to_string(const Scale& scale);  // "⟨weak, strong⟩"

}  // namespace scalarexp
