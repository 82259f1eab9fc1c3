#include "scalarexp/core.hpp"

#include <algorithm>
#include <cctype>

namespace scalarexp {

std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::Adj: return "ADJ";
    case Pos::Adv: return "ADV";
    case Pos::Verb: return "VERB";
    case Pos::Quant: return "QUANT";
  }
  return "?";
}

Pos parse_pos(std::string_view text) {
  const std::string t = ascii_lower(trim(text));
  if (t == "adj" || t == "adjective" || t == "a" || t == "jj") return Pos::Adj;
  if (t == "adv" || t == "adverb" || t == "r" || t == "rb") return Pos::Adv;
  if (t == "verb" || t == "v" || t == "vb") return Pos::Verb;
  if (t == "quant" || t == "quantifier" || t == "q") return Pos::Quant;
  throw Error("unknown part of speech '" + std::string(text) + "'");
}

bool is_single_word(std::string_view word) {
  return !word.empty() && std::none_of(word.begin(), word.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view text) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = text.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = text.find_last_not_of(ws);
  return text.substr(b, e - b + 1);
}

Scale make_scale(std::string weak, std::string strong, Pos pos) {
  if (!is_single_word(weak) || !is_single_word(strong)) {
    throw Error("scale members must be single words: '" + weak + "', '" + strong + "'");
  }
  if (weak == strong) throw Error("scale members must differ: '" + weak + "'");
  return Scale{std::move(weak), std::move(strong), pos};
}

std::string to_string(const Scale& scale) {
  return "⟨" + scale.weak + ", " + scale.strong + "⟩";
}

}  // namespace scalarexp
