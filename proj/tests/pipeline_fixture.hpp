// Small synthetic inputs for end-to-end runs: a degen2015-shaped file, a
// ronai2022-shaped file with stimulus frames, cloze values, a lexicon, and
// embeddings, plus matching in-process backends.
#pragma once

#include <nlohmann/json.hpp>

#include "scalarexp/token_model.hpp"
#include "support.hpp"

namespace testing {

inline const std::vector<std::string>& fixture_adjectives() {
  static const std::vector<std::string> words{
      "big",   "enormous", "huge",      "large",    "giant",     "small", "tiny",      "warm",
      "hot",   "good",     "excellent", "great",    "pretty",    "beautiful", "old",   "ancient",
      "cold",  "freezing", "happy",     "ecstatic", "tired",     "exhausted", "smart", "brilliant",
      "hungry", "starving", "difficult", "impossible", "bad",     "awful"};
  return words;
}

struct FixtureScale {
  std::string weak, strong, noun;
  bool has_frame = true;
};

inline const std::vector<FixtureScale>& fixture_scales() {
  static const std::vector<FixtureScale> s{
      {"big", "enormous", "elephant"},   {"big", "huge", "house"},          {"small", "tiny", "mouse"},
      {"warm", "hot", "soup"},           {"good", "excellent", "movie"},    {"good", "great", "plan"},
      {"pretty", "beautiful", "garden"}, {"old", "ancient", "temple"},      {"cold", "freezing", "lake"},
      {"happy", "ecstatic", "winner"},   {"tired", "exhausted", "runner"},  {"smart", "brilliant", "student"},
      {"hungry", "starving", "dog"},     {"difficult", "impossible", "task"}, {"bad", "awful", "weather"},
      {"large", "giant", "tree", false}};
  return s;
}

struct FixtureOptions {
  bool covariates = true;
  bool cloze = true;
  bool constant_cloze = false;
  std::string masked_url;
  std::string causal_url;
};

inline std::map<std::string, double> fixture_quantifier_logits() {
  return {{"each", 0.1}, {"every", 0.2}, {"few", -0.5}, {"half", -1.0},
          {"much", 0.0}, {"many", 0.3},  {"most", 0.5}, {"all", 1.0}};
}

inline std::shared_ptr<TableMaskedBackend> fixture_masked_backend() {
  return std::make_shared<TableMaskedBackend>(
      "toy-masked", fixture_quantifier_logits(), [](const std::string& text, const std::string& w) {
        return static_cast<double>(fnv1a(text + "|" + w) % 1000) / 400.0;
      });
}

inline std::shared_ptr<scalarexp::LocalModelBackend> fixture_causal_backend() {
  return std::make_shared<scalarexp::LocalModelBackend>(
      std::make_shared<ToyCausalModel>("toy-causal", fixture_adjectives()));
}

// Writes every input under `root` and returns the config path.
inline fs::path write_fixture(const fs::path& root, const FixtureOptions& opt = {}) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> likert(1, 7), coin(0, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::vector<std::string> nouns{"apples", "songs", "friends", "books", "ideas", "rooms", "chairs", "cars"};
  std::string degen = opt.covariates
                          ? "Sentence,Rating,Partitive,StrengthSome,Mention,Subjecthood,Modification,SentenceLength\n"
                          : "Sentence,Rating\n";
  for (int i = 0; i < 40; ++i) {
    const std::string sentence =
        "Item " + std::to_string(i) + " shows some " + nouns[static_cast<std::size_t>(i) % nouns.size()] + " today.";
    const int partitive = coin(rng), mention = coin(rng), subj = coin(rng), mod = coin(rng);
    const double strength = 1 + 6 * unit(rng);
    const int length = 5 + i % 9;
    for (int r = 0; r < 2; ++r) {
      degen += "\"" + sentence + "\"," + std::to_string(likert(rng));
      if (opt.covariates) {
        degen += "," + std::to_string(partitive) + "," + std::to_string(strength) + "," + std::to_string(mention) +
                 "," + std::to_string(subj) + "," + std::to_string(mod) + "," + std::to_string(length);
      }
      degen += "\n";
    }
  }
  write_text(root / "degen.csv", degen);

  std::string ronai = "Weak,Strong,POS,Context,Response\n";
  std::string stimuli;
  std::string cloze = "Weak,Strong,POS,Accessibility\n";
  for (const auto& s : fixture_scales()) {
    for (int r = 0; r < 10; ++r) {
      ronai += s.weak + "," + s.strong + ",adj,The " + s.noun + " is " + s.weak + "." + "," +
               (unit(rng) < 0.5 ? "yes" : "no") + "\n";
    }
    if (s.has_frame) {
      stimuli += nlohmann::json{{"weak", s.weak}, {"strong", s.strong}, {"pos", "adj"}, {"subject_np", "The " + s.noun}}
                     .dump() +
                 "\n";
    }
    cloze += s.weak + "," + s.strong + ",adj," + std::to_string(opt.constant_cloze ? 0.5 : unit(rng)) + "\n";
  }
  write_text(root / "ronai.csv", ronai);
  write_text(root / "stimuli.jsonl", stimuli);
  if (opt.cloze) write_text(root / "cloze.csv", cloze);

  std::string lexicon, freqs, vectors;
  std::uint64_t count = 5000;
  for (const auto& w : fixture_adjectives()) {
    lexicon += w + "\tJJ\n";
    freqs += w + "\t" + std::to_string(count) + "\n";
    count -= 37;
  }
  for (const char* w : {"sometimes", "always", "often", "usually"}) {
    lexicon += std::string(w) + "\tRB\n";
    freqs += std::string(w) + "\t" + std::to_string(count--) + "\n";
  }
  for (const char* w : {"start", "finish", "like", "love"}) {
    lexicon += std::string(w) + "\tVB\n";
    freqs += std::string(w) + "\t" + std::to_string(count--) + "\n";
  }
  write_text(root / "lexicon.tsv", lexicon);
  write_text(root / "frequencies.tsv", freqs);

  std::vector<std::string> vocab = fixture_adjectives();
  for (const auto& [q, _] : fixture_quantifier_logits()) vocab.push_back(q);
  for (const auto& w : vocab) {
    vectors += w;
    for (int d = 0; d < 4; ++d) vectors += " " + std::to_string(1.0 + 0.6 * (unit(rng) - 0.5) * 2);
    vectors += "\n";
  }
  write_text(root / "vectors.txt", vectors);

  nlohmann::json config{
      {"datasets",
       {{"degen2015", {{"path", "degen.csv"}}}, {"ronai2022", {{"path", "ronai.csv"}, {"stimuli", "stimuli.jsonl"}}}}},
      {"cloze", "cloze.csv"},
      {"backends",
       {{"masked", {{"url", opt.masked_url}, {"model_id", "toy-masked"}}},
        {"autoregressive", {{"url", opt.causal_url}, {"model_id", "toy-causal"}}}}},
      {"embeddings", "vectors.txt"},
      {"lexicon", {{"lexicon", "lexicon.tsv"}, {"frequencies", "frequencies.tsv"}}},
      {"cache", "cache.jsonl"},
      {"output_dir", "out"},
      {"seed", 7},
      {"permutations", 400},
      {"enforce_expected_counts", false}};
  write_text(root / "config.json", config.dump(2));
  return root / "config.json";
}

}  // namespace testing
