#include <random>

#include <catch_amalgamated.hpp>

#include "scalarexp/concept.hpp"
#include "support.hpp"

using namespace scalarexp;

namespace {

ScoreMap scores_of(const std::vector<std::pair<std::string, double>>& probs) {
  std::vector<ScoredAlternative> v;
  for (const auto& [w, p] : probs) v.push_back(make_scored(w, std::log(p), 1));
  return to_score_map(v);
}

AlternativeSet set_of(std::vector<std::string> words) { return AlternativeSet(Pos::Adj, std::move(words), {}); }

}  // namespace

TEST_CASE("cosine similarity", "[concept]") {
  const std::vector<double> v{0.3, -1.2, 4.0};
  CHECK(cosine_similarity(v, v) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  const double oracle = 32.0 / (std::sqrt(14.0) * std::sqrt(77.0));
  CHECK(cosine_similarity(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}) ==
        Catch::Approx(oracle).epsilon(1e-14));
  CHECK(oracle == Catch::Approx(0.974631846).epsilon(1e-9));
  CHECK_THROWS_AS(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{1, 0, 0}), ConceptError);
  CHECK_THROWS_AS(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 0}), ConceptError);
}

TEST_CASE("weighted surprisal fixtures", "[concept]") {
  EmbeddingTable emb(2, "fixture");
  emb.add("strong", {1.0, 0.0});
  emb.add("a", {1.0, 0.0});
  emb.add("b", {0.5, std::sqrt(0.75)});

  // two alternatives, weights 1 and 0.5: -ln((0.2 + 0.05) / 1.5) = ln 6
  const auto r = weighted_average_surprisal("strong", set_of({"a", "b"}), scores_of({{"a", 0.2}, {"b", 0.1}}), emb);
  CHECK(r.value == Catch::Approx(std::log(6.0)).epsilon(1e-12));
  CHECK(r.contributing == 2);

  // singleton {strong}: reduces to the string surprisal
  const auto single = weighted_average_surprisal("strong", set_of({"strong"}), scores_of({{"strong", 0.037}}), emb);
  CHECK(single.value == Catch::Approx(-std::log(0.037)).epsilon(1e-12));

  // constant distribution: -ln p regardless of the weights
  const auto flat = weighted_average_surprisal("strong", set_of({"a", "b", "strong"}),
                                               scores_of({{"a", 0.05}, {"b", 0.05}, {"strong", 0.05}}), emb);
  CHECK(flat.value == Catch::Approx(-std::log(0.05)).epsilon(1e-12));
}

TEST_CASE("dropped alternatives are accounted for", "[concept]") {
  EmbeddingTable emb(2, "fixture");
  emb.add("strong", {1.0, 0.0});
  emb.add("near", {1.0, 0.1});
  emb.add("opposite", {-1.0, 0.0});
  emb.add("orthogonal", {0.0, 1.0});
  emb.add("unscored", {1.0, 1.0});
  const auto alts = set_of({"near", "opposite", "orthogonal", "missing", "unscored"});
  const auto scores = scores_of({{"near", 0.3}, {"opposite", 0.5}, {"orthogonal", 0.1}, {"missing", 0.1}});
  const auto r = weighted_average_surprisal("strong", alts, scores, emb);
  CHECK(r.value == Catch::Approx(-std::log(0.3)).epsilon(1e-12));
  CHECK(r.contributing == 1);
  CHECK(r.dropped_oov == std::vector<std::string>{"missing"});
  CHECK(r.dropped_nonpositive_weight == std::vector<std::string>{"opposite", "orthogonal"});
  CHECK(r.dropped_unscored == std::vector<std::string>{"unscored"});
  CHECK(r.contributing + r.dropped_oov.size() + r.dropped_nonpositive_weight.size() + r.dropped_unscored.size() ==
        alts.size());

  CHECK_THROWS_AS(weighted_average_surprisal("nothing", alts, scores, emb), ConceptError);
  CHECK_THROWS_AS(weighted_average_surprisal("strong", set_of({"opposite"}), scores, emb), ConceptError);
}

TEST_CASE("weighted surprisal properties on random instances", "[concept][property]") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(1e-6, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    EmbeddingTable emb(5, "random");
    std::vector<double> base(5);
    for (auto& x : base) x = normal(rng);
    emb.add("strong", base);
    std::vector<std::string> words;
    std::vector<std::pair<std::string, double>> probs;
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(5);
      for (std::size_t d = 0; d < 5; ++d) v[d] = base[d] + 0.8 * normal(rng);
      const std::string w = "w" + std::to_string(i);
      emb.add(w, v);
      words.push_back(w);
      probs.emplace_back(w, unit(rng) / n);
    }
    const auto scores = scores_of(probs);
    WeightedSurprisalResult r;
    try {
      r = weighted_average_surprisal("strong", set_of(words), scores, emb);
    } catch (const ConceptError&) {
      continue;  // every weight nonpositive
    }
    // Brute force over the same weights.
    double num = 0, den = 0, lo = INFINITY, hi = -INFINITY;
    for (const auto& [w, p] : probs) {
      const double c = cosine_similarity(*emb.find("strong"), *emb.find(w));
      if (c <= 0) continue;
      num += p * c;
      den += c;
      lo = std::min(lo, -std::log(p));
      hi = std::max(hi, -std::log(p));
    }
    CHECK(r.value == Catch::Approx(-std::log(num / den)).epsilon(1e-12));
    CHECK(r.value >= lo - 1e-12);
    CHECK(r.value <= hi + 1e-12);

    // Scaling every vector leaves cosines, hence the result, unchanged.
    EmbeddingTable scaled(5, "scaled");
    scaled.add("strong", *emb.find("strong"));
    for (const auto& w : words) {
      auto v = *emb.find(w);
      for (auto& x : v) x *= 3.5;
      scaled.add(w, v);
    }
    CHECK(weighted_average_surprisal("strong", set_of(words), scores, scaled).value ==
          Catch::Approx(r.value).epsilon(1e-12));

    // Permutation invariance.
    auto shuffled = words;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(weighted_average_surprisal("strong", set_of(shuffled), scores, emb).value ==
          Catch::Approx(r.value).epsilon(1e-12));
  }
}

TEST_CASE("concentrated mass converges to the dominant alternative", "[concept][property]") {
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    EmbeddingTable emb(2, "fixture");
    emb.add("strong", {1.0, 0.0});
    emb.add("star", {1.0, 0.0});
    emb.add("other", {eps, 1.0});
    const auto r = weighted_average_surprisal("strong", set_of({"star", "other"}),
                                              scores_of({{"star", 0.4}, {"other", 0.6}}), emb);
    CHECK(std::fabs(r.value + std::log(0.4)) < 10 * eps);
  }
}

TEST_CASE("top-k ranking", "[concept]") {
  const auto s = scores_of({{"a", 0.9}, {"b", 0.1}});
  const auto one = top_k_alternatives(set_of({"a", "b"}), s, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].first == "a");
  CHECK(one[0].second == Catch::Approx(0.9).epsilon(1e-12));
  CHECK(top_k_alternatives(set_of({"a", "b"}), s, 10).size() == 2);
  CHECK_THROWS_AS(top_k_alternatives(set_of({"a"}), s, 0), ConceptError);

  const auto tie = scores_of({{"zeta", 0.25}, {"alpha", 0.25}, {"top", 0.5}});
  const auto t = top_k_alternatives(set_of({"zeta", "top", "alpha"}), tie, 2);
  CHECK(t[0].first == "top");
  CHECK(t[1].first == "alpha");
}

TEST_CASE("embedding table validation and text loading", "[concept]") {
  EmbeddingTable emb(3, "x");
  CHECK_THROWS_AS(emb.add("bad", {1.0, 2.0}), ConceptError);
  CHECK_THROWS_AS(emb.add("zero", {0.0, 0.0, 0.0}), ConceptError);

  testing::TempDir dir;
  testing::write_text(dir / "v.txt", "3 2\nbig 0.1 0.2\nhuge 0.3 0.1\nnull 0 0\nskip 1 1\n");
  const std::unordered_set<std::string> keep{"big", "huge", "null"};
  const auto t = EmbeddingTable::load_text(dir / "v.txt", &keep);
  CHECK(t.dimension() == 2);
  CHECK(t.size() == 2);
  CHECK(t.skipped_zero_vectors() == 1);
  CHECK_FALSE(t.contains("skip"));
  testing::write_text(dir / "ragged.txt", "big 0.1 0.2\nhuge 0.3\n");
  CHECK_THROWS_AS(EmbeddingTable::load_text(dir / "ragged.txt"), ConceptError);
}
