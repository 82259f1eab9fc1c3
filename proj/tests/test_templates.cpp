#include <catch_amalgamated.hpp>

#include "scalarexp/templates.hpp"
#include "support.hpp"

using namespace scalarexp;

namespace {
StimulusItem some_item(std::string context, std::optional<std::size_t> offset = std::nullopt) {
  StimulusItem item;
  item.scale = make_scale("some", "all", Pos::Quant);
  item.context = std::move(context);
  item.weak_offset = offset;
  return item;
}
}  // namespace

TEST_CASE("within-scale golden constructions", "[templates]") {
  const auto a = build_within_scale(some_item("I like some country music."));
  CHECK(a.full_text() == "I like some, but not all, country music.");
  CHECK(a.slot_text() == "all");
  CHECK(a.mode() == ScoringMode::MaskedSlot);

  const auto b = build_within_scale(
      some_item("It would certainly help them to appreciate some of the things that we have here."));
  CHECK(b.full_text() ==
        "It would certainly help them to appreciate some, but not all, of the things that we have here.");
  CHECK(b.prefix() == "It would certainly help them to appreciate some, but not ");
  CHECK(b.suffix() == ", of the things that we have here.");
}

TEST_CASE("within-scale needs a unique or flagged 'some'", "[templates]") {
  CHECK_THROWS_AS(build_within_scale(some_item("Some say some things.")), TemplateError);
  const auto c = build_within_scale(some_item("Some say some things.", 9));
  CHECK(c.full_text() == "Some say some, but not all, things.");
  CHECK_THROWS_AS(build_within_scale(some_item("Some say some things.", 3)), TemplateError);
  CHECK_THROWS_AS(build_within_scale(some_item("Nothing here.")), TemplateError);
  StimulusItem wrong = some_item("big");
  wrong.scale = make_scale("big", "huge", Pos::Adj);
  CHECK_THROWS_AS(build_within_scale(wrong), TemplateError);
}

TEST_CASE("cross-scale golden constructions", "[templates]") {
  const auto adj = build_cross_scale(make_scale("big", "enormous", Pos::Adj), "The elephant");
  CHECK(adj.full_text() == "The elephant is big, but not enormous");
  CHECK(adj.prefix() == "The elephant is big, but not ");
  CHECK(adj.slot_text() == "enormous");
  CHECK(adj.suffix().empty());
  CHECK(adj.mode() == ScoringMode::Continuation);

  const auto adv = build_cross_scale(make_scale("sometimes", "always", Pos::Adv), "The director", "late");
  CHECK(adv.full_text() == "The director is sometimes late, but not always");

  CrossScaleFrame frame;
  frame.subject_np = "The runner";
  frame.weak_past = "started";
  const auto verb = build_cross_scale(make_scale("start", "finish", Pos::Verb), frame);
  CHECK(verb.full_text() == "The runner started, but did not finish");
  CHECK(verb.slot_text() == "finish");
}

TEST_CASE("cross-scale template errors and trailing it", "[templates]") {
  CHECK_THROWS_AS(build_cross_scale(make_scale("sometimes", "always", Pos::Adv), "The director"), TemplateError);
  CHECK_THROWS_AS(build_cross_scale(make_scale("some", "all", Pos::Quant), "The cat"), TemplateError);
  CrossScaleFrame f;
  f.subject_np = "She";
  f.weak_past = "liked";
  f.strong_base = "love";
  f.trailing_it = true;
  const auto c = build_cross_scale(make_scale("like", "love", Pos::Verb), f);
  CHECK(c.full_text() == "She liked, but did not love it");
  CHECK(c.slot_text() == "love");
  CHECK(c.suffix() == " it");
  CHECK(c.with_slot("adore") == "She liked, but did not adore it");
  CHECK_THROWS_AS(build_cross_scale(make_scale("big", "huge", Pos::Adj), CrossScaleFrame{"", {}, {}, {}, false}),
                  TemplateError);
}

TEST_CASE("construction invariants", "[templates]") {
  CHECK_THROWS_AS(ScalarConstruction("abc", {2, 1}, ScoringMode::MaskedSlot), TemplateError);
  CHECK_THROWS_AS(ScalarConstruction("abc", {1, 9}, ScoringMode::MaskedSlot), TemplateError);
  CHECK_THROWS_AS(ScalarConstruction("x but not y z", {10, 11}, ScoringMode::Continuation), TemplateError);
  const ScalarConstruction ok("x but not y it", {10, 11}, ScoringMode::Continuation);
  CHECK(ok.slot_text() == "y");
}

TEST_CASE("stimulus records are matched to items", "[templates]") {
  testing::TempDir dir;
  testing::write_text(dir / "s.jsonl",
                      R"({"weak":"big","strong":"enormous","pos":"adj","subject_np":"The elephant"})" "\n"
                      R"({"weak":"big","strong":"enormous","pos":"adj","subject_np":"The house"})" "\n"
                      R"({"weak":"like","strong":"love","pos":"verb","subject_np":"She","verb_past":"liked","trailing_it":true})" "\n");
  const auto recs = load_stimuli(dir / "s.jsonl");
  REQUIRE(recs.size() == 3);
  StimulusItem item;
  item.scale = make_scale("big", "enormous", Pos::Adj);
  item.context = "The house is big.";
  const auto* f = find_frame(recs, item);
  REQUIRE(f);
  CHECK(f->subject_np == "The house");
  item.context = "Unrelated.";
  CHECK(find_frame(recs, item) == nullptr);
  item.scale = make_scale("like", "love", Pos::Verb);
  const auto* v = find_frame(recs, item);
  REQUIRE(v);
  CHECK(v->trailing_it);
  CHECK(v->weak_past == "liked");
}
