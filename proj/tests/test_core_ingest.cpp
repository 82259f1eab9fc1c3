#include <sstream>

#include <catch_amalgamated.hpp>

#include "scalarexp/delimited.hpp"
#include "scalarexp/ingest.hpp"
#include "support.hpp"

using namespace scalarexp;
using testing::TempDir;
using testing::write_text;

TEST_CASE("make_scale validates members", "[core]") {
  const Scale s = make_scale("big", "enormous", Pos::Adj);
  CHECK(to_string(s) == "⟨big, enormous⟩");
  CHECK_THROWS_AS(make_scale("big", "big", Pos::Adj), Error);
  CHECK_THROWS_AS(make_scale("all of", "some", Pos::Quant), Error);
  CHECK_THROWS_AS(make_scale("", "some", Pos::Quant), Error);
}

TEST_CASE("parse_pos accepts common spellings", "[core]") {
  CHECK(parse_pos("ADJ") == Pos::Adj);
  CHECK(parse_pos("adjective") == Pos::Adj);
  CHECK(parse_pos("Adv") == Pos::Adv);
  CHECK(parse_pos("verb") == Pos::Verb);
  CHECK_THROWS_AS(parse_pos("noun"), Error);
}

TEST_CASE("delimited parser handles quotes, tabs, BOM and multiline fields", "[delimited]") {
  std::istringstream csv("\xEF\xBB\xBF" "a,b\n\"x, y\",\"say \"\"hi\"\"\"\n\"two\nlines\",3\n\n");
  const auto t = DelimitedTable::parse(csv);
  REQUIRE(t.row_count() == 2);
  CHECK(t.header().at(0) == "a");
  CHECK(t.cell(0, 0) == "x, y");
  CHECK(t.cell(0, 1) == "say \"hi\"");
  CHECK(t.cell(1, 0) == "two\nlines");

  std::istringstream tsv("w\ts\nbig, very\tenormous\n");
  const auto u = DelimitedTable::parse(tsv);
  CHECK(u.cell(0, 0) == "big, very");
  CHECK(u.column("s") == 1u);
  CHECK_FALSE(u.column("nope"));

  std::istringstream ragged("a,b\n1,2,3\n");
  CHECK_THROWS_AS(DelimitedTable::parse(ragged), Error);
}

TEST_CASE("find_word matches whole words only", "[ingest]") {
  CHECK(find_word("Some of the handsome men, some", "some") == std::vector<std::size_t>{0, 26});
  CHECK(find_word("awesome", "some").empty());
  CHECK(find_word("some-thing", "some").empty());
}

TEST_CASE("ronai-style per-response data is grouped and averaged", "[ingest]") {
  TempDir dir;
  write_text(dir / "r.csv",
             "Weak,Strong,POS,Context,Response\n"
             "big,enormous,adj,The elephant is big.,yes\n"
             "big,enormous,adj,The elephant is big.,no\n"
             "big,enormous,adj,The elephant is big.,Yes\n"
             "start,finish,verb,The runner started.,1\n"
             "in part,entirely,adv,It is in part done.,yes\n"
             "warm,hot,adj,The soup is warm.,maybe\n");
  LoadReport report;
  const auto items = load_dataset(make_dataset_spec(DatasetId::Ronai2022, dir / "r.csv"),
                                  LoadOptions{.enforce_expected_counts = false}, &report);
  REQUIRE(items.size() == 2);
  CHECK(items[0].scale == make_scale("big", "enormous", Pos::Adj));
  CHECK(items[0].human_si == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(items[1].scale.pos == Pos::Verb);
  CHECK(items[1].human_si == 1.0);
  CHECK(report.rows_read == 6);
  CHECK(report.multiword_scales_dropped == 1);
  CHECK(report.rows_rejected_bounds == 1);
  CHECK(report.scales == 2);
}

TEST_CASE("missing column and empty file are reported", "[ingest]") {
  TempDir dir;
  write_text(dir / "bad.csv", "Weak,Strong,POS,Response\nbig,huge,adj,yes\n");
  try {
    load_dataset(make_dataset_spec(DatasetId::Ronai2022, dir / "bad.csv"), {.enforce_expected_counts = false});
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find("missing column 'Context'") != std::string::npos);
  }
  write_text(dir / "empty.csv", "");
  CHECK_THROWS_WITH(load_dataset(make_dataset_spec(DatasetId::Ronai2022, dir / "empty.csv")),
                    Catch::Matchers::ContainsSubstring("no rows"));
}

TEST_CASE("expected counts are enforced unless disabled", "[ingest]") {
  TempDir dir;
  write_text(dir / "p.csv", "weak_term,strong_term,pos,sentence,si_rate\nbig,huge,adj,It is big.,0.4\n");
  const auto spec = make_dataset_spec(DatasetId::Pankratz2021, dir / "p.csv");
  CHECK_THROWS_WITH(load_dataset(spec), Catch::Matchers::ContainsSubstring("expected 50 items"));
  CHECK(load_dataset(spec, {.enforce_expected_counts = false}).size() == 1);
}

TEST_CASE("degen rows carry covariates and the templated offset", "[ingest]") {
  TempDir dir;
  write_text(dir / "d.csv",
             "Sentence,Rating,WeakOffset,Partitive,StrengthSome,Mention,Subjecthood,Modification,SentenceLength\n"
             "I like some country music.,5,,no,3.5,0,1,0,6\n"
             "I like some country music.,3,,no,3.5,0,1,0,6\n"
             "Some say some things.,4,9,yes,2,1,0,1,4\n"
             "Some say some things.,6,,yes,2,1,0,1,4\n"
             "No quantifier here.,4,,no,1,0,0,0,3\n"
             "Some of them left.,9,,yes,1,0,0,0,4\n");
  LoadReport report;
  const auto items = load_dataset(make_dataset_spec(DatasetId::Degen2015, dir / "d.csv"),
                                  {.enforce_expected_counts = false}, &report);
  REQUIRE(items.size() == 2);
  CHECK(items[0].human_si == 4.0);
  CHECK(items[0].weak_offset == 7u);
  CHECK(items[0].covariates.at("partitive") == 0.0);
  CHECK(items[0].covariates.at("sentence_length") == 6.0);
  CHECK(items[1].weak_offset == 9u);
  CHECK(items[1].covariates.at("partitive") == 1.0);
  CHECK(report.rows_rejected_missing_weak == 1);
  CHECK(report.rows_rejected_bounds == 1);

  write_text(dir / "bad_offset.csv", "Sentence,Rating,WeakOffset\nSome say some things.,4,3\n");
  CHECK_THROWS_AS(load_dataset(make_dataset_spec(DatasetId::Degen2015, dir / "bad_offset.csv"),
                               {.enforce_expected_counts = false}),
                  IngestError);
}

TEST_CASE("absent covariate columns leave covariates unset", "[ingest]") {
  TempDir dir;
  write_text(dir / "d.csv", "Sentence,Rating\nI ate some cake.,5\n");
  const auto items = load_dataset(make_dataset_spec(DatasetId::Degen2015, dir / "d.csv"),
                                  {.enforce_expected_counts = false});
  REQUIRE(items.size() == 1);
  CHECK(items[0].covariates.empty());
}

TEST_CASE("cloze join and duplicate detection", "[ingest]") {
  TempDir dir;
  write_text(dir / "c.csv", "Weak,Strong,Accessibility\nbig,enormous,0.25\nwarm,hot,0.9\n");
  const auto records = load_cloze(dir / "c.csv");
  std::vector<StimulusItem> items(2);
  items[0].scale = make_scale("big", "enormous", Pos::Adj);
  items[1].scale = make_scale("cool", "cold", Pos::Adj);
  const auto joined = join_cloze(items, records);
  CHECK(joined[0].cloze_accessibility == 0.25);
  CHECK_FALSE(joined[1].cloze_accessibility);

  write_text(dir / "dup.csv", "Weak,Strong,Accessibility\nbig,enormous,0.25\nbig,enormous,0.3\n");
  CHECK_THROWS_AS(join_cloze(items, load_cloze(dir / "dup.csv")), IngestError);
  write_text(dir / "range.csv", "Weak,Strong,Accessibility\nbig,enormous,1.5\n");
  CHECK_THROWS_AS(load_cloze(dir / "range.csv"), IngestError);
}

TEST_CASE("item store round-trips", "[ingest]") {
  StimulusItem a;
  a.dataset_id = DatasetId::Degen2015;
  a.scale = make_scale("some", "all", Pos::Quant);
  a.context = "I like some, \"quoted\" music.";
  a.human_si = 4.25;
  a.covariates = {{"partitive", 1.0}, {"sentence_length", 7.0}};
  a.weak_offset = 7;
  StimulusItem b;
  b.dataset_id = DatasetId::Ronai2022;
  b.scale = make_scale("big", "enormous", Pos::Adj);
  b.context = "The elephant is big.";
  b.human_si = 0.5;
  b.cloze_accessibility = 0.125;
  std::stringstream ss;
  write_item_store(ss, std::vector<StimulusItem>{a, b});
  const auto back = read_item_store(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == a);
  CHECK(back[1] == b);
}
