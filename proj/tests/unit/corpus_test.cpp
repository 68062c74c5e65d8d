#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "triplesum/corpus.hpp"
#include "triplesum/error.hpp"
#include "triplesum/triple.hpp"

using namespace triplesum;

namespace {

std::vector<std::string> texts(const std::vector<SummaryToken>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

Triple literal(std::string s, std::string p, std::string o, ObjectKind k) { return {s, p, o, k, {}}; }

}  // namespace

TEST_CASE("textual literals are dropped, dates kept") {
  std::vector<Triple> in{literal("X", "dbo:name", "John Smith", ObjectKind::other_literal)};
  CHECK(filter_triples(in).empty());
  CHECK(filter_triples(std::vector<Triple>{}).empty());
  in = {literal("X", "dbo:birthDate", "1970-04-29", ObjectKind::date),
        literal("X", "dbo:motto", "ad astra", ObjectKind::other_literal)};
  const auto out = filter_triples(in);
  REQUIRE(out.size() == 1);
  CHECK(out[0].predicate == "dbo:birthDate");
}

TEST_CASE("date encoding splits month and year") {
  const auto agassi =
      encode_date_triple(literal("dbr:Andre_Agassi", "dbo:birthDate", "1970-04-29", ObjectKind::date));
  REQUIRE(agassi.size() == 2);
  CHECK(agassi[0].subject == "dbr:Andre_Agassi");
  CHECK(agassi[0].predicate == "dbo:birthDateMonth");
  CHECK(agassi[0].object == "4");
  CHECK(agassi[1].predicate == "dbo:birthDateYear");
  CHECK(agassi[1].object == "<year>");

  const auto jan = encode_date_triple(literal("X", "p", "2000-01-01", ObjectKind::date));
  CHECK(jan[0].predicate == "pMonth");
  CHECK(jan[0].object == "1");
  CHECK(jan[1].predicate == "pYear");
  const auto dec = encode_date_triple(literal("X", "p", "1999-12-31", ObjectKind::date));
  CHECK(dec[0].object == "12");
  CHECK(dec[1].object == "<year>");

  CHECK_THROWS_AS(encode_date_triple(literal("X", "p", "1999-13-01", ObjectKind::date)), DataError);
  CHECK_THROWS_AS(encode_date_triple(literal("X", "p", "yesterday", ObjectKind::date)), DataError);
}

TEST_CASE("numerals normalize to <year> or 0") {
  CHECK(normalize_numeric("1993") == "<year>");
  CHECK(normalize_numeric("0") == "0");
  CHECK(normalize_numeric("42") == "0");
  CHECK(normalize_numeric("2100") == "<year>");
  CHECK(normalize_numeric("2101") == "0");
}

TEST_CASE("main entity becomes <item> in either position") {
  std::vector<Triple> t{fixtures::entity_triple("dbr:Papa_Roach", "dbo:genre", "dbr:Hard_rock")};
  auto out = substitute_item(t, "dbr:Papa_Roach");
  CHECK(out[0].subject == "<item>");
  CHECK(out[0].object == "dbr:Hard_rock");

  t = {fixtures::entity_triple("dbr:Infest_(album)", "dbo:artist", "dbr:Papa_Roach")};
  out = substitute_item(t, "dbr:Papa_Roach");
  CHECK(out[0].subject == "dbr:Infest_(album)");
  CHECK(out[0].object == "<item>");

  CHECK_THROWS_AS(substitute_item(t, "dbr:Nobody"), DataError);
}

TEST_CASE("duplicate triples collapse") {
  std::vector<Triple> t{literal("<item>", "dbp:proyears", "<year>", ObjectKind::year),
                        literal("<item>", "dbp:proyears", "<year>", ObjectKind::year)};
  CHECK(dedup_triples(t).size() == 1);
  CHECK(dedup_triples(std::vector<Triple>{}).empty());
  t = {fixtures::entity_triple("a", "p", "b"), fixtures::entity_triple("a", "p", "c"),
       fixtures::entity_triple("a", "q", "b")};
  CHECK(dedup_triples(t).size() == 3);
}

TEST_CASE("triple-count bounds") {
  CorpusStats s;
  s.e_min = 1;
  s.e_mean = 10;
  s.e_std = 4;
  CHECK(bound_triple_set(std::vector<Triple>{}, s).decision == BoundDecision::reject);

  s.e_mean = 10.68;
  s.e_std = 7.0;
  std::vector<Triple> thirty(30, fixtures::entity_triple("<item>", "p", "o"));
  for (int i = 0; i < 30; ++i) thirty[i].object = "o" + std::to_string(i);
  auto r = bound_triple_set(thirty, s);
  CHECK(r.decision == BoundDecision::trim);
  REQUIRE(r.triples.size() == 21);  // floor(10.68 + 10.5)
  CHECK(r.triples.back().object == "o20");

  s.e_min = 2;
  s.e_mean = 10;
  s.e_std = 4;
  std::vector<Triple> eight(thirty.begin(), thirty.begin() + 8);
  r = bound_triple_set(eight, s);
  CHECK(r.decision == BoundDecision::accept);
  CHECK(r.triples.size() == 8);
  CHECK(s.lower_bound() == 3);
  CHECK(s.upper_bound() == 16);
}

TEST_CASE("summaries keep their first two sentences") {
  AnnotatedSummary s;
  s.sentences = {{"A", "."}, {"B", "."}, {"C", "."}};
  s.annotations = {{2, 0, 1, "dbr:C", "C"}, {0, 0, 1, "dbr:A", "A"}};
  auto t = truncate_summary(s);
  CHECK(t.sentences.size() == 2);
  CHECK(t.annotations.size() == 1);
  s.sentences.resize(1);
  s.annotations.resize(1);
  s.annotations[0].sentence = 0;
  CHECK(truncate_summary(s).sentences == s.sentences);
  s.sentences.clear();
  CHECK_THROWS_AS(truncate_summary(s), DataError);
}

TEST_CASE("rare entities become property-type placeholders") {
  InstanceTypeMap types;
  types.insert("dbr:The_Adventures_of_Roderick_Random", "dbo:Book");
  types.insert("dbr:Morpeth,_Northumberland", "dbo:Settlement");
  const std::unordered_set<std::string> vocab{"wrote", "was", "born", "in", "."};

  // Rare subject.
  AnnotatedSummary s;
  s.main_entity = "<item>";
  s.sentences = {{"He", "wrote", "Roderick", "Random", "."}};
  s.annotations = {{0, 2, 4, "dbr:The_Adventures_of_Roderick_Random", "Roderick Random"}};
  std::vector<Triple> t{fixtures::entity_triple("dbr:The_Adventures_of_Roderick_Random", "dbo:author", "<item>")};
  auto out = assign_placeholders(s, t, types, vocab);
  CHECK(out[3].text == "dbo:author__subj__dbo:Book");
  CHECK(out[3].kind == TokenKind::placeholder);
  CHECK(out[1].text == "<rare>");

  // Rare object.
  s.sentences = {{"He", "was", "born", "in", "Morpeth", "."}};
  s.annotations = {{0, 4, 5, "dbr:Morpeth,_Northumberland", "Morpeth"}};
  t = {fixtures::entity_triple("<item>", "dbo:birthPlace", "dbr:Morpeth,_Northumberland")};
  out = assign_placeholders(s, t, types, vocab);
  CHECK(out[5].text == "dbo:birthPlace__obj__dbo:Settlement");

  // Matched but untyped.
  s.annotations = {{0, 4, 5, "dbr:Somewhere", "Morpeth"}};
  t = {fixtures::entity_triple("<item>", "dbo:birthPlace", "dbr:Somewhere")};
  out = assign_placeholders(s, t, types, vocab);
  CHECK(out[5].text == "dbo:birthPlace__obj__<unk>");

  // Unmatched and untyped.
  t.clear();
  out = assign_placeholders(s, t, types, vocab);
  CHECK(out[5].text == "<unk>");
  CHECK(out[5].kind == TokenKind::instance_type);
}

TEST_CASE("placeholder grammar round-trips") {
  const auto p = parse_placeholder("dbo:author__subj__dbo:Book");
  REQUIRE(p);
  CHECK(p->predicate == "dbo:author");
  CHECK(p->role == PlaceholderRole::subject);
  CHECK(p->type == "dbo:Book");
  CHECK(make_placeholder(*p) == "dbo:author__subj__dbo:Book");
  CHECK_FALSE(parse_placeholder("dbr:Hard_rock"));
  CHECK(classify_target_token("(dbr:Rock_music, rock)") == TokenKind::surface_tuple);
  CHECK(classify_target_token("band") == TokenKind::word);
}

TEST_CASE("in-vocabulary entities become surface tuples") {
  std::vector<SummaryToken> tokens{{TokenKind::entity_uri, "dbr:United_States", "dbr:United_States", "American"},
                                   {TokenKind::word, "band", {}, {}},
                                   {TokenKind::placeholder, "dbo:hometown__obj__dbo:City", "dbr:V", "V"}};
  const auto out = make_surface_tuples(tokens);
  CHECK(out[0].text == "(dbr:United_States, American)");
  CHECK(out[0].kind == TokenKind::surface_tuple);
  CHECK(out[1].text == "band");
  CHECK(out[2].text == "dbo:hometown__obj__dbo:City");
}

TEST_CASE("gender augmentation") {
  EntityLexicon genders;
  genders.insert("dbr:Ada", "female");
  std::vector<Triple> t{fixtures::entity_triple("<item>", "dbo:field", "dbr:Maths")};
  auto out = augment_gender(t, "dbr:Ada", genders);
  REQUIRE(out.size() == 2);
  CHECK(out[1].predicate == "foaf:gender");
  CHECK(out[1].object == "female");
  CHECK(augment_gender(t, "dbr:Bob", genders).size() == 1);
  CHECK(augment_gender(out, "dbr:Ada", genders).size() == 2);
}

TEST_CASE("Papa Roach record in both target modes") {
  const auto pr = fixtures::papa_roach();
  PipelineConfig cfg;
  cfg.fixed_in_vocab = pr.in_vocab;
  auto build = build_corpus(std::vector<Article>{pr.article}, pr.types, nullptr, cfg);
  REQUIRE(build.examples.size() == 1);
  CHECK(texts(build.examples[0].summary) == pr.uri_tokens);
  CHECK(build.examples[0].item_surface == "Papa Roach");

  cfg.mode = SummaryMode::surface_form_tuple;
  build = build_corpus(std::vector<Article>{pr.article}, pr.types, nullptr, cfg);
  REQUIRE(build.examples.size() == 1);
  CHECK(texts(build.examples[0].summary) == pr.tuple_tokens);

  const auto& triples = build.examples[0].triples;
  CHECK(std::any_of(triples.begin(), triples.end(), [](const Triple& t) {
    return t.subject == "dbr:Infest_(album)" && t.object == "<item>" && t.type == "dbo:Album";
  }));
}

TEST_CASE("empty article stream gives an empty corpus") {
  const auto build = build_corpus(std::vector<Article>{}, InstanceTypeMap{}, nullptr, PipelineConfig{});
  CHECK(build.examples.empty());
  CHECK(build.stats.articles == 0);
  CHECK(build.stats.e_mean == 0.0);
}

TEST_CASE("N-Triples parsing") {
  const auto t = parse_triple_line(
      "<http://dbpedia.org/resource/Andre_Agassi> <http://dbpedia.org/ontology/birthDate> "
      "\"1970-04-29\"^^<http://www.w3.org/2001/XMLSchema#date> .");
  REQUIRE(t);
  CHECK(t->subject == "dbr:Andre_Agassi");
  CHECK(t->predicate == "dbo:birthDate");
  CHECK(t->object_kind == ObjectKind::date);
  CHECK_FALSE(parse_triple_line("# comment"));
  CHECK_FALSE(parse_triple_line("   "));
  CHECK_THROWS_AS(parse_triple_line("<a> <b> ."), DataError);
  std::istringstream in(format_triple_line(*t) + "\n");
  const auto back = read_triples(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == *t);
}

TEST_CASE("annotation validation") {
  AnnotatedSummary s;
  s.sentences = {{"a", "b", "c"}};
  s.annotations = {{0, 0, 2, "x", "a b"}, {0, 1, 3, "y", "b c"}};
  CHECK_THROWS_AS(validate_annotations(s), DataError);
  s.annotations = {{0, 2, 4, "x", "c"}};
  CHECK_THROWS_AS(validate_annotations(s), DataError);
  s.annotations = {{0, 0, 1, "x", "a"}};
  CHECK_NOTHROW(validate_annotations(s));
}

TEST_CASE("corpus JSON Lines round trip") {
  const auto pr = fixtures::papa_roach();
  PipelineConfig cfg;
  cfg.fixed_in_vocab = pr.in_vocab;
  cfg.mode = SummaryMode::surface_form_tuple;
  const auto build = build_corpus(std::vector<Article>{pr.article}, pr.types, nullptr, cfg);
  std::stringstream io;
  write_example_jsonl(io, build.examples[0]);
  const auto back = read_examples_jsonl(io);
  REQUIRE(back.size() == 1);
  CHECK(back[0].summary == build.examples[0].summary);
  CHECK(back[0].triples == build.examples[0].triples);
  CHECK(back[0].reference == build.examples[0].reference);
}
