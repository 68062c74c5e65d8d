#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "triplesum/demo_corpus.hpp"
#include "triplesum/error.hpp"

using namespace triplesum;

namespace {

CorpusBuild build(const DemoCorpus& demo, std::size_t target_min_count = 1) {
  InstanceTypeMap types;
  for (const auto& [uri, type] : demo.types) types.insert(uri, type);
  EntityLexicon genders;
  for (const auto& [uri, g] : demo.genders) genders.insert(uri, g);
  const auto articles = assemble_articles(demo.triples, demo.summaries);
  PipelineConfig cfg;
  cfg.target_min_count = target_min_count;
  return build_corpus(articles, types, &genders, cfg);
}

}  // namespace

TEST_CASE("demo corpus keeps every article inside the triple-count bounds") {
  for (std::size_t size : {10u, 11u, 37u, 100u, 200u, 500u}) {
    for (std::uint64_t seed : {1u, 2u}) {
      const DemoCorpus demo = make_demo_corpus(seed, size);
      CHECK(demo.summaries.size() == size);
      const CorpusBuild b = build(demo);
      INFO("size ", size, " seed ", seed, " bounds [", b.stats.lower_bound(), ", ", b.stats.upper_bound(), "]");
      CHECK(b.examples.size() == size);
      CHECK(b.exclusions.empty());
      for (const auto& e : b.examples) {
        CHECK(e.triples.size() >= 7);
        CHECK(e.triples.size() <= 10);
        CHECK(e.triples.size() >= b.stats.lower_bound());
        CHECK(e.triples.size() <= b.stats.upper_bound());
      }
    }
  }
}

TEST_CASE("demo corpus is deterministic per seed") {
  const DemoCorpus a = make_demo_corpus(5, 40), b = make_demo_corpus(5, 40), c = make_demo_corpus(6, 40);
  REQUIRE(a.triples.size() == b.triples.size());
  for (std::size_t i = 0; i < a.triples.size(); ++i) CHECK(format_triple_line(a.triples[i]) == format_triple_line(b.triples[i]));
  CHECK(a.types == b.types);
  CHECK(a.genders == b.genders);
  bool differs = a.triples.size() != c.triples.size();
  for (std::size_t i = 0; !differs && i < a.triples.size(); ++i)
    differs = format_triple_line(a.triples[i]) != format_triple_line(c.triples[i]);
  CHECK(differs);
  CHECK_THROWS_AS(make_demo_corpus(1, 9), DataError);
}

TEST_CASE("demo corpus files read back through the pipeline") {
  const auto dir = std::filesystem::temp_directory_path() / "triplesum_demo_test";
  std::filesystem::remove_all(dir);
  const DemoCorpus demo = make_demo_corpus(3, 25);
  write_demo_corpus(demo, dir);
  for (const char* f : {"triples.nt", "summaries.jsonl", "types.tsv", "genders.tsv"})
    CHECK(std::filesystem::exists(dir / f));
  std::ifstream nt(dir / "triples.nt");
  CHECK(read_triples(nt).size() == demo.triples.size());
  std::ifstream js(dir / "summaries.jsonl");
  CHECK(read_summaries_jsonl(js).size() == 25);
  std::filesystem::remove_all(dir);
}
