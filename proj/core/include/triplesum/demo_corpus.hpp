#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "triplesum/corpus.hpp"

namespace triplesum {

// Templated synthetic biographies for offline runs.
struct DemoCorpus {
  std::vector<Triple> triples;
  std::vector<AnnotatedSummary> summaries;
  std::vector<std::pair<std::string, std::string>> types;
  std::vector<std::pair<std::string, std::string>> genders;
};

// Throws DataError for size < 10. The per-article triple counts after the
// pipeline are 7 to 10 in fixed proportions so that all of them fall inside
// the triple-count bounds of the emitted set.
DemoCorpus make_demo_corpus(std::uint64_t seed, std::size_t size);

// triples.nt, summaries.jsonl, types.tsv and genders.tsv under `dir`.
void write_demo_corpus(const DemoCorpus& corpus, const std::filesystem::path& dir);

}  // namespace triplesum
