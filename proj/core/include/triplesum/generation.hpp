#pragma once

#include <span>
#include <string>
#include <vector>

#include "triplesum/beam_search.hpp"
#include "triplesum/corpus.hpp"
#include "triplesum/model.hpp"
#include "triplesum/vocabulary.hpp"

namespace triplesum {

// Beam-search scorer over a trained model and one encoded triple set, with
// batch normalization in inference mode.
class ModelScorer {
 public:
  struct State {
    std::vector<nn::RowVector> h;
    std::vector<nn::RowVector> c;
    std::size_t step = 0;
  };

  ModelScorer(const Triples2Seq& model, std::span<const EncodedTriple> triples);

  State initial();
  std::pair<std::vector<State>, nn::Matrix> advance(std::span<const State> states, std::span<const int> tokens);

 private:
  const Triples2Seq& model_;
  std::vector<EncodedTriple> triples_;
};

struct PostprocessContext {
  std::span<const Triple> triples;  // pipeline-normalized, `<item>` substituted
  const SurfaceLexicon* lexicon = nullptr;
  std::string item_surface;
};

// Target tokens to surface words: `<item>` -> item surface, entity URIs ->
// most frequent surface, tuples -> their surface, placeholders -> the
// matching triple's entity surface (the k-th use of a placeholder takes the
// k-th matching triple, wrapping) or else their instance-type token.
// Control tokens are dropped; anything else passes through.
std::vector<std::string> postprocess_tokens(std::span<const std::string> tokens, const PostprocessContext& ctx);
std::string postprocess(std::span<const std::string> tokens, const PostprocessContext& ctx);

// Pipeline normalization of a raw triple set for a given main entity:
// filter, date encoding, numeric normalization, `<item>` substitution,
// dedup and instance types. Throws DataError when `main` never occurs.
std::vector<Triple> prepare_input_triples(std::span<const Triple> raw, std::string_view main,
                                          const InstanceTypeMap& types, const YearRange& years = {});

struct GenerationInput {
  std::string id;
  std::vector<Triple> triples;  // normalized
  std::string item_surface;
};

struct GeneratedSummary {
  std::size_t rank = 0;
  double log_prob = 0.0;
  bool length_capped = false;
  std::vector<std::string> tokens;  // raw target tokens, `<end>` excluded
  std::vector<std::string> words;   // post-processed
  std::string text;
};

// Checks the triple-count bounds, encodes, searches and post-processes.
// Throws DataError for an empty or out-of-bounds triple set.
std::vector<GeneratedSummary> generate(const Triples2Seq& model, const Vocabulary& source, const Vocabulary& target,
                                       const CorpusStats& bounds, const GenerationInput& input,
                                       const SurfaceLexicon& lexicon, const BeamConfig& beam);

}  // namespace triplesum
