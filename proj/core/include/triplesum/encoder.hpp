#pragma once

#include <span>
#include <vector>

#include "triplesum/model_config.hpp"
#include "triplesum/nn/tape.hpp"
#include "triplesum/vocabulary.hpp"

namespace triplesum {

// Feed-forward triple encoder: shared biased embedding of subject,
// predicate and object, an unbiased map of their concatenation, then a
// biased map of the zero-padded concatenation of all triple vectors.
class TripleEncoder {
 public:
  explicit TripleEncoder(const ModelConfig& cfg);

  // One row per triple: ReLU(BN(W [e_s; e_p; e_o])).
  nn::Var encode_triples(nn::Tape& tape, std::span<const EncodedTriple> triples, bool training) const;

  // Row b of the result is BN(W [h_b1; ...; h_bk; 0; ...] + b), where the
  // rows of `h` belonging to example b are those with example_of == b, in
  // order.
  nn::Var aggregate(nn::Tape& tape, nn::Var h, std::span<const int> example_of, std::size_t batch,
                    bool training) const;

  // Decoder initial hidden state h_0 for each example, [batch x m].
  nn::Var forward(nn::Tape& tape, std::span<const std::vector<EncodedTriple>> batch, bool training) const;

  void collect(std::vector<nn::Parameter*>& params, std::vector<nn::BatchNorm*>& norms);

  nn::Parameter embedding;       // |N| x m, W_{x->h~}
  nn::Parameter embedding_bias;  // 1 x m
  nn::Parameter triple_map;      // m x 3m, W_{h~->h}
  nn::Parameter aggregate_map;   // m x (E_max m), W_{hF->h0}
  nn::Parameter aggregate_bias;  // 1 x m
  nn::BatchNorm triple_norm;
  nn::BatchNorm aggregate_norm;

 private:
  nn::Var normalize(nn::Tape& tape, nn::Var x, const nn::BatchNorm& bn, bool training) const;
  ModelConfig cfg_;
};

}  // namespace triplesum
