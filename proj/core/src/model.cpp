#include "triplesum/model.hpp"

#include <algorithm>

#include "triplesum/error.hpp"
#include "triplesum/nn/optim.hpp"

namespace triplesum {

EncodedExample encode_example(const AlignedExample& e, const Vocabulary& source, const Vocabulary& target,
                              std::size_t max_timestep) {
  EncodedExample out;
  out.triples = encode_triples(source, e.triples);
  out.tokens = encode_summary(target, e.summary);
  if (max_timestep && out.tokens.size() > max_timestep + 1) out.tokens.resize(max_timestep + 1);
  return out;
}

Triples2Seq::Triples2Seq(const ModelConfig& cfg) : encoder(cfg), decoder(cfg), cfg_(cfg) {}

std::vector<nn::Parameter*> Triples2Seq::parameters() {
  std::vector<nn::Parameter*> params;
  std::vector<nn::BatchNorm*> norms;
  encoder.collect(params, norms);
  decoder.collect(params, norms);
  return params;
}

std::vector<nn::BatchNorm*> Triples2Seq::batch_norms() {
  std::vector<nn::Parameter*> params;
  std::vector<nn::BatchNorm*> norms;
  encoder.collect(params, norms);
  decoder.collect(params, norms);
  return norms;
}

void Triples2Seq::initialize(std::uint64_t seed, double low, double high) {
  std::vector<nn::Parameter*> weights;
  auto norms = batch_norms();
  for (nn::Parameter* p : parameters()) {
    const bool is_norm = std::any_of(norms.begin(), norms.end(),
                                     [&](const nn::BatchNorm* bn) { return p == &bn->scale || p == &bn->shift; });
    if (!is_norm) weights.push_back(p);
  }
  nn::init_uniform(weights, seed, low, high);
  for (nn::BatchNorm* bn : norms) {
    bn->scale.value.setOnes();
    bn->shift.value.setZero();
    bn->running_mean.setZero();
    bn->running_var.setOnes();
  }
  for (nn::Parameter* p : parameters()) {
    p->zero_grad();
    p->accumulator.setZero(p->value.rows(), p->value.cols());
  }
}

nn::Var Triples2Seq::batch_loss(nn::Tape& tape, std::span<const EncodedExample* const> batch, bool training) const {
  if (batch.empty()) throw DataError("empty batch");
  return weighted_loss(tape, batch, training, 1.0 / static_cast<double>(batch.size()));
}

nn::Var Triples2Seq::weighted_loss(nn::Tape& tape, std::span<const EncodedExample* const> batch, bool training,
                                   double weight) const {
  std::vector<std::vector<EncodedTriple>> triples;
  std::size_t longest = 0;
  for (const EncodedExample* e : batch) {
    if (e->tokens.size() < 2) throw DataError("target sequence shorter than <start> <end>");
    triples.push_back(e->triples);
    longest = std::max(longest, e->tokens.size());
  }
  nn::Var h0 = encoder.forward(tape, triples, training);
  DecoderVars state = decoder.initial(tape, h0);
  nn::Var total = tape.constant(nn::Matrix::Zero(1, 1));
  std::vector<int> input(batch.size()), target(batch.size());
  for (std::size_t t = 0; t + 1 < longest; ++t) {
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto& tok = batch[b]->tokens;
      input[b] = t < tok.size() ? tok[t] : kPadIndex;
      target[b] = t + 1 < tok.size() ? tok[t + 1] : kPadIndex;
    }
    state = decoder.step(tape, state, input, training, t);
    nn::Var logits = decoder.logits(tape, state.h.back());
    total = tape.add(total, tape.masked_nll(logits, target, kPadIndex, weight));
  }
  return total;
}

std::pair<double, std::size_t> Triples2Seq::sequence_nll(std::span<const EncodedExample* const> batch) const {
  if (batch.empty()) throw DataError("empty batch");
  nn::Tape tape(false);
  nn::Var loss = weighted_loss(tape, batch, false, 1.0);
  std::size_t count = 0;
  for (const EncodedExample* e : batch)
    for (std::size_t t = 1; t < e->tokens.size(); ++t) count += e->tokens[t] != kPadIndex;
  return {tape.value(loss)(0, 0), count};
}

}  // namespace triplesum
