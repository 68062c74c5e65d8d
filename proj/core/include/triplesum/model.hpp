#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "triplesum/decoder.hpp"
#include "triplesum/encoder.hpp"
#include "triplesum/model_config.hpp"
#include "triplesum/nn/tape.hpp"
#include "triplesum/vocabulary.hpp"

namespace triplesum {

// Model-ready example: encoded triples and `<start> ... <end>` target ids.
struct EncodedExample {
  std::vector<EncodedTriple> triples;
  std::vector<int> tokens;
};

EncodedExample encode_example(const AlignedExample& e, const Vocabulary& source, const Vocabulary& target,
                              std::size_t max_timestep = 0);

class Triples2Seq {
 public:
  explicit Triples2Seq(const ModelConfig& cfg);
  Triples2Seq(const Triples2Seq&) = delete;
  Triples2Seq& operator=(const Triples2Seq&) = delete;

  const ModelConfig& config() const { return cfg_; }

  // Trainable parameters in a fixed order (batch-norm scale/shift included).
  std::vector<nn::Parameter*> parameters();
  std::vector<nn::BatchNorm*> batch_norms();

  // Weights uniform in [low, high); batch-norm scale 1, shift 0, running
  // statistics reset.
  void initialize(std::uint64_t seed, double low = -0.001, double high = 0.001);

  // Teacher-forced cost: -sum_t ln p(y_t | y_<t, F) per example, summed over
  // non-pad targets and averaged over the batch. Result is 1 x 1.
  nn::Var batch_loss(nn::Tape& tape, std::span<const EncodedExample* const> batch, bool training) const;

  // Total -ln p of all non-pad targets and their count, inference mode.
  std::pair<double, std::size_t> sequence_nll(std::span<const EncodedExample* const> batch) const;

  TripleEncoder encoder;
  Decoder decoder;

 private:
  nn::Var weighted_loss(nn::Tape& tape, std::span<const EncodedExample* const> batch, bool training,
                        double weight) const;
  ModelConfig cfg_;
};

}  // namespace triplesum
