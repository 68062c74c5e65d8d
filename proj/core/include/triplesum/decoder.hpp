#pragma once

#include <span>
#include <vector>

#include "triplesum/model_config.hpp"
#include "triplesum/nn/tape.hpp"

namespace triplesum {

struct DecoderLayer {
  nn::Parameter gates;       // LSTM 4m x 2m (in, forget, out, candidate); GRU 2m x 2m (reset, update)
  nn::Parameter gates_bias;  // 1 x 4m / 1 x 2m
  nn::BatchNorm gates_norm;
  nn::Parameter input_map;   // GRU candidate W_in, m x m
  nn::Parameter hidden_map;  // GRU candidate W_{h->h}, m x m
  nn::BatchNorm candidate_norm;
};

// Per-layer recurrent state on a tape. `c` is empty for GRU.
struct DecoderVars {
  std::vector<nn::Var> h;
  std::vector<nn::Var> c;
};

class Decoder {
 public:
  explicit Decoder(const ModelConfig& cfg);

  // h^1 = h0, deeper layers and all cell states start at zero.
  DecoderVars initial(nn::Tape& tape, nn::Var h0) const;

  // `t` is the time step, which selects the batch-norm running statistics.
  DecoderVars step(nn::Tape& tape, const DecoderVars& prev, std::span<const int> tokens, bool training,
                   std::size_t t) const;

  // W_y h + b_y, [batch x |X|].
  nn::Var logits(nn::Tape& tape, nn::Var top) const;

  void collect(std::vector<nn::Parameter*>& params, std::vector<nn::BatchNorm*>& norms);

  nn::Parameter embedding;  // |X| x m, W_{x->h}
  std::vector<DecoderLayer> layers;
  nn::Parameter output;       // |X| x m, W_y
  nn::Parameter output_bias;  // 1 x |X|

 private:
  nn::Var normalize(nn::Tape& tape, nn::Var x, const nn::BatchNorm& bn, bool training,
                    std::span<const unsigned char> active, std::size_t t) const;
  nn::Var lstm_layer(nn::Tape& tape, const DecoderLayer& layer, nn::Var below, nn::Var h_prev, nn::Var c_prev,
                     nn::Var& c_out, bool training, std::span<const unsigned char> active, std::size_t t) const;
  nn::Var gru_layer(nn::Tape& tape, const DecoderLayer& layer, nn::Var below, nn::Var h_prev, bool training,
                    std::span<const unsigned char> active, std::size_t t) const;
  ModelConfig cfg_;
};

}  // namespace triplesum
