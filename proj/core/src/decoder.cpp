#include "triplesum/decoder.hpp"

#include <algorithm>
#include <array>

#include "triplesum/error.hpp"
#include "triplesum/special_tokens.hpp"

namespace triplesum {

namespace {
using nn::Var;
using E = Eigen::Index;
}  // namespace

Decoder::Decoder(const ModelConfig& cfg)
    : embedding("decoder.embedding", static_cast<E>(cfg.target_size), static_cast<E>(cfg.m)),
      output("decoder.output", static_cast<E>(cfg.target_size), static_cast<E>(cfg.m)),
      output_bias("decoder.output_bias", 1, static_cast<E>(cfg.target_size)),
      cfg_(cfg) {
  if (cfg.m == 0 || cfg.layers == 0 || cfg.target_size == 0) throw DataError("decoder needs m, L and |X| > 0");
  const E m = static_cast<E>(cfg.m);
  const E gates = cfg.cell == CellKind::lstm ? 4 * m : 2 * m;
  const E steps = static_cast<E>(std::max<std::size_t>(cfg.norm_steps, 1));
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string prefix = "decoder.layer" + std::to_string(l) + ".";
    DecoderLayer layer{nn::Parameter(prefix + "gates", gates, 2 * m), nn::Parameter(prefix + "gates_bias", 1, gates),
                       nn::BatchNorm(prefix + "gates_norm", gates, steps), {}, {}, {}};
    if (cfg.cell == CellKind::gru) {
      layer.input_map = nn::Parameter(prefix + "input_map", m, m);
      layer.hidden_map = nn::Parameter(prefix + "hidden_map", m, m);
      layer.candidate_norm = nn::BatchNorm(prefix + "candidate_norm", m, steps);
    }
    layers.push_back(std::move(layer));
  }
}

Var Decoder::normalize(nn::Tape& tape, Var x, const nn::BatchNorm& bn, bool training,
                       std::span<const unsigned char> active, std::size_t t) const {
  return cfg_.batch_norm ? tape.batch_norm(x, bn, training, active, static_cast<E>(t)) : x;
}

DecoderVars Decoder::initial(nn::Tape& tape, Var h0) const {
  const E rows = tape.value(h0).rows();
  const E m = static_cast<E>(cfg_.m);
  if (tape.value(h0).cols() != m) throw ShapeError("decoder initial state has wrong width");
  DecoderVars s;
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    s.h.push_back(l == 0 ? h0 : tape.constant(nn::Matrix::Zero(rows, m)));
    if (cfg_.cell == CellKind::lstm) s.c.push_back(tape.constant(nn::Matrix::Zero(rows, m)));
  }
  return s;
}

Var Decoder::lstm_layer(nn::Tape& tape, const DecoderLayer& layer, Var below, Var h_prev, Var c_prev, Var& c_out,
                        bool training, std::span<const unsigned char> active, std::size_t t) const {
  const E m = static_cast<E>(cfg_.m);
  const std::array<Var, 2> in{below, h_prev};
  Var pre = normalize(tape, tape.affine(tape.concat_cols(in), layer.gates, &layer.gates_bias), layer.gates_norm,
                      training, active, t);
  Var gates = tape.sigmoid(tape.slice_cols(pre, 0, 3 * m));
  Var in_gate = tape.slice_cols(gates, 0, m);
  Var forget = tape.slice_cols(gates, m, m);
  Var out_gate = tape.slice_cols(gates, 2 * m, m);
  Var cand_pre = tape.slice_cols(pre, 3 * m, m);
  Var cand = cfg_.sigmoid_candidate ? tape.sigmoid(cand_pre) : tape.tanh(cand_pre);
  c_out = tape.add(tape.mul(forget, c_prev), tape.mul(in_gate, cand));
  return tape.mul(out_gate, tape.tanh(c_out));
}

Var Decoder::gru_layer(nn::Tape& tape, const DecoderLayer& layer, Var below, Var h_prev, bool training,
                       std::span<const unsigned char> active, std::size_t t) const {
  const E m = static_cast<E>(cfg_.m);
  const std::array<Var, 2> in{below, h_prev};
  Var gates = tape.sigmoid(
      normalize(tape, tape.affine(tape.concat_cols(in), layer.gates, &layer.gates_bias), layer.gates_norm, training, active, t));
  Var reset = tape.slice_cols(gates, 0, m);
  Var update = tape.slice_cols(gates, m, m);
  Var cand_pre = tape.add(tape.affine(below, layer.input_map), tape.affine(tape.mul(reset, h_prev), layer.hidden_map));
  Var cand = tape.tanh(normalize(tape, cand_pre, layer.candidate_norm, training, active, t));
  return tape.add(tape.mul(tape.one_minus(update), h_prev), tape.mul(update, cand));
}

DecoderVars Decoder::step(nn::Tape& tape, const DecoderVars& prev, std::span<const int> tokens, bool training,
                          std::size_t t) const {
  if (prev.h.size() != cfg_.layers) throw ShapeError("decoder state has wrong layer count");
  for (int t : tokens)
    if (t < 0 || static_cast<std::size_t>(t) >= cfg_.target_size)
      throw DataError("decoder input token " + std::to_string(t) + " outside |X| = " + std::to_string(cfg_.target_size));
  // Rows fed `<pad>` have finished and stay out of the batch statistics.
  std::vector<unsigned char> active(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) active[i] = tokens[i] != kPadIndex;
  Var below = tape.lookup(embedding, tokens);
  DecoderVars next;
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    if (cfg_.cell == CellKind::lstm) {
      Var c;
      below = lstm_layer(tape, layers[l], below, prev.h[l], prev.c[l], c, training, active, t);
      next.c.push_back(c);
    } else {
      below = gru_layer(tape, layers[l], below, prev.h[l], training, active, t);
    }
    next.h.push_back(below);
  }
  return next;
}

Var Decoder::logits(nn::Tape& tape, Var top) const { return tape.affine(top, output, &output_bias); }

void Decoder::collect(std::vector<nn::Parameter*>& params, std::vector<nn::BatchNorm*>& norms) {
  params.push_back(&embedding);
  for (auto& layer : layers) {
    params.push_back(&layer.gates);
    params.push_back(&layer.gates_bias);
    if (cfg_.cell == CellKind::gru) {
      params.push_back(&layer.input_map);
      params.push_back(&layer.hidden_map);
    }
    if (cfg_.batch_norm) {
      params.push_back(&layer.gates_norm.scale);
      params.push_back(&layer.gates_norm.shift);
      norms.push_back(&layer.gates_norm);
      if (cfg_.cell == CellKind::gru) {
        params.push_back(&layer.candidate_norm.scale);
        params.push_back(&layer.candidate_norm.shift);
        norms.push_back(&layer.candidate_norm);
      }
    }
  }
  params.push_back(&output);
  params.push_back(&output_bias);
}

}  // namespace triplesum
