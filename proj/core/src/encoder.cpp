#include "triplesum/encoder.hpp"

#include <array>

#include "triplesum/error.hpp"

namespace triplesum {

namespace {
using nn::Var;
using E = Eigen::Index;
}  // namespace

std::string_view to_string(CellKind kind) { return kind == CellKind::lstm ? "lstm" : "gru"; }

CellKind cell_kind_from_string(std::string_view name) {
  if (name == "lstm") return CellKind::lstm;
  if (name == "gru") return CellKind::gru;
  throw DataError("unknown cell kind: " + std::string(name));
}

TripleEncoder::TripleEncoder(const ModelConfig& cfg)
    : embedding("encoder.embedding", static_cast<E>(cfg.source_size), static_cast<E>(cfg.m)),
      embedding_bias("encoder.embedding_bias", 1, static_cast<E>(cfg.m)),
      triple_map("encoder.triple_map", static_cast<E>(cfg.m), static_cast<E>(3 * cfg.m)),
      aggregate_map("encoder.aggregate_map", static_cast<E>(cfg.m), static_cast<E>(cfg.e_max * cfg.m)),
      aggregate_bias("encoder.aggregate_bias", 1, static_cast<E>(cfg.m)),
      triple_norm("encoder.triple_norm", static_cast<E>(cfg.m)),
      aggregate_norm("encoder.aggregate_norm", static_cast<E>(cfg.m)),
      cfg_(cfg) {
  if (cfg.m == 0 || cfg.e_max == 0 || cfg.source_size == 0) throw DataError("encoder needs m, E_max and |N| > 0");
}

Var TripleEncoder::normalize(nn::Tape& tape, Var x, const nn::BatchNorm& bn, bool training) const {
  return cfg_.batch_norm ? tape.batch_norm(x, bn, training) : x;
}

Var TripleEncoder::encode_triples(nn::Tape& tape, std::span<const EncodedTriple> triples, bool training) const {
  std::vector<int> s, p, o;
  for (const auto& t : triples) {
    s.push_back(t.subject);
    p.push_back(t.predicate);
    o.push_back(t.object);
  }
  const std::array<Var, 3> parts{tape.lookup(embedding, s, &embedding_bias), tape.lookup(embedding, p, &embedding_bias),
                                 tape.lookup(embedding, o, &embedding_bias)};
  Var joined = tape.concat_cols(parts);
  return tape.relu(normalize(tape, tape.affine(joined, triple_map), triple_norm, training));
}

Var TripleEncoder::aggregate(nn::Tape& tape, Var h, std::span<const int> example_of, std::size_t batch,
                             bool training) const {
  std::vector<int> slot(example_of.size());
  std::vector<std::size_t> filled(batch, 0);
  for (std::size_t i = 0; i < example_of.size(); ++i) {
    const auto b = static_cast<std::size_t>(example_of[i]);
    if (b >= batch) throw ShapeError("aggregate: example index outside batch");
    if (filled[b] >= cfg_.e_max)
      throw DataError("triple set larger than E_max = " + std::to_string(cfg_.e_max) +
                      "; the corpus triple-count bound was not applied");
    slot[i] = static_cast<int>(filled[b]++);
  }
  Var padded = tape.scatter_blocks(h, example_of, slot, static_cast<E>(batch), static_cast<E>(cfg_.e_max));
  return normalize(tape, tape.affine(padded, aggregate_map, &aggregate_bias), aggregate_norm, training);
}

Var TripleEncoder::forward(nn::Tape& tape, std::span<const std::vector<EncodedTriple>> batch, bool training) const {
  std::vector<EncodedTriple> flat;
  std::vector<int> example_of;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (const auto& t : batch[b]) {
      flat.push_back(t);
      example_of.push_back(static_cast<int>(b));
    }
  }
  Var h = flat.empty() ? tape.constant(nn::Matrix::Zero(0, static_cast<E>(cfg_.m)))
                       : encode_triples(tape, flat, training);
  return aggregate(tape, h, example_of, batch.size(), training);
}

void TripleEncoder::collect(std::vector<nn::Parameter*>& params, std::vector<nn::BatchNorm*>& norms) {
  for (auto* p : {&embedding, &embedding_bias, &triple_map, &aggregate_map, &aggregate_bias}) params.push_back(p);
  if (cfg_.batch_norm) {
    for (auto* bn : {&triple_norm, &aggregate_norm}) {
      params.push_back(&bn->scale);
      params.push_back(&bn->shift);
      norms.push_back(bn);
    }
  }
}

}  // namespace triplesum
