#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "triplesum/corpus.hpp"
#include "triplesum/model.hpp"
#include "triplesum/vocabulary.hpp"

namespace triplesum {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  ModelConfig model;
  CorpusStats stats;  // triple-count bounds the model was trained under
  SummaryMode mode = SummaryMode::uri;
  std::uint64_t source_hash = 0;
  std::uint64_t target_hash = 0;
  std::size_t epoch = 0;
  double validation_perplexity = 0.0;
};

// Layout: magic, u32 version, u32-length-prefixed JSON hyperparameters,
// u64 source and target vocabulary hashes, u64 block count, then per block
// u32 name length, name, u64 rows, u64 cols and rows*cols little-endian
// doubles. Batch-norm running statistics are stored as blocks.
void save_checkpoint(std::ostream& out, Triples2Seq& model, const CheckpointMeta& meta);
void save_checkpoint(const std::string& path, Triples2Seq& model, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  CheckpointMeta meta;
  std::unique_ptr<Triples2Seq> model;
};

struct CheckpointExpectations {
  const Vocabulary* source = nullptr;
  const Vocabulary* target = nullptr;
  std::optional<CellKind> cell;
};

// Throws CheckpointError on bad magic, version, hash or cell mismatch,
// missing or misshapen blocks and truncation.
LoadedCheckpoint load_checkpoint(std::istream& in, const CheckpointExpectations& expect = {});
LoadedCheckpoint load_checkpoint(const std::string& path, const CheckpointExpectations& expect = {});

}  // namespace triplesum
