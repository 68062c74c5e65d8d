#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "triplesum/model.hpp"
#include "triplesum/nn/optim.hpp"

namespace triplesum {

struct TrainConfig {
  std::size_t batch_size = 85;
  std::size_t max_timestep = 0;  // 0 keeps full summaries
  double initial_lr = 0.002;
  double decay_factor = 0.8;
  double decay_start_epoch = 3.0;
  double decay_period = 0.5;  // epochs
  std::size_t epochs = 10;
  std::size_t patience = 3;  // 0 disables early stopping
  std::uint64_t seed = 1;
  double clip_norm = 5.0;  // <= 0 disables clipping
  // From this epoch on, batch normalization uses (and stops updating) its
  // running statistics during training. 0 never freezes.
  std::size_t freeze_norm_epoch = 0;
  // false keeps the final state; validation is still measured and logged.
  bool restore_best = true;
  nn::RmsPropConfig rmsprop;
};

// Number of decay instants start, start + period, ... strictly before
// `elapsed` epochs.
std::size_t decay_count(const TrainConfig& cfg, double elapsed);
double learning_rate(const TrainConfig& cfg, std::size_t decays);
// Learning rate in effect after `batch` of `batches` updates of epoch `epoch`.
double learning_rate_at(const TrainConfig& cfg, std::size_t epoch, std::size_t batch, std::size_t batches);

// Deterministic epoch plan: shuffled, then length-sorted inside windows of
// ten batches, cut into ceil(n / batch_size) batches (a trailing single
// example joins the previous batch), then the batch order is shuffled.
std::vector<std::vector<std::size_t>> plan_batches(std::span<const EncodedExample> data, std::size_t batch_size,
                                                   std::uint64_t seed, std::size_t epoch);

struct BatchRecord {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  double lr = 0.0;
  double cost = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;  // at the epoch boundary
  double train_cost = 0.0;
  double validation_perplexity = 0.0;
};

struct TrainResult {
  std::vector<BatchRecord> batches;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_perplexity = 0.0;
  std::size_t updates = 0;
  bool early_stopped = false;
};

struct TrainHooks {
  std::ostream* log = nullptr;  // JSON Lines
  // Called whenever validation perplexity improves, with the model in its
  // new best state.
  std::function<void(Triples2Seq&, const EpochRecord&)> on_best;
};

// exp(total NLL / non-pad target count) in inference mode.
double perplexity(const Triples2Seq& model, std::span<const EncodedExample> data, std::size_t batch_size = 64);

// RMSProp on the teacher-forced cost with the step-decay schedule. The model
// ends in its best-by-validation state (last state when `valid` is empty or
// restore_best is off).
// Throws NumericError naming the batch on a non-finite cost.
TrainResult train(Triples2Seq& model, std::span<const EncodedExample> train_data,
                  std::span<const EncodedExample> valid, const TrainConfig& cfg, const TrainHooks& hooks = {});

}  // namespace triplesum
