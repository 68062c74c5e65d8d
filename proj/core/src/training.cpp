#include "triplesum/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "json.hpp"
#include "triplesum/error.hpp"

namespace triplesum {

std::size_t decay_count(const TrainConfig& cfg, double elapsed) {
  if (!(elapsed > cfg.decay_start_epoch)) return 0;
  // Instants d_k = start + k period; count those with d_k < elapsed.
  const double k = (elapsed - cfg.decay_start_epoch) / cfg.decay_period;
  return static_cast<std::size_t>(std::ceil(k - 1e-9));
}

double learning_rate(const TrainConfig& cfg, std::size_t decays) {
  return cfg.initial_lr * std::pow(cfg.decay_factor, static_cast<double>(decays));
}

double learning_rate_at(const TrainConfig& cfg, std::size_t epoch, std::size_t batch, std::size_t batches) {
  const double elapsed = static_cast<double>(epoch) + static_cast<double>(batch) / static_cast<double>(batches);
  return learning_rate(cfg, decay_count(cfg, elapsed));
}

std::vector<std::vector<std::size_t>> plan_batches(std::span<const EncodedExample> data, std::size_t batch_size,
                                                   std::uint64_t seed, std::size_t epoch) {
  if (batch_size < 2) throw DataError("batch size must be at least 2 for batch normalization");
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + epoch);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t window = batch_size * 10;
  for (std::size_t lo = 0; lo < n; lo += window) {
    const auto hi = std::min(n, lo + window);
    std::stable_sort(order.begin() + static_cast<long>(lo), order.begin() + static_cast<long>(hi),
                     [&](std::size_t a, std::size_t b) { return data[a].tokens.size() < data[b].tokens.size(); });
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t lo = 0; lo < n; lo += batch_size)
    batches.emplace_back(order.begin() + static_cast<long>(lo),
                         order.begin() + static_cast<long>(std::min(n, lo + batch_size)));
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

double perplexity(const Triples2Seq& model, std::span<const EncodedExample> data, std::size_t batch_size) {
  if (data.empty()) throw DataError("perplexity of an empty corpus");
  double nll = 0.0;
  std::size_t count = 0;
  std::vector<const EncodedExample*> batch;
  for (std::size_t lo = 0; lo < data.size(); lo += batch_size) {
    batch.clear();
    for (std::size_t i = lo; i < std::min(data.size(), lo + batch_size); ++i) batch.push_back(&data[i]);
    const auto [b_nll, b_count] = model.sequence_nll(batch);
    nll += b_nll;
    count += b_count;
  }
  if (count == 0) throw DataError("perplexity over zero target tokens");
  return std::exp(nll / static_cast<double>(count));
}

namespace {

struct Snapshot {
  std::vector<nn::Matrix> values;
  std::vector<nn::Matrix> means, vars;

  void take(Triples2Seq& model) {
    values.clear();
    means.clear();
    vars.clear();
    for (nn::Parameter* p : model.parameters()) values.push_back(p->value);
    for (nn::BatchNorm* bn : model.batch_norms()) {
      means.push_back(bn->running_mean);
      vars.push_back(bn->running_var);
    }
  }
  void restore(Triples2Seq& model) const {
    auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
    auto norms = model.batch_norms();
    for (std::size_t i = 0; i < norms.size(); ++i) {
      norms[i]->running_mean = means[i];
      norms[i]->running_var = vars[i];
    }
  }
};

void log_json(std::ostream* log, const nlohmann::json& j) {
  if (log) *log << j.dump() << '\n';
}

}  // namespace

TrainResult train(Triples2Seq& model, std::span<const EncodedExample> train_data,
                  std::span<const EncodedExample> valid, const TrainConfig& cfg, const TrainHooks& hooks) {
  if (train_data.empty()) throw DataError("empty training corpus");
  if (!(cfg.decay_factor > 0.0 && cfg.decay_factor < 1.0)) throw DataError("decay factor must lie in (0, 1)");
  if (train_data.size() < 2) throw DataError("training needs at least 2 examples for batch normalization");

  TrainResult result;
  auto params = model.parameters();
  Snapshot best_state;
  std::size_t since_best = 0;
  double best = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto plan = plan_batches(train_data, cfg.batch_size, cfg.seed, epoch);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = learning_rate(cfg, decay_count(cfg, static_cast<double>(epoch)));
    log_json(hooks.log, {{"event", "epoch_start"}, {"epoch", epoch}, {"lr", rec.lr}});

    const bool batch_stats = cfg.freeze_norm_epoch == 0 || epoch < cfg.freeze_norm_epoch;
    double cost_sum = 0.0;
    std::vector<const EncodedExample*> batch;
    for (std::size_t b = 0; b < plan.size(); ++b) {
      batch.clear();
      for (std::size_t i : plan[b]) batch.push_back(&train_data[i]);
      const double lr = learning_rate_at(cfg, epoch, b, plan.size());
      nn::zero_grads(params);
      nn::Tape tape;
      nn::Var loss = model.batch_loss(tape, batch, batch_stats);
      const double cost = tape.value(loss)(0, 0);
      if (!std::isfinite(cost))
        throw NumericError("non-finite cost " + std::to_string(cost) + " at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(b));
      tape.backward(loss);
      if (cfg.clip_norm > 0.0) nn::clip_gradients(params, cfg.clip_norm);
      nn::rmsprop_step(params, lr, cfg.rmsprop);
      ++result.updates;
      cost_sum += cost;
      result.batches.push_back({epoch, b, lr, cost});
      log_json(hooks.log, {{"event", "batch"}, {"epoch", epoch}, {"batch", b}, {"lr", lr}, {"cost", cost}});
    }
    rec.train_cost = cost_sum / static_cast<double>(plan.size());

    if (!valid.empty()) {
      rec.validation_perplexity = perplexity(model, valid);
      if (!std::isfinite(rec.validation_perplexity))
        throw NumericError("non-finite validation perplexity after epoch " + std::to_string(epoch));
    }
    log_json(hooks.log, {{"event", "epoch_end"},
                         {"epoch", epoch},
                         {"lr", rec.lr},
                         {"train_cost", rec.train_cost},
                         {"validation_perplexity", rec.validation_perplexity}});
    result.epochs.push_back(rec);

    if (valid.empty()) continue;
    if (rec.validation_perplexity < best) {
      best = rec.validation_perplexity;
      since_best = 0;
      result.best_epoch = epoch;
      result.best_perplexity = best;
      if (cfg.restore_best) best_state.take(model);
      if (hooks.on_best) hooks.on_best(model, rec);
    } else if (cfg.patience && ++since_best >= cfg.patience) {
      result.early_stopped = true;
      break;
    }
  }
  if (!valid.empty() && cfg.restore_best) best_state.restore(model);
  return result;
}

}  // namespace triplesum
