#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "triplesum/error.hpp"
#include "triplesum/training.hpp"

using namespace triplesum;

namespace {

constexpr std::size_t kSource = 30;
constexpr std::size_t kTarget = 24;

// Target ids follow from the triples, so a model can fit them exactly.
std::vector<EncodedExample> synthetic(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> src(9, static_cast<int>(kSource) - 1);
  std::uniform_int_distribution<int> count(1, 3);
  const int words = static_cast<int>(kTarget) - 9;
  std::vector<EncodedExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    EncodedExample e;
    const int k = count(rng);
    for (int j = 0; j < k; ++j) e.triples.push_back({src(rng), src(rng), src(rng)});
    e.tokens.push_back(kStartIndex);
    for (const auto& t : e.triples) {
      e.tokens.push_back(9 + t.subject % words);
      e.tokens.push_back(9 + (t.object * 7 + t.predicate) % words);
    }
    e.tokens.push_back(kEndIndex);
    out.push_back(std::move(e));
  }
  return out;
}

ModelConfig config(CellKind cell, std::size_t m) {
  ModelConfig c;
  c.cell = cell;
  c.m = m;
  c.e_max = 3;
  c.source_size = kSource;
  c.target_size = kTarget;
  return c;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  TrainConfig cfg;  // 0.002, x0.8 every half epoch from epoch 3
  CHECK(learning_rate_at(cfg, 0, 0, 2) == 0.002);
  CHECK(learning_rate_at(cfg, 3, 0, 2) == 0.002);
  CHECK(learning_rate_at(cfg, 3, 1, 2) == doctest::Approx(0.002 * 0.8).epsilon(1e-15));
  CHECK(learning_rate_at(cfg, 4, 0, 2) == doctest::Approx(0.002 * 0.8 * 0.8).epsilon(1e-15));
  CHECK(learning_rate_at(cfg, 5, 0, 2) == doctest::Approx(0.002 * std::pow(0.8, 4)).epsilon(1e-15));
  CHECK(decay_count(cfg, 3.0) == 0);
  CHECK(decay_count(cfg, 3.01) == 1);
  CHECK(decay_count(cfg, 3.5) == 1);
  CHECK(decay_count(cfg, 3.51) == 2);
  // Fine-grained within an epoch: four batches, decay at the half.
  CHECK(learning_rate_at(cfg, 3, 2, 4) == doctest::Approx(0.0016).epsilon(1e-15));
  CHECK(learning_rate_at(cfg, 3, 3, 4) == doctest::Approx(0.0016 * 0.8).epsilon(1e-15));
}

TEST_CASE("batch plan") {
  const auto data = synthetic(170, 1);
  const auto plan = plan_batches(data, 85, 4, 0);
  CHECK(plan.size() == 2);

  auto covers = [&](const std::vector<std::vector<std::size_t>>& p, std::size_t n) {
    std::vector<std::size_t> all;
    for (const auto& b : p) all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i)
      if (all[i] != i) return false;
    return all.size() == n;
  };
  CHECK(covers(plan, 170));
  for (const auto& b : plan)
    CHECK(std::is_sorted(b.begin(), b.end(),
                         [&](std::size_t x, std::size_t y) { return data[x].tokens.size() < data[y].tokens.size(); }));

  CHECK(plan_batches(data, 85, 4, 0) == plan);
  CHECK(plan_batches(data, 85, 4, 1) != plan);
  CHECK(plan_batches(data, 85, 5, 0) != plan);

  const auto odd = synthetic(171, 2);
  const auto p171 = plan_batches(odd, 85, 4, 0);
  CHECK(p171.size() == 2);
  CHECK(covers(p171, 171));
  const auto p23 = plan_batches(synthetic(23, 3), 10, 1, 0);
  CHECK(p23.size() == 3);
  CHECK(covers(p23, 23));
  CHECK_THROWS_AS(plan_batches(data, 1, 1, 0), DataError);
}

TEST_CASE("training on 170 examples with batch 85 takes two updates per epoch") {
  const auto data = synthetic(170, 4);
  Triples2Seq model(config(CellKind::gru, 8));
  model.initialize(1);
  TrainConfig cfg;
  cfg.epochs = 1;
  const TrainResult r = train(model, data, {}, cfg);
  CHECK(r.updates == 2);
  CHECK(r.batches.size() == 2);
  CHECK(r.epochs.size() == 1);
}

TEST_CASE("training is reproducible") {
  const auto data = synthetic(40, 5);
  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.epochs = 3;
  for (CellKind cell : {CellKind::gru, CellKind::lstm}) {
    Triples2Seq a(config(cell, 8)), b(config(cell, 8));
    a.initialize(3);
    b.initialize(3);
    const auto ra = train(a, data, data, cfg);
    const auto rb = train(b, data, data, cfg);
    REQUIRE(ra.batches.size() == rb.batches.size());
    for (std::size_t i = 0; i < ra.batches.size(); ++i) CHECK(ra.batches[i].cost == rb.batches[i].cost);
    const auto pa = a.parameters(), pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
  }
}

TEST_CASE("a small model overfits a small corpus") {
  const auto data = synthetic(50, 6);
  for (CellKind cell : {CellKind::gru, CellKind::lstm}) {
    Triples2Seq model(config(cell, 32));
    model.initialize(1);
    TrainConfig cfg;
    cfg.batch_size = 10;
    cfg.epochs = 200;
    cfg.decay_start_epoch = 1000;
    cfg.patience = 0;
    const auto r = train(model, data, {}, cfg);
    const double first = r.epochs.front().train_cost;
    double lowest = first;
    for (const auto& e : r.epochs) lowest = std::min(lowest, e.train_cost);
    INFO(to_string(cell), " first ", first, " lowest ", lowest);
    CHECK(lowest < 0.1 * first);
  }
}

TEST_CASE("early stopping, best-state restore and the JSON log") {
  const auto data = synthetic(30, 7);
  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.epochs = 10;
  cfg.initial_lr = 0.0;  // weights never move
  cfg.freeze_norm_epoch = 1;  // and running statistics settle after epoch 0
  cfg.patience = 2;
  Triples2Seq model(config(CellKind::gru, 8));
  model.initialize(2);
  std::ostringstream log;
  const auto r = train(model, data, data, cfg, {&log, {}});
  CHECK(r.early_stopped);
  CHECK(r.epochs.size() == 3);
  CHECK(r.best_epoch == 0);
  CHECK(perplexity(model, data) == r.best_perplexity);

  std::istringstream lines(log.str());
  std::string line;
  std::size_t starts = 0, batches = 0, ends = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    const std::string ev = j.at("event");
    starts += ev == "epoch_start";
    batches += ev == "batch";
    if (ev == "epoch_end") {
      CHECK(j.at("validation_perplexity").get<double>() == r.epochs[ends].validation_perplexity);
      ++ends;
    }
  }
  CHECK(starts == 3);
  CHECK(ends == 3);
  CHECK(batches == r.updates);
}

TEST_CASE("restoring the best state") {
  const auto data = synthetic(40, 8);
  const auto valid = synthetic(12, 9);
  TrainConfig cfg;
  cfg.batch_size = 10;
  cfg.epochs = 30;
  cfg.initial_lr = 0.02;
  cfg.patience = 0;
  cfg.freeze_norm_epoch = 0;
  Triples2Seq model(config(CellKind::gru, 16));
  model.initialize(4);
  std::size_t improvements = 0;
  TrainHooks hooks;
  hooks.on_best = [&](Triples2Seq&, const EpochRecord& rec) {
    ++improvements;
    CHECK(rec.validation_perplexity > 0.0);
  };
  const auto r = train(model, data, valid, cfg, hooks);
  CHECK(improvements >= 1);
  CHECK(perplexity(model, valid) == doctest::Approx(r.best_perplexity).epsilon(1e-12));

  Triples2Seq last(config(CellKind::gru, 16));
  last.initialize(4);
  cfg.restore_best = false;
  const auto r2 = train(last, data, valid, cfg);
  CHECK(perplexity(last, valid) == doctest::Approx(r2.epochs.back().validation_perplexity).epsilon(1e-12));
}

TEST_CASE("a non-finite cost stops training") {
  const auto data = synthetic(20, 10);
  Triples2Seq model(config(CellKind::lstm, 4));
  model.initialize(1);
  model.decoder.output_bias.value(0, 10) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.batch_size = 10;
  CHECK_THROWS_AS(train(model, data, {}, cfg), NumericError);
  CHECK_THROWS_AS(train(model, {}, {}, cfg), DataError);
}
