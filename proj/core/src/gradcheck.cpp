#include "triplesum/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "triplesum/error.hpp"
#include "triplesum/model.hpp"
#include "triplesum/special_tokens.hpp"

namespace triplesum {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

std::vector<EncodedExample> random_batch(const GradcheckConfig& cfg, std::mt19937_64& rng) {
  const int n_src = static_cast<int>(cfg.source_size);
  const int n_tgt = static_cast<int>(cfg.target_size);
  std::uniform_int_distribution<int> src(0, n_src - 1);
  std::uniform_int_distribution<int> tgt(1, n_tgt - 1);
  std::uniform_int_distribution<std::size_t> n_triples(1, cfg.e_max);
  std::uniform_int_distribution<std::size_t> length(2, std::max<std::size_t>(2, cfg.max_length));
  std::vector<EncodedExample> out(cfg.batch);
  for (auto& e : out) {
    const std::size_t k = n_triples(rng);
    for (std::size_t i = 0; i < k; ++i) e.triples.push_back({src(rng), src(rng), src(rng)});
    const std::size_t len = length(rng);
    e.tokens.push_back(kStartIndex);
    for (std::size_t t = 1; t + 1 < len; ++t) {
      int tok = kPadIndex;
      while (tok == kPadIndex || tok == kEndIndex) tok = tgt(rng);
      e.tokens.push_back(tok);
    }
    e.tokens.push_back(kEndIndex);
  }
  return out;
}

}  // namespace

GradcheckResult gradient_check(const GradcheckConfig& cfg) {
  if (cfg.batch < 2) throw DataError("gradient check needs a batch of at least 2 for batch norm");
  if (cfg.target_size <= kSpecialTokens.size() || cfg.source_size == 0)
    throw DataError("gradient check needs a target vocabulary beyond the special tokens");
  ModelConfig mc;
  mc.cell = cfg.cell;
  mc.m = cfg.m;
  mc.layers = cfg.layers;
  mc.e_max = cfg.e_max;
  mc.source_size = cfg.source_size;
  mc.target_size = cfg.target_size;
  mc.sigmoid_candidate = cfg.sigmoid_candidate;
  mc.batch_norm = true;
  Triples2Seq model(mc);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> init(-cfg.init_range, cfg.init_range);
  const auto params = model.parameters();
  for (nn::Parameter* p : params)
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] = init(rng);

  const auto batch = random_batch(cfg, rng);
  std::vector<const EncodedExample*> ptrs;
  for (const auto& e : batch) ptrs.push_back(&e);

  // Training-mode passes move the running statistics, which steps with
  // fewer than two live rows normalize with; every pass starts from the
  // same snapshot.
  const auto norms = model.batch_norms();
  std::vector<std::pair<nn::Matrix, nn::Matrix>> running;
  for (const nn::BatchNorm* bn : norms) running.emplace_back(bn->running_mean, bn->running_var);
  auto restore = [&] {
    for (std::size_t i = 0; i < norms.size(); ++i) {
      norms[i]->running_mean = running[i].first;
      norms[i]->running_var = running[i].second;
    }
  };

  auto loss = [&] {
    restore();
    nn::Tape tape(false);
    return tape.value(model.batch_loss(tape, ptrs, true))(0, 0);
  };

  for (nn::Parameter* p : params) p->zero_grad();
  {
    restore();
    nn::Tape tape;
    tape.backward(model.batch_loss(tape, ptrs, true));
  }

  GradcheckResult out;
  for (nn::Parameter* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double& w = p->value.data()[i];
      const double saved = w;
      w = saved + cfg.step;
      const double up = loss();
      w = saved - cfg.step;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2.0 * cfg.step);
      const double analytic = p->grad.data()[i];
      const double err = relative_error(analytic, numeric, cfg.floor);
      ++out.checked;
      if (!(err <= out.max_relative_error)) {
        out.max_relative_error = err;
        out.worst_parameter = p->name;
        out.worst_index = static_cast<long>(i);
        out.analytic = analytic;
        out.numeric = numeric;
      }
    }
  }
  return out;
}

}  // namespace triplesum
