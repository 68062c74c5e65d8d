#pragma once

#include <cstdint>
#include <span>

#include "triplesum/nn/tape.hpp"

namespace triplesum::nn {

struct RmsPropConfig {
  double rho = 0.95;
  double epsilon = 1e-8;
  double l2 = 1e-5;
};

// acc <- rho acc + (1 - rho) g^2;  value <- value - lr g / sqrt(acc + eps),
// where g includes the l2 term 2 lambda value.
void rmsprop_step(std::span<Parameter* const> params, double learning_rate, const RmsPropConfig& cfg = {});

// Scales all gradients by max_norm / norm when their global L2 norm exceeds
// max_norm. Returns the applied scale.
double clip_gradients(std::span<Parameter* const> params, double max_norm);

double gradient_norm(std::span<Parameter* const> params);

// Uniform in [low, high) from a seeded mt19937_64, parameters visited in order.
void init_uniform(std::span<Parameter* const> params, std::uint64_t seed, double low = -0.001, double high = 0.001);

void zero_grads(std::span<Parameter* const> params);

}  // namespace triplesum::nn
