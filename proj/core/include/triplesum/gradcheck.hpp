#pragma once

#include <cstdint>
#include <string>

#include "triplesum/model_config.hpp"

namespace triplesum {

struct GradcheckConfig {
  CellKind cell = CellKind::gru;
  std::size_t m = 8;
  std::size_t layers = 1;
  std::size_t source_size = 14;
  std::size_t target_size = 16;
  std::size_t e_max = 3;
  std::size_t batch = 4;
  std::size_t max_length = 5;  // tokens per target, <start> and <end> included
  bool sigmoid_candidate = false;
  std::uint64_t seed = 1;
  double step = 1e-5;
  double init_range = 0.5;
  // Denominator floor of the relative error.
  double floor = 1e-5;
};

struct GradcheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  long worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// |a - n| / max(|a|, |n|, floor), where n is the central difference.
double relative_error(double analytic, double numeric, double floor);

// Compares the backward pass of a random model (batch norm in training mode)
// with central differences on every parameter entry.
GradcheckResult gradient_check(const GradcheckConfig& cfg);

}  // namespace triplesum
