#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace triplesum {

enum class CellKind { lstm, gru };

std::string_view to_string(CellKind kind);
CellKind cell_kind_from_string(std::string_view name);

struct ModelConfig {
  CellKind cell = CellKind::gru;
  std::size_t m = 64;
  std::size_t layers = 1;
  std::size_t e_max = 1;
  std::size_t source_size = 0;  // |N|
  std::size_t target_size = 0;  // |X|
  // Sigmoid instead of tanh on the LSTM cell candidate.
  bool sigmoid_candidate = false;
  bool batch_norm = true;
  // Decoder batch-norm running statistics are kept per time step up to
  // this many steps.
  std::size_t norm_steps = 64;
};

}  // namespace triplesum
