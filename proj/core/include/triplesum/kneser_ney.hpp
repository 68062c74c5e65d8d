#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "triplesum/beam_search.hpp"
#include "triplesum/nn/tape.hpp"

namespace triplesum {

// Interpolated Kneser-Ney language model over token sequences. Each
// sequence is scored as `<start> w_1 ... w_k <end>`; `<start>` is context
// only. One absolute discount per order, D = n1 / (n1 + 2 n2) over that
// order's adjusted counts (0.75 when n1 or n2 is zero). The highest order
// and n-grams opening with `<start>` use raw counts, the others use
// continuation counts. Below the unigram level sits a uniform distribution
// over the vocabulary.
class KneserNey {
 public:
  KneserNey(std::span<const std::vector<std::string>> sentences, std::size_t order = 5);

  std::size_t order() const { return order_; }
  // Predictable tokens plus `<start>` at id 0.
  std::size_t vocab_size() const { return tokens_.size(); }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int id(const std::string& token) const;  // -1 when unseen
  int start_id() const { return 0; }
  int end_id() const { return end_id_; }

  double discount(std::size_t n) const { return discounts_.at(n - 1); }
  // Orders whose discount fell back to 0.75.
  const std::vector<std::size_t>& fallback_orders() const { return fallback_; }

  // p(. | history) over all ids; `<start>` gets 0. Only the last order-1
  // history tokens are used.
  std::vector<double> distribution(std::span<const int> history) const;
  double probability(std::span<const int> history, int word) const;
  double probability(const std::vector<std::string>& history, const std::string& word) const;

  // Unconditional beam search from `<start>`. Returns token strings without
  // `<start>` / `<end>`, best first.
  std::vector<std::vector<std::string>> generate(const BeamConfig& beam) const;

 private:
  struct HistoryStats {
    double total = 0.0;                        // sum of adjusted counts c(h w)
    std::vector<std::pair<int, double>> next;  // w -> adjusted count, ascending w
  };
  struct VecHash {
    std::size_t operator()(const std::vector<int>& v) const;
  };
  using Table = std::unordered_map<std::vector<int>, HistoryStats, VecHash>;

  std::size_t order_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int end_id_ = -1;
  std::vector<double> discounts_;
  std::vector<std::size_t> fallback_;
  std::vector<Table> tables_;  // tables_[n-1]: histories of length n-1
};

// Beam-search scorer over a KneserNey model.
class KneserNeyScorer {
 public:
  using State = std::vector<int>;  // recent history
  explicit KneserNeyScorer(const KneserNey& lm) : lm_(lm) {}
  State initial() const { return {}; }
  std::pair<std::vector<State>, nn::Matrix> advance(std::span<const State> states, std::span<const int> tokens) const;

 private:
  const KneserNey& lm_;
};

}  // namespace triplesum
