#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "triplesum/nn/tape.hpp"
#include "triplesum/special_tokens.hpp"

namespace triplesum {

template <class State>
struct Hypothesis {
  std::vector<int> tokens;  // generated ids, `<start>` excluded
  double log_prob = 0.0;
  State state{};
  bool complete = false;
  bool length_capped = false;  // force-completed at max_length
};

struct BeamConfig {
  std::size_t beam_width = 10;
  std::size_t max_length = 60;  // generated tokens, `<end>` included
  int start_token = kStartIndex;
  int end_token = kEndIndex;
  int excluded_token = kPadIndex;  // never proposed
};

// Higher log-probability first; equal scores rank the lexicographically
// smaller token sequence first.
template <class State>
bool hypothesis_before(const Hypothesis<State>& a, const Hypothesis<State>& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.tokens < b.tokens;
}

// Scorer requirements:
//   using State = ...;
//   State initial();
//   std::pair<std::vector<State>, nn::Matrix> advance(std::span<const State> states,
//                                                     std::span<const int> last_tokens);
// advance returns the successor state and a row of log-probabilities over
// the vocabulary for each input state.
//
// Each step expands every live hypothesis with every token and keeps the
// `width` best. A hypothesis that emits `end_token` leaves the beam and the
// width shrinks by one. Survivors at max_length are force-completed.
template <class Scorer>
std::vector<Hypothesis<typename Scorer::State>> beam_search(Scorer& scorer, const BeamConfig& cfg) {
  using State = typename Scorer::State;
  using Hyp = Hypothesis<State>;
  std::vector<Hyp> done;
  std::vector<Hyp> live(1);
  live[0].state = scorer.initial();
  std::size_t width = cfg.beam_width;

  struct Candidate {
    double log_prob;
    std::size_t parent;
    int token;
  };

  for (std::size_t step = 0; step < cfg.max_length && width > 0 && !live.empty(); ++step) {
    std::vector<State> states;
    std::vector<int> last;
    states.reserve(live.size());
    for (auto& h : live) {
      states.push_back(std::move(h.state));
      last.push_back(h.tokens.empty() ? cfg.start_token : h.tokens.back());
    }
    auto [next_states, logp] = scorer.advance(std::span<const State>(states), std::span<const int>(last));

    // All live prefixes share one length, so the lexicographic order of an
    // extension is the order of its prefix, then of the appended token.
    std::vector<std::size_t> prefix_rank(live.size());
    {
      std::vector<std::size_t> idx(live.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return live[a].tokens < live[b].tokens; });
      for (std::size_t r = 0; r < idx.size(); ++r) prefix_rank[idx[r]] = r;
    }
    std::vector<Candidate> cands;
    cands.reserve(live.size() * static_cast<std::size_t>(logp.cols()));
    for (std::size_t i = 0; i < live.size(); ++i)
      for (Eigen::Index v = 0; v < logp.cols(); ++v)
        if (static_cast<int>(v) != cfg.excluded_token)
          cands.push_back({live[i].log_prob + logp(static_cast<Eigen::Index>(i), v), i, static_cast<int>(v)});
    auto better = [&](const Candidate& a, const Candidate& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      if (a.parent != b.parent) return prefix_rank[a.parent] < prefix_rank[b.parent];
      return a.token < b.token;
    };
    const std::size_t keep = std::min(width, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<long>(keep), cands.end(), better);

    std::vector<Hyp> next;
    for (std::size_t k = 0; k < keep; ++k) {
      const Candidate& c = cands[k];
      Hyp h;
      h.tokens = live[c.parent].tokens;
      h.tokens.push_back(c.token);
      h.log_prob = c.log_prob;
      h.state = next_states[c.parent];
      if (c.token == cfg.end_token) {
        h.complete = true;
        done.push_back(std::move(h));
        --width;
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }
  for (auto& h : live) {
    h.complete = true;
    h.length_capped = true;
    done.push_back(std::move(h));
  }
  std::sort(done.begin(), done.end(), hypothesis_before<State>);
  return done;
}

}  // namespace triplesum
