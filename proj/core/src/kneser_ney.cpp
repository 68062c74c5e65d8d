#include "triplesum/kneser_ney.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "triplesum/error.hpp"
#include "triplesum/special_tokens.hpp"

namespace triplesum {

std::size_t KneserNey::VecHash::operator()(const std::vector<int>& v) const {
  std::size_t h = 1469598103934665603ULL;
  for (int x : v) {
    h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

KneserNey::KneserNey(std::span<const std::vector<std::string>> sentences, std::size_t order) : order_(order) {
  if (order_ == 0) throw DataError("Kneser-Ney order must be positive");
  tokens_.push_back(std::string(kStartToken));
  index_.emplace(tokens_.back(), 0);
  std::set<std::string> seen;
  for (const auto& s : sentences)
    for (const auto& w : s)
      if (w != kStartToken && w != kEndToken) seen.insert(w);
  seen.insert(std::string(kEndToken));
  for (const auto& w : seen) {
    index_.emplace(w, static_cast<int>(tokens_.size()));
    tokens_.push_back(w);
  }
  end_id_ = index_.at(std::string(kEndToken));

  // Raw n-gram counts for every order.
  std::vector<std::map<std::vector<int>, std::size_t>> raw(order_);
  for (const auto& s : sentences) {
    std::vector<int> seq{0};
    for (const auto& w : s)
      if (w != kStartToken && w != kEndToken) seq.push_back(index_.at(w));
    seq.push_back(end_id_);
    for (std::size_t n = 1; n <= order_; ++n)
      for (std::size_t i = 0; i + n <= seq.size(); ++i) {
        std::vector<int> g(seq.begin() + static_cast<long>(i), seq.begin() + static_cast<long>(i + n));
        if (n == 1 && g[0] == 0) continue;  // `<start>` is never predicted
        ++raw[n - 1][g];
      }
  }

  // Adjusted counts: continuation counts below the top order, except for
  // n-grams opening with `<start>`, which have no left context.
  std::vector<std::map<std::vector<int>, std::size_t>> adjusted(order_);
  adjusted[order_ - 1] = raw[order_ - 1];
  for (std::size_t n = order_ - 1; n >= 1; --n) {
    auto& adj = adjusted[n - 1];
    for (const auto& [g, c] : raw[n - 1])
      if (g[0] == 0) adj[g] = c;
    for (const auto& [g, c] : raw[n]) ++adj[std::vector<int>(g.begin() + 1, g.end())];
  }

  discounts_.assign(order_, 0.75);
  tables_.resize(order_);
  for (std::size_t n = 1; n <= order_; ++n) {
    std::size_t n1 = 0, n2 = 0;
    for (const auto& [g, c] : adjusted[n - 1]) {
      n1 += c == 1;
      n2 += c == 2;
    }
    if (n1 > 0 && n2 > 0)
      discounts_[n - 1] = static_cast<double>(n1) / static_cast<double>(n1 + 2 * n2);
    else
      fallback_.push_back(n);
    for (const auto& [g, c] : adjusted[n - 1]) {
      std::vector<int> h(g.begin(), g.end() - 1);
      auto& st = tables_[n - 1][h];
      st.total += static_cast<double>(c);
      st.next.emplace_back(g.back(), static_cast<double>(c));
    }
  }
}

int KneserNey::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

std::vector<double> KneserNey::distribution(std::span<const int> history) const {
  const std::size_t v = tokens_.size();
  std::vector<double> p(v, 1.0 / static_cast<double>(v - 1));
  p[0] = 0.0;
  const std::size_t ctx = std::min(history.size(), order_ - 1);
  for (std::size_t n = 1; n <= ctx + 1; ++n) {
    std::vector<int> h(history.end() - static_cast<long>(n - 1), history.end());
    auto it = tables_[n - 1].find(h);
    if (it == tables_[n - 1].end() || it->second.total <= 0.0) continue;  // back off unchanged
    const HistoryStats& st = it->second;
    const double d = discounts_[n - 1];
    const double lambda = d * static_cast<double>(st.next.size()) / st.total;
    for (double& x : p) x *= lambda;
    for (const auto& [w, c] : st.next) p[static_cast<std::size_t>(w)] += std::max(c - d, 0.0) / st.total;
  }
  return p;
}

double KneserNey::probability(std::span<const int> history, int word) const {
  return distribution(history).at(static_cast<std::size_t>(word));
}

double KneserNey::probability(const std::vector<std::string>& history, const std::string& word) const {
  std::vector<int> h;
  for (const auto& t : history) {
    const int i = id(t);
    if (i < 0) throw DataError("token outside the Kneser-Ney vocabulary: " + t);
    h.push_back(i);
  }
  const int w = id(word);
  if (w < 0) throw DataError("token outside the Kneser-Ney vocabulary: " + word);
  return probability(h, w);
}

std::pair<std::vector<KneserNeyScorer::State>, nn::Matrix> KneserNeyScorer::advance(std::span<const State> states,
                                                                                   std::span<const int> tokens) const {
  const auto v = static_cast<Eigen::Index>(lm_.vocab_size());
  nn::Matrix logp(static_cast<Eigen::Index>(states.size()), v);
  std::vector<State> next;
  for (std::size_t i = 0; i < states.size(); ++i) {
    State s = states[i];
    s.push_back(tokens[i]);
    const std::size_t keep = lm_.order() - 1;
    if (s.size() > keep) s.erase(s.begin(), s.end() - static_cast<long>(keep));
    const auto p = lm_.distribution(s);
    for (Eigen::Index j = 0; j < v; ++j)
      logp(static_cast<Eigen::Index>(i), j) =
          p[static_cast<std::size_t>(j)] > 0.0 ? std::log(p[static_cast<std::size_t>(j)])
                                               : -std::numeric_limits<double>::infinity();
    next.push_back(std::move(s));
  }
  return {std::move(next), std::move(logp)};
}

std::vector<std::vector<std::string>> KneserNey::generate(const BeamConfig& beam) const {
  BeamConfig cfg = beam;
  cfg.start_token = start_id();
  cfg.end_token = end_id_;
  cfg.excluded_token = start_id();
  KneserNeyScorer scorer(*this);
  std::vector<std::vector<std::string>> out;
  for (const auto& h : beam_search(scorer, cfg)) {
    std::vector<std::string> words;
    for (int t : h.tokens)
      if (t != end_id_) words.push_back(tokens_[static_cast<std::size_t>(t)]);
    out.push_back(std::move(words));
  }
  return out;
}

}  // namespace triplesum
