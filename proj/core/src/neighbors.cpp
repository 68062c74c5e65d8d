#include "triplesum/neighbors.hpp"

#include <algorithm>

#include "triplesum/error.hpp"

namespace triplesum {

std::vector<Neighbor> nearest_neighbors(const nn::Matrix& embedding, const Vocabulary& source, std::string_view query,
                                        std::size_t k) {
  const auto q = source.find(query);
  if (!q) throw DataError("token not in the source vocabulary: " + std::string(query));
  if (static_cast<std::size_t>(embedding.rows()) != source.size())
    throw DataError("embedding has " + std::to_string(embedding.rows()) + " rows for a vocabulary of " +
                    std::to_string(source.size()));
  const auto qv = embedding.row(*q);
  const double qn = qv.norm();
  std::vector<Neighbor> out;
  for (int i = 0; i < static_cast<int>(source.size()); ++i) {
    if (i == *q) continue;
    const TokenRole r = source.role(i);
    if (r != TokenRole::entity && r != TokenRole::type) continue;
    const auto v = embedding.row(i);
    const double denom = qn * v.norm();
    out.push_back({i, source.decode(i), denom > 0.0 ? qv.dot(v) / denom : 0.0});
  }
  std::stable_sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.index < b.index;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace triplesum
