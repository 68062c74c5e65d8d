#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "triplesum/nn/tape.hpp"
#include "triplesum/vocabulary.hpp"

namespace triplesum {

struct Neighbor {
  int index = 0;
  std::string token;
  double cosine = 0.0;
};

// Entity and instance-type rows of the source embedding ranked by cosine
// similarity to `query`, descending, ties by index. The query, specials,
// predicates and literals are skipped. Throws DataError for an unknown query.
std::vector<Neighbor> nearest_neighbors(const nn::Matrix& embedding, const Vocabulary& source, std::string_view query,
                                        std::size_t k);

}  // namespace triplesum
