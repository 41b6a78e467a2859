#pragma once

#include <utility>
#include <vector>

#include "opboost/domain.hpp"
#include "opboost/rng.hpp"

namespace opboost {

struct QuerySet {
  std::vector<std::pair<int, int>> ranges;  // inclusive lo <= hi, within [L, R]
};

// uniform random endpoints over the domain, swapped into order
QuerySet generate_queries(const MappedDomain& domain, std::size_t count, SeededRng& rng);

// mean squared difference of normalized in-range frequencies (counts/n)
// between the true and desensitized value sequences, over the query set
double range_query_mse(const std::vector<int>& true_values,
                       const std::vector<int>& desensitized_values,
                       const QuerySet& queries);

}  // namespace opboost
