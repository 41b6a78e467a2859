#include "opboost/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "opboost/errors.hpp"

namespace opboost {

MappedDomain MappedDomain::create(int L, int R, int theta) {
  if (L >= R) throw ConfigError("domain lower bound must be below upper bound");
  if (theta < 1) throw ConfigError("partition length must be positive");
  if (theta > R - L + 1) throw ConfigError("partition length exceeds domain size");
  MappedDomain d;
  d.L = L;
  d.R = R;
  d.theta = theta;
  d.k = (d.size() + theta - 1) / theta;
  return d;
}

int MappedDomain::home_partition(int x) const {
  if (!contains(x)) throw DataError("value " + std::to_string(x) + " outside domain");
  return (x - L) / theta + 1;
}

std::pair<int, int> MappedDomain::partition_bounds(int m) const {
  if (m < 1 || m > k) throw DataError("partition index out of range");
  int lo = L + (m - 1) * theta;
  int hi = std::min(L + m * theta - 1, R);
  return {lo, hi};
}

int map_value(double x, double lower, double upper, const MappedDomain& domain) {
  if (!(lower < upper)) throw ConfigError("feature bounds must satisfy lower < upper");
  if (x < lower || x > upper) throw DataError("value outside declared feature bounds");
  double mapped = std::ceil(domain.L + (x - lower) / (upper - lower) * (domain.R - domain.L));
  int v = static_cast<int>(mapped);
  return std::clamp(v, domain.L, domain.R);
}

std::vector<std::uint32_t> ordinalize(const std::vector<int>& values) {
  if (values.empty()) throw DataError("cannot ordinalize an empty sequence");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<std::uint32_t> ranks(values.size());
  for (std::size_t r = 0; r < idx.size(); ++r)
    ranks[idx[r]] = static_cast<std::uint32_t>(r + 1);
  return ranks;
}

}  // namespace opboost
