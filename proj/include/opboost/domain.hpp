#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace opboost {

// The unified discrete value domain [L, R] all features are mapped into,
// plus its partition layout: k = ceil(|domain| / theta) partitions of length
// theta, the last one allowed to be shorter when theta does not divide evenly.
struct MappedDomain {
  int L = 0;
  int R = 0;
  int theta = 1;
  int k = 1;

  static MappedDomain create(int L, int R, int theta);

  int size() const { return R - L + 1; }

  bool contains(int x) const { return x >= L && x <= R; }

  // 1-based index of the partition containing x
  int home_partition(int x) const;

  // inclusive bounds of partition m (1-based)
  std::pair<int, int> partition_bounds(int m) const;
};

// Maps a raw value from its declared feature bounds into [L, R]:
// ceil(L + (x - lower)/(upper - lower) * (R - L)), clamped into the domain
// (only x = lower actually needs the clamp, up to L).
int map_value(double x, double lower, double upper, const MappedDomain& domain);

// Assigns 1-based ordinal ranks; ties broken by original index (stable), so
// the result is always a permutation of 1..n.
std::vector<std::uint32_t> ordinalize(const std::vector<int>& values);

}  // namespace opboost
