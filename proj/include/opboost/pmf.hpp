#pragma once

#include <vector>

#include "opboost/rng.hpp"

namespace opboost {

// Exact probability mass function over a contiguous integer range
// [lo, lo + probs.size() - 1]. The object every audit and oracle works on.
struct Pmf {
  int lo = 0;
  std::vector<double> probs;

  int hi() const { return lo + static_cast<int>(probs.size()) - 1; }

  // probability of value v; zero outside the stored range
  double at(int v) const {
    if (v < lo || v > hi()) return 0.0;
    return probs[static_cast<std::size_t>(v - lo)];
  }

  // running sums; last entry is the total mass (1 within fp error)
  std::vector<double> cdf() const;

  // P[X <= v], zero below the range, total mass above it
  double cdf_at(int v) const;

  // inverse-CDF draw
  int sample(SeededRng& rng) const;

  // half L1 distance against another pmf (union of supports)
  double total_variation(const Pmf& other) const;

  // divides by the current sum; call after filling unnormalized weights
  void normalize();
};

// pmf proportional to the given non-negative weights over [lo, ...]
Pmf pmf_from_weights(int lo, std::vector<double> weights);

}  // namespace opboost
