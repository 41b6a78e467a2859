#pragma once

#include <functional>
#include <vector>

#include "opboost/mechanisms.hpp"

namespace opboost {

// rank correlation where each pair contributes sgn agreement scaled by a
// weight; default weight is the ordinal distance of the pair in r
double weighted_kendall(const std::vector<double>& r, const std::vector<double>& s);
double weighted_kendall(const std::vector<double>& r, const std::vector<double>& s,
                        const std::function<double(std::size_t, std::size_t)>& w);

// Pr[output(x2) > output(x1)] computed from the exact pmfs (strict: ties
// count against preservation)
double order_preserving_prob_exact(const MechanismSpec& spec, int x1, int x2);

// closed-form lower bounds on the order-preserving probability at pair
// distance t
double gamma_bound_global(int t, double epsilon, int domain_size);
double gamma_bound_grr(int t, double epsilon, int domain_size);  // exact, not just a bound
double gamma_bound_adj(int t, double epsilon_prt, int theta, int k);

// A candidate split: which of `values` sit left of split_point, and the
// mechanism that will desensitize them.
struct SplitScenario {
  std::vector<int> values;
  int split_point = 0;
  MechanismSpec mechanism;
};

// probability-weighted count that the desensitized left group tops out at
// some x# with every desensitized right value strictly above it; computed
// exactly from per-value pmfs/cdfs
double beta_split_probability(const SplitScenario& scenario);

}  // namespace opboost
