#pragma once

#include "opboost/domain.hpp"
#include "opboost/pmf.hpp"
#include "opboost/rng.hpp"

namespace opboost {

enum class SamplerBackend { ExactExponential, BoundedDiscreteLaplace };

enum class MechanismKind { GlobalMap, AdjMap, LocalMap, GRR };

// Total budget epsilon split between the partition step and the in-partition
// step: epsilon_prt = alpha * theta * epsilon_ner and
// epsilon_ner = epsilon / (alpha + theta / domain_size).
struct BudgetSplit {
  double epsilon = 0.0;
  double alpha = 1.0;
  int theta = 1;
  double epsilon_prt = 0.0;
  double epsilon_ner = 0.0;
};

BudgetSplit split_budget(double epsilon, double alpha, int theta, int domain_size);

// pmf over [a, b] with entry i proportional to e^{-|x-i| * epsilon / 2}
Pmf global_map_pmf(int x, double epsilon, int a, int b);

int global_map(int x, double epsilon, const MappedDomain& domain, SeededRng& rng,
               SamplerBackend backend = SamplerBackend::ExactExponential);

// pmf over partition indices [1, k], entry i proportional to
// e^{-|m-i| * epsilon_prt / 2} where m is x's home partition
Pmf adj_map_partition_pmf(int x, double epsilon_prt, const MappedDomain& domain);

// two-stage draw: noisy partition with epsilon_prt, then the in-partition
// exponential draw with epsilon_ner
int adj_map(int x, const BudgetSplit& budget, const MappedDomain& domain, SeededRng& rng,
            SamplerBackend backend = SamplerBackend::ExactExponential);

// deterministic home partition, in-partition exponential draw with epsilon_ner
int local_map(int x, double epsilon_ner, const MappedDomain& domain, SeededRng& rng,
              SamplerBackend backend = SamplerBackend::ExactExponential);

// keep x with p1 = e^eps / (D + e^eps - 1), else uniform over the others
Pmf grr_pmf(int x, double epsilon, int a, int b);

int grr(int x, double epsilon, const MappedDomain& domain, SeededRng& rng);

// unbounded discrete Laplace: Pr[Z=z] = (e^{1/l}-1)/(e^{1/l}+1) * e^{-|z|/l},
// drawn as the difference of two geometric variates; O(1) expected time
long long dlap_sample(double lambda, SeededRng& rng);

// discrete Laplace centered at 0, truncated to [l, u] and renormalized exactly
Pmf bounded_dlap_pmf(double lambda, int l, int u);

// center + dlap_sample until inside [l, u]; after max_retries rejections falls
// back to an inverse-CDF draw from the exact truncated pmf (same distribution)
int bounded_dlap_sample(int center, double lambda, int l, int u, SeededRng& rng,
                        int max_retries = 1000);

// A mechanism identity plus everything needed to run it.
struct MechanismSpec {
  MechanismKind kind = MechanismKind::GlobalMap;
  MappedDomain domain;
  BudgetSplit budget;  // GlobalMap/GRR use only budget.epsilon
  SamplerBackend sampler = SamplerBackend::ExactExponential;

  static MechanismSpec global_map(double epsilon, const MappedDomain& domain);
  static MechanismSpec adj_map(double epsilon, double alpha, const MappedDomain& domain);
  static MechanismSpec local_map(double epsilon, double alpha, const MappedDomain& domain);
  static MechanismSpec grr(double epsilon, const MappedDomain& domain);
};

SamplerBackend default_backend(const MappedDomain& domain);

int desensitize(int x, const MechanismSpec& spec, SeededRng& rng);
std::vector<int> desensitize(const std::vector<int>& xs, const MechanismSpec& spec,
                             SeededRng& rng);

}  // namespace opboost
