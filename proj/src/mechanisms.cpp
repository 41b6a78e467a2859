#include "opboost/mechanisms.hpp"

#include <algorithm>
#include <cmath>

#include "opboost/errors.hpp"

namespace opboost {

namespace {

void require_in(int x, int a, int b, const char* what) {
  if (x < a || x > b) throw DataError(std::string(what) + ": value outside range");
}

// geometric on {0,1,2,...} with Pr[G=g] = (1-r) r^g, via inverse CDF
long long sample_geometric(double r, SeededRng& rng) {
  if (r <= 0.0) return 0;
  double u;
  do {
    u = rng.uniform();
  } while (u <= 0.0);
  return static_cast<long long>(std::floor(std::log(u) / std::log(r)));
}

}  // namespace

BudgetSplit split_budget(double epsilon, double alpha, int theta, int domain_size) {
  if (!(epsilon > 0.0)) throw ConfigError("split_budget: epsilon must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ConfigError("split_budget: alpha must be positive and finite");
  if (theta < 1) throw ConfigError("split_budget: theta must be a positive integer");
  if (domain_size < 1) throw ConfigError("split_budget: domain_size must be positive");
  BudgetSplit b;
  b.epsilon = epsilon;
  b.alpha = alpha;
  b.theta = theta;
  b.epsilon_ner = epsilon / (alpha + static_cast<double>(theta) / domain_size);
  b.epsilon_prt = alpha * theta * b.epsilon_ner;
  return b;
}

Pmf global_map_pmf(int x, double epsilon, int a, int b) {
  if (a > b) throw ConfigError("global_map_pmf: empty range");
  require_in(x, a, b, "global_map_pmf");
  if (epsilon < 0.0) throw ConfigError("global_map_pmf: negative epsilon");
  std::vector<double> w(static_cast<std::size_t>(b - a + 1), 0.0);
  if (std::isinf(epsilon)) {
    w[static_cast<std::size_t>(x - a)] = 1.0;
    Pmf pmf;
    pmf.lo = a;
    pmf.probs = std::move(w);
    return pmf;
  }
  for (int i = a; i <= b; ++i)
    w[static_cast<std::size_t>(i - a)] = std::exp(-std::abs(x - i) * epsilon / 2.0);
  return pmf_from_weights(a, std::move(w));
}

int global_map(int x, double epsilon, const MappedDomain& domain, SeededRng& rng,
               SamplerBackend backend) {
  require_in(x, domain.L, domain.R, "global_map");
  if (std::isinf(epsilon)) return x;
  if (backend == SamplerBackend::BoundedDiscreteLaplace)
    return bounded_dlap_sample(x, 2.0 / epsilon, domain.L, domain.R, rng);
  return global_map_pmf(x, epsilon, domain.L, domain.R).sample(rng);
}

Pmf adj_map_partition_pmf(int x, double epsilon_prt, const MappedDomain& domain) {
  int m = domain.home_partition(x);
  if (epsilon_prt < 0.0) throw ConfigError("adj_map_partition_pmf: negative epsilon_prt");
  if (std::isinf(epsilon_prt)) {
    std::vector<double> w(static_cast<std::size_t>(domain.k), 0.0);
    w[static_cast<std::size_t>(m - 1)] = 1.0;
    Pmf pmf;
    pmf.lo = 1;
    pmf.probs = std::move(w);
    return pmf;
  }
  std::vector<double> w(static_cast<std::size_t>(domain.k));
  for (int i = 1; i <= domain.k; ++i)
    w[static_cast<std::size_t>(i - 1)] = std::exp(-std::abs(m - i) * epsilon_prt / 2.0);
  return pmf_from_weights(1, std::move(w));
}

namespace {

// the in-partition draw shared by adj_map and local_map; weights centered at x
// restricted to [lo, hi] equal weights centered at clamp(x) since the constant
// factor e^{-dist(x, partition) * eps / 2} cancels in normalization
int partition_draw(int x, double epsilon_ner, int lo, int hi, SeededRng& rng,
                   SamplerBackend backend) {
  int c = std::clamp(x, lo, hi);
  if (std::isinf(epsilon_ner)) return c;
  if (backend == SamplerBackend::BoundedDiscreteLaplace)
    return bounded_dlap_sample(c, 2.0 / epsilon_ner, lo, hi, rng);
  return global_map_pmf(c, epsilon_ner, lo, hi).sample(rng);
}

}  // namespace

int adj_map(int x, const BudgetSplit& budget, const MappedDomain& domain, SeededRng& rng,
            SamplerBackend backend) {
  require_in(x, domain.L, domain.R, "adj_map");
  int m_hat;
  if (std::isinf(budget.epsilon_prt)) {
    m_hat = domain.home_partition(x);
  } else if (backend == SamplerBackend::BoundedDiscreteLaplace) {
    m_hat = bounded_dlap_sample(domain.home_partition(x), 2.0 / budget.epsilon_prt, 1,
                                domain.k, rng);
  } else {
    m_hat = adj_map_partition_pmf(x, budget.epsilon_prt, domain).sample(rng);
  }
  auto [lo, hi] = domain.partition_bounds(m_hat);
  return partition_draw(x, budget.epsilon_ner, lo, hi, rng, backend);
}

int local_map(int x, double epsilon_ner, const MappedDomain& domain, SeededRng& rng,
              SamplerBackend backend) {
  require_in(x, domain.L, domain.R, "local_map");
  auto [lo, hi] = domain.partition_bounds(domain.home_partition(x));
  return partition_draw(x, epsilon_ner, lo, hi, rng, backend);
}

Pmf grr_pmf(int x, double epsilon, int a, int b) {
  if (a > b) throw ConfigError("grr_pmf: empty range");
  require_in(x, a, b, "grr_pmf");
  if (epsilon < 0.0) throw ConfigError("grr_pmf: negative epsilon");
  std::size_t n = static_cast<std::size_t>(b - a + 1);
  Pmf pmf;
  pmf.lo = a;
  pmf.probs.assign(n, 0.0);
  if (std::isinf(epsilon)) {
    pmf.probs[static_cast<std::size_t>(x - a)] = 1.0;
    return pmf;
  }
  double e = std::exp(epsilon);
  double denom = static_cast<double>(n) + e - 1.0;
  double p1 = e / denom;
  double p2 = 1.0 / denom;
  pmf.probs.assign(n, p2);
  pmf.probs[static_cast<std::size_t>(x - a)] = p1;
  return pmf;
}

int grr(int x, double epsilon, const MappedDomain& domain, SeededRng& rng) {
  require_in(x, domain.L, domain.R, "grr");
  if (std::isinf(epsilon)) return x;
  if (epsilon < 0.0) throw ConfigError("grr: negative epsilon");
  double n = static_cast<double>(domain.size());
  double e = std::exp(epsilon);
  double p1 = e / (n + e - 1.0);
  if (rng.uniform() < p1) return x;
  // uniform over the other n-1 values
  int off = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(domain.size() - 1)));
  int v = domain.L + off;
  if (v >= x) ++v;
  return v;
}

long long dlap_sample(double lambda, SeededRng& rng) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError("dlap_sample: lambda must be positive and finite");
  double r = std::exp(-1.0 / lambda);
  return sample_geometric(r, rng) - sample_geometric(r, rng);
}

Pmf bounded_dlap_pmf(double lambda, int l, int u) {
  if (l > u) throw ConfigError("bounded_dlap_pmf: l > u");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError("bounded_dlap_pmf: lambda must be positive and finite");
  double r = std::exp(-1.0 / lambda);
  double one_minus_r = -std::expm1(-1.0 / lambda);
  // normalizer of r^{|z| - zmin} over z in [l, u], where zmin is the smallest
  // |z| in the window; closed geometric sums, split by where 0 sits
  int zmin;
  double norm;
  if (l <= 0 && 0 <= u) {
    zmin = 0;
    norm = (1.0 - std::exp(-(u + 1.0) / lambda) + r - std::exp(-(1.0 - l) / lambda)) /
           one_minus_r;
  } else {
    zmin = std::min(std::abs(l), std::abs(u));
    norm = (1.0 - std::exp(-(u - l + 1.0) / lambda)) / one_minus_r;
  }
  Pmf pmf;
  pmf.lo = l;
  pmf.probs.resize(static_cast<std::size_t>(u - l + 1));
  for (int z = l; z <= u; ++z)
    pmf.probs[static_cast<std::size_t>(z - l)] =
        std::exp(-(std::abs(z) - zmin) / lambda) / norm;
  return pmf;
}

int bounded_dlap_sample(int center, double lambda, int l, int u, SeededRng& rng,
                        int max_retries) {
  if (l > u) throw ConfigError("bounded_dlap_sample: l > u");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError("bounded_dlap_sample: lambda must be positive and finite");
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    long long z = center + dlap_sample(lambda, rng);
    if (z >= l && z <= u) return static_cast<int>(z);
  }
  // exact same distribution, guaranteed to terminate
  Pmf pmf = bounded_dlap_pmf(lambda, l - center, u - center);
  return center + pmf.sample(rng);
}

SamplerBackend default_backend(const MappedDomain& domain) {
  return domain.size() <= 4096 ? SamplerBackend::ExactExponential
                               : SamplerBackend::BoundedDiscreteLaplace;
}

MechanismSpec MechanismSpec::global_map(double epsilon, const MappedDomain& domain) {
  if (!(epsilon > 0.0)) throw ConfigError("mechanism: epsilon must be positive");
  MechanismSpec s;
  s.kind = MechanismKind::GlobalMap;
  s.domain = domain;
  s.budget.epsilon = epsilon;
  s.sampler = default_backend(domain);
  return s;
}

MechanismSpec MechanismSpec::adj_map(double epsilon, double alpha, const MappedDomain& domain) {
  MechanismSpec s;
  s.kind = MechanismKind::AdjMap;
  s.domain = domain;
  s.budget = std::isinf(epsilon)
                 ? BudgetSplit{epsilon, alpha, domain.theta, epsilon, epsilon}
                 : split_budget(epsilon, alpha, domain.theta, domain.size());
  s.sampler = default_backend(domain);
  return s;
}

MechanismSpec MechanismSpec::local_map(double epsilon, double alpha, const MappedDomain& domain) {
  MechanismSpec s = adj_map(epsilon, alpha, domain);
  s.kind = MechanismKind::LocalMap;
  return s;
}

MechanismSpec MechanismSpec::grr(double epsilon, const MappedDomain& domain) {
  if (!(epsilon >= 0.0)) throw ConfigError("mechanism: epsilon must be non-negative");
  MechanismSpec s;
  s.kind = MechanismKind::GRR;
  s.domain = domain;
  s.budget.epsilon = epsilon;
  s.sampler = default_backend(domain);
  return s;
}

int desensitize(int x, const MechanismSpec& spec, SeededRng& rng) {
  switch (spec.kind) {
    case MechanismKind::GlobalMap:
      return global_map(x, spec.budget.epsilon, spec.domain, rng, spec.sampler);
    case MechanismKind::AdjMap:
      return adj_map(x, spec.budget, spec.domain, rng, spec.sampler);
    case MechanismKind::LocalMap:
      return local_map(x, spec.budget.epsilon_ner, spec.domain, rng, spec.sampler);
    case MechanismKind::GRR:
      return opboost::grr(x, spec.budget.epsilon, spec.domain, rng);
  }
  throw ConfigError("desensitize: unknown mechanism kind");
}

std::vector<int> desensitize(const std::vector<int>& xs, const MechanismSpec& spec,
                             SeededRng& rng) {
  std::vector<int> out;
  out.reserve(xs.size());
  for (int x : xs) out.push_back(desensitize(x, spec, rng));
  return out;
}

}  // namespace opboost
