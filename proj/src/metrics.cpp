#include "opboost/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "opboost/audit.hpp"
#include "opboost/errors.hpp"

namespace opboost {

namespace {

constexpr std::size_t kKendallSizeGuard = 50000;

double sgn(double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); }

// 1-based ordinal ranks of r, ties broken by index (stable)
std::vector<double> ordinal_ranks(const std::vector<double>& r) {
  std::vector<std::size_t> idx(r.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
  std::vector<double> rank(r.size());
  for (std::size_t pos = 0; pos < idx.size(); ++pos)
    rank[idx[pos]] = static_cast<double>(pos + 1);
  return rank;
}

}  // namespace

double weighted_kendall(const std::vector<double>& r, const std::vector<double>& s,
                        const std::function<double(std::size_t, std::size_t)>& w) {
  if (r.size() != s.size()) throw DataError("weighted_kendall: length mismatch");
  if (r.size() < 2) throw DataError("weighted_kendall: need at least two elements");
  if (r.size() > kKendallSizeGuard)
    throw DataError("weighted_kendall: sequence too long for quadratic pair scan");
  double rs = 0.0, rr = 0.0, ss = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size(); ++j) {
      double wij = w(i, j);
      double sr = sgn(r[i] - r[j]);
      double sv = sgn(s[i] - s[j]);
      rs += sr * sv * wij;
      rr += sr * sr * wij;
      ss += sv * sv * wij;
    }
  }
  if (rr <= 0.0 || ss <= 0.0)
    throw DataError("weighted_kendall: undefined for a constant sequence");
  // sqrt of the product (not product of sqrts) so identical/negated inner
  // products give exactly +/-1
  return rs / std::sqrt(rr * ss);
}

double weighted_kendall(const std::vector<double>& r, const std::vector<double>& s) {
  if (r.size() != s.size()) throw DataError("weighted_kendall: length mismatch");
  std::vector<double> rank = ordinal_ranks(r);
  return weighted_kendall(
      r, s, [&rank](std::size_t i, std::size_t j) { return std::abs(rank[i] - rank[j]); });
}

double order_preserving_prob_exact(const MechanismSpec& spec, int x1, int x2) {
  if (x1 >= x2) throw ConfigError("order_preserving_prob_exact: needs x1 < x2");
  Pmf p1 = exact_pmf(spec, x1);
  Pmf p2 = exact_pmf(spec, x2);
  // disjoint supports with all of p1 below p2 preserve order with certainty;
  // return exactly 1 instead of a rounded sum
  int hi1 = p1.lo - 1, lo2 = p2.hi() + 1;
  for (int o = p1.lo; o <= p1.hi(); ++o)
    if (p1.at(o) > 0.0) hi1 = o;
  for (int o = p2.hi(); o >= p2.lo; --o)
    if (p2.at(o) > 0.0) lo2 = o;
  if (hi1 < lo2) return 1.0;
  double prob = 0.0;
  // Pr[o2 > o1] = sum_o2 Pr[o2] * Pr[o1 < o2]
  for (int o2 = p2.lo; o2 <= p2.hi(); ++o2) {
    double mass = p2.at(o2);
    if (mass == 0.0) continue;
    prob += mass * p1.cdf_at(o2 - 1);
  }
  return prob;
}

double gamma_bound_global(int t, double epsilon, int domain_size) {
  if (t < 1 || t > domain_size - 1) throw ConfigError("gamma_bound_global: t out of range");
  double q = std::exp(-epsilon / 2.0);
  double num = ((1.0 - q * q) * t + 1.0) * std::pow(q, t);
  double den = (1.0 + q - std::pow(q, t + 1) - std::pow(q, domain_size - t)) * (1.0 + q);
  return 1.0 - num / den;
}

double gamma_bound_grr(int t, double epsilon, int domain_size) {
  if (t < 1 || t > domain_size - 1) throw ConfigError("gamma_bound_grr: t out of range");
  double D = static_cast<double>(domain_size);
  double e = std::exp(epsilon);
  double p1 = e / (D + e - 1.0);
  double p2 = 1.0 / (D + e - 1.0);
  return p1 * p1 + p1 * p2 * (D - 3.0) + p2 * p2 * (0.5 * D * (D - 3.0) + 2.0) +
         p2 * (p1 - p2) * t;
}

double gamma_bound_adj(int t, double epsilon_prt, int theta, int k) {
  if (t < 1 || theta < 1 || k < 1) throw ConfigError("gamma_bound_adj: bad parameters");
  int T = t / theta;  // whole partitions separating the pair
  if (T > k - 1) throw ConfigError("gamma_bound_adj: distance exceeds partition count");
  double q = std::exp(-epsilon_prt / 2.0);
  // Denominator keeps only the k-free terms (the k -> infinity form). The
  // finite-k tail correction makes the bound needlessly loose, and the limit
  // form is the variant the exhaustive bound-vs-exact sweeps validate.
  double qa = ((1.0 - q * q) * T + 1.0) / ((1.0 + q - std::pow(q, T + 1)) * (1.0 + q));
  double qb = (1.0 - q) * (1.0 - q) * (T + 1.0) / (2.0 * (1.0 + q) * (1.0 + q));
  return 1.0 - std::pow(q, T) * (qa - qb);
}

double beta_split_probability(const SplitScenario& scenario) {
  const MechanismSpec& spec = scenario.mechanism;
  const MappedDomain& d = spec.domain;
  const std::vector<int>& v = scenario.values;
  if (v.empty()) throw DataError("beta_split_probability: empty scenario");
  if (v.size() > 25) throw DataError("beta_split_probability: scenario too large for exact evaluation");
  if (!d.contains(scenario.split_point))
    throw DataError("beta_split_probability: split point outside domain");

  std::vector<std::size_t> left, right;
  for (std::size_t i = 0; i < v.size(); ++i)
    (v[i] <= scenario.split_point ? left : right).push_back(i);
  if (left.empty()) throw DataError("beta_split_probability: no values left of the split");

  // per-value cdf tables, indexed [value][o - L]
  std::vector<std::vector<double>> cdfs(v.size());
  std::vector<Pmf> pmfs(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    pmfs[i] = exact_pmf(spec, v[i]);
    cdfs[i] = pmfs[i].cdf();
  }
  auto cdf_at = [&](std::size_t i, int o) -> double {
    if (o < d.L) return 0.0;
    if (o > d.R) return 1.0;
    return cdfs[i][static_cast<std::size_t>(o - d.L)];
  };

  // sum over which left value realizes the left max x#, and where x# lands
  double beta = 0.0;
  for (std::size_t kidx : left) {
    for (int xs = d.L; xs <= d.R; ++xs) {
      double term = pmfs[kidx].at(xs);
      if (term == 0.0) continue;
      for (std::size_t j : left)
        if (j != kidx) term *= cdf_at(j, xs);
      for (std::size_t j : right) term *= 1.0 - cdf_at(j, xs);
      beta += term;
    }
  }
  return beta;
}

}  // namespace opboost
