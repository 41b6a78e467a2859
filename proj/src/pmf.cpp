#include "opboost/pmf.hpp"

#include <algorithm>
#include <cmath>

#include "opboost/errors.hpp"

namespace opboost {

std::vector<double> Pmf::cdf() const {
  std::vector<double> c(probs.size());
  double run = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    run += probs[i];
    c[i] = run;
  }
  return c;
}

double Pmf::cdf_at(int v) const {
  if (v < lo) return 0.0;
  int last = std::min(v, hi());
  double run = 0.0;
  for (int i = lo; i <= last; ++i) run += probs[static_cast<std::size_t>(i - lo)];
  return run;
}

int Pmf::sample(SeededRng& rng) const {
  double u = rng.uniform();
  double run = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    run += probs[i];
    if (u < run) return lo + static_cast<int>(i);
  }
  return hi();  // u landed in the fp tail
}

double Pmf::total_variation(const Pmf& other) const {
  int a = std::min(lo, other.lo);
  int b = std::max(hi(), other.hi());
  double acc = 0.0;
  for (int v = a; v <= b; ++v) acc += std::abs(at(v) - other.at(v));
  return 0.5 * acc;
}

void Pmf::normalize() {
  double sum = 0.0;
  for (double w : probs) sum += w;
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw DataError("pmf weights do not sum to a positive finite value");
  for (double& w : probs) w /= sum;
}

Pmf pmf_from_weights(int lo, std::vector<double> weights) {
  Pmf pmf;
  pmf.lo = lo;
  pmf.probs = std::move(weights);
  pmf.normalize();
  return pmf;
}

}  // namespace opboost
