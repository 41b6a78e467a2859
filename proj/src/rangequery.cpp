#include "opboost/rangequery.hpp"

#include <algorithm>

#include "opboost/errors.hpp"

namespace opboost {

QuerySet generate_queries(const MappedDomain& domain, std::size_t count, SeededRng& rng) {
  if (count < 1) throw ConfigError("generate_queries: count must be positive");
  QuerySet qs;
  qs.ranges.reserve(count);
  std::uint64_t size = static_cast<std::uint64_t>(domain.size());
  for (std::size_t i = 0; i < count; ++i) {
    int lo = domain.L + static_cast<int>(rng.uniform_int(size));
    int hi = domain.L + static_cast<int>(rng.uniform_int(size));
    if (lo > hi) std::swap(lo, hi);
    qs.ranges.emplace_back(lo, hi);
  }
  return qs;
}

double range_query_mse(const std::vector<int>& true_values,
                       const std::vector<int>& desensitized_values,
                       const QuerySet& queries) {
  if (true_values.empty() || desensitized_values.empty())
    throw DataError("range_query_mse: empty value sequence");
  if (true_values.size() != desensitized_values.size())
    throw DataError("range_query_mse: sequence length mismatch");
  if (queries.ranges.empty()) throw DataError("range_query_mse: empty query set");

  int lo = true_values[0], hi = true_values[0];
  auto widen = [&](int v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (int v : true_values) widen(v);
  for (int v : desensitized_values) widen(v);
  for (const auto& [qlo, qhi] : queries.ranges) {
    if (qlo > qhi) throw DataError("range_query_mse: inverted query range");
    widen(qlo);
    widen(qhi);
  }

  // prefix[v - lo + 1] = how many values are <= v
  std::size_t width = static_cast<std::size_t>(hi - lo + 1);
  std::vector<std::size_t> pt(width + 1, 0), pd(width + 1, 0);
  for (int v : true_values) ++pt[static_cast<std::size_t>(v - lo + 1)];
  for (int v : desensitized_values) ++pd[static_cast<std::size_t>(v - lo + 1)];
  for (std::size_t i = 1; i <= width; ++i) {
    pt[i] += pt[i - 1];
    pd[i] += pd[i - 1];
  }

  double n = static_cast<double>(true_values.size());
  double acc = 0.0;
  for (const auto& [qlo, qhi] : queries.ranges) {
    double ft = static_cast<double>(pt[static_cast<std::size_t>(qhi - lo + 1)] -
                                    pt[static_cast<std::size_t>(qlo - lo)]) /
                n;
    double fd = static_cast<double>(pd[static_cast<std::size_t>(qhi - lo + 1)] -
                                    pd[static_cast<std::size_t>(qlo - lo)]) /
                n;
    acc += (ft - fd) * (ft - fd);
  }
  return acc / static_cast<double>(queries.ranges.size());
}

}  // namespace opboost
