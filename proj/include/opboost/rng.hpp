#pragma once

#include <cstdint>
#include <random>

namespace opboost {

// Explicitly seeded RNG. Same seed + same call sequence => same outputs,
// which is what makes experiment runs and protocol transcripts reproducible.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0, 1)
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng_);
  }

  // uniform integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
  }

  std::uint64_t next_u64() { return eng_(); }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace opboost
