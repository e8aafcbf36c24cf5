#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace chaosflow::core {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

// Combined standard error of the difference of two independent estimates.
double combined_se(const Estimate& a, const Estimate& b);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double normal() { return nd_(eng_); }
  double uniform() { return ud_(eng_); }
  void fill_normal(std::span<double> out) {
    for (double& x : out) x = nd_(eng_);
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> nd_{0.0, 1.0};
  std::uniform_real_distribution<double> ud_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);
// Seed of chunk c for a run with the given seed.
std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk);
// Worker threads, capped by CHAOSFLOW_THREADS when set.
std::size_t worker_count();

inline constexpr std::size_t kChunkSize = 1024;

// Averages `outputs` statistics over n samples. Samples are drawn in chunks
// of kChunkSize, chunk c using Rng(chunk_seed(seed, c)); chunk results are
// merged in chunk order, so the estimate does not depend on the thread count.
std::vector<Estimate> mc_estimate(std::size_t n, std::uint64_t seed, std::size_t outputs,
                                  const std::function<void(Rng&, std::span<double>)>& sample);

Estimate mc_estimate(std::size_t n, std::uint64_t seed, const std::function<double(Rng&)>& sample);

}  // namespace chaosflow::core
