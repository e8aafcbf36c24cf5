#include "chaosflow/core/monte_carlo.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace chaosflow::core {

double combined_se(const Estimate& a, const Estimate& b) {
  return std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) {
  return splitmix64(splitmix64(seed) ^ (chunk * 0xD1B54A32D192ED03ULL + 1));
}

std::size_t worker_count() {
  std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CHAOSFLOW_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) hw = std::min(hw, static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      // malformed value: keep the hardware default
    }
  }
  return hw;
}

namespace {

struct ChunkStats {
  std::vector<double> mean;
  std::vector<double> m2;
  std::size_t n = 0;
};

}  // namespace

std::vector<Estimate> mc_estimate(std::size_t n, std::uint64_t seed, std::size_t outputs,
                                  const std::function<void(Rng&, std::span<double>)>& sample) {
  if (n == 0) throw std::invalid_argument("mc_estimate: need at least one sample");
  if (outputs == 0) throw std::invalid_argument("mc_estimate: need at least one output");
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<ChunkStats> stats(chunks);
  auto run_chunk = [&](std::size_t c) {
    Rng rng(chunk_seed(seed, c));
    const std::size_t cnt = std::min(kChunkSize, n - c * kChunkSize);
    ChunkStats st;
    st.mean.assign(outputs, 0.0);
    st.m2.assign(outputs, 0.0);
    std::vector<double> out(outputs);
    for (std::size_t i = 0; i < cnt; ++i) {
      std::fill(out.begin(), out.end(), 0.0);
      sample(rng, out);
      const double k = static_cast<double>(i + 1);
      for (std::size_t o = 0; o < outputs; ++o) {
        const double d = out[o] - st.mean[o];
        st.mean[o] += d / k;
        st.m2[o] += d * (out[o] - st.mean[o]);
      }
    }
    st.n = cnt;
    stats[c] = std::move(st);
  };
  const std::size_t workers = std::min(worker_count(), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < chunks; c = next++) run_chunk(c);
      });
    }
    for (auto& t : pool) t.join();
  }
  // Chan et al. pairwise merge, always in chunk order.
  std::vector<double> mean(outputs, 0.0);
  std::vector<double> m2(outputs, 0.0);
  double count = 0.0;
  for (const auto& st : stats) {
    const double nb = static_cast<double>(st.n);
    const double tot = count + nb;
    for (std::size_t o = 0; o < outputs; ++o) {
      const double d = st.mean[o] - mean[o];
      mean[o] += d * nb / tot;
      m2[o] += st.m2[o] + d * d * count * nb / tot;
    }
    count = tot;
  }
  std::vector<Estimate> est(outputs);
  for (std::size_t o = 0; o < outputs; ++o) {
    const double var = n > 1 ? m2[o] / (count - 1.0) : 0.0;
    est[o] = {mean[o], std::sqrt(std::max(var, 0.0) / count), n};
  }
  return est;
}

Estimate mc_estimate(std::size_t n, std::uint64_t seed, const std::function<double(Rng&)>& sample) {
  return mc_estimate(n, seed, 1, [&](Rng& rng, std::span<double> out) { out[0] = sample(rng); })[0];
}

}  // namespace chaosflow::core
