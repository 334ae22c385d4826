#pragma once

#include <cstdint>
#include <random>

namespace zeno_schur {

/// SplitMix64 finalizer. Good avalanche on consecutive inputs, so it can turn
/// (seed, index) tuples into well separated engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the private stream owned by trajectory `traj` of grid cell `cell`.
/// Depends only on the tuple, never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell,
                                    std::uint64_t traj) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ splitmix64(cell + 0x632BE59BD9B4E019ULL));
  h = splitmix64(h ^ splitmix64(traj + 0x85157AF5ULL));
  return h;
}

/// A reproducible random stream: same seed, same sequence of draws.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace zeno_schur
