#pragma once

#include <cstdint>
#include <random>

#include "latentlab/linalg.hpp"

namespace latentlab {

// Mixes a master seed with a stream index (splitmix64 finalizer). Used to give
// every sample, cell and classifier its own seed so results do not depend on
// evaluation order or thread count.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next_u64() { return engine_(); }
  // Standard normal vector, the latent prior.
  Vec normal_vec(std::size_t dim);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace latentlab
