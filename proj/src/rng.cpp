#include "latentlab/rng.hpp"

namespace latentlab {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vec Rng::normal_vec(std::size_t dim) {
  Vec v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = normal();
  return v;
}

}  // namespace latentlab
