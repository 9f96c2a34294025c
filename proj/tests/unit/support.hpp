#pragma once

// Small hand-built models and worlds shared by the unit tests.

#include <cmath>
#include <string>
#include <vector>

#include "latentlab/diffcore.hpp"
#include "latentlab/rng.hpp"
#include "latentlab/synthworld.hpp"

namespace testsupport {

using namespace latentlab;

inline DiffModel logistic(const Vec& w, double b = 0.0) {
  return DiffModel({Layer{Matrix(1, w.dim(), w.values()), Vec{b}, Activation::sigmoid}});
}

inline DiffModel linear_map(const Matrix& m) {
  return DiffModel({Layer{m, Vec(m.rows()), Activation::identity}});
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(r, c) = scale * rng.normal() / std::sqrt(static_cast<double>(cols));
  return m;
}

// Dense chain with the given layer widths and activations.
inline DiffModel random_mlp(const std::vector<std::size_t>& dims,
                            const std::vector<Activation>& acts, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    Vec b(dims[i + 1]);
    for (std::size_t j = 0; j < b.dim(); ++j) b[j] = 0.3 * rng.normal();
    layers.push_back({random_matrix(dims[i + 1], dims[i], rng), b, acts[i]});
  }
  return DiffModel(std::move(layers));
}

inline DiffModel random_classifier(std::size_t in, std::size_t hidden, std::uint64_t seed) {
  return random_mlp({in, hidden, 1}, {Activation::tanh, Activation::sigmoid}, seed);
}

// tanh branch plus a linear skip, like the constructed generators.
inline DiffModel random_generator(std::size_t latent, std::size_t hidden, std::size_t obs,
                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Layer> layers;
  layers.push_back({random_matrix(hidden, latent, rng), Vec(hidden, 0.1), Activation::tanh});
  layers.push_back({random_matrix(obs, hidden, rng, 0.5), Vec(obs), Activation::identity});
  return DiffModel(std::move(layers), random_matrix(obs, latent, rng, 2.0));
}

inline AttributeSpec spec(const std::string& name, Vec g, double bias = 0.0) {
  const double n = norm(g);
  g *= 1.0 / n;
  return {name, g, bias};
}

inline WorldConfig config_for(const std::vector<AttributeSpec>& attrs, std::size_t latent,
                              std::size_t obs) {
  WorldConfig c;
  c.latent_dim = latent;
  c.obs_dim = obs;
  for (const auto& a : attrs) c.attributes.push_back({a.name, a.oracle_bias});
  return c;
}

// Identity generator with logistic classifiers H_i(x) = sigma(w_i . x) whose
// oracles are the same hyperplanes.
inline World identity_world(const std::vector<std::pair<std::string, Vec>>& weights) {
  const std::size_t dim = weights.front().second.dim();
  std::vector<AttributeSpec> attrs;
  std::vector<DiffModel> clf;
  for (const auto& [name, w] : weights) {
    attrs.push_back(spec(name, w));
    clf.push_back(logistic(w));
  }
  WorldConfig c = config_for(attrs, dim, dim);
  c.generator_kind = GeneratorKind::linear;
  return World(c, attrs, linear_map(Matrix::identity(dim)), clf, clf);
}

// Untrained nonlinear world: random generator, random tanh classifiers. The
// evaluation set repeats the editing set.
inline World random_nonlinear_world(std::size_t attributes, std::uint64_t seed,
                                    std::size_t latent = 6, std::size_t obs = 10) {
  std::vector<AttributeSpec> attrs;
  std::vector<DiffModel> edit;
  Rng rng(seed);
  for (std::size_t a = 0; a < attributes; ++a) {
    attrs.push_back(spec("attr" + std::to_string(a), rng.normal_vec(latent)));
    edit.push_back(random_classifier(obs, 5, derive_seed(seed, 100 + a)));
  }
  return World(config_for(attrs, latent, obs), attrs,
               random_generator(latent, 8, obs, derive_seed(seed, 1)), edit, edit);
}

// Small trained linear world with logistic classifiers and orthogonal oracles.
inline WorldConfig small_linear_config(std::uint64_t seed = 1) {
  WorldConfig c = unbiased_world_config(GeneratorKind::linear);
  c.latent_dim = 8;
  c.obs_dim = 12;
  c.classifiers.edit_arch = {{}, Activation::tanh};
  c.classifiers.eval_arch = {{}, Activation::tanh};
  c.classifiers.train_samples = 2000;
  c.classifiers.epochs = 300;
  c.seed = seed;
  return c;
}

}  // namespace testsupport
