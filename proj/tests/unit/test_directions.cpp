#include <cmath>

#include "doctest.h"
#include "latentlab/directions.hpp"
#include "latentlab/error.hpp"
#include "support.hpp"

using namespace latentlab;
using namespace testsupport;

namespace {

SemanticDirection dir(Vec v, const std::string& attr = "a") {
  return {std::move(v), attr, DirectionKind::attribute_level};
}

Vec unit(Vec v) {
  v *= 1.0 / norm(v);
  return v;
}

Vec random_unit(Rng& rng, std::size_t dim) { return unit(rng.normal_vec(dim)); }

// d H(G(z)) / dz by the chain rule: classifier gradient pulled back through G.
Vec chain_gradient(const World& w, std::size_t attr, const Vec& z) {
  const ForwardTrace g = trace(w.generator(), z);
  return backward(g, grad_input(w.edit_classifiers()[attr], g.output(), 0));
}

// Composite H(G(.)) as one scalar function for finite differences.
Vec fd_composite(const World& w, std::size_t attr, const Vec& z) {
  const double h = 1e-5;
  Vec g(z.dim());
  for (std::size_t i = 0; i < z.dim(); ++i) {
    Vec up = z, down = z;
    up[i] += h;
    down[i] -= h;
    g[i] = (forward(w.edit_classifiers()[attr], forward(w.generator(), up))[0] -
            forward(w.edit_classifiers()[attr], forward(w.generator(), down))[0]) /
           (2 * h);
  }
  return g;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoError;
}

const World& biased_world() {
  static const World w = build_world(default_world_config());
  return w;
}

}  // namespace

TEST_CASE("instance-specific direction on an identity generator") {
  const World w = identity_world({{"a", Vec{3.0, 4.0}}});
  for (const Vec& z : {Vec{0.0, 0.0}, Vec{5.0, -1.0}, Vec{-0.3, 0.2}}) {
    const auto up = instance_specific(w, "a", z, 1);
    CHECK(up.vector[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(up.vector[1] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(up.kind == DirectionKind::instance_specific);
    const auto down = instance_specific(w, "a", z, 0);
    CHECK(down.vector == -up.vector);
  }
  CHECK(kind_of([&] { instance_specific(w, "b", Vec{0.0, 0.0}, 1); }) == ErrorKind::UnknownAttribute);
}

TEST_CASE("instance-specific direction matches finite differences of H(G(z))") {
  const World w = random_nonlinear_world(2, 31);
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const Vec z = rng.normal_vec(w.latent_dim());
    for (std::size_t a = 0; a < 2; ++a) {
      const auto d = instance_specific(w, w.attributes()[a].name, z, 1);
      CHECK(1.0 - cosine(d.vector, fd_composite(w, a, z)) < 1e-4);
    }
  }
}

TEST_CASE("instance-specific direction is the normalized BCE descent direction") {
  Rng rng(41);
  for (int i = 0; i < 50; ++i) {
    const World w = random_nonlinear_world(1, 100 + i);
    const Vec z = rng.normal_vec(w.latent_dim());
    const int y = i % 2;
    const double h = forward(w.edit_classifiers()[0], forward(w.generator(), z))[0];
    REQUIRE((h > 1e-6 && h < 1 - 1e-6));
    // -dL/dz = (y/h - (1-y)/(1-h)) dH/dz
    Vec descent = chain_gradient(w, 0, z);
    descent *= y / h - (1 - y) / (1 - h);
    descent = unit(descent);
    const auto d = instance_specific(w, "attr0", z, y);
    CHECK(max_abs_diff(d.vector, descent) <= 1e-8);
    CHECK(instance_specific(w, "attr0", z, 1 - y).vector == -d.vector);
  }
}

TEST_CASE("instance-specific direction is invariant to classifier output scaling") {
  const World w = random_nonlinear_world(1, 55);
  World scaled(w.config(), w.attributes(), w.generator(),
               {w.edit_classifiers()[0].with_scaled_output_layer(3.5)}, w.eval_classifiers());
  Rng rng(55);
  for (int i = 0; i < 20; ++i) {
    const Vec z = rng.normal_vec(w.latent_dim());
    CHECK(max_abs_diff(instance_specific(w, "attr0", z, 1).vector,
                       instance_specific(scaled, "attr0", z, 1).vector) <= 1e-10);
  }
}

TEST_CASE("zero gradient is reported") {
  const World w = identity_world({{"a", Vec{1.0, 0.0}}});
  World flat(w.config(), w.attributes(), w.generator(), {logistic(Vec{0.0, 0.0})},
             w.eval_classifiers());
  CHECK(kind_of([&] { instance_specific(flat, "a", Vec{1.0, 1.0}, 1); }) == ErrorKind::ZeroGradient);
  AverageStats stats;
  CHECK(kind_of([&] { attribute_level_avg(flat, "a", 10, 1, &stats); }) == ErrorKind::EmptySampleSet);
}

TEST_CASE("attribute-level average") {
  const World w = identity_world({{"a", Vec{3.0, 4.0}}});
  for (std::size_t n : {1u, 7u, 100u}) {
    AverageStats stats;
    const auto d = attribute_level_avg(w, "a", n, 9, &stats);
    CHECK(max_abs_diff(d.vector, Vec{0.6, 0.8}) < 1e-14);
    CHECK(stats.used == n);
    CHECK(stats.skipped == 0);
    CHECK(d.kind == DirectionKind::attribute_level);
  }
  CHECK(kind_of([&] { attribute_level_avg(w, "a", 0, 1); }) == ErrorKind::EmptySampleSet);

  const World nl = random_nonlinear_world(1, 77);
  const auto d7 = attribute_level_avg(nl, "attr0", 1000, 7);
  const auto d8 = attribute_level_avg(nl, "attr0", 1000, 8);
  CHECK(cosine(d7.vector, d8.vector) >= 0.99);
  CHECK(norm(d7.vector) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("boundary normal") {
  Rng rng(12);
  std::vector<LabeledPoint> pts;
  while (pts.size() < 400) {
    Vec z = rng.normal_vec(4);
    if (std::abs(z[0]) < 0.2) continue;  // margin
    pts.push_back({z, z[0] > 0 ? 1 : 0});
  }
  const auto d = attribute_level_boundary(pts, "s");
  CHECK(1.0 - cosine(d.vector, basis_vector(4, 0)) <= 0.02);
  CHECK(d.attribute == "s");
  CHECK(norm(d.vector) == doctest::Approx(1.0).epsilon(1e-12));

  for (auto& p : pts) p.label = 1;
  CHECK(kind_of([&] { attribute_level_boundary(pts); }) == ErrorKind::DegenerateData);

  // Oracle-labelled prior samples recover the oracle normal.
  WorldConfig c = unbiased_world_config(GeneratorKind::linear);
  const auto dirs = realize_oracle_directions(c);
  std::vector<LabeledPoint> labelled;
  AttributeSpec oracle{"age", dirs[1], 0.0};
  for (int i = 0; i < 2000; ++i) {
    Vec z = rng.normal_vec(c.latent_dim);
    labelled.push_back({z, oracle_label(oracle, z)});
  }
  CHECK(cosine(attribute_level_boundary(labelled, "age").vector, dirs[1]) >= 0.98);
}

TEST_CASE("combine") {
  const auto a = dir(Vec{1.0, 0.0}), b = dir(Vec{0.0, 1.0});
  CHECK(combine(a, b, 1.0).vector == a.vector);
  CHECK(combine(a, b, 0.0).vector == b.vector);
  const auto half = combine(a, b, 0.5);
  CHECK(half.vector[0] == doctest::Approx(0.70710678).epsilon(1e-8));
  CHECK(half.vector[1] == doctest::Approx(0.70710678).epsilon(1e-8));
  CHECK(half.kind == DirectionKind::instance_aware);
  CHECK(kind_of([&] { combine(a, dir(Vec{-1.0, 0.0}), 0.5); }) == ErrorKind::DegenerateCombination);
  CHECK(kind_of([&] { combine(a, b, 1.5); }) == ErrorKind::InvalidArgument);

  // Exchanging the roles of the two inputs together with lambda.
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto x = dir(random_unit(rng, 5)), y = dir(random_unit(rng, 5));
    const double l = rng.uniform();
    const auto c1 = combine(x, y, l), c2 = combine(y, x, 1.0 - l);
    CHECK(max_abs_diff(c1.vector, c2.vector) <= 1e-12);
    CHECK(std::abs(norm(c1.vector) - 1.0) <= 1e-10);
  }
}

TEST_CASE("condition_project examples") {
  const auto primal = dir(Vec{1.0, 0.0}, "p");
  CHECK(max_abs_diff(condition_project(primal, {dir(Vec{0.0, 1.0})}).vector, Vec{1.0, 0.0}) < 1e-15);
  const double r = std::sqrt(0.5);
  const auto p = condition_project(primal, {dir(Vec{r, r})});
  CHECK(p.vector[0] == doctest::Approx(0.70710678).epsilon(1e-8));
  CHECK(p.vector[1] == doctest::Approx(-0.70710678).epsilon(1e-8));
  CHECK(p.kind == DirectionKind::conditional);
  CHECK(kind_of([&] { condition_project(primal, {dir(Vec{1.0, 0.0})}); }) ==
        ErrorKind::DegenerateProjection);
}

TEST_CASE("condition_project contract on random cases") {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const std::size_t k = 1 + i % 5;
    const std::size_t dim = k + 1 + i % 8;
    std::vector<SemanticDirection> conds;
    for (std::size_t j = 0; j < k; ++j) conds.push_back(dir(random_unit(rng, dim)));
    if (i % 4 == 0) conds.push_back(conds.front());  // exact duplicate
    const auto primal = dir(random_unit(rng, dim), "p");
    ProjectionInfo info;
    const auto d = condition_project(primal, conds, &info);
    CHECK(std::abs(norm(d.vector) - 1.0) <= 1e-10);
    for (const auto& c : conds) CHECK(std::abs(dot(d.vector, c.vector)) <= 1e-10);
    CHECK(info.retained == k);
    CHECK(info.dropped == (i % 4 == 0 ? 1u : 0u));
    const auto again = condition_project(d, conds);
    CHECK(max_abs_diff(again.vector, d.vector) <= 1e-10);
  }
}

TEST_CASE("instance-aware conditional directions") {
  const World w = random_nonlinear_world(3, 91);
  const auto set = AttributeLevelSet::estimate(w, AttributeLevelSet::Estimator::average, 200, 4);
  Rng rng(91);
  for (int i = 0; i < 10; ++i) {
    const Vec z = rng.normal_vec(w.latent_dim());
    // lambda1 = lambda2 = 1 reduces to the attribute-level conditional direction.
    const auto d = instance_aware_conditional(w, set, "attr0", {"attr1", "attr2"}, z, 1, {1.0, 1.0});
    const auto expect = condition_project(set.at(0), {set.at(1), set.at(2)});
    CHECK(max_abs_diff(d.vector, expect.vector) <= 1e-12);

    const auto mixed = instance_aware_conditional(w, set, "attr0", {"attr1"}, z, 0, {0.3, 0.6});
    CHECK(std::abs(norm(mixed.vector) - 1.0) <= 1e-10);
    const LatentProbe probe(w, z);
    const int cond_label = probe.score(w.edit_classifiers()[1]) > 0.5 ? 1 : 0;
    const auto c1 = instance_aware(w, set, 1, probe, cond_label, 0.6);
    CHECK(std::abs(dot(mixed.vector, c1.vector)) <= 1e-10);
  }
  CHECK(kind_of([&] {
          instance_aware_conditional(w, set, "attr0", {"attr0"}, Vec(w.latent_dim(), 0.1), 1, {});
        }) == ErrorKind::InvalidArgument);
}

TEST_CASE("orthogonal linear world keeps conditions orthogonal") {
  const World w = identity_world({{"a", Vec{1.0, 0.0, 0.0}}, {"b", Vec{0.0, 1.0, 0.0}},
                                  {"c", Vec{0.0, 0.0, 1.0}}});
  const auto set = AttributeLevelSet::estimate(w, AttributeLevelSet::Estimator::average, 50, 1);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const Vec z = rng.normal_vec(3);
    const ControlFactors f{rng.uniform(), rng.uniform()};
    const auto d = instance_aware_conditional(w, set, "a", {"b", "c"}, z, 1, f);
    CHECK(std::abs(d.vector[1]) <= 1e-10);
    CHECK(std::abs(d.vector[2]) <= 1e-10);
  }
}

TEST_CASE("instance information changes the direction in the biased world") {
  const World& w = biased_world();
  const auto set = AttributeLevelSet::estimate(w, AttributeLevelSet::Estimator::average, 500, 2);
  Rng rng(8);
  double max_distance = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Vec z = rng.normal_vec(w.latent_dim());
    const auto ia = instance_aware_conditional(w, set, "age", {"eyeglasses"}, z, 1, {0.75, 0.0});
    const auto base = instance_aware_conditional(w, set, "age", {"eyeglasses"}, z, 1, {1.0, 1.0});
    max_distance = std::max(max_distance, 1.0 - cosine(ia.vector, base.vector));
  }
  CHECK(max_distance > 0.01);
}

TEST_CASE("attribute-level set orientation and serialization") {
  const World w = identity_world({{"a", Vec{3.0, 4.0}}, {"b", Vec{-4.0, 3.0}}});
  const auto set = AttributeLevelSet::estimate(w, AttributeLevelSet::Estimator::boundary, 500, 3);
  CHECK(set.size() == 2);
  CHECK(cosine(set.at(0).vector, Vec{0.6, 0.8}) > 0.999);
  CHECK(set.oriented(0, 0).vector == -set.at(0).vector);
  CHECK(set.oriented(0, 1).vector == set.at(0).vector);

  const auto doc = direction_to_json(set.at(1));
  const auto back = direction_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(back.vector == set.at(1).vector);
  CHECK(back.attribute == "b");
  CHECK(back.kind == DirectionKind::attribute_level);
}
