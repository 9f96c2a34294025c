#include <cmath>
#include <limits>

#include "doctest.h"
#include "latentlab/diffcore.hpp"
#include "latentlab/error.hpp"
#include "latentlab/io.hpp"
#include "support.hpp"

using namespace latentlab;
using namespace testsupport;

namespace {

// Straight-line re-evaluation of a dense tanh/identity/sigmoid chain.
Vec reference_forward(const DiffModel& m, const Vec& in) {
  std::vector<double> cur = in.values();
  for (const Layer& l : m.layers()) {
    std::vector<double> next(l.output_dim());
    for (std::size_t r = 0; r < l.output_dim(); ++r) {
      double s = l.bias[r];
      for (std::size_t c = 0; c < l.input_dim(); ++c) s += l.weights(r, c) * cur[c];
      switch (l.activation) {
        case Activation::identity: next[r] = s; break;
        case Activation::tanh: next[r] = std::tanh(s); break;
        case Activation::sigmoid: next[r] = 1.0 / (1.0 + std::exp(-s)); break;
      }
    }
    cur = std::move(next);
  }
  Vec out(cur);
  if (m.skip()) out += multiply(*m.skip(), in);
  return out;
}

Vec fd_direction(const DiffModel& m, const Vec& x) {
  Vec g = finite_difference_gradient(m, x, 0);
  g *= 1.0 / norm(g);
  return g;
}

}  // namespace

TEST_CASE("forward examples") {
  const DiffModel id = linear_map(Matrix::identity(2));
  CHECK(forward(id, Vec{1.5, -2.0}) == Vec{1.5, -2.0});

  const DiffModel zero = logistic(Vec{0.0, 0.0});
  CHECK(forward(zero, Vec{3.0, -7.0})[0] == 0.5);

  const DiffModel net = random_mlp({5, 4, 3}, {Activation::tanh, Activation::tanh}, 21);
  const Vec e0 = basis_vector(5, 0);
  const Vec got = forward(net, e0), want = reference_forward(net, e0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));

  const DiffModel gen = random_generator(4, 6, 7, 3);
  const Vec z{0.3, -1.0, 2.0, 0.5};
  CHECK(max_abs_diff(forward(gen, z), reference_forward(gen, z)) < 1e-13);
}

TEST_CASE("forward rejects wrong input dimension") {
  const DiffModel m = logistic(Vec{1.0, 2.0});
  try {
    forward(m, Vec{1.0});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("model construction checks") {
  CHECK_THROWS_AS(DiffModel(std::vector<Layer>{}), Error);
  // layer widths must chain
  Rng rng(1);
  CHECK_THROWS_AS(DiffModel({Layer{random_matrix(3, 2, rng), Vec(3), Activation::tanh},
                             Layer{random_matrix(1, 4, rng), Vec(1), Activation::sigmoid}}),
                  Error);
  // a skip map needs a linear output layer
  CHECK_THROWS_AS(DiffModel({Layer{random_matrix(1, 2, rng), Vec(1), Activation::sigmoid}},
                            random_matrix(1, 2, rng)),
                  Error);
  Matrix bad = Matrix::identity(2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(linear_map(bad), Error);
}

TEST_CASE("grad_input closed forms") {
  const DiffModel lin({Layer{Matrix(1, 2, {3.0, 4.0}), Vec{0.0}, Activation::identity}});
  for (const Vec& x : {Vec{0.0, 0.0}, Vec{-2.0, 9.0}, Vec{1e3, 1e-3}}) {
    const Vec g = grad_input(lin, x, 0);
    CHECK(g[0] == 3.0);
    CHECK(g[1] == 4.0);
  }
  const Vec g = grad_input(logistic(Vec{3.0, 4.0}), Vec{0.0, 0.0}, 0);
  CHECK(g[0] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("reverse mode matches finite differences") {
  SUBCASE("linear") {
    CHECK(gradient_check(linear_map(Matrix(3, 4, std::vector<double>(12, 0.5))), 32, 1)
              .max_relative_error < 1e-10);
  }
  SUBCASE("tanh hidden layer") {
    const auto r = gradient_check(random_mlp({6, 8, 3}, {Activation::tanh, Activation::identity}, 2), 32, 2);
    CHECK(r.probe_count == 32);
    CHECK(r.max_relative_error < 1e-4);
  }
  SUBCASE("two tanh hidden layers") {
    CHECK(gradient_check(random_mlp({5, 7, 6, 2}, {Activation::tanh, Activation::tanh, Activation::identity}, 3), 32, 3)
              .max_relative_error < 1e-4);
  }
  SUBCASE("sigmoid classifier") {
    CHECK(gradient_check(random_classifier(9, 6, 4), 32, 4).max_relative_error < 1e-4);
  }
  SUBCASE("generator with skip") {
    CHECK(gradient_check(random_generator(5, 7, 9, 5), 32, 5).max_relative_error < 1e-4);
  }
}

TEST_CASE("relative error guard") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(0.0, 1e-9) == doctest::Approx(0.1));
  CHECK(relative_error(2.0, 1.0) == 0.5);
}

TEST_CASE("parameter gradients match finite differences of the output") {
  DiffModel m = random_mlp({3, 4, 2}, {Activation::tanh, Activation::identity}, 8);
  const Vec x{0.2, -0.4, 1.1};
  const Vec cot{0.7, -1.3};
  ParamGrads g = ParamGrads::zeros_like(m);
  backward(trace(m, x), cot, &g);
  auto objective = [&](const DiffModel& mm) { return dot(forward(mm, x), cot); };
  const double h = 1e-6;
  for (std::size_t li = 0; li < m.layers().size(); ++li) {
    for (std::size_t r = 0; r < m.layers()[li].output_dim(); ++r) {
      for (std::size_t c = 0; c < m.layers()[li].input_dim(); ++c) {
        auto layers = m.layers();
        layers[li].weights(r, c) += h;
        const double up = objective(DiffModel(layers));
        layers[li].weights(r, c) -= 2 * h;
        const double down = objective(DiffModel(layers));
        CHECK(relative_error(g.weights[li](r, c), (up - down) / (2 * h)) < 1e-6);
      }
      auto layers = m.layers();
      layers[li].bias[r] += h;
      const double up = objective(DiffModel(layers));
      layers[li].bias[r] -= 2 * h;
      const double down = objective(DiffModel(layers));
      CHECK(relative_error(g.bias[li][r], (up - down) / (2 * h)) < 1e-6);
    }
  }
}

TEST_CASE("classifier outputs stay strictly inside (0,1)") {
  const DiffModel big = logistic(Vec{1e6, -1e6});
  for (const Vec& x : {Vec{1e3, -1e3}, Vec{-1e3, 1e3}, Vec{0.0, 0.0}}) {
    const double p = forward(big, x)[0];
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  const DiffModel clf = random_classifier(4, 3, 9);
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    Vec x = rng.normal_vec(4);
    x *= 100.0;
    const double p = forward(clf, x)[0];
    CHECK((p > 0.0 && p < 1.0));
  }
}

TEST_CASE("forward is deterministic") {
  const DiffModel g = random_generator(4, 6, 7, 11);
  const Vec z{0.1, 0.2, -0.3, 0.4};
  CHECK(forward(g, z) == forward(g, z));
}

TEST_CASE("rescaling the output layer keeps the gradient direction") {
  const DiffModel clf = random_classifier(5, 4, 12);
  // Pre-sigmoid rescaling changes sigma' but only by a positive factor.
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const Vec x = rng.normal_vec(5);
    for (double c : {0.1, 2.0, 7.5}) {
      const Vec a = grad_input(clf, x, 0), b = grad_input(clf.with_scaled_output_layer(c), x, 0);
      CHECK(cosine(a, b) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(max_abs_diff(fd_direction(clf, Vec(5, 0.3)),
                     [&] { Vec g = grad_input(clf, Vec(5, 0.3), 0); g *= 1 / norm(g); return g; }()) <
        1e-6);
}

TEST_CASE("training separable blobs") {
  Rng rng(3);
  std::vector<LabeledPoint> data;
  for (int i = 0; i < 200; ++i) {
    const int label = i % 2;
    // Gaussian blobs clipped to keep a margin of 1.0 around x0 = 0.
    double x0 = 2.0 + 0.5 * std::abs(rng.normal());
    data.push_back({Vec{label ? x0 : -x0, rng.normal()}, label});
  }
  const auto t = train_classifier(data, {{}, Activation::tanh}, {0.5, 300, 3, 0.2});
  CHECK(t.heldout_accuracy == 1.0);
  CHECK(t.train_accuracy == 1.0);
  CHECK(t.heldout_count == 40);
  CHECK(t.model.is_classifier());

  const auto again = train_classifier(data, {{}, Activation::tanh}, {0.5, 300, 3, 0.2});
  CHECK(again.model == t.model);

  const auto mlp = train_classifier(data, {{4}, Activation::tanh}, {0.5, 300, 3, 0.2});
  CHECK(mlp.heldout_accuracy == 1.0);
}

TEST_CASE("training rejects single-class data") {
  std::vector<LabeledPoint> data{{Vec{1.0}, 1}, {Vec{2.0}, 1}, {Vec{3.0}, 1}};
  try {
    train_classifier(data, {{}, Activation::tanh}, {});
    FAIL("expected DegenerateData");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateData);
  }
  CHECK_THROWS_AS(train_classifier({}, {{}, Activation::tanh}, {}), Error);
}

TEST_CASE("training detects a diverging loss") {
  std::vector<LabeledPoint> data;
  for (int i = 0; i < 20; ++i) data.push_back({Vec{i % 2 ? 1e200 : -1e200}, i % 2});
  try {
    train_classifier(data, {{}, Activation::tanh}, {1e300, 5, 0, 0.0});
    FAIL("expected NonFiniteLoss");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteLoss);
  }
}

TEST_CASE("model json round trip is bit exact") {
  const DiffModel g = random_generator(3, 5, 4, 17);
  const DiffModel back = model_from_json(nlohmann::json::parse(model_to_json(g).dump()));
  CHECK(back == g);
  const DiffModel c = random_classifier(4, 3, 18);
  CHECK(model_from_json(model_to_json(c)) == c);

  auto doc = model_to_json(c);
  doc["format_version"] = 99;
  CHECK_THROWS_AS(model_from_json(doc), Error);
  doc = model_to_json(c);
  doc["layers"][0]["activation"] = "relu";
  CHECK_THROWS_AS(model_from_json(doc), Error);
}
