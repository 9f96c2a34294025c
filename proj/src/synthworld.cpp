#include "latentlab/synthworld.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <set>

#include "latentlab/error.hpp"
#include "latentlab/rng.hpp"

namespace latentlab {
namespace {

// Stream ids for derive_seed.
enum : std::uint64_t {
  kStreamOracles = 1,
  kStreamGenerator = 2,
  kStreamEditData = 3,
  kStreamEvalData = 4,
  kStreamEditTrain = 100,
  kStreamEvalTrain = 200,
};

Eigen::MatrixXd gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

// rows x cols with orthonormal columns (rows >= cols).
Eigen::MatrixXd orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rows, cols, rng));
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  // Fix column signs so the factor is a deterministic function of the input.
  Eigen::MatrixXd r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (std::size_t c = 0; c < cols; ++c)
    if (r(c, c) < 0) q.col(c) *= -1.0;
  return q;
}

Matrix to_matrix(const Eigen::MatrixXd& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

}  // namespace

void WorldConfig::validate() const {
  if (latent_dim < 2) throw Error(ErrorKind::ConfigError, "latent_dim must be >= 2");
  if (obs_dim < latent_dim) throw Error(ErrorKind::ConfigError, "obs_dim must be >= latent_dim");
  if (attributes.empty()) throw Error(ErrorKind::ConfigError, "world needs at least one attribute");
  std::set<std::string> names;
  for (const auto& a : attributes) {
    if (a.name.empty()) throw Error(ErrorKind::ConfigError, "attribute name is empty");
    if (!names.insert(a.name).second)
      throw Error(ErrorKind::ConfigError, "duplicate attribute '" + a.name + "'");
    if (!std::isfinite(a.oracle_bias)) throw Error(ErrorKind::ConfigError, "oracle bias");
  }
  auto require = [&](const std::string& n) {
    if (!find_attribute(n)) throw Error(ErrorKind::UnknownAttribute, "'" + n + "'");
  };
  for (const auto& p : angles) {
    require(p.first);
    require(p.second);
    if (p.first == p.second) throw Error(ErrorKind::ConfigError, "angle pair repeats an attribute");
    if (!(p.degrees >= 0.0 && p.degrees <= 180.0))
      throw Error(ErrorKind::ConfigError, "angle must lie in [0, 180] degrees");
  }
  for (const auto& b : sampling_bias) {
    require(b.given);
    require(b.target);
    if (b.given == b.target) throw Error(ErrorKind::ConfigError, "bias pair repeats an attribute");
    if (!(b.probability > 0.0 && b.probability < 1.0))
      throw Error(ErrorKind::ConfigError, "conditional probability must lie in (0,1)");
  }
  if (generator_kind == GeneratorKind::nonlinear && generator_hidden == 0)
    throw Error(ErrorKind::ConfigError, "generator_hidden must be >= 1");
  if (!(classifiers.accuracy_floor >= 0.0 && classifiers.accuracy_floor <= 1.0))
    throw Error(ErrorKind::ConfigError, "accuracy_floor must lie in [0,1]");
  if (classifiers.train_samples < 10) throw Error(ErrorKind::ConfigError, "train_samples < 10");
  if (!(classifiers.learning_rate > 0.0)) throw Error(ErrorKind::ConfigError, "learning_rate");
  if (!(classifiers.holdout_fraction > 0.0 && classifiers.holdout_fraction < 1.0))
    throw Error(ErrorKind::ConfigError, "holdout_fraction must lie in (0,1)");
}

std::optional<std::size_t> WorldConfig::find_attribute(const std::string& name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == name) return i;
  return std::nullopt;
}

WorldConfig unbiased_world_config(GeneratorKind kind) {
  WorldConfig c;
  c.attributes = {{"expression", 0.0}, {"age", 0.0}, {"gender", 0.0}, {"eyeglasses", 0.0}};
  c.generator_kind = kind;
  if (kind == GeneratorKind::linear) {
    // Logistic classifiers are exact for half-spaces pushed through M; the
    // extra data tightens their normals.
    c.classifiers.edit_arch = {{}, Activation::tanh};
    c.classifiers.eval_arch = {{}, Activation::tanh};
    c.classifiers.train_samples = 10000;
  }
  return c;
}

WorldConfig default_world_config() {
  WorldConfig c = unbiased_world_config(GeneratorKind::nonlinear);
  c.angles = {{"age", "eyeglasses", 45.0}};
  c.sampling_bias = {{"age", "eyeglasses", 0.9}};
  c.nonlinear_scale = 1.25;
  c.classifiers.edit_arch = {{6}, Activation::tanh};
  c.classifiers.eval_arch = {{8}, Activation::tanh};
  return c;
}

World::World(WorldConfig config, std::vector<AttributeSpec> attributes, DiffModel generator,
             std::vector<DiffModel> edit_classifiers, std::vector<DiffModel> eval_classifiers)
    : config_(std::move(config)),
      attributes_(std::move(attributes)),
      generator_(std::move(generator)),
      edit_(std::move(edit_classifiers)),
      eval_(std::move(eval_classifiers)) {
  if (attributes_.empty()) throw Error(ErrorKind::ConfigError, "world without attributes");
  for (const auto& a : attributes_) {
    if (a.oracle_direction.dim() != generator_.input_dim())
      throw Error(ErrorKind::DimensionMismatch, "oracle direction of '" + a.name + "'");
    if (std::abs(norm(a.oracle_direction) - 1.0) > 1e-10)
      throw Error(ErrorKind::InvalidArgument, "oracle direction of '" + a.name + "' is not unit");
  }
  auto check_set = [&](const std::vector<DiffModel>& set, const char* what) {
    if (set.empty()) return;
    if (set.size() != attributes_.size())
      throw Error(ErrorKind::DimensionMismatch, std::string(what) + " classifier count");
    for (const auto& m : set) {
      if (m.input_dim() != generator_.output_dim() || !m.is_classifier())
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(what) + " classifier must map observations to a sigmoid score");
    }
  };
  check_set(edit_, "edit");
  check_set(eval_, "eval");
  if (edit_.empty() != eval_.empty())
    throw Error(ErrorKind::InvalidArgument, "edit and eval classifier sets must both be present");
}

std::size_t World::attribute_index(const std::string& name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i)
    if (attributes_[i].name == name) return i;
  throw Error(ErrorKind::UnknownAttribute, "'" + name + "'");
}

const DiffModel& World::edit_classifier(const std::string& name) const {
  if (edit_.empty()) throw Error(ErrorKind::InvalidArgument, "world has no classifiers");
  return edit_[attribute_index(name)];
}

const DiffModel& World::eval_classifier(const std::string& name) const {
  if (eval_.empty()) throw Error(ErrorKind::InvalidArgument, "world has no classifiers");
  return eval_[attribute_index(name)];
}

std::vector<Vec> realize_oracle_directions(const WorldConfig& config) {
  const std::size_t n = config.attributes.size();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(n, n);
  for (const auto& p : config.angles) {
    const std::size_t i = *config.find_attribute(p.first);
    const std::size_t j = *config.find_attribute(p.second);
    const double c = std::cos(p.degrees * std::numbers::pi / 180.0);
    gram(i, j) = gram(j, i) = c;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd& values = eig.eigenvalues();
  constexpr double tol = 1e-9;
  if (values.minCoeff() < -tol)
    throw Error(ErrorKind::InfeasibleAngles, "requested angles have no realization (Gram matrix "
                                             "is not positive semidefinite)");
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < values.size(); ++k)
    if (values(k) > tol) kept.push_back(k);
  if (kept.size() > config.latent_dim)
    throw Error(ErrorKind::InfeasibleAngles,
                "requested angles need " + std::to_string(kept.size()) +
                    " dimensions, latent_dim is " + std::to_string(config.latent_dim));

  // coords (n x rank): gram = coords coords^T
  Eigen::MatrixXd coords(n, kept.size());
  for (std::size_t c = 0; c < kept.size(); ++c)
    coords.col(c) = eig.eigenvectors().col(kept[c]) * std::sqrt(values(kept[c]));

  Rng rng(derive_seed(config.seed, kStreamOracles));
  const Eigen::MatrixXd embed = orthonormal_columns(config.latent_dim, kept.size(), rng);
  std::vector<Vec> out;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd g = embed * coords.row(i).transpose();
    g.normalize();
    out.emplace_back(std::vector<double>(g.data(), g.data() + g.size()));
  }
  return out;
}

DiffModel build_generator(const WorldConfig& config) {
  Rng rng(derive_seed(config.seed, kStreamGenerator));
  const std::size_t m = config.latent_dim, n = config.obs_dim;
  // M = U diag(s) V^T, singular values spread over [1, 2].
  const Eigen::MatrixXd u = orthonormal_columns(n, m, rng);
  const Eigen::MatrixXd v = orthonormal_columns(m, m, rng);
  Eigen::VectorXd s(m);
  for (std::size_t i = 0; i < m; ++i) s(i) = 2.0 - static_cast<double>(i) / static_cast<double>(m - 1);
  const Matrix linear = to_matrix(u * s.asDiagonal() * v.transpose());

  if (config.generator_kind == GeneratorKind::linear)
    return DiffModel({Layer{linear, Vec(n), Activation::identity}});

  const std::size_t h = config.generator_hidden;
  Layer hidden{Matrix(h, m), Vec(h), Activation::tanh};
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < m; ++c)
      hidden.weights(r, c) = rng.normal() / std::sqrt(static_cast<double>(m));
    hidden.bias[r] = 0.5 * rng.normal();
  }
  Layer out{Matrix(n, h), Vec(n), Activation::identity};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < h; ++c)
      out.weights(r, c) = config.nonlinear_scale * rng.normal() / std::sqrt(static_cast<double>(h));
  return DiffModel({std::move(hidden), std::move(out)}, linear);
}

int oracle_label(const AttributeSpec& attribute, const Vec& z) {
  return dot(attribute.oracle_direction, z) + attribute.oracle_bias > 0.0 ? 1 : 0;
}

int oracle_label(const World& world, const std::string& attribute, const Vec& z) {
  if (z.dim() != world.latent_dim()) throw Error(ErrorKind::DimensionMismatch, "latent point");
  if (!z.all_finite()) throw Error(ErrorKind::InvalidArgument, "latent point is not finite");
  return oracle_label(world.attributes()[world.attribute_index(attribute)], z);
}

namespace {

struct BiasRule {
  std::size_t given, target;
  double accept_target_pos = 1.0;  // acceptance for given=1, target=1
  double accept_target_neg = 1.0;  // acceptance for given=1, target=0
};

std::vector<int> labels_of(const World& world, const Vec& z) {
  std::vector<int> labels;
  labels.reserve(world.attribute_count());
  for (const auto& a : world.attributes()) labels.push_back(oracle_label(a, z));
  return labels;
}

// Acceptance rates that turn the prior's P(target | given) into the requested one.
std::vector<BiasRule> plan_bias(const World& world, std::uint64_t seed) {
  std::vector<BiasRule> rules;
  const auto& cfg = world.config();
  if (cfg.sampling_bias.empty()) return rules;
  constexpr std::size_t kPilot = 40000;
  Rng pilot(derive_seed(seed, 0xB1A5));
  std::vector<std::vector<int>> labels;
  labels.reserve(kPilot);
  for (std::size_t i = 0; i < kPilot; ++i) labels.push_back(labels_of(world, pilot.normal_vec(world.latent_dim())));

  for (const auto& b : cfg.sampling_bias) {
    BiasRule rule{world.attribute_index(b.given), world.attribute_index(b.target)};
    std::size_t given = 0, both = 0;
    for (const auto& l : labels) {
      given += l[rule.given];
      both += l[rule.given] & l[rule.target];
    }
    if (given == 0 || both == 0 || both == given)
      throw Error(ErrorKind::BiasUnreachable,
                  "P(" + b.target + " | " + b.given + ") is degenerate under the prior");
    const double r = static_cast<double>(both) / static_cast<double>(given);
    const double t = b.probability;
    if (t > r)
      rule.accept_target_neg = (1.0 - t) * r / (t * (1.0 - r));
    else
      rule.accept_target_pos = t * (1.0 - r) / ((1.0 - t) * r);
    rules.push_back(rule);
  }
  return rules;
}

}  // namespace

std::vector<LabeledSample> sample_biased(const World& world, std::size_t count,
                                         std::uint64_t seed) {
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "sample count must be >= 1");
  const std::vector<BiasRule> rules = plan_bias(world, seed);
  Rng rng(seed);
  const std::size_t budget = 1000 * count + 10000;
  std::vector<LabeledSample> out;
  out.reserve(count);
  std::size_t draws = 0;
  while (out.size() < count) {
    if (++draws > budget)
      throw Error(ErrorKind::BiasUnreachable, "rejection budget exhausted");
    Vec z = rng.normal_vec(world.latent_dim());
    std::vector<int> labels = labels_of(world, z);
    double accept = 1.0;
    for (const auto& r : rules)
      if (labels[r.given]) accept *= labels[r.target] ? r.accept_target_pos : r.accept_target_neg;
    const double u = rng.uniform();
    if (accept < 1.0 && u >= accept) continue;
    Vec x = forward(world.generator(), z);
    out.push_back(LabeledSample{std::move(z), std::move(x), std::move(labels)});
  }
  return out;
}

double conditional_rate(const std::vector<LabeledSample>& samples, std::size_t given,
                        std::size_t target) {
  std::size_t g = 0, both = 0;
  for (const auto& s : samples) {
    g += s.labels.at(given);
    both += s.labels.at(given) & s.labels.at(target);
  }
  return g == 0 ? std::nan("") : static_cast<double>(both) / static_cast<double>(g);
}

World build_world(const WorldConfig& config) {
  config.validate();
  const std::vector<Vec> directions = realize_oracle_directions(config);
  std::vector<AttributeSpec> attributes;
  for (std::size_t i = 0; i < config.attributes.size(); ++i)
    attributes.push_back({config.attributes[i].name, directions[i], config.attributes[i].oracle_bias});

  World bare(config, attributes, build_generator(config), {}, {});

  const auto& setup = config.classifiers;
  auto train_set = [&](std::uint64_t data_stream, std::uint64_t train_stream,
                       const Architecture& arch, std::vector<ClassifierQuality>& quality,
                       const char* label) {
    const auto samples =
        sample_biased(bare, setup.train_samples, derive_seed(config.seed, data_stream));
    std::vector<DiffModel> models;
    for (std::size_t a = 0; a < attributes.size(); ++a) {
      std::vector<LabeledPoint> data;
      data.reserve(samples.size());
      for (const auto& s : samples) data.push_back({s.x, s.labels[a]});
      TrainingParams params{setup.learning_rate, setup.epochs,
                            derive_seed(config.seed, train_stream + a), setup.holdout_fraction};
      TrainedClassifier t = train_classifier(data, arch, params);
      if (t.heldout_accuracy < setup.accuracy_floor)
        throw Error(ErrorKind::ClassifierTrainingFailed,
                    std::string(label) + " classifier for '" + attributes[a].name +
                        "' reached held-out accuracy " + std::to_string(t.heldout_accuracy) +
                        " < floor " + std::to_string(setup.accuracy_floor));
      quality.push_back({t.train_accuracy, t.heldout_accuracy, t.final_loss});
      models.push_back(std::move(t.model));
    }
    return models;
  };

  std::vector<ClassifierQuality> edit_q, eval_q;
  auto edit = train_set(kStreamEditData, kStreamEditTrain, setup.edit_arch, edit_q, "edit");
  auto eval = train_set(kStreamEvalData, kStreamEvalTrain, setup.eval_arch, eval_q, "eval");
  World world(config, std::move(attributes), bare.generator(), std::move(edit), std::move(eval));
  world.edit_quality = std::move(edit_q);
  world.eval_quality = std::move(eval_q);
  return world;
}

}  // namespace latentlab
