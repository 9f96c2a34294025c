#include "latentlab/directions.hpp"

#include <cmath>

#include "latentlab/error.hpp"
#include "latentlab/io.hpp"
#include "latentlab/rng.hpp"

namespace latentlab {

std::string_view to_string(DirectionKind kind) {
  switch (kind) {
    case DirectionKind::attribute_level: return "attribute_level";
    case DirectionKind::instance_specific: return "instance_specific";
    case DirectionKind::instance_aware: return "instance_aware";
    case DirectionKind::conditional: return "conditional";
  }
  return "attribute_level";
}

DirectionKind direction_kind_from_string(std::string_view name) {
  for (auto k : {DirectionKind::attribute_level, DirectionKind::instance_specific,
                 DirectionKind::instance_aware, DirectionKind::conditional})
    if (to_string(k) == name) return k;
  throw Error(ErrorKind::FormatError, "unknown direction kind '" + std::string(name) + "'");
}

void ControlFactors::validate() const {
  if (!(lambda1 >= 0.0 && lambda1 <= 1.0) || !(lambda2 >= 0.0 && lambda2 <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "control factors must lie in [0,1]");
}

LatentProbe::LatentProbe(const World& world, const Vec& z) {
  if (!z.all_finite()) throw Error(ErrorKind::InvalidArgument, "latent point is not finite");
  trace_into(world.generator(), z, gen_);
}

double LatentProbe::score(const DiffModel& classifier) const {
  return forward(classifier, observation())[0];
}

Vec LatentProbe::gradient(const DiffModel& classifier, double* score_out) const {
  const ForwardTrace head = trace(classifier, observation());
  if (score_out) *score_out = head.output()[0];
  return backward(gen_, backward(head, Vec{1.0}));
}

SemanticDirection instance_specific(const World& world, std::size_t attribute,
                                    const LatentProbe& probe, int target) {
  if (target != 0 && target != 1) throw Error(ErrorKind::InvalidArgument, "target must be 0 or 1");
  const auto& name = world.attributes().at(attribute).name;
  Vec g = probe.gradient(world.edit_classifiers().at(attribute));
  const double n = norm(g);
  if (!(n >= kZeroGradientThreshold))
    throw Error(ErrorKind::ZeroGradient, "gradient of '" + name + "' has norm " + std::to_string(n));
  g *= 1.0 / n;
  if (target == 0) g *= -1.0;
  return {std::move(g), name, DirectionKind::instance_specific};
}

SemanticDirection instance_specific(const World& world, const std::string& attribute,
                                    const Vec& z, int target) {
  const std::size_t idx = world.attribute_index(attribute);
  if (z.dim() != world.latent_dim()) throw Error(ErrorKind::DimensionMismatch, "latent point");
  return instance_specific(world, idx, LatentProbe(world, z), target);
}

SemanticDirection attribute_level_avg(const World& world, const std::string& attribute,
                                      std::size_t sample_count, std::uint64_t seed,
                                      AverageStats* stats) {
  const std::size_t idx = world.attribute_index(attribute);
  if (sample_count == 0) throw Error(ErrorKind::EmptySampleSet, "sample_count is 0");
  Rng rng(seed);
  Vec sum(world.latent_dim());
  AverageStats local;
  for (std::size_t i = 0; i < sample_count; ++i) {
    const Vec z = rng.normal_vec(world.latent_dim());
    try {
      sum += instance_specific(world, idx, LatentProbe(world, z), 1).vector;
      ++local.used;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ZeroGradient) throw;
      ++local.skipped;
    }
  }
  if (stats) *stats = local;
  if (local.used == 0)
    throw Error(ErrorKind::EmptySampleSet, "every sample of '" + attribute + "' had a zero gradient");
  const double n = norm(sum);
  if (!(n >= kZeroGradientThreshold))
    throw Error(ErrorKind::ZeroGradient, "averaged direction of '" + attribute + "' vanished");
  sum *= 1.0 / n;
  return {std::move(sum), attribute, DirectionKind::attribute_level};
}

SemanticDirection attribute_level_boundary(const std::vector<LabeledPoint>& latent_samples,
                                           const std::string& attribute,
                                           const TrainingParams& params) {
  TrainedClassifier fit = train_classifier(latent_samples, Architecture{{}, Activation::tanh}, params);
  const Matrix& w = fit.model.layers().front().weights;
  Vec normal(std::vector<double>(w.values().begin(), w.values().end()));
  const double n = norm(normal);
  if (!(n > 0.0)) throw Error(ErrorKind::DegenerateData, "boundary fit produced a zero normal");
  normal *= 1.0 / n;
  return {std::move(normal), attribute, DirectionKind::attribute_level};
}

SemanticDirection combine(const SemanticDirection& d_attr, const SemanticDirection& d_inst,
                          double lambda) {
  if (d_attr.attribute != d_inst.attribute)
    throw Error(ErrorKind::InvalidArgument, "combining directions of different attributes");
  if (d_attr.vector.dim() != d_inst.vector.dim())
    throw Error(ErrorKind::DimensionMismatch, "combined directions");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "lambda must lie in [0,1]");
  if (lambda == 1.0) return {d_attr.vector, d_attr.attribute, DirectionKind::instance_aware};
  if (lambda == 0.0) return {d_inst.vector, d_attr.attribute, DirectionKind::instance_aware};
  Vec v = lambda * d_attr.vector;
  v.add_scaled(1.0 - lambda, d_inst.vector);
  const double n = norm(v);
  if (!(n >= kZeroGradientThreshold))
    throw Error(ErrorKind::DegenerateCombination, "blended direction of '" + d_attr.attribute +
                                                      "' vanished");
  v *= 1.0 / n;
  return {std::move(v), d_attr.attribute, DirectionKind::instance_aware};
}

namespace {

void remove_span(Vec& v, const std::vector<Vec>& basis) {
  for (const Vec& q : basis) v.add_scaled(-dot(q, v), q);
}

}  // namespace

SemanticDirection condition_project(const SemanticDirection& primal,
                                    const std::vector<SemanticDirection>& conditions,
                                    ProjectionInfo* info) {
  if (conditions.empty()) {
    if (info) *info = {};
    return primal;
  }
  // Modified Gram-Schmidt with one reorthogonalization pass.
  std::vector<Vec> basis;
  ProjectionInfo local;
  for (const auto& c : conditions) {
    if (c.vector.dim() != primal.vector.dim())
      throw Error(ErrorKind::DimensionMismatch, "condition direction");
    Vec r = c.vector;
    remove_span(r, basis);
    remove_span(r, basis);
    const double n = norm(r);
    if (n < kDependentConditionThreshold) {
      ++local.dropped;
      continue;
    }
    r *= 1.0 / n;
    basis.push_back(std::move(r));
    ++local.retained;
  }
  if (info) *info = local;

  Vec v = primal.vector;
  remove_span(v, basis);
  remove_span(v, basis);
  double n = norm(v);
  if (!(n >= kDependentConditionThreshold))
    throw Error(ErrorKind::DegenerateProjection,
                "primal direction of '" + primal.attribute + "' lies in the condition span");
  v *= 1.0 / n;
  // Clean-up pass after normalization so the orthogonality error is relative
  // to a unit vector.
  remove_span(v, basis);
  n = norm(v);
  v *= 1.0 / n;
  return {std::move(v), primal.attribute, DirectionKind::conditional};
}

AttributeLevelSet::AttributeLevelSet(std::vector<SemanticDirection> directions)
    : directions_(std::move(directions)) {
  for (const auto& d : directions_)
    if (std::abs(norm(d.vector) - 1.0) > 1e-10)
      throw Error(ErrorKind::InvalidArgument, "attribute-level direction is not unit");
}

AttributeLevelSet AttributeLevelSet::estimate(const World& world, Estimator estimator,
                                              std::size_t sample_count, std::uint64_t seed) {
  std::vector<SemanticDirection> dirs;
  if (estimator == Estimator::average) {
    for (std::size_t a = 0; a < world.attribute_count(); ++a)
      dirs.push_back(attribute_level_avg(world, world.attributes()[a].name, sample_count,
                                         derive_seed(seed, a)));
    return AttributeLevelSet(std::move(dirs));
  }
  if (sample_count == 0) throw Error(ErrorKind::EmptySampleSet, "sample_count is 0");
  // Label prior samples with the edit classifiers, fit a linear boundary per attribute.
  Rng rng(seed);
  std::vector<Vec> zs;
  std::vector<std::vector<int>> labels(world.attribute_count());
  for (std::size_t i = 0; i < sample_count; ++i) {
    Vec z = rng.normal_vec(world.latent_dim());
    LatentProbe probe(world, z);
    for (std::size_t a = 0; a < world.attribute_count(); ++a)
      labels[a].push_back(probe.score(world.edit_classifiers()[a]) > 0.5 ? 1 : 0);
    zs.push_back(std::move(z));
  }
  for (std::size_t a = 0; a < world.attribute_count(); ++a) {
    std::vector<LabeledPoint> data;
    for (std::size_t i = 0; i < zs.size(); ++i) data.push_back({zs[i], labels[a][i]});
    TrainingParams params{0.5, 800, derive_seed(seed, 1000 + a), 0.0};
    dirs.push_back(attribute_level_boundary(data, world.attributes()[a].name, params));
  }
  return AttributeLevelSet(std::move(dirs));
}

SemanticDirection AttributeLevelSet::oriented(std::size_t attribute, int target) const {
  SemanticDirection d = at(attribute);
  if (target == 0) d.vector *= -1.0;
  return d;
}

SemanticDirection instance_aware(const World& world, const AttributeLevelSet& attr_level,
                                 std::size_t attribute, const LatentProbe& probe, int target,
                                 double lambda) {
  SemanticDirection d_attr = attr_level.oriented(attribute, target);
  if (lambda == 1.0) {
    d_attr.kind = DirectionKind::instance_aware;
    return d_attr;
  }
  return combine(d_attr, instance_specific(world, attribute, probe, target), lambda);
}

SemanticDirection instance_aware_conditional(const World& world,
                                             const AttributeLevelSet& attr_level,
                                             std::size_t primal,
                                             const std::vector<std::size_t>& conditions,
                                             const LatentProbe& probe, int target,
                                             const ControlFactors& factors,
                                             const std::vector<int>& condition_targets) {
  factors.validate();
  if (condition_targets.size() != conditions.size())
    throw Error(ErrorKind::InvalidArgument, "one preservation target per condition");
  SemanticDirection d_primal =
      instance_aware(world, attr_level, primal, probe, target, factors.lambda1);
  if (conditions.empty()) return d_primal;
  std::vector<SemanticDirection> conds;
  conds.reserve(conditions.size());
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    if (conditions[i] == primal)
      throw Error(ErrorKind::InvalidArgument, "primal attribute listed as a condition");
    conds.push_back(instance_aware(world, attr_level, conditions[i], probe, condition_targets[i],
                                   factors.lambda2));
  }
  return condition_project(d_primal, conds);
}

SemanticDirection instance_aware_conditional(const World& world,
                                             const AttributeLevelSet& attr_level,
                                             const std::string& primal,
                                             const std::vector<std::string>& conditions,
                                             const Vec& z, int target,
                                             const ControlFactors& factors,
                                             const std::vector<int>* condition_targets) {
  if (z.dim() != world.latent_dim()) throw Error(ErrorKind::DimensionMismatch, "latent point");
  const std::size_t p = world.attribute_index(primal);
  std::vector<std::size_t> conds;
  for (const auto& c : conditions) conds.push_back(world.attribute_index(c));
  const LatentProbe probe(world, z);
  std::vector<int> targets;
  if (condition_targets) {
    targets = *condition_targets;
  } else {
    for (std::size_t c : conds) targets.push_back(probe.score(world.edit_classifiers()[c]) > 0.5);
  }
  return instance_aware_conditional(world, attr_level, p, conds, probe, target, factors, targets);
}

nlohmann::json direction_to_json(const SemanticDirection& d) {
  return {{"attribute", d.attribute},
          {"kind", std::string(to_string(d.kind))},
          {"vector", vec_to_json(d.vector)}};
}

SemanticDirection direction_from_json(const nlohmann::json& doc) {
  try {
    SemanticDirection d{vec_from_json(doc.at("vector")), doc.at("attribute").get<std::string>(),
                        direction_kind_from_string(doc.at("kind").get<std::string>())};
    if (std::abs(norm(d.vector) - 1.0) > 1e-10)
      throw Error(ErrorKind::FormatError, "direction vector is not unit norm");
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("direction: ") + e.what());
  }
}

}  // namespace latentlab
