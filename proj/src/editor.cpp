#include "latentlab/editor.hpp"

#include <cmath>

namespace latentlab {

void EditConfig::validate(const World& world) const {
  world.attribute_index(primal);
  for (const auto& c : conditions) {
    world.attribute_index(c);
    if (c == primal) throw Error(ErrorKind::InvalidArgument, "primal attribute is also a condition");
  }
  if (target != 0 && target != 1) throw Error(ErrorKind::InvalidArgument, "target must be 0 or 1");
  if (!(step_size > 0.0) || !std::isfinite(step_size))
    throw Error(ErrorKind::InvalidArgument, "step size must be positive");
  factors.validate();
  if (!world.has_classifiers()) throw Error(ErrorKind::InvalidArgument, "world has no classifiers");
}

namespace {

TrajectoryPoint make_point(const World& world, std::size_t step, const LatentProbe& probe,
                           const EditOptions& options) {
  TrajectoryPoint p{step, probe.z(), {}, {}};
  if (options.record_observations) p.x = probe.observation();
  if (options.record_scores)
    for (const auto& h : world.edit_classifiers()) p.edit_scores.push_back(probe.score(h));
  return p;
}

}  // namespace

EditTrajectory edit(const World& world, const AttributeLevelSet& attr_level, const Vec& z0,
                    const EditConfig& config, const EditOptions& options) {
  config.validate(world);
  if (z0.dim() != world.latent_dim()) throw Error(ErrorKind::DimensionMismatch, "latent point");
  if (attr_level.size() != world.attribute_count())
    throw Error(ErrorKind::InvalidArgument, "attribute-level set does not match the world");

  const std::size_t primal = world.attribute_index(config.primal);
  std::vector<std::size_t> conditions;
  for (const auto& c : config.conditions) conditions.push_back(world.attribute_index(c));

  EditTrajectory traj{config, {}};
  traj.points.reserve(config.steps + 1);
  LatentProbe probe(world, z0);
  std::vector<int> keep;
  for (std::size_t c : conditions) keep.push_back(probe.score(world.edit_classifiers()[c]) > 0.5);
  traj.points.push_back(make_point(world, 0, probe, options));

  auto search = [&](const LatentProbe& at) {
    return instance_aware_conditional(world, attr_level, primal, conditions, at, config.target,
                                      config.factors, keep);
  };

  Vec fixed;
  for (std::size_t n = 0; n < config.steps; ++n) {
    Vec direction;
    try {
      if (config.incremental) {
        direction = search(probe).vector;
      } else {
        if (fixed.empty()) fixed = search(probe).vector;
        direction = fixed;
      }
    } catch (const Error& e) {
      const ErrorKind cause = e.kind();
      throw EditAborted(std::move(traj), cause,
                        "edit aborted at step " + std::to_string(n + 1) + ": " + e.what());
    }
    Vec z = probe.z();
    z.add_scaled(config.step_size, direction);
    probe = LatentProbe(world, z);
    traj.points.push_back(make_point(world, n + 1, probe, options));
  }
  return traj;
}

}  // namespace latentlab
