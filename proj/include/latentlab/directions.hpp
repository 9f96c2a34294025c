#pragma once

// Semantic directions in latent space.
//
//  - instance-specific: normalized gradient of H(G(z)), signed toward a
//    target label
//  - attribute-level: one direction per attribute, either the average of
//    instance-specific directions over prior samples or the normal of a
//    linear classifier fit in latent space
//  - instance-aware: normalized lambda blend of the two
//  - conditional: a primal direction with the span of condition directions
//    projected out

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "latentlab/diffcore.hpp"
#include "latentlab/synthworld.hpp"

namespace latentlab {

enum class DirectionKind { attribute_level, instance_specific, instance_aware, conditional };

std::string_view to_string(DirectionKind kind);
DirectionKind direction_kind_from_string(std::string_view name);

struct SemanticDirection {
  Vec vector;  // unit norm
  std::string attribute;
  DirectionKind kind = DirectionKind::attribute_level;
};

// lambda1 weighs the attribute-level part of the primal direction, lambda2
// that of the condition directions.
struct ControlFactors {
  double lambda1 = 0.75;
  double lambda2 = 0.0;

  void validate() const;
  friend bool operator==(const ControlFactors&, const ControlFactors&) = default;
};

inline constexpr double kZeroGradientThreshold = 1e-12;
inline constexpr double kDependentConditionThreshold = 1e-10;

// G evaluated once at z; classifier gradients through G reuse the trace.
class LatentProbe {
 public:
  LatentProbe(const World& world, const Vec& z);

  const Vec& z() const noexcept { return gen_.input; }
  const Vec& observation() const noexcept { return gen_.output(); }
  // H(G(z)) for an arbitrary classifier on observations.
  double score(const DiffModel& classifier) const;
  // d H(G(z)) / dz.
  Vec gradient(const DiffModel& classifier, double* score_out = nullptr) const;

 private:
  ForwardTrace gen_;
};

SemanticDirection instance_specific(const World& world, const std::string& attribute,
                                    const Vec& z, int target);
// Same, reusing a probe at z. Throws ZeroGradient below kZeroGradientThreshold.
SemanticDirection instance_specific(const World& world, std::size_t attribute,
                                    const LatentProbe& probe, int target);

struct AverageStats {
  std::size_t used = 0;
  std::size_t skipped = 0;
};

// Throws EmptySampleSet for sample_count 0 or when every sample is skipped.
SemanticDirection attribute_level_avg(const World& world, const std::string& attribute,
                                      std::size_t sample_count, std::uint64_t seed,
                                      AverageStats* stats = nullptr);

// Unit normal of a logistic fit to (latent point, label), oriented toward
// label 1. Throws DegenerateData unless both labels occur.
SemanticDirection attribute_level_boundary(const std::vector<LabeledPoint>& latent_samples,
                                           const std::string& attribute = {},
                                           const TrainingParams& params = {0.5, 800, 0, 0.0});

// normalize(lambda * d_attr + (1 - lambda) * d_inst); exact endpoints.
// Throws DegenerateCombination when the blend vanishes.
SemanticDirection combine(const SemanticDirection& d_attr, const SemanticDirection& d_inst,
                          double lambda);

struct ProjectionInfo {
  std::size_t retained = 0;
  std::size_t dropped = 0;  // near-dependent conditions
};

// Removes the span of the conditions from the primal and renormalizes.
// Throws DegenerateProjection when the primal lies in that span.
SemanticDirection condition_project(const SemanticDirection& primal,
                                    const std::vector<SemanticDirection>& conditions,
                                    ProjectionInfo* info = nullptr);

// Attribute-level directions for every attribute of a world, y = 1 polarity.
// Computed once, then read-only.
class AttributeLevelSet {
 public:
  enum class Estimator { average, boundary };

  AttributeLevelSet() = default;
  explicit AttributeLevelSet(std::vector<SemanticDirection> directions);

  // sample_count prior samples per attribute; the boundary estimator labels
  // them with the edit classifiers.
  static AttributeLevelSet estimate(const World& world, Estimator estimator,
                                    std::size_t sample_count, std::uint64_t seed);

  const SemanticDirection& at(std::size_t attribute) const { return directions_.at(attribute); }
  // Attribute-level direction oriented toward `target`.
  SemanticDirection oriented(std::size_t attribute, int target) const;
  const std::vector<SemanticDirection>& all() const noexcept { return directions_; }
  std::size_t size() const noexcept { return directions_.size(); }

 private:
  std::vector<SemanticDirection> directions_;
};

// Instance-aware direction of one attribute at the probe point.
SemanticDirection instance_aware(const World& world, const AttributeLevelSet& attr_level,
                                 std::size_t attribute, const LatentProbe& probe, int target,
                                 double lambda);

// Instance-aware conditional direction: primal blended with lambda1,
// each condition blended with lambda2 toward its preservation target, then
// projected. condition_targets defaults to the conditions' current
// edit-classifier labels at z. With no conditions this is the instance-aware
// primal direction.
SemanticDirection instance_aware_conditional(const World& world,
                                             const AttributeLevelSet& attr_level,
                                             const std::string& primal,
                                             const std::vector<std::string>& conditions,
                                             const Vec& z, int target,
                                             const ControlFactors& factors,
                                             const std::vector<int>* condition_targets = nullptr);

SemanticDirection instance_aware_conditional(const World& world,
                                             const AttributeLevelSet& attr_level,
                                             std::size_t primal,
                                             const std::vector<std::size_t>& conditions,
                                             const LatentProbe& probe, int target,
                                             const ControlFactors& factors,
                                             const std::vector<int>& condition_targets);

// ".dir.json"
nlohmann::json direction_to_json(const SemanticDirection& d);
SemanticDirection direction_from_json(const nlohmann::json& doc);

}  // namespace latentlab
