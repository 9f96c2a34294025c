#pragma once

// Synthetic attribute worlds.
//
// A world has a fixed differentiable generator G: latent -> observation, one
// ground-truth oracle per attribute (a hyperplane in latent space), and two
// independently trained classifier sets on observations: the editing set H
// and a held-out evaluation set. Entanglement is controlled geometrically
// (pairwise angles between oracle normals) and statistically (biased
// sampling of the classifiers' training data).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "latentlab/diffcore.hpp"

namespace latentlab {

enum class GeneratorKind { linear, nonlinear };

struct AttributeConfig {
  std::string name;
  double oracle_bias = 0.0;
};

// Angle between two oracle normals. Unlisted pairs are orthogonal.
struct AnglePair {
  std::string first;
  std::string second;
  double degrees = 90.0;
};

// Target P(target = 1 | given = 1) in the classifier training data.
struct SamplingBias {
  std::string given;
  std::string target;
  double probability = 0.5;
};

struct ClassifierSetup {
  Architecture edit_arch{{16}, Activation::tanh};
  Architecture eval_arch{{24}, Activation::tanh};
  double learning_rate = 0.5;
  std::size_t epochs = 400;
  std::size_t train_samples = 3000;
  double holdout_fraction = 0.2;
  double accuracy_floor = 0.95;
};

struct WorldConfig {
  std::size_t latent_dim = 16;
  std::size_t obs_dim = 48;
  std::vector<AttributeConfig> attributes;
  std::vector<AnglePair> angles;
  std::vector<SamplingBias> sampling_bias;
  GeneratorKind generator_kind = GeneratorKind::nonlinear;
  std::size_t generator_hidden = 32;
  double nonlinear_scale = 0.5;
  ClassifierSetup classifiers;
  std::uint64_t seed = 11;

  // Throws ConfigError / UnknownAttribute.
  void validate() const;
  std::optional<std::size_t> find_attribute(const std::string& name) const;
};

// The four-attribute world used by the experiments: age and eyeglasses at
// 45 degrees with P(eyeglasses | age) = 0.9 in the classifier training data,
// everything else orthogonal and unbiased, nonlinear generator with a
// stronger tanh branch (nonlinear_scale 1.25) and narrow classifiers (one
// hidden layer of 6 units for editing, 8 for evaluation).
WorldConfig default_world_config();
// Same attributes, all orthogonal, no sampling bias. The linear kind uses
// logistic classifiers trained on 10000 samples.
WorldConfig unbiased_world_config(GeneratorKind kind);

struct AttributeSpec {
  std::string name;
  Vec oracle_direction;  // unit norm
  double oracle_bias = 0.0;
};

struct ClassifierQuality {
  double train_accuracy = 0.0;
  double heldout_accuracy = 0.0;
  double final_loss = 0.0;
};

struct LabeledSample {
  Vec z;
  Vec x;
  std::vector<int> labels;  // aligned with World::attributes()
};

class World {
 public:
  World() = default;
  // Assembles a world from explicit parts. Classifier lists may be empty
  // (a generator-and-oracles world) or must match the attribute list.
  World(WorldConfig config, std::vector<AttributeSpec> attributes, DiffModel generator,
        std::vector<DiffModel> edit_classifiers, std::vector<DiffModel> eval_classifiers);

  const WorldConfig& config() const noexcept { return config_; }
  const std::vector<AttributeSpec>& attributes() const noexcept { return attributes_; }
  const DiffModel& generator() const noexcept { return generator_; }
  const std::vector<DiffModel>& edit_classifiers() const noexcept { return edit_; }
  const std::vector<DiffModel>& eval_classifiers() const noexcept { return eval_; }
  std::size_t latent_dim() const noexcept { return generator_.input_dim(); }
  std::size_t attribute_count() const noexcept { return attributes_.size(); }
  bool has_classifiers() const noexcept { return !edit_.empty(); }

  // Throws UnknownAttribute.
  std::size_t attribute_index(const std::string& name) const;
  const DiffModel& edit_classifier(const std::string& name) const;
  const DiffModel& eval_classifier(const std::string& name) const;

  std::vector<ClassifierQuality> edit_quality;
  std::vector<ClassifierQuality> eval_quality;

 private:
  WorldConfig config_;
  std::vector<AttributeSpec> attributes_;
  DiffModel generator_;
  std::vector<DiffModel> edit_;
  std::vector<DiffModel> eval_;
};

// Unit normals with the requested pairwise angles, embedded in latent_dim by a
// seeded rotation. Throws InfeasibleAngles when the Gram matrix of cosines is
// not positive semidefinite or its rank exceeds latent_dim.
std::vector<Vec> realize_oracle_directions(const WorldConfig& config);

DiffModel build_generator(const WorldConfig& config);

// Deterministic given config.seed. Throws InfeasibleAngles, BiasUnreachable,
// ClassifierTrainingFailed and config errors.
World build_world(const WorldConfig& config);

// 1 iff direction . z + bias > 0; exact ties label 0.
int oracle_label(const AttributeSpec& attribute, const Vec& z);
int oracle_label(const World& world, const std::string& attribute, const Vec& z);

// Latent prior samples, accepted or rejected so that each configured
// P(target | given) is matched. Throws InvalidArgument for count 0 and
// BiasUnreachable when a target cannot be reached within the draw budget.
std::vector<LabeledSample> sample_biased(const World& world, std::size_t count,
                                         std::uint64_t seed);

// Empirical P(target = 1 | given = 1); NaN when no sample has given = 1.
double conditional_rate(const std::vector<LabeledSample>& samples, std::size_t given,
                        std::size_t target);

// Persistence (".world.json").
nlohmann::json world_config_to_json(const WorldConfig& config);
// Unknown keys are ConfigError.
WorldConfig world_config_from_json(const nlohmann::json& doc);
nlohmann::json world_to_json(const World& world);
World world_from_json(const nlohmann::json& doc);

}  // namespace latentlab
