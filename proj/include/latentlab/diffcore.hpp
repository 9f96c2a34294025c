#pragma once

// Small differentiable feed-forward models with reverse-mode gradients.
//
// A DiffModel is a chain of dense layers, each followed by an elementwise
// activation, plus an optional linear skip map from the input straight to the
// output:  out = layers(in) + skip * in.  Generators use the skip term;
// classifiers end in a single sigmoid unit.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "latentlab/linalg.hpp"

namespace latentlab {

enum class Activation { identity, tanh, sigmoid };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

struct Layer {
  Matrix weights;  // out x in
  Vec bias;        // out
  Activation activation = Activation::identity;

  std::size_t input_dim() const noexcept { return weights.cols(); }
  std::size_t output_dim() const noexcept { return weights.rows(); }

  friend bool operator==(const Layer&, const Layer&) = default;
};

class DiffModel {
 public:
  DiffModel() = default;
  // Throws DimensionMismatch for incompatible layers, InvalidArgument for
  // empty or non-finite parameters.
  explicit DiffModel(std::vector<Layer> layers, std::optional<Matrix> skip = std::nullopt);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return output_dim_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  const std::optional<Matrix>& skip() const noexcept { return skip_; }

  // Scalar output behind a sigmoid.
  bool is_classifier() const noexcept;

  // Multiplies the final layer's weights and bias by c.
  DiffModel with_scaled_output_layer(double c) const;

  friend bool operator==(const DiffModel&, const DiffModel&) = default;

 private:
  std::vector<Layer> layers_;
  std::optional<Matrix> skip_;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
};

// Intermediate values of one forward pass, kept for reverse accumulation.
// Reusable: trace_into() keeps the buffers' capacity.
struct ForwardTrace {
  const DiffModel* model = nullptr;
  Vec input;
  std::vector<Vec> outputs;  // post-activation output of each layer

  const Vec& output() const { return outputs.back(); }
};

// Parameter gradients laid out like the model's layers.
struct ParamGrads {
  std::vector<Matrix> weights;
  std::vector<Vec> bias;
  std::optional<Matrix> skip;

  static ParamGrads zeros_like(const DiffModel& model);
  void set_zero();
};

Vec forward(const DiffModel& model, const Vec& input);
ForwardTrace trace(const DiffModel& model, const Vec& input);
void trace_into(const DiffModel& model, const Vec& input, ForwardTrace& out);

// Vector-Jacobian product: cotangent^T * d(output)/d(input). When grads is
// non-null the parameter gradients are accumulated into it as well. With
// cotangent_is_preactivation the cotangent is taken with respect to the final
// layer's pre-activation (the logit, for classifiers).
Vec backward(const ForwardTrace& trace, const Vec& cotangent, ParamGrads* grads = nullptr,
             bool cotangent_is_preactivation = false);

// Gradient of output[output_index] with respect to the input.
Vec grad_input(const DiffModel& model, const Vec& input, std::size_t output_index);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t probe_count = 0;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;

// |a-b| / max(|a|, |b|, 1e-8)
double relative_error(double a, double b);

// Central finite differences of one output with respect to the input.
Vec finite_difference_gradient(const DiffModel& model, const Vec& input, std::size_t output_index,
                               double step = kFiniteDifferenceStep);

// Compares reverse-mode input gradients of every output against central finite
// differences at `probes` standard-normal inputs.
GradCheckReport gradient_check(const DiffModel& model, std::size_t probes, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Training

struct LabeledPoint {
  Vec input;
  int label = 0;  // 0 or 1
};

struct Architecture {
  std::vector<std::size_t> hidden;  // empty: logistic regression
  Activation hidden_activation = Activation::tanh;
};

struct TrainingParams {
  double learning_rate = 0.5;
  std::size_t epochs = 500;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.2;
};

struct TrainedClassifier {
  DiffModel model;
  double train_accuracy = 0.0;
  double heldout_accuracy = 0.0;
  double final_loss = 0.0;
  std::size_t train_count = 0;
  std::size_t heldout_count = 0;
};

// Full-batch gradient descent on mean binary cross-entropy with a sigmoid
// output. A seeded shuffle splits off holdout_fraction of the data for the
// reported held-out accuracy. Deterministic given params.seed.
// Errors: DegenerateData (empty or single class), NonFiniteLoss.
TrainedClassifier train_classifier(const std::vector<LabeledPoint>& data, const Architecture& arch,
                                   const TrainingParams& params);

double accuracy(const DiffModel& classifier, const std::vector<LabeledPoint>& data);

}  // namespace latentlab
