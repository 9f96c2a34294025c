#include "latentlab/diffcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "latentlab/error.hpp"
#include "latentlab/kernels.hpp"
#include "latentlab/rng.hpp"

namespace latentlab {
namespace {

constexpr double kSigmoidLow = std::numeric_limits<double>::min();
const double kSigmoidHigh = std::nextafter(1.0, 0.0);

// Clamped so classifier scores stay strictly inside (0,1).
double sigmoid(double u) {
  double s = u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
  return std::clamp(s, kSigmoidLow, kSigmoidHigh);
}

void activate(Activation a, Vec& v) {
  switch (a) {
    case Activation::identity:
      return;
    case Activation::tanh:
      for (double& x : v.span()) x = std::tanh(x);
      return;
    case Activation::sigmoid:
      for (double& x : v.span()) x = sigmoid(x);
      return;
  }
}

// Derivative expressed through the activation's output.
double activation_slope(Activation a, double out) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::tanh: return 1.0 - out * out;
    case Activation::sigmoid: return out * (1.0 - out);
  }
  return 1.0;
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  throw Error(ErrorKind::FormatError, "unknown activation '" + std::string(name) + "'");
}

DiffModel::DiffModel(std::vector<Layer> layers, std::optional<Matrix> skip)
    : layers_(std::move(layers)), skip_(std::move(skip)) {
  if (layers_.empty()) throw Error(ErrorKind::InvalidArgument, "model needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.weights.rows() == 0 || l.weights.cols() == 0)
      throw Error(ErrorKind::InvalidArgument, "layer " + std::to_string(i) + " is empty");
    if (l.bias.dim() != l.weights.rows())
      throw Error(ErrorKind::DimensionMismatch, "layer " + std::to_string(i) + " bias");
    if (i > 0 && l.input_dim() != layers_[i - 1].output_dim())
      throw Error(ErrorKind::DimensionMismatch,
                  "layer " + std::to_string(i) + " input does not match previous output");
    if (!l.weights.all_finite() || !l.bias.all_finite())
      throw Error(ErrorKind::InvalidArgument, "layer " + std::to_string(i) + " is not finite");
  }
  input_dim_ = layers_.front().input_dim();
  output_dim_ = layers_.back().output_dim();
  if (skip_) {
    if (skip_->rows() != output_dim_ || skip_->cols() != input_dim_)
      throw Error(ErrorKind::DimensionMismatch, "skip map shape");
    if (!skip_->all_finite()) throw Error(ErrorKind::InvalidArgument, "skip map is not finite");
    // The stored final output includes the skip term, so the final layer
    // must be linear for its slope to be recoverable.
    if (layers_.back().activation != Activation::identity)
      throw Error(ErrorKind::InvalidArgument, "skip map requires an identity final layer");
  }
}

bool DiffModel::is_classifier() const noexcept {
  return output_dim_ == 1 && !layers_.empty() &&
         layers_.back().activation == Activation::sigmoid && !skip_;
}

DiffModel DiffModel::with_scaled_output_layer(double c) const {
  std::vector<Layer> layers = layers_;
  layers.back().weights *= c;
  layers.back().bias *= c;
  return DiffModel(std::move(layers), skip_);
}

ParamGrads ParamGrads::zeros_like(const DiffModel& model) {
  ParamGrads g;
  for (const Layer& l : model.layers()) {
    g.weights.emplace_back(l.weights.rows(), l.weights.cols());
    g.bias.emplace_back(l.bias.dim());
  }
  if (model.skip()) g.skip = Matrix(model.skip()->rows(), model.skip()->cols());
  return g;
}

void ParamGrads::set_zero() {
  for (Matrix& m : weights) m *= 0.0;
  for (Vec& b : bias) b *= 0.0;
  if (skip) *skip *= 0.0;
}

void trace_into(const DiffModel& model, const Vec& input, ForwardTrace& out) {
  if (input.dim() != model.input_dim())
    throw Error(ErrorKind::DimensionMismatch, "model expects input dim " +
                                                  std::to_string(model.input_dim()) + ", got " +
                                                  std::to_string(input.dim()));
  const auto& layers = model.layers();
  out.model = &model;
  out.input = input;
  out.outputs.resize(layers.size());
  const Vec* prev = &out.input;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    Vec& y = out.outputs[i];
    if (y.dim() != l.output_dim()) y = Vec(l.output_dim());
    kernels::gemv(l.weights.data(), prev->data(), l.bias.data(), y.data(), l.output_dim(),
                  l.input_dim());
    activate(l.activation, y);
    prev = &y;
  }
  if (const auto& skip = model.skip()) {
    Vec& y = out.outputs.back();
    // y += S x
    for (std::size_t r = 0; r < skip->rows(); ++r)
      y[r] += kernels::dot(skip->data() + r * skip->cols(), input.data(), skip->cols());
  }
}

ForwardTrace trace(const DiffModel& model, const Vec& input) {
  ForwardTrace t;
  trace_into(model, input, t);
  return t;
}

Vec forward(const DiffModel& model, const Vec& input) { return trace(model, input).output(); }

Vec backward(const ForwardTrace& tr, const Vec& cotangent, ParamGrads* grads,
             bool cotangent_is_preactivation) {
  const DiffModel& model = *tr.model;
  if (cotangent.dim() != model.output_dim())
    throw Error(ErrorKind::DimensionMismatch, "cotangent dim");
  const auto& layers = model.layers();

  Vec input_grad(model.input_dim());
  if (const auto& skip = model.skip()) {
    kernels::gemv_t_acc(skip->data(), cotangent.data(), input_grad.data(), skip->rows(),
                        skip->cols());
    if (grads)
      kernels::rank1_acc(1.0, cotangent.data(), tr.input.data(), grads->skip->data(),
                         skip->rows(), skip->cols());
  }

  Vec delta = cotangent;
  for (std::size_t idx = layers.size(); idx-- > 0;) {
    const Layer& l = layers[idx];
    const Vec& out = tr.outputs[idx];
    const bool at_logit = cotangent_is_preactivation && idx + 1 == layers.size();
    if (l.activation != Activation::identity && !at_logit) {
      for (std::size_t r = 0; r < delta.dim(); ++r)
        delta[r] *= activation_slope(l.activation, out[r]);
    }
    const Vec& in = idx == 0 ? tr.input : tr.outputs[idx - 1];
    if (grads) {
      kernels::rank1_acc(1.0, delta.data(), in.data(), grads->weights[idx].data(),
                         l.output_dim(), l.input_dim());
      kernels::axpy(1.0, delta.data(), grads->bias[idx].data(), delta.dim());
    }
    Vec next(l.input_dim());
    kernels::gemv_t_acc(l.weights.data(), delta.data(), next.data(), l.output_dim(),
                        l.input_dim());
    delta = std::move(next);
  }
  input_grad += delta;
  return input_grad;
}

Vec grad_input(const DiffModel& model, const Vec& input, std::size_t output_index) {
  if (output_index >= model.output_dim())
    throw Error(ErrorKind::DimensionMismatch, "output index " + std::to_string(output_index));
  ForwardTrace t = trace(model, input);
  return backward(t, basis_vector(model.output_dim(), output_index));
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

Vec finite_difference_gradient(const DiffModel& model, const Vec& input, std::size_t output_index,
                               double step) {
  Vec g(input.dim());
  Vec probe = input;
  for (std::size_t i = 0; i < input.dim(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double up = forward(model, probe)[output_index];
    probe[i] = orig - step;
    const double down = forward(model, probe)[output_index];
    probe[i] = orig;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

GradCheckReport gradient_check(const DiffModel& model, std::size_t probes, std::uint64_t seed) {
  if (probes == 0) throw Error(ErrorKind::InvalidArgument, "gradient_check needs probes >= 1");
  Rng rng(seed);
  GradCheckReport report;
  report.probe_count = probes;
  for (std::size_t p = 0; p < probes; ++p) {
    const Vec x = rng.normal_vec(model.input_dim());
    const ForwardTrace t = trace(model, x);
    for (std::size_t o = 0; o < model.output_dim(); ++o) {
      const Vec reverse = backward(t, basis_vector(model.output_dim(), o));
      const Vec numeric = finite_difference_gradient(model, x, o);
      for (std::size_t i = 0; i < x.dim(); ++i)
        report.max_relative_error =
            std::max(report.max_relative_error, relative_error(reverse[i], numeric[i]));
    }
  }
  return report;
}

}  // namespace latentlab
