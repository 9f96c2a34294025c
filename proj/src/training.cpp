#include <algorithm>
#include <cmath>
#include <numeric>

#include "latentlab/diffcore.hpp"
#include "latentlab/error.hpp"
#include "latentlab/rng.hpp"

namespace latentlab {
namespace {

Layer init_layer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
  // Glorot uniform
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  Layer l{Matrix(out, in), Vec(out), act};
  for (std::size_t r = 0; r < out; ++r)
    for (std::size_t c = 0; c < in; ++c) l.weights(r, c) = rng.uniform(-bound, bound);
  return l;
}

double bce(double p, int y) { return y ? -std::log(p) : -std::log1p(-p); }

}  // namespace

double accuracy(const DiffModel& classifier, const std::vector<LabeledPoint>& data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  ForwardTrace t;
  for (const LabeledPoint& pt : data) {
    trace_into(classifier, pt.input, t);
    hits += (t.output()[0] > 0.5 ? 1 : 0) == pt.label;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

TrainedClassifier train_classifier(const std::vector<LabeledPoint>& data, const Architecture& arch,
                                   const TrainingParams& params) {
  if (data.empty()) throw Error(ErrorKind::DegenerateData, "no training data");
  const std::size_t dim = data.front().input.dim();
  std::size_t positives = 0;
  for (const LabeledPoint& p : data) {
    if (p.input.dim() != dim) throw Error(ErrorKind::DimensionMismatch, "training inputs");
    if (p.label != 0 && p.label != 1) throw Error(ErrorKind::InvalidArgument, "labels must be 0/1");
    positives += p.label;
  }
  if (positives == 0 || positives == data.size())
    throw Error(ErrorKind::DegenerateData, "training data contains a single class");
  if (!(params.learning_rate > 0.0) || params.holdout_fraction < 0.0 ||
      params.holdout_fraction >= 1.0)
    throw Error(ErrorKind::InvalidArgument, "training hyperparameters");

  Rng rng(params.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  const auto holdout = static_cast<std::size_t>(
      std::floor(params.holdout_fraction * static_cast<double>(data.size())));
  std::vector<LabeledPoint> train, heldout;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < holdout ? heldout : train).push_back(data[order[i]]);

  std::vector<Layer> layers;
  std::size_t in = dim;
  for (std::size_t width : arch.hidden) {
    layers.push_back(init_layer(in, width, arch.hidden_activation, rng));
    in = width;
  }
  layers.push_back(init_layer(in, 1, Activation::sigmoid, rng));
  DiffModel model(std::move(layers));

  ParamGrads grads = ParamGrads::zeros_like(model);
  ForwardTrace tr;
  Vec cot(1);
  const double scale = params.learning_rate / static_cast<double>(train.size());
  double loss = 0.0;
  for (std::size_t epoch = 0; epoch <= params.epochs; ++epoch) {
    grads.set_zero();
    loss = 0.0;
    for (const LabeledPoint& pt : train) {
      trace_into(model, pt.input, tr);
      const double p = tr.output()[0];
      loss += bce(p, pt.label);
      cot[0] = p - pt.label;  // d(bce)/d(logit)
      backward(tr, cot, &grads, true);
    }
    loss /= static_cast<double>(train.size());
    if (!std::isfinite(loss))
      throw Error(ErrorKind::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch));
    if (epoch == params.epochs) break;

    std::vector<Layer> updated = model.layers();
    for (std::size_t i = 0; i < updated.size(); ++i) {
      double* w = updated[i].weights.data();
      const double* gw = grads.weights[i].data();
      for (std::size_t k = 0; k < grads.weights[i].values().size(); ++k) w[k] -= scale * gw[k];
      updated[i].bias.add_scaled(-scale, grads.bias[i]);
      if (!updated[i].weights.all_finite() || !updated[i].bias.all_finite())
        throw Error(ErrorKind::NonFiniteLoss, "parameters diverged at epoch " + std::to_string(epoch));
    }
    model = DiffModel(std::move(updated));
  }

  TrainedClassifier out{model, accuracy(model, train), 0.0, loss, train.size(), heldout.size()};
  out.heldout_accuracy = heldout.empty() ? out.train_accuracy : accuracy(model, heldout);
  return out;
}

}  // namespace latentlab
