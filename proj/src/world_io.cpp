#include <set>

#include "latentlab/error.hpp"
#include "latentlab/io.hpp"
#include "latentlab/synthworld.hpp"

namespace latentlab {

using nlohmann::json;

namespace {

constexpr int kWorldFormatVersion = 1;

void reject_unknown_keys(const json& doc, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!doc.is_object()) throw Error(ErrorKind::ConfigError, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : doc.items())
    if (!ok.count(key)) throw Error(ErrorKind::ConfigError, "unknown field '" + key + "' in " + where);
}

json arch_to_json(const Architecture& a) {
  return json{{"hidden", a.hidden}, {"activation", std::string(to_string(a.hidden_activation))}};
}

Architecture arch_from_json(const json& doc, const std::string& where) {
  reject_unknown_keys(doc, {"hidden", "activation"}, where);
  Architecture a;
  a.hidden = doc.value("hidden", std::vector<std::size_t>{});
  if (a.hidden.size() > 2) throw Error(ErrorKind::ConfigError, where + ": at most 2 hidden layers");
  a.hidden_activation = activation_from_string(doc.value("activation", std::string("tanh")));
  return a;
}

std::string kind_name(GeneratorKind k) { return k == GeneratorKind::linear ? "linear" : "nonlinear"; }

GeneratorKind kind_from(const std::string& s) {
  if (s == "linear") return GeneratorKind::linear;
  if (s == "nonlinear") return GeneratorKind::nonlinear;
  throw Error(ErrorKind::ConfigError, "generator_kind must be linear or nonlinear");
}

}  // namespace

json world_config_to_json(const WorldConfig& c) {
  json attrs = json::array(), angles = json::array(), bias = json::array();
  for (const auto& a : c.attributes) attrs.push_back({{"name", a.name}, {"oracle_bias", a.oracle_bias}});
  for (const auto& p : c.angles)
    angles.push_back({{"first", p.first}, {"second", p.second}, {"degrees", p.degrees}});
  for (const auto& b : c.sampling_bias)
    bias.push_back({{"given", b.given}, {"target", b.target}, {"probability", b.probability}});
  const auto& s = c.classifiers;
  return json{{"latent_dim", c.latent_dim},
              {"obs_dim", c.obs_dim},
              {"attributes", attrs},
              {"angles", angles},
              {"sampling_bias", bias},
              {"generator_kind", kind_name(c.generator_kind)},
              {"generator_hidden", c.generator_hidden},
              {"nonlinear_scale", c.nonlinear_scale},
              {"classifiers",
               {{"edit_arch", arch_to_json(s.edit_arch)},
                {"eval_arch", arch_to_json(s.eval_arch)},
                {"learning_rate", s.learning_rate},
                {"epochs", s.epochs},
                {"train_samples", s.train_samples},
                {"holdout_fraction", s.holdout_fraction},
                {"accuracy_floor", s.accuracy_floor}}},
              {"seed", c.seed}};
}

WorldConfig world_config_from_json(const json& doc) {
  try {
    reject_unknown_keys(doc,
                        {"latent_dim", "obs_dim", "attributes", "angles", "sampling_bias",
                         "generator_kind", "generator_hidden", "nonlinear_scale", "classifiers",
                         "seed"},
                        "world config");
    WorldConfig c = default_world_config();
    c.latent_dim = doc.value("latent_dim", c.latent_dim);
    c.obs_dim = doc.value("obs_dim", c.obs_dim);
    if (doc.contains("attributes")) {
      // A custom attribute list starts without the default entanglement.
      c.attributes.clear();
      c.angles.clear();
      c.sampling_bias.clear();
      for (const json& a : doc.at("attributes")) {
        if (a.is_string()) {
          c.attributes.push_back({a.get<std::string>(), 0.0});
          continue;
        }
        reject_unknown_keys(a, {"name", "oracle_bias"}, "attribute");
        c.attributes.push_back({a.at("name").get<std::string>(), a.value("oracle_bias", 0.0)});
      }
    }
    if (doc.contains("angles")) {
      c.angles.clear();
      for (const json& p : doc.at("angles")) {
        reject_unknown_keys(p, {"first", "second", "degrees"}, "angle");
        c.angles.push_back({p.at("first").get<std::string>(), p.at("second").get<std::string>(),
                            p.at("degrees").get<double>()});
      }
    }
    if (doc.contains("sampling_bias")) {
      c.sampling_bias.clear();
      for (const json& b : doc.at("sampling_bias")) {
        reject_unknown_keys(b, {"given", "target", "probability"}, "sampling_bias");
        c.sampling_bias.push_back({b.at("given").get<std::string>(),
                                   b.at("target").get<std::string>(),
                                   b.at("probability").get<double>()});
      }
    }
    if (doc.contains("generator_kind")) c.generator_kind = kind_from(doc.at("generator_kind").get<std::string>());
    c.generator_hidden = doc.value("generator_hidden", c.generator_hidden);
    c.nonlinear_scale = doc.value("nonlinear_scale", c.nonlinear_scale);
    if (doc.contains("classifiers")) {
      const json& s = doc.at("classifiers");
      reject_unknown_keys(s,
                          {"edit_arch", "eval_arch", "learning_rate", "epochs", "train_samples",
                           "holdout_fraction", "accuracy_floor"},
                          "classifiers");
      auto& cs = c.classifiers;
      if (s.contains("edit_arch")) cs.edit_arch = arch_from_json(s.at("edit_arch"), "edit_arch");
      if (s.contains("eval_arch")) cs.eval_arch = arch_from_json(s.at("eval_arch"), "eval_arch");
      cs.learning_rate = s.value("learning_rate", cs.learning_rate);
      cs.epochs = s.value("epochs", cs.epochs);
      cs.train_samples = s.value("train_samples", cs.train_samples);
      cs.holdout_fraction = s.value("holdout_fraction", cs.holdout_fraction);
      cs.accuracy_floor = s.value("accuracy_floor", cs.accuracy_floor);
    }
    c.seed = doc.value("seed", c.seed);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("world config: ") + e.what());
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::config) throw;
    throw Error(ErrorKind::ConfigError, e.what());
  }
}

json world_to_json(const World& world) {
  json attrs = json::array();
  for (const auto& a : world.attributes())
    attrs.push_back({{"name", a.name},
                     {"oracle_direction", vec_to_json(a.oracle_direction)},
                     {"oracle_bias", a.oracle_bias}});
  auto models = [](const std::vector<DiffModel>& set) {
    json arr = json::array();
    for (const auto& m : set) arr.push_back(model_to_json(m));
    return arr;
  };
  auto quality = [](const std::vector<ClassifierQuality>& q) {
    json arr = json::array();
    for (const auto& c : q)
      arr.push_back({{"train_accuracy", c.train_accuracy},
                     {"heldout_accuracy", c.heldout_accuracy},
                     {"final_loss", c.final_loss}});
    return arr;
  };
  return json{{"format_version", kWorldFormatVersion},
              {"config", world_config_to_json(world.config())},
              {"attributes", attrs},
              {"generator", model_to_json(world.generator())},
              {"edit_classifiers", models(world.edit_classifiers())},
              {"eval_classifiers", models(world.eval_classifiers())},
              {"edit_quality", quality(world.edit_quality)},
              {"eval_quality", quality(world.eval_quality)}};
}

World world_from_json(const json& doc) {
  try {
    if (doc.at("format_version").get<int>() != kWorldFormatVersion)
      throw Error(ErrorKind::FormatError, "unsupported world format_version");
    WorldConfig config = world_config_from_json(doc.at("config"));
    std::vector<AttributeSpec> attrs;
    for (const json& a : doc.at("attributes"))
      attrs.push_back({a.at("name").get<std::string>(), vec_from_json(a.at("oracle_direction")),
                       a.at("oracle_bias").get<double>()});
    std::vector<DiffModel> edit, eval;
    for (const json& m : doc.at("edit_classifiers")) edit.push_back(model_from_json(m));
    for (const json& m : doc.at("eval_classifiers")) eval.push_back(model_from_json(m));
    World world(std::move(config), std::move(attrs), model_from_json(doc.at("generator")),
                std::move(edit), std::move(eval));
    auto quality = [&](const char* key, std::vector<ClassifierQuality>& out) {
      if (!doc.contains(key)) return;
      for (const json& q : doc.at(key))
        out.push_back({q.at("train_accuracy").get<double>(), q.at("heldout_accuracy").get<double>(),
                       q.at("final_loss").get<double>()});
    };
    quality("edit_quality", world.edit_quality);
    quality("eval_quality", world.eval_quality);
    return world;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("world: ") + e.what());
  }
}

}  // namespace latentlab
