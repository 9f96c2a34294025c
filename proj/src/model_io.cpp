#include <fstream>
#include <sstream>

#include "latentlab/error.hpp"
#include "latentlab/io.hpp"

namespace latentlab {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"weights", m.values()}};
}

Matrix matrix_from_json(const json& doc) {
  return Matrix(doc.at("rows").get<std::size_t>(), doc.at("cols").get<std::size_t>(),
                doc.at("weights").get<std::vector<double>>());
}

}  // namespace

json vec_to_json(const Vec& v) { return json(v.values()); }

Vec vec_from_json(const json& doc) {
  try {
    return Vec(doc.get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("vector: ") + e.what());
  }
}

json model_to_json(const DiffModel& model) {
  json layers = json::array();
  for (const Layer& l : model.layers()) {
    json j = matrix_to_json(l.weights);
    j["bias"] = l.bias.values();
    j["activation"] = std::string(to_string(l.activation));
    layers.push_back(std::move(j));
  }
  json doc{{"format_version", kModelFormatVersion},
           {"input_dim", model.input_dim()},
           {"output_dim", model.output_dim()},
           {"layers", std::move(layers)},
           {"skip", nullptr}};
  if (model.skip()) doc["skip"] = matrix_to_json(*model.skip());
  return doc;
}

DiffModel model_from_json(const json& doc) {
  try {
    if (doc.at("format_version").get<int>() != kModelFormatVersion)
      throw Error(ErrorKind::FormatError, "unsupported model format_version");
    std::vector<Layer> layers;
    for (const json& j : doc.at("layers")) {
      layers.push_back(Layer{matrix_from_json(j), Vec(j.at("bias").get<std::vector<double>>()),
                             activation_from_string(j.at("activation").get<std::string>())});
    }
    std::optional<Matrix> skip;
    if (doc.contains("skip") && !doc.at("skip").is_null()) skip = matrix_from_json(doc.at("skip"));
    DiffModel model(std::move(layers), std::move(skip));
    if (model.input_dim() != doc.at("input_dim").get<std::size_t>() ||
        model.output_dim() != doc.at("output_dim").get<std::size_t>())
      throw Error(ErrorKind::FormatError, "declared model dims disagree with layers");
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("model: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::FormatError, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  write_text_file(path, doc.dump(1) + "\n");
}

}  // namespace latentlab
