#pragma once

// JSON persistence for models, worlds and directions, plus small file helpers.
// Doubles are written in shortest round-trip form, so reading a document back
// reproduces every parameter bit for bit.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "latentlab/diffcore.hpp"

namespace latentlab {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const DiffModel& model);
// Throws FormatError on malformed documents.
DiffModel model_from_json(const nlohmann::json& doc);

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& doc);

// Throw IoError.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace latentlab
