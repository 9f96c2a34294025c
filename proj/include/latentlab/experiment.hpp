#pragma once

// Declarative experiment runner behind the `latentlab` CLI.
//
// A run reads a JSON config (schema_version 1), builds or loads a world,
// executes one task and writes its artifacts plus manifest.json (inputs,
// seeds, versions, output hashes) into the output directory. Outputs depend
// only on the config and seed, never on the thread count.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "latentlab/directions.hpp"
#include "latentlab/dtmetric.hpp"
#include "latentlab/editor.hpp"
#include "latentlab/synthworld.hpp"

namespace latentlab {

inline constexpr int kExperimentSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

enum class Task { world, edit, dt, grid, ablate_incremental, compare_attr_level };

std::string_view to_string(Task task);
// Throws ConfigError.
Task task_from_string(std::string_view name);

// Streams derived from the master seed with derive_seed().
namespace seed_stream {
inline constexpr std::uint64_t attribute_level = 1;
inline constexpr std::uint64_t evaluation = 2;
inline constexpr std::uint64_t start_point = 3;
inline constexpr std::uint64_t compare = 4;
}  // namespace seed_stream

struct AttributeLevelOptions {
  AttributeLevelSet::Estimator estimator = AttributeLevelSet::Estimator::average;
  std::size_t samples = 2000;
};

struct EditTaskOptions {
  EditConfig edit{"age", {"eyeglasses"}, 1, {}, 0.1, 20, true};
  std::optional<Vec> z0;  // sampled from the prior when absent
};

struct DtTaskOptions {
  std::string primal = "age";
  std::string condition = "eyeglasses";
  DTParams params;
};

struct GridTaskOptions {
  std::vector<double> lambdas = even_grid(5);
  DTParams params;
};

struct AblationTaskOptions {
  std::string primal = "age";
  std::string condition = "eyeglasses";
  DTParams params;  // sample_count defaults to 500
  double p_low = 0.6;
  double p_high = 0.9;
  std::size_t p_points = 7;
};

struct CompareTaskOptions {
  std::size_t samples = 2000;  // estimator samples
  DTParams params;             // DT evaluation of each estimator, factors (1,1)
};

struct ExperimentConfig {
  Task task = Task::world;
  std::optional<WorldConfig> world;            // built in-process
  std::optional<std::filesystem::path> world_path;  // or loaded from .world.json
  std::uint64_t seed = 0;
  AttributeLevelOptions attribute_level;
  EditTaskOptions edit;
  DtTaskOptions dt;
  GridTaskOptions grid;
  AblationTaskOptions ablation;
  CompareTaskOptions compare;
};

// Parses a config document for `task`. Unknown fields, a schema_version other
// than 1, or a "task" field naming a different task are ConfigError. Relative
// world paths resolve against base_dir.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, Task task,
                                         const std::filesystem::path& base_dir = {});

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;  // overrides the config's master seed
  std::size_t threads = 1;
};

struct RunResult {
  std::vector<std::filesystem::path> outputs;  // relative to out_dir, manifest last
  nlohmann::json summary;
};

RunResult run_experiment(ExperimentConfig config, const RunOptions& options);

// ---------------------------------------------------------------------------
// Task building blocks, also used directly by tests.

struct AblationResult {
  DTCurve incremental;
  DTCurve fixed;
  std::vector<double> p_grid;
  std::vector<double> q_incremental;
  std::vector<double> q_fixed;
  double mean_q_incremental = 0.0;
  double mean_q_fixed = 0.0;
};

AblationResult ablate_incremental(const World& world, const AttributeLevelSet& attr_level,
                                  const AblationTaskOptions& options);

struct AttributeComparison {
  std::string attribute;
  double cosine = 0.0;
  double auc_average = 0.0;   // mean DT-AUC over conditions, averaging estimator
  double auc_boundary = 0.0;  // same, boundary-normal estimator
};

struct CompareReport {
  std::vector<AttributeComparison> attributes;
  double max_auc_difference = 0.0;
  double min_cosine = 1.0;
};

CompareReport compare_attr_level(const World& world, std::size_t sample_count, std::uint64_t seed,
                                 const DTParams& params);

}  // namespace latentlab
