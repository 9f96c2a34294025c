#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "latentlab/error.hpp"
#include "latentlab/experiment.hpp"
#include "latentlab/io.hpp"
#include "latentlab/report.hpp"
#include "support.hpp"

using namespace latentlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("latentlab_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LATENTLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json small_world() {
  return {{"generator_kind", "linear"},
          {"latent_dim", 6},
          {"obs_dim", 8},
          {"classifiers",
           {{"edit_arch", {{"hidden", json::array()}}},
            {"eval_arch", {{"hidden", json::array()}}},
            {"train_samples", 800},
            {"epochs", 150}}}};
}

fs::path write_config(const std::string& name, const json& doc) {
  const fs::path p = scratch_dir() / name;
  write_text_file(p, doc.dump(1));
  return p;
}

ErrorKind parse_kind(const json& doc, Task task = Task::dt) {
  try {
    parse_experiment_config(doc, task, scratch_dir());
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a config error");
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("task names") {
  for (Task t : {Task::world, Task::edit, Task::dt, Task::grid, Task::ablate_incremental,
                 Task::compare_attr_level})
    CHECK(task_from_string(to_string(t)) == t);
  CHECK(to_string(Task::ablate_incremental) == "ablate-incremental");
  CHECK_THROWS_AS(task_from_string("train"), Error);
}

TEST_CASE("config parsing") {
  const json base{{"schema_version", 1}};
  const ExperimentConfig c = parse_experiment_config(base, Task::grid, {});
  CHECK(c.world.has_value());
  CHECK(c.grid.lambdas == even_grid(5));

  json doc = base;
  doc["dt"] = {{"primal", "age"}, {"condition", "gender"}, {"lambda1", 0.5}, {"samples", 10}};
  const ExperimentConfig d = parse_experiment_config(doc, Task::dt, {});
  CHECK(d.dt.params.factors.lambda1 == 0.5);
  CHECK(d.dt.params.sample_count == 10);
  CHECK(d.dt.primal == "age");

  CHECK(parse_kind(json::object()) == ErrorKind::ConfigError);
  CHECK(parse_kind({{"schema_version", 2}}) == ErrorKind::ConfigError);
  CHECK(parse_kind({{"schema_version", 1}, {"extra", true}}) == ErrorKind::ConfigError);
  CHECK(parse_kind({{"schema_version", 1}, {"dt", {{"lamda1", 0.5}}}}) == ErrorKind::ConfigError);
  CHECK(parse_kind({{"schema_version", 1}, {"dt", {{"lambda1", 2.0}}}}) == ErrorKind::ConfigError);
  CHECK(parse_kind({{"schema_version", 1}, {"dt", {{"samples", "many"}}}}) == ErrorKind::ConfigError);
  CHECK(parse_kind({{"schema_version", 1}, {"world_path", "missing.world.json"}}) ==
        ErrorKind::ConfigError);
  CHECK(parse_kind({{"schema_version", 1}, {"task", "grid"}}, Task::dt) == ErrorKind::ConfigError);
  CHECK(parse_kind({{"schema_version", 1}, {"grid", {{"lambdas", {0.0, 1.5}}}}}) ==
        ErrorKind::ConfigError);
  CHECK(parse_kind({{"schema_version", 1}, {"world", {{"colour", 1}}}}) == ErrorKind::ConfigError);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch_dir();
  CHECK(run_cli("") == 2);
  CHECK(run_cli("fly") == 2);
  CHECK(run_cli("world --threads 0") == 2);
  CHECK(run_cli("world --config " + (dir / "absent.json").string()) == 2);

  const fs::path junk = dir / "junk.json";
  write_text_file(junk, "{ not json");
  CHECK(run_cli("world --config " + junk.string()) == 2);

  const fs::path unknown = write_config("unknown.json", {{"schema_version", 1}, {"wrld", {}}});
  CHECK(run_cli("world --config " + unknown.string()) == 2);

  json infeasible = small_world();
  infeasible["attributes"] = {{{"name", "a"}}, {{"name", "b"}}, {{"name", "c"}}};
  infeasible["angles"] = {{{"first", "a"}, {"second", "b"}, {"degrees", 10}},
                          {{"first", "b"}, {"second", "c"}, {"degrees", 10}},
                          {{"first", "a"}, {"second", "c"}, {"degrees", 170}}};
  const fs::path inf = write_config("infeasible.json", {{"schema_version", 1}, {"world", infeasible}});
  CHECK(run_cli("world --config " + inf.string()) == 2);

  json weak = small_world();
  weak["classifiers"]["epochs"] = 1;
  weak["classifiers"]["learning_rate"] = 1e-9;
  weak["classifiers"]["accuracy_floor"] = 0.99;
  const fs::path num = write_config("weak.json", {{"schema_version", 1}, {"world", weak}});
  CHECK(run_cli("world --config " + num.string()) == 3);

  const fs::path ok = write_config("ok.json", {{"schema_version", 1}, {"world", small_world()}});
  const fs::path blocker = dir / "blocker";
  write_text_file(blocker, "x");
  CHECK(run_cli("world --config " + ok.string() + " --out " + (blocker / "sub").string()) == 4);
}

TEST_CASE("cli runs are reproducible and hashed") {
  const fs::path dir = scratch_dir();
  json cfg{{"schema_version", 1},
           {"world", small_world()},
           {"seed", 5},
           {"attribute_level", {{"samples", 100}}},
           {"dt", {{"primal", "age"}, {"condition", "gender"}, {"samples", 40}, {"n_max", 5}}},
           {"edit", {{"primal", "age"}, {"conditions", {"gender"}}, {"steps", 4}}}};
  const fs::path path = write_config("run.json", cfg);
  REQUIRE(run_cli("world --config " + path.string() + " --out " + (dir / "w").string()) == 0);
  CHECK(fs::exists(dir / "w" / "world.world.json"));
  CHECK(fs::exists(dir / "w" / "classifier_accuracy.csv"));

  REQUIRE(run_cli("dt --config " + path.string() + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run_cli("dt --config " + path.string() + " --threads 3 --out " + (dir / "b").string()) == 0);
  const json ma = read_json_file(dir / "a" / "manifest.json");
  const json mb = read_json_file(dir / "b" / "manifest.json");
  CHECK(ma == mb);
  CHECK(ma["task"] == "dt");
  CHECK(ma["seed"] == 5);
  for (const auto& entry : ma["outputs"]) {
    const std::string content = read_text_file(dir / "a" / entry["file"].get<std::string>());
    CHECK(entry["sha256"] == sha256_hex(content));
  }
  CHECK(read_text_file(dir / "a" / "curve.csv").rfind("n,p,q\n", 0) == 0);

  // --seed overrides the config seed.
  REQUIRE(run_cli("dt --config " + path.string() + " --seed 6 --out " + (dir / "c").string()) == 0);
  CHECK(read_json_file(dir / "c" / "manifest.json")["seed"] == 6);

  // A saved world can be reused by path.
  json reuse = cfg;
  reuse.erase("world");
  reuse["world_path"] = (dir / "w" / "world.world.json").string();
  const fs::path rpath = write_config("reuse.json", reuse);
  REQUIRE(run_cli("edit --config " + rpath.string() + " --out " + (dir / "e").string()) == 0);
  const std::string traj = read_text_file(dir / "e" / "trajectory.csv");
  CHECK(traj.rfind("step,z0,", 0) == 0);
  CHECK(std::count(traj.begin(), traj.end(), '\n') == 6);
}

TEST_CASE("estimator comparison on an identity world") {
  const World w = testsupport::identity_world(
      {{"a", Vec{3.0, 4.0, 0.0}}, {"b", Vec{0.0, 0.0, 1.0}}});
  DTParams p;
  p.sample_count = 100;
  p.n_max = 5;
  const CompareReport r = compare_attr_level(w, 2000, 1, p);
  REQUIRE(r.attributes.size() == 2);
  // The boundary fit sees binary labels from a finite sample, so it only
  // approaches w/|w|.
  for (const auto& row : r.attributes) CHECK(row.cosine >= 0.999);
  CHECK(r.max_auc_difference <= 0.05);
}
