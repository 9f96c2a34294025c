// latentlab command-line front end.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "latentlab/error.hpp"
#include "latentlab/experiment.hpp"
#include "latentlab/io.hpp"

namespace {

int report(const latentlab::Error& e) {
  std::cerr << "error: category=" << latentlab::to_string(e.category())
            << " kind=" << latentlab::to_string(e.kind()) << " message=" << e.what() << "\n";
  return latentlab::exit_code_for(e.category());
}

}  // namespace

int main(int argc, char** argv) {
  using namespace latentlab;
  CLI::App app{"Instance-aware latent direction search lab"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;

  for (Task task : {Task::world, Task::edit, Task::dt, Task::grid, Task::ablate_incremental,
                    Task::compare_attr_level}) {
    const std::string name(to_string(task));
    auto* sub = app.add_subcommand(name, "run the " + name + " task");
    sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the master seed");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: category=config kind=ConfigError message=" << e.what() << "\n";
    return 2;
  }

  try {
    const Task task = task_from_string(app.get_subcommands().front()->get_name());
    ExperimentConfig config;
    if (config_path.empty()) {
      config = parse_experiment_config(nlohmann::json{{"schema_version", kExperimentSchemaVersion}},
                                       task, {});
    } else {
      std::filesystem::path path(config_path);
      if (!std::filesystem::exists(path))
        throw Error(ErrorKind::ConfigError, "config file not found: " + config_path);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(read_text_file(path));
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ConfigError, std::string("config is not valid JSON: ") + e.what());
      }
      config = parse_experiment_config(doc, task, path.parent_path());
    }
    RunOptions options;
    options.out_dir = out_dir;
    options.seed = seed;
    options.threads = threads;
    const RunResult result = run_experiment(std::move(config), options);
    std::cout << result.summary.dump() << "\n";
    return 0;
  } catch (const Error& e) {
    return report(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: category=config kind=ConfigError message=" << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: category=io kind=IoError message=" << e.what() << "\n";
    return 4;
  }
}
