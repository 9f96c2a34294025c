#include "latentlab/experiment.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "latentlab/error.hpp"
#include "latentlab/io.hpp"
#include "latentlab/kernels.hpp"
#include "latentlab/report.hpp"
#include "latentlab/rng.hpp"

namespace latentlab {

using nlohmann::json;

namespace {

// Strict object reader: every key must be consumed or it is an error.
class Fields {
 public:
  Fields(const json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
    if (!doc_.is_object()) throw Error(ErrorKind::ConfigError, where_ + " must be an object");
  }

  bool has(const char* key) const { return doc_.contains(key); }

  const json& raw(const char* key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  template <typename T>
  void read(const char* key, T& out) {
    if (!doc_.contains(key)) return;
    seen_.insert(key);
    try {
      out = doc_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ConfigError, where_ + "." + key + ": " + e.what());
    }
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items())
      if (!seen_.count(key))
        throw Error(ErrorKind::ConfigError, "unknown field '" + key + "' in " + where_);
  }

 private:
  const json& doc_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_factors(Fields& f, ControlFactors& factors) {
  f.read("lambda1", factors.lambda1);
  f.read("lambda2", factors.lambda2);
}

void read_dt_params(Fields& f, DTParams& p) {
  read_factors(f, p.factors);
  f.read("step_size", p.step_size);
  f.read("n_max", p.n_max);
  f.read("samples", p.sample_count);
  f.read("incremental", p.incremental);
  if (f.has("scorer")) {
    const std::string s = f.raw("scorer").get<std::string>();
    if (s == "eval") p.scorer = Scorer::eval_classifiers;
    else if (s == "oracle") p.scorer = Scorer::oracle;
    else throw Error(ErrorKind::ConfigError, "scorer must be 'eval' or 'oracle'");
  }
}

void check_dt_params(const DTParams& p, const std::string& where) {
  if (!(p.step_size > 0.0)) throw Error(ErrorKind::ConfigError, where + ": step_size must be > 0");
  if (p.sample_count == 0) throw Error(ErrorKind::ConfigError, where + ": samples must be >= 1");
  try {
    p.factors.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, where + ": " + e.what());
  }
}

std::string task_name(Task t) { return std::string(to_string(t)); }

}  // namespace

std::string_view to_string(Task task) {
  switch (task) {
    case Task::world: return "world";
    case Task::edit: return "edit";
    case Task::dt: return "dt";
    case Task::grid: return "grid";
    case Task::ablate_incremental: return "ablate-incremental";
    case Task::compare_attr_level: return "compare-attr-level";
  }
  return "world";
}

Task task_from_string(std::string_view name) {
  for (Task t : {Task::world, Task::edit, Task::dt, Task::grid, Task::ablate_incremental,
                 Task::compare_attr_level})
    if (to_string(t) == name) return t;
  throw Error(ErrorKind::ConfigError, "unknown task '" + std::string(name) + "'");
}

ExperimentConfig parse_experiment_config(const json& doc, Task task,
                                         const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.task = task;
  c.ablation.params.sample_count = 500;
  c.compare.params.sample_count = 500;
  Fields f(doc, "config");
  int version = 0;
  f.read("schema_version", version);
  if (version != kExperimentSchemaVersion)
    throw Error(ErrorKind::ConfigError,
                "schema_version must be " + std::to_string(kExperimentSchemaVersion));
  if (f.has("task")) {
    const Task named = task_from_string(f.raw("task").get<std::string>());
    if (named != task)
      throw Error(ErrorKind::ConfigError, "config is for task '" + task_name(named) +
                                              "', not '" + task_name(task) + "'");
  }
  f.read("seed", c.seed);
  if (f.has("world") && f.has("world_path"))
    throw Error(ErrorKind::ConfigError, "give either 'world' or 'world_path', not both");
  if (f.has("world")) c.world = world_config_from_json(f.raw("world"));
  if (f.has("world_path")) {
    std::filesystem::path p = f.raw("world_path").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    if (!std::filesystem::exists(p))
      throw Error(ErrorKind::ConfigError, "world_path does not exist: " + p.string());
    c.world_path = p;
  }
  if (!c.world && !c.world_path) c.world = default_world_config();

  if (f.has("attribute_level")) {
    Fields a(f.raw("attribute_level"), "attribute_level");
    if (a.has("estimator")) {
      const std::string e = a.raw("estimator").get<std::string>();
      if (e == "average") c.attribute_level.estimator = AttributeLevelSet::Estimator::average;
      else if (e == "boundary") c.attribute_level.estimator = AttributeLevelSet::Estimator::boundary;
      else throw Error(ErrorKind::ConfigError, "estimator must be 'average' or 'boundary'");
    }
    a.read("samples", c.attribute_level.samples);
    a.finish();
    if (c.attribute_level.samples == 0)
      throw Error(ErrorKind::ConfigError, "attribute_level.samples must be >= 1");
  }
  if (f.has("edit")) {
    Fields e(f.raw("edit"), "edit");
    EditConfig& ec = c.edit.edit;
    e.read("primal", ec.primal);
    e.read("conditions", ec.conditions);
    e.read("target", ec.target);
    read_factors(e, ec.factors);
    e.read("step_size", ec.step_size);
    e.read("steps", ec.steps);
    e.read("incremental", ec.incremental);
    if (e.has("z0")) c.edit.z0 = Vec(e.raw("z0").get<std::vector<double>>());
    e.finish();
  }
  if (f.has("dt")) {
    Fields d(f.raw("dt"), "dt");
    d.read("primal", c.dt.primal);
    d.read("condition", c.dt.condition);
    read_dt_params(d, c.dt.params);
    d.finish();
  }
  if (f.has("grid")) {
    Fields g(f.raw("grid"), "grid");
    g.read("lambdas", c.grid.lambdas);
    g.read("step_size", c.grid.params.step_size);
    g.read("n_max", c.grid.params.n_max);
    g.read("samples", c.grid.params.sample_count);
    g.read("incremental", c.grid.params.incremental);
    g.finish();
    if (c.grid.lambdas.empty()) throw Error(ErrorKind::ConfigError, "grid.lambdas is empty");
    for (double l : c.grid.lambdas)
      if (!(l >= 0.0 && l <= 1.0)) throw Error(ErrorKind::ConfigError, "grid lambda outside [0,1]");
  }
  if (f.has("ablation")) {
    Fields a(f.raw("ablation"), "ablation");
    a.read("primal", c.ablation.primal);
    a.read("condition", c.ablation.condition);
    read_dt_params(a, c.ablation.params);
    a.read("p_low", c.ablation.p_low);
    a.read("p_high", c.ablation.p_high);
    a.read("p_points", c.ablation.p_points);
    a.finish();
    if (!(c.ablation.p_low <= c.ablation.p_high) || c.ablation.p_points == 0)
      throw Error(ErrorKind::ConfigError, "ablation p range");
  }
  if (f.has("compare")) {
    Fields m(f.raw("compare"), "compare");
    m.read("samples", c.compare.samples);
    m.read("dt_samples", c.compare.params.sample_count);
    m.read("step_size", c.compare.params.step_size);
    m.read("n_max", c.compare.params.n_max);
    m.finish();
  }
  f.finish();
  check_dt_params(c.dt.params, "dt");
  check_dt_params(c.grid.params, "grid");
  check_dt_params(c.ablation.params, "ablation");
  check_dt_params(c.compare.params, "compare");
  if (!(c.edit.edit.step_size > 0.0)) throw Error(ErrorKind::ConfigError, "edit.step_size must be > 0");
  if (c.edit.edit.target != 0 && c.edit.edit.target != 1)
    throw Error(ErrorKind::ConfigError, "edit.target must be 0 or 1");
  return c;
}

AblationResult ablate_incremental(const World& world, const AttributeLevelSet& attr_level,
                                  const AblationTaskOptions& options) {
  AblationResult r;
  DTParams p = options.params;
  p.incremental = true;
  r.incremental = evaluate_dt(world, attr_level, options.primal, options.condition, p);
  p.incremental = false;
  r.fixed = evaluate_dt(world, attr_level, options.primal, options.condition, p);
  const std::size_t n = options.p_points;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    const double pv = options.p_low + t * (options.p_high - options.p_low);
    r.p_grid.push_back(pv);
    r.q_incremental.push_back(q_at(r.incremental.points, pv));
    r.q_fixed.push_back(q_at(r.fixed.points, pv));
    r.mean_q_incremental += r.q_incremental.back() / static_cast<double>(n);
    r.mean_q_fixed += r.q_fixed.back() / static_cast<double>(n);
  }
  return r;
}

CompareReport compare_attr_level(const World& world, std::size_t sample_count, std::uint64_t seed,
                                 const DTParams& params) {
  const auto avg = AttributeLevelSet::estimate(world, AttributeLevelSet::Estimator::average,
                                               sample_count, derive_seed(seed, 1));
  const auto boundary = AttributeLevelSet::estimate(world, AttributeLevelSet::Estimator::boundary,
                                                    sample_count, derive_seed(seed, 2));
  DTParams p = params;
  p.factors = {1.0, 1.0};
  CompareReport report;
  for (std::size_t a = 0; a < world.attribute_count(); ++a) {
    AttributeComparison row;
    row.attribute = world.attributes()[a].name;
    row.cosine = cosine(avg.at(a).vector, boundary.at(a).vector);
    if (world.attribute_count() < 2) {
      row.auc_average = row.auc_boundary = std::numeric_limits<double>::quiet_NaN();
    } else {
      for (const auto& cond : world.attributes()) {
        if (cond.name == row.attribute) continue;
        row.auc_average += auc(evaluate_dt(world, avg, row.attribute, cond.name, p));
        row.auc_boundary += auc(evaluate_dt(world, boundary, row.attribute, cond.name, p));
      }
      const double conds = static_cast<double>(world.attribute_count() - 1);
      row.auc_average /= conds;
      row.auc_boundary /= conds;
      report.max_auc_difference =
          std::max(report.max_auc_difference, std::abs(row.auc_average - row.auc_boundary));
    }
    report.min_cosine = std::min(report.min_cosine, row.cosine);
    report.attributes.push_back(row);
  }
  return report;
}

namespace {

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir_.string());
  }

  void write(const std::string& name, const std::string& content) {
    write_text_file(dir_ / name, content);
    entries_.push_back({{"file", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
    files_.emplace_back(name);
  }

  void write_json(const std::string& name, const json& doc) { write(name, doc.dump(1) + "\n"); }

  RunResult finish(json manifest, json summary) {
    manifest["outputs"] = entries_;
    write_text_file(dir_ / "manifest.json", manifest.dump(1) + "\n");
    files_.emplace_back("manifest.json");
    return {files_, std::move(summary)};
  }

 private:
  std::filesystem::path dir_;
  json entries_ = json::array();
  std::vector<std::filesystem::path> files_;
};

json quality_json(const World& w) {
  json rows = json::array();
  for (std::size_t a = 0; a < w.attribute_count(); ++a)
    rows.push_back({{"attribute", w.attributes()[a].name},
                    {"edit_heldout_accuracy", w.edit_quality.empty() ? json(nullptr) : json(w.edit_quality[a].heldout_accuracy)},
                    {"eval_heldout_accuracy", w.eval_quality.empty() ? json(nullptr) : json(w.eval_quality[a].heldout_accuracy)}});
  return rows;
}

std::string accuracy_csv(const World& w) {
  std::string out = "attribute,set,train_accuracy,heldout_accuracy,final_loss\n";
  auto rows = [&](const std::vector<ClassifierQuality>& q, const char* set) {
    for (std::size_t a = 0; a < q.size(); ++a)
      out += w.attributes()[a].name + "," + set + "," + format_number(q[a].train_accuracy) + "," +
             format_number(q[a].heldout_accuracy) + "," + format_number(q[a].final_loss) + "\n";
  };
  rows(w.edit_quality, "edit");
  rows(w.eval_quality, "eval");
  return out;
}

std::string factors_label(const ControlFactors& f) {
  return "lambda=(" + format_number(f.lambda1) + ", " + format_number(f.lambda2) + ")";
}

}  // namespace

RunResult run_experiment(ExperimentConfig config, const RunOptions& options) {
  if (options.seed) config.seed = *options.seed;
  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  const std::uint64_t seed = config.seed;

  World world;
  json world_input;
  if (config.world_path) {
    world = world_from_json(read_json_file(*config.world_path));
    world_input = {{"world_path", config.world_path->string()},
                   {"world_sha256", sha256_hex(read_text_file(*config.world_path))}};
  } else {
    world = build_world(*config.world);
    world_input = {{"world", world_config_to_json(*config.world)}};
  }
  if (!world.has_classifiers()) throw Error(ErrorKind::ConfigError, "world has no classifiers");

  json manifest{{"tool", "latentlab"},
                {"version", kToolVersion},
                {"schema_version", kExperimentSchemaVersion},
                {"task", task_name(config.task)},
                {"seed", seed},
                {"kernel_backend", std::string(kernels::backend_name(kernels::active_backend()))},
                {"inputs", world_input}};
  ArtifactWriter out(options.out_dir);
  json summary{{"task", task_name(config.task)}};

  auto attribute_level = [&] {
    return AttributeLevelSet::estimate(world, config.attribute_level.estimator,
                                       config.attribute_level.samples,
                                       derive_seed(seed, seed_stream::attribute_level));
  };
  auto with_run_seed = [&](DTParams p) {
    p.seed = derive_seed(seed, seed_stream::evaluation);
    p.threads = threads;
    return p;
  };
  if (config.task != Task::world && config.task != Task::compare_attr_level)
    manifest["attribute_level"] = {
      {"estimator", config.attribute_level.estimator == AttributeLevelSet::Estimator::average
                        ? "average"
                        : "boundary"},
      {"samples", config.attribute_level.samples}};

  switch (config.task) {
    case Task::world: {
      out.write_json("world.world.json", world_to_json(world));
      out.write("classifier_accuracy.csv", accuracy_csv(world));
      summary["classifiers"] = quality_json(world);
      break;
    }
    case Task::edit: {
      const auto set = attribute_level();
      Vec z0 = config.edit.z0 ? *config.edit.z0
                              : Rng(derive_seed(seed, seed_stream::start_point)).normal_vec(world.latent_dim());
      if (z0.dim() != world.latent_dim())
        throw Error(ErrorKind::ConfigError, "edit.z0 has the wrong dimension");
      EditTrajectory traj;
      try {
        traj = edit(world, set, z0, config.edit.edit);
      } catch (const EditAborted& e) {
        // Keep the prefix on disk before reporting the degeneracy.
        out.write("trajectory.csv", trajectory_csv(world, e.partial()));
        out.finish(manifest, summary);
        throw;
      }
      out.write("trajectory.csv", trajectory_csv(world, traj));
      const std::size_t primal = world.attribute_index(config.edit.edit.primal);
      summary["steps"] = traj.points.size() - 1;
      summary["initial_edit_score"] = traj.points.front().edit_scores[primal];
      summary["final_edit_score"] = traj.points.back().edit_scores[primal];
      break;
    }
    case Task::dt: {
      const auto set = attribute_level();
      const DTParams p = with_run_seed(config.dt.params);
      const DTCurve curve = evaluate_dt(world, set, config.dt.primal, config.dt.condition, p);
      out.write("curve.csv", curve_csv(curve));
      out.write("curve.svg",
                dt_curves_svg({{factors_label(p.factors), curve.points}},
                              "DT curve: " + config.dt.primal + " | " + config.dt.condition));
      summary["auc"] = auc(curve);
      summary["aborted"] = curve.aborted;
      break;
    }
    case Task::grid: {
      const auto set = attribute_level();
      const GridReport report = grid_search(world, set, config.grid.lambdas,
                                            with_run_seed(config.grid.params));
      out.write("grid.csv", grid_csv(report));
      out.write("grid_pairs.csv", grid_pairs_csv(report));
      summary["pair_count"] = report.pair_count();
      summary["best"] = {{"lambda1", report.best.lambda1}, {"lambda2", report.best.lambda2},
                         {"average_auc", report.best_auc}};
      out.write_json("best.json", summary);
      break;
    }
    case Task::ablate_incremental: {
      const auto set = attribute_level();
      AblationTaskOptions opts = config.ablation;
      opts.params = with_run_seed(opts.params);
      const AblationResult r = ablate_incremental(world, set, opts);
      std::string csv = "p,q_incremental,q_fixed\n";
      for (std::size_t i = 0; i < r.p_grid.size(); ++i)
        csv += format_number(r.p_grid[i]) + "," + format_number(r.q_incremental[i]) + "," +
               format_number(r.q_fixed[i]) + "\n";
      out.write("ablation.csv", csv);
      out.write("curve_incremental.csv", curve_csv(r.incremental));
      out.write("curve_fixed.csv", curve_csv(r.fixed));
      out.write("ablation.svg",
                dt_curves_svg({{"incremental", r.incremental.points}, {"fixed direction", r.fixed.points}},
                              "Incremental updating: " + opts.primal + " | " + opts.condition));
      summary["mean_q_incremental"] = r.mean_q_incremental;
      summary["mean_q_fixed"] = r.mean_q_fixed;
      break;
    }
    case Task::compare_attr_level: {
      const CompareReport r = compare_attr_level(world, config.compare.samples,
                                                 derive_seed(seed, seed_stream::compare),
                                                 with_run_seed(config.compare.params));
      std::string csv = "attribute,cosine,auc_average,auc_boundary\n";
      for (const auto& row : r.attributes)
        csv += row.attribute + "," + format_number(row.cosine) + "," +
               format_number(row.auc_average) + "," + format_number(row.auc_boundary) + "\n";
      out.write("compare.csv", csv);
      summary["min_cosine"] = r.min_cosine;
      summary["max_auc_difference"] = r.max_auc_difference;
      break;
    }
  }
  return out.finish(manifest, summary);
}

}  // namespace latentlab
