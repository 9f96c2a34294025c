#include "latentlab/dtmetric.hpp"

#include <algorithm>
#include <cmath>

#include "latentlab/editor.hpp"
#include "latentlab/error.hpp"
#include "latentlab/parallel.hpp"
#include "latentlab/rng.hpp"

namespace latentlab {
namespace {

struct SampleOutcome {
  std::vector<std::uint8_t> transformed;  // per step
  std::vector<std::uint8_t> preserved;
  bool aborted = false;
};

// Sorted by p (stable in n), q averaged over equal p.
std::vector<std::pair<double, double>> reduce_curve(const std::vector<DTPoint>& points) {
  std::vector<DTPoint> sorted = points;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const DTPoint& a, const DTPoint& b) { return a.p < b.p; });
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < sorted.size() && sorted[j].p == sorted[i].p) sum += sorted[j++].q;
    out.emplace_back(sorted[i].p, sum / static_cast<double>(j - i));
    i = j;
  }
  return out;
}

}  // namespace

double auc(const std::vector<DTPoint>& points) {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "DT curve has no points");
  const auto curve = reduce_curve(points);
  // Integrate the shortfall 1 - q so that a curve with q = 1 everywhere
  // scores exactly 1.
  double shortfall = curve.front().first * (1.0 - curve.front().second);
  for (std::size_t i = 1; i < curve.size(); ++i)
    shortfall += (curve[i].first - curve[i - 1].first) * 0.5 *
                 ((1.0 - curve[i].second) + (1.0 - curve[i - 1].second));
  shortfall += (1.0 - curve.back().first) * (1.0 - curve.back().second);
  return std::clamp(1.0 - shortfall, 0.0, 1.0);
}

double q_at(const std::vector<DTPoint>& points, double p) {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "DT curve has no points");
  const auto curve = reduce_curve(points);
  if (p <= curve.front().first) return curve.front().second;
  if (p >= curve.back().first) return curve.back().second;
  auto hi = std::upper_bound(curve.begin(), curve.end(), p,
                             [](double v, const auto& pt) { return v < pt.first; });
  auto lo = hi - 1;
  const double t = (p - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

DTCurve evaluate_dt(const World& world, const AttributeLevelSet& attr_level,
                    const std::string& primal, const std::string& condition,
                    const DTParams& params) {
  if (primal == condition)
    throw Error(ErrorKind::InvalidArgument, "primal and condition attributes must differ");
  if (params.sample_count == 0) throw Error(ErrorKind::InvalidArgument, "sample_count must be >= 1");
  const std::size_t a = world.attribute_index(primal);
  const std::size_t b = world.attribute_index(condition);
  params.factors.validate();

  EditConfig config;
  config.primal = primal;
  config.conditions = {condition};
  config.factors = params.factors;
  config.step_size = params.step_size;
  config.steps = params.n_max;
  config.incremental = params.incremental;
  config.validate(world);

  const EditOptions options{params.scorer == Scorer::eval_classifiers, false};
  auto label = [&](std::size_t attr, const TrajectoryPoint& pt) -> int {
    if (params.scorer == Scorer::oracle) return oracle_label(world.attributes()[attr], pt.z);
    return forward(world.eval_classifiers()[attr], pt.x)[0] > 0.5 ? 1 : 0;
  };

  std::vector<SampleOutcome> outcomes(params.sample_count);
  parallel_for(params.sample_count, params.threads, [&](std::size_t i) {
    Rng rng(derive_seed(params.seed, i));
    const Vec z0 = rng.normal_vec(world.latent_dim());
    const LatentProbe probe(world, z0);
    const TrajectoryPoint start{0, z0, probe.observation(), {}};
    EditConfig local = config;
    local.target = 1 - label(a, start);
    const int original_condition = label(b, start);

    SampleOutcome& out = outcomes[i];
    out.transformed.assign(params.n_max + 1, 0);
    out.preserved.assign(params.n_max + 1, 0);
    EditTrajectory traj;
    try {
      traj = edit(world, attr_level, z0, local, options);
    } catch (const EditAborted& e) {
      traj = e.partial();
      out.aborted = true;
    }
    for (const auto& pt : traj.points) {
      out.transformed[pt.step] = label(a, pt) == local.target;
      out.preserved[pt.step] = label(b, pt) == original_condition;
    }
  });

  DTCurve curve{{}, primal, condition, params.factors, params.step_size, params.sample_count, 0};
  std::vector<std::size_t> p_hits(params.n_max + 1, 0), q_hits(params.n_max + 1, 0);
  for (const auto& o : outcomes) {
    curve.aborted += o.aborted;
    for (std::size_t n = 0; n <= params.n_max; ++n) {
      p_hits[n] += o.transformed[n];
      q_hits[n] += o.preserved[n];
    }
  }
  const double total = static_cast<double>(params.sample_count);
  for (std::size_t n = 0; n <= params.n_max; ++n)
    curve.points.push_back({n, static_cast<double>(p_hits[n]) / total,
                            static_cast<double>(q_hits[n]) / total});
  return curve;
}

std::vector<double> even_grid(std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {1.0};
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

GridReport grid_search(const World& world, const AttributeLevelSet& attr_level,
                       const std::vector<double>& lambdas, const DTParams& params) {
  if (world.attribute_count() < 2)
    throw Error(ErrorKind::NoAttributePairs, "grid search needs at least two attributes");
  if (lambdas.empty()) throw Error(ErrorKind::InvalidArgument, "lambda grid is empty");
  for (double l : lambdas)
    if (!(l >= 0.0 && l <= 1.0)) throw Error(ErrorKind::InvalidArgument, "lambda outside [0,1]");

  GridReport report;
  report.lambdas = lambdas;
  for (const auto& p : world.attributes())
    for (const auto& c : world.attributes())
      if (p.name != c.name) report.pairs.emplace_back(p.name, c.name);

  for (double l1 : lambdas) {
    for (double l2 : lambdas) {
      GridCell cell{{l1, l2}, 0.0, {}};
      DTParams cell_params = params;
      cell_params.factors = cell.factors;
      double sum = 0.0;
      for (const auto& [primal, condition] : report.pairs) {
        const double area = auc(evaluate_dt(world, attr_level, primal, condition, cell_params));
        cell.pair_auc.push_back(area);
        sum += area;
      }
      cell.average_auc = sum / static_cast<double>(report.pairs.size());
      report.cells.push_back(std::move(cell));
    }
  }

  const GridCell* best = &report.cells.front();
  for (const auto& c : report.cells) {
    const double diff = c.average_auc - best->average_auc;
    if (diff > kAucTieTolerance) {
      best = &c;
    } else if (std::abs(diff) <= kAucTieTolerance) {
      const auto& f = c.factors;
      const auto& g = best->factors;
      if (f.lambda1 > g.lambda1 || (f.lambda1 == g.lambda1 && f.lambda2 < g.lambda2)) best = &c;
    }
  }
  report.best = best->factors;
  report.best_auc = best->average_auc;
  return report;
}

}  // namespace latentlab
