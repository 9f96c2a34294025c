#pragma once

// Disentanglement-Transformation (DT) curves.
//
// For a primal attribute A and a condition attribute B, a set of prior
// samples is edited toward the flip of A's initial label. After n steps,
// p_n is the fraction whose A label reached the target and q_n the fraction
// whose B label is unchanged. The area under q(p) on [0,1] summarizes
// editing quality; grid_search picks the control factors maximizing the mean
// area over all ordered attribute pairs.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "latentlab/directions.hpp"
#include "latentlab/synthworld.hpp"

namespace latentlab {

struct DTPoint {
  std::size_t n = 0;
  double p = 0.0;
  double q = 1.0;
};

struct DTCurve {
  std::vector<DTPoint> points;
  std::string primal;
  std::string condition;
  ControlFactors factors;
  double step_size = 0.1;
  std::size_t sample_count = 0;
  std::size_t aborted = 0;  // samples whose edit degenerated
};

enum class Scorer {
  eval_classifiers,  // the world's held-out classifier set
  oracle,            // ground-truth hyperplanes, as a cross-check
};

struct DTParams {
  ControlFactors factors;
  double step_size = 0.1;
  std::size_t n_max = 20;
  std::size_t sample_count = 1000;
  std::uint64_t seed = 0;
  bool incremental = true;
  Scorer scorer = Scorer::eval_classifiers;
  std::size_t threads = 1;
};

// Sample i uses z ~ N(0, I) drawn from derive_seed(seed, i), so every call
// with the same seed and sample_count edits the same latent points.
DTCurve evaluate_dt(const World& world, const AttributeLevelSet& attr_level,
                    const std::string& primal, const std::string& condition,
                    const DTParams& params);

// Trapezoidal area under q(p) on [0,1]: points sorted by p, q averaged over
// equal p, constant extension from the smallest p down to 0 and from the
// largest p up to 1.
double auc(const std::vector<DTPoint>& points);
inline double auc(const DTCurve& curve) { return auc(curve.points); }

// Piecewise-linear q at transformation accuracy p over the same sorted,
// tie-averaged curve, with the same constant extension.
double q_at(const std::vector<DTPoint>& points, double p);

struct GridCell {
  ControlFactors factors;
  double average_auc = 0.0;
  std::vector<double> pair_auc;  // aligned with GridReport::pairs
};

struct GridReport {
  std::vector<double> lambdas;
  std::vector<std::pair<std::string, std::string>> pairs;  // ordered (primal, condition)
  std::vector<GridCell> cells;  // row-major: lambda1 index major, lambda2 minor
  ControlFactors best;
  double best_auc = 0.0;

  std::size_t pair_count() const noexcept { return pairs.size(); }
  const GridCell& cell(std::size_t i1, std::size_t i2) const {
    return cells.at(i1 * lambdas.size() + i2);
  }
};

inline constexpr double kAucTieTolerance = 1e-12;

// Throws NoAttributePairs for worlds with fewer than two attributes and
// InvalidArgument for an empty or out-of-range grid. params.factors is
// ignored. Ties within kAucTieTolerance go to the larger lambda1, then the
// smaller lambda2.
GridReport grid_search(const World& world, const AttributeLevelSet& attr_level,
                       const std::vector<double>& lambdas, const DTParams& params);

// Evenly spaced grid 0, 1/(n-1), ..., 1.
std::vector<double> even_grid(std::size_t n);

}  // namespace latentlab
