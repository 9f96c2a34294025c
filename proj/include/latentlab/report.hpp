#pragma once

// Text artifacts: CSV tables, SVG DT-curve plots and content hashes.
// CSVs use '.' decimals, '\n' line endings and a header row. Numbers are
// written in shortest round-trip form, so output bytes depend only on values.

#include <string>
#include <string_view>
#include <vector>

#include "latentlab/dtmetric.hpp"
#include "latentlab/editor.hpp"

namespace latentlab {

std::string format_number(double v);

// step, z_0..z_{m-1}, edit_<primal>, eval_<attr> for every attribute
std::string trajectory_csv(const World& world, const EditTrajectory& trajectory);

// n,p,q
std::string curve_csv(const DTCurve& curve);

// Rows lambda1, columns lambda2, cells average AUC.
std::string grid_csv(const GridReport& report);
// lambda1,lambda2,primal,condition,auc
std::string grid_pairs_csv(const GridReport& report);

struct PlotSeries {
  std::string label;
  std::vector<DTPoint> points;
};

// 640x480 viewBox, p on x, q on y, both axes [0,1], one polyline per series.
std::string dt_curves_svg(const std::vector<PlotSeries>& series, const std::string& title);

std::string sha256_hex(std::string_view bytes);

}  // namespace latentlab
