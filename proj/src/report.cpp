#include "latentlab/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "latentlab/error.hpp"

namespace latentlab {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error(ErrorKind::IoError, "number formatting failed");
  return std::string(buf.data(), end);
}

std::string trajectory_csv(const World& world, const EditTrajectory& trajectory) {
  const std::size_t primal = world.attribute_index(trajectory.config.primal);
  std::ostringstream out;
  out << "step";
  for (std::size_t i = 0; i < world.latent_dim(); ++i) out << ",z" << i;
  out << ",edit_" << world.attributes()[primal].name;
  for (const auto& a : world.attributes()) out << ",eval_" << a.name;
  out << '\n';
  for (const auto& pt : trajectory.points) {
    const Vec x = pt.x.empty() ? forward(world.generator(), pt.z) : pt.x;
    out << pt.step;
    for (double v : pt.z) out << ',' << format_number(v);
    const double edit_score = pt.edit_scores.empty()
                                  ? forward(world.edit_classifiers()[primal], x)[0]
                                  : pt.edit_scores[primal];
    out << ',' << format_number(edit_score);
    for (const auto& h : world.eval_classifiers()) out << ',' << format_number(forward(h, x)[0]);
    out << '\n';
  }
  return out.str();
}

std::string curve_csv(const DTCurve& curve) {
  std::ostringstream out;
  out << "n,p,q\n";
  for (const auto& pt : curve.points)
    out << pt.n << ',' << format_number(pt.p) << ',' << format_number(pt.q) << '\n';
  return out.str();
}

std::string grid_csv(const GridReport& report) {
  std::ostringstream out;
  out << "lambda1\\lambda2";
  for (double l2 : report.lambdas) out << ',' << format_number(l2);
  out << '\n';
  for (std::size_t i = 0; i < report.lambdas.size(); ++i) {
    out << format_number(report.lambdas[i]);
    for (std::size_t j = 0; j < report.lambdas.size(); ++j)
      out << ',' << format_number(report.cell(i, j).average_auc);
    out << '\n';
  }
  return out.str();
}

std::string grid_pairs_csv(const GridReport& report) {
  std::ostringstream out;
  out << "lambda1,lambda2,primal,condition,auc\n";
  for (const auto& cell : report.cells)
    for (std::size_t k = 0; k < report.pairs.size(); ++k)
      out << format_number(cell.factors.lambda1) << ',' << format_number(cell.factors.lambda2)
          << ',' << report.pairs[k].first << ',' << report.pairs[k].second << ','
          << format_number(cell.pair_auc[k]) << '\n';
  return out.str();
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Two decimals are plenty for pixel coordinates.
std::string px(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

}  // namespace

std::string dt_curves_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  constexpr double W = 640, H = 480, left = 70, right = 20, top = 40, bottom = 60;
  constexpr double pw = W - left - right, ph = H - top - bottom;
  static const std::array<const char*, 6> colors{"#1f77b4", "#d62728", "#2ca02c",
                                                 "#ff7f0e", "#9467bd", "#8c564b"};
  auto sx = [&](double p) { return left + std::clamp(p, 0.0, 1.0) * pw; };
  auto sy = [&](double q) { return top + (1.0 - std::clamp(q, 0.0, 1.0)) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 480\" width=\"640\" "
         "height=\"480\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  out << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << escape_xml(title) << "</text>\n";
  out << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(pw)
      << "\" height=\"" << px(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    out << "<line x1=\"" << px(sx(t)) << "\" y1=\"" << px(top + ph) << "\" x2=\"" << px(sx(t))
        << "\" y2=\"" << px(top + ph + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(sx(t)) << "\" y=\"" << px(top + ph + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << format_number(t) << "</text>\n";
    out << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(sy(t)) << "\" x2=\"" << px(left)
        << "\" y2=\"" << px(sy(t)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(left - 10) << "\" y=\"" << px(sy(t) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
        << format_number(t) << "</text>\n";
  }
  out << "<text x=\"" << px(left + pw / 2) << "\" y=\"" << px(H - 15)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
         "transformation accuracy p</text>\n";
  out << "<text x=\"18\" y=\"" << px(top + ph / 2) << "\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 18 "
      << px(top + ph / 2) << ")\">disentanglement accuracy q</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % colors.size()];
    std::vector<DTPoint> pts = series[s].points;
    std::stable_sort(pts.begin(), pts.end(),
                     [](const DTPoint& a, const DTPoint& b) { return a.p < b.p; });
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      out << (i ? " " : "") << px(sx(pts[i].p)) << ',' << px(sy(pts[i].q));
    out << "\"/>\n";
    const double ly = top + 18 + 18 * static_cast<double>(s);
    out << "<line x1=\"" << px(left + 12) << "\" y1=\"" << px(ly + 40) << "\" x2=\""
        << px(left + 36) << "\" y2=\"" << px(ly + 40) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << px(left + 42) << "\" y=\"" << px(ly + 44)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(series[s].label)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::IoError, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace latentlab
