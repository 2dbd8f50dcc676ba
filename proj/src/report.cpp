#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

namespace idrl {

Curve curve_from_metrics(const std::string& label, const std::vector<MetricsRow>& rows) {
  Curve c{label, {}};
  for (const auto& r : rows) c.points.push_back({r.step, r.eval_return_mean, r.eval_return_std});
  return c;
}

Curve aggregate_seeds(const std::string& label, const std::vector<std::vector<MetricsRow>>& runs) {
  if (runs.empty()) throw ValidationError("no runs to aggregate for '" + label + "'");
  std::map<long, std::vector<double>> by_step;
  for (const auto& run : runs) {
    std::set<long> seen;
    for (const auto& r : run)
      if (seen.insert(r.step).second) by_step[r.step].push_back(r.eval_return_mean);
  }
  Curve c{label, {}};
  for (const auto& [step, values] : by_step) {
    if (values.size() != runs.size()) continue;
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    c.points.push_back({step, mean, std::sqrt(var / n)});
  }
  return c;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string esc(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string render_svg(const std::vector<Curve>& curves, const std::string& title) {
  const double W = 720, H = 440, left = 70, right = 170, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& c : curves)
    for (const auto& p : c.points) {
      if (!std::isfinite(p.mean) || !std::isfinite(p.std)) throw ValidationError("non-finite value in curve " + c.label);
      x0 = std::min(x0, static_cast<double>(p.step));
      x1 = std::max(x1, static_cast<double>(p.step));
      y0 = std::min(y0, p.mean - p.std);
      y1 = std::max(y1, p.mean + p.std);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto sy = [&](double v) { return top + (y1 - v) / (y1 - y0) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"440\" viewBox=\"0 0 720 440\">\n";
  s += "<rect width=\"720\" height=\"440\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       esc(title) + "</text>\n";
  s += "<rect x=\"" + fmt("%.1f", left) + "\" y=\"" + fmt("%.1f", top) + "\" width=\"" + fmt("%.1f", pw) + "\" height=\"" +
       fmt("%.1f", ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    s += "<text x=\"" + fmt("%.1f", sx(xv)) + "\" y=\"" + fmt("%.1f", top + ph + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.6g", xv) + "</text>\n";
    s += "<text x=\"" + fmt("%.1f", left - 6) + "\" y=\"" + fmt("%.1f", sy(yv) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.4g", yv) + "</text>\n";
  }
  s += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"" + fmt("%.1f", H - 10) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">environment steps</text>\n";
  s += "<text x=\"16\" y=\"" + fmt("%.1f", top + ph / 2) + "\" transform=\"rotate(-90 16 " + fmt("%.1f", top + ph / 2) +
       ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">return</text>\n";

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    const std::string color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    if (c.points.empty()) continue;
    std::string band, line;
    for (const auto& p : c.points) band += fmt("%.2f", sx(p.step)) + "," + fmt("%.2f", sy(p.mean + p.std)) + " ";
    for (auto it = c.points.rbegin(); it != c.points.rend(); ++it)
      band += fmt("%.2f", sx(it->step)) + "," + fmt("%.2f", sy(it->mean - it->std)) + " ";
    for (const auto& p : c.points) line += fmt("%.2f", sx(p.step)) + "," + fmt("%.2f", sy(p.mean)) + " ";
    band.pop_back();
    line.pop_back();
    s += "<g>\n";
    s += "<polygon points=\"" + band + "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    if (c.points.size() == 1) {
      const auto& p = c.points[0];
      s += "<line x1=\"" + fmt("%.2f", sx(p.step)) + "\" y1=\"" + fmt("%.2f", sy(p.mean - p.std)) + "\" x2=\"" +
           fmt("%.2f", sx(p.step)) + "\" y2=\"" + fmt("%.2f", sy(p.mean + p.std)) + "\" stroke=\"" + color +
           "\" stroke-opacity=\"0.5\"/>\n";
      s += "<circle cx=\"" + fmt("%.2f", sx(p.step)) + "\" cy=\"" + fmt("%.2f", sy(p.mean)) + "\" r=\"3\" fill=\"" + color +
           "\"/>\n";
    } else {
      s += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.8\"/>\n";
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    s += "<line x1=\"" + fmt("%.1f", W - right + 12) + "\" y1=\"" + fmt("%.1f", ly - 4) + "\" x2=\"" +
         fmt("%.1f", W - right + 32) + "\" y2=\"" + fmt("%.1f", ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"3\"/>\n";
    s += "<text x=\"" + fmt("%.1f", W - right + 38) + "\" y=\"" + fmt("%.1f", ly) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + esc(c.label) + "</text>\n";
    s += "</g>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace idrl
