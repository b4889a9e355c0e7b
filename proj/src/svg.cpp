#include "qedbohm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace qedbohm::svg {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b",
                                "#e377c2"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, double step) {
  char buf[32];
  const int digits = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
  std::snprintf(buf, sizeof buf, "%.*f", digits, std::abs(v) < 1e-12 * step ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = std::max(1e-3, 0.05 * std::abs(hi));
      lo -= pad;
      hi += pad;
    }
  }
};

double tick_step(double lo, double hi, int target) {
  const double raw = (hi - lo) / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace

std::vector<double> ticks(double lo, double hi, int target) {
  const double step = tick_step(lo, hi, target);
  std::vector<double> out;
  for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

std::string render(const std::vector<Panel>& panels, double width, double panel_height) {
  const double ml = 70, mr = 150, mt = 30, mb = 45;
  std::ostringstream s;
  const double height = panel_height * static_cast<double>(std::max<std::size_t>(1, panels.size()));
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const Panel& p = panels[pi];
    const double top = panel_height * static_cast<double>(pi);
    const double x0 = ml, x1 = width - mr, y0 = top + mt, y1 = top + panel_height - mb;

    Range rx, ry;
    for (const auto& l : p.lines) {
      for (double v : l.x) rx.add(v);
      for (double v : l.y) ry.add(v);
    }
    if (!p.bars.centers.empty()) {
      const double half = p.bars.centers.size() > 1 ? 0.5 * (p.bars.centers[1] - p.bars.centers[0]) : 0.5;
      for (double c : p.bars.centers) rx.add(c - half), rx.add(c + half);
      for (double h : p.bars.heights) ry.add(h);
      ry.add(0.0);
    }
    rx.finish();
    ry.finish();
    const double ystep = tick_step(ry.lo, ry.hi, 5);
    ry.lo = std::floor(ry.lo / ystep - 1e-9) * ystep;
    ry.hi = std::ceil(ry.hi / ystep + 1e-9) * ystep;
    auto X = [&](double v) { return x0 + (v - rx.lo) / (rx.hi - rx.lo) * (x1 - x0); };
    auto Y = [&](double v) { return y1 - (v - ry.lo) / (ry.hi - ry.lo) * (y1 - y0); };

    s << "<g>\n<text x=\"" << num(0.5 * (x0 + x1)) << "\" y=\"" << num(top + 18)
      << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(p.title) << "</text>\n";
    s << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0) << "\" height=\""
      << num(y1 - y0) << "\" fill=\"none\" stroke=\"black\"/>\n";
    const double xstep = tick_step(rx.lo, rx.hi, 6);
    for (double v : ticks(rx.lo, rx.hi, 6)) {
      s << "<line x1=\"" << num(X(v)) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(X(v)) << "\" y2=\""
        << num(y1 + 5) << "\" stroke=\"black\"/><text x=\"" << num(X(v)) << "\" y=\"" << num(y1 + 18)
        << "\" text-anchor=\"middle\">" << tick_label(v, xstep) << "</text>\n";
    }
    for (double v : ticks(ry.lo, ry.hi, 5)) {
      s << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(Y(v)) << "\" x2=\"" << num(x0) << "\" y2=\""
        << num(Y(v)) << "\" stroke=\"black\"/><text x=\"" << num(x0 - 8) << "\" y=\"" << num(Y(v) + 4)
        << "\" text-anchor=\"end\">" << tick_label(v, ystep) << "</text>\n";
    }
    s << "<text x=\"" << num(0.5 * (x0 + x1)) << "\" y=\"" << num(y1 + 36) << "\" text-anchor=\"middle\">"
      << escape(p.xlabel) << "</text>\n";
    s << "<text transform=\"translate(" << num(x0 - 52) << "," << num(0.5 * (y0 + y1))
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(p.ylabel) << "</text>\n";

    double legend_y = y0 + 12;
    if (!p.bars.centers.empty()) {
      const double half = p.bars.centers.size() > 1 ? 0.5 * (p.bars.centers[1] - p.bars.centers[0]) : 0.5;
      s << "<g fill=\"#bbbbbb\" stroke=\"#888888\" stroke-width=\"0.5\">\n";
      for (std::size_t i = 0; i < p.bars.centers.size(); ++i) {
        const double h = p.bars.heights[i];
        if (!std::isfinite(h)) continue;
        s << "<rect x=\"" << num(X(p.bars.centers[i] - half)) << "\" y=\"" << num(Y(h)) << "\" width=\""
          << num(X(p.bars.centers[i] + half) - X(p.bars.centers[i] - half)) << "\" height=\"" << num(Y(0.0) - Y(h))
          << "\"/>\n";
      }
      s << "</g>\n<rect x=\"" << num(x1 + 10) << "\" y=\"" << num(legend_y - 8) << "\" width=\"16\" height=\"8\" "
        << "fill=\"#bbbbbb\"/><text x=\"" << num(x1 + 32) << "\" y=\"" << num(legend_y) << "\">"
        << escape(p.bars.label) << "</text>\n";
      legend_y += 18;
    }
    for (std::size_t li = 0; li < p.lines.size(); ++li) {
      const auto& l = p.lines[li];
      const char* color = kPalette[li % (sizeof kPalette / sizeof *kPalette)];
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < std::min(l.x.size(), l.y.size()); ++i) {
        if (std::isfinite(l.x[i]) && std::isfinite(l.y[i])) s << num(X(l.x[i])) << ',' << num(Y(l.y[i])) << ' ';
      }
      s << "\"/>\n<line x1=\"" << num(x1 + 10) << "\" y1=\"" << num(legend_y - 4) << "\" x2=\"" << num(x1 + 26)
        << "\" y2=\"" << num(legend_y - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\""
        << num(x1 + 32) << "\" y=\"" << num(legend_y) << "\">" << escape(l.label) << "</text>\n";
      legend_y += 18;
    }
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace qedbohm::svg
