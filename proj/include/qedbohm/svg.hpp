#pragma once

#include <string>
#include <vector>

namespace qedbohm::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct Bars {
  std::string label;
  std::vector<double> centers, heights;
};

struct Panel {
  std::string title, xlabel, ylabel;
  std::vector<Series> lines;
  Bars bars;  // drawn under the lines when non-empty
};

/// Panels stacked vertically in one self-contained SVG document.
std::string render(const std::vector<Panel>& panels, double width = 720.0, double panel_height = 300.0);

/// Tick positions covering [lo, hi] with a 1-2-5 step.
std::vector<double> ticks(double lo, double hi, int target = 5);

}  // namespace qedbohm::svg
