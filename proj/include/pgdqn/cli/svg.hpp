#pragma once

#include <string>
#include <vector>

namespace pgdqn::cli {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

// Minimal self-contained SVG emitters; CSV stays the contract, these are a
// convenience for eyeballing runs.
void write_line_svg(const std::vector<Series>& series, const std::string& title,
                    const std::string& path);
void write_bar_svg(const std::vector<std::string>& labels, const std::vector<double>& values,
                   const std::string& title, const std::string& path);
void write_heatmap_svg(const std::vector<std::vector<double>>& rows, const std::string& title,
                       const std::string& path);

}  // namespace pgdqn::cli
