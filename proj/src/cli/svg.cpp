#include "pgdqn/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace pgdqn::cli {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 420;
constexpr int kMargin = 50;

const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("svg: cannot open " + path);
  return out;
}

void header(std::ofstream& out, const std::string& title) {
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' font-size='16' "
      << "font-family='sans-serif'>" << title << "</text>\n";
}

}  // namespace

void write_line_svg(const std::vector<Series>& series, const std::string& title,
                    const std::string& path) {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;

  auto px = [&](double x) {
    return kMargin + (x - xmin) / (xmax - xmin) * (kWidth - 2 * kMargin);
  };
  auto py = [&](double y) {
    return kHeight - kMargin - (y - ymin) / (ymax - ymin) * (kHeight - 2 * kMargin);
  };

  auto out = open_or_throw(path);
  header(out, title);
  out << "<rect x='" << kMargin << "' y='" << kMargin << "' width='" << kWidth - 2 * kMargin
      << "' height='" << kHeight - 2 * kMargin << "' fill='none' stroke='#999'/>\n";
  int color = 0;
  for (const auto& s : series) {
    out << "<polyline fill='none' stroke='" << kPalette[color % 6] << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    out << "'/>\n";
    out << "<text x='" << kWidth - kMargin - 6 << "' y='" << kMargin + 16 + 16 * color
        << "' text-anchor='end' font-size='12' font-family='sans-serif' fill='"
        << kPalette[color % 6] << "'>" << s.label << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
}

void write_bar_svg(const std::vector<std::string>& labels, const std::vector<double>& values,
                   const std::string& title, const std::string& path) {
  if (labels.size() != values.size() || labels.empty())
    throw std::invalid_argument("write_bar_svg: labels/values mismatch");
  const double vmax = std::max(1e-12, *std::max_element(values.begin(), values.end()));
  const double band = static_cast<double>(kWidth - 2 * kMargin) / values.size();

  auto out = open_or_throw(path);
  header(out, title);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double h = values[i] / vmax * (kHeight - 2 * kMargin);
    const double x = kMargin + band * i + band * 0.15;
    out << "<rect x='" << x << "' y='" << kHeight - kMargin - h << "' width='" << band * 0.7
        << "' height='" << h << "' fill='" << kPalette[i % 6] << "'/>\n";
    out << "<text x='" << kMargin + band * i + band / 2 << "' y='" << kHeight - kMargin + 16
        << "' text-anchor='middle' font-size='12' font-family='sans-serif'>" << labels[i]
        << "</text>\n";
    out << "<text x='" << kMargin + band * i + band / 2 << "' y='" << kHeight - kMargin - h - 6
        << "' text-anchor='middle' font-size='12' font-family='sans-serif'>" << values[i]
        << "</text>\n";
  }
  out << "</svg>\n";
}

void write_heatmap_svg(const std::vector<std::vector<double>>& rows, const std::string& title,
                       const std::string& path) {
  if (rows.empty() || rows.front().empty())
    throw std::invalid_argument("write_heatmap_svg: empty matrix");
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = rows.front().size();
  const double cw = static_cast<double>(kWidth - 2 * kMargin) / n_rows;
  const double ch = static_cast<double>(kHeight - 2 * kMargin) / n_cols;

  auto out = open_or_throw(path);
  header(out, title);
  for (std::size_t i = 0; i < n_rows; ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      const double v = std::clamp(rows[i][j], 0.0, 1.0);
      const int red = static_cast<int>(255 * v);
      const int blue = static_cast<int>(255 * (1.0 - v));
      out << "<rect x='" << kMargin + cw * i << "' y='" << kMargin + ch * j << "' width='"
          << cw + 0.5 << "' height='" << ch + 0.5 << "' fill='rgb(" << red << ",40," << blue
          << ")'/>\n";
    }
  out << "</svg>\n";
}

}  // namespace pgdqn::cli
