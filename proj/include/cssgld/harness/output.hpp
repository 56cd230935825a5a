#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cssgld::harness {

/// Shortest-round-trip-safe decimal text (%.17g) used in every emitted CSV.
std::string format_number(double x);

/// Header plus string cells; enough CSV for the files this tool writes.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(std::string_view name) const;
  std::vector<double> numbers(std::string_view name) const;
  std::vector<std::string> strings(std::string_view name) const;
};

Table read_csv(const std::filesystem::path& path);
Table parse_csv(std::string_view text);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool line = true;
  bool markers = true;
  bool dashed = false;
  /// "circle" or "square".
  std::string marker = "circle";
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  /// Draws y = x across the visible range.
  bool diagonal = false;
  std::vector<Series> series;
};

/// Self-contained SVG line/scatter plot. Non-finite points and nonpositive
/// values on log axes are skipped.
std::string render_plot(const PlotSpec& spec);

/// Grayscale heat map of a row-major nx x ny grid over [x0, x1] x [y0, y1].
std::string render_heatmap(const std::string& title, const std::vector<double>& values, int nx, int ny, double x0,
                           double x1, double y0, double y1);

}  // namespace cssgld::harness
