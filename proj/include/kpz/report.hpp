#pragma once

// CSV tables and SVG figures. Every figure is drawn from a table, so the
// report command can rebuild all of them from the CSV files alone.

#include <string>
#include <vector>

namespace kpz {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;  // IoError if absent
    std::vector<double> values(const std::string& name) const;
};

std::string to_csv(const Table& t);
Table parse_csv(const std::string& text, const std::string& origin = "csv");
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
Table read_csv(const std::string& path);

struct Series {
    std::string label;
    std::vector<double> x, y;
    std::vector<double> lo, hi;  // optional band
    bool points = false;
};

struct Plot {
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
};

struct Heatmap {
    std::string title, xlabel, ylabel, value_label;
    std::vector<double> xs, ys;
    std::vector<double> values;  // ys.size() x xs.size(), row major in y
};

std::string render_svg(const Plot& p);
std::string render_svg(const Heatmap& h);

/// Figure for a known CSV file name (g_*, density_*, two_point_*,
/// chernoff_ladder, stein_residual_*, transport); empty if none applies.
std::string figure_for(const std::string& csv_name, const Table& t);
/// Renders the figure of every known CSV in `dir`; returns the SVG names.
std::vector<std::string> render_figures(const std::string& dir);

}  // namespace kpz
