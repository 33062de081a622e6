#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace pcdecomp {

enum class PlotKind { series, periodogram, trace, overlay };

PlotKind plot_kind_from_string(const std::string& s);

struct PlotSpec {
    PlotKind kind = PlotKind::series;
    std::vector<std::filesystem::path> inputs;
    std::filesystem::path output;
    std::string title;
    std::string column = "A"; // trace plots: chain column to draw
};

struct Polyline {
    std::vector<std::pair<double, double>> points;
    std::string color;
    std::string label;
};

/// Fixed 800x450 canvas, no timestamps: identical input gives identical bytes.
std::string render_svg(const std::vector<Polyline>& lines, const std::string& title, const std::string& x_label,
                       const std::string& y_label);

/// Named numeric columns of a headed CSV file.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    const std::vector<double>& column(const std::string& name) const;
};

CsvTable read_table(const std::filesystem::path& path);

/// Loads the inputs named by `spec` and writes the SVG to spec.output.
void render_plot(const PlotSpec& spec);

} // namespace pcdecomp
