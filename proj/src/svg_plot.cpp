#include "pcdecomp/svg_plot.hpp"

#include "pcdecomp/error.hpp"
#include "pcdecomp/spectral.hpp"
#include "pcdecomp/time_series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pcdecomp {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 450.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"};

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

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        out.push_back(cell);
    }
    return out;
}

} // namespace

PlotKind plot_kind_from_string(const std::string& s) {
    if (s == "series") return PlotKind::series;
    if (s == "periodogram") return PlotKind::periodogram;
    if (s == "trace") return PlotKind::trace;
    if (s == "overlay") return PlotKind::overlay;
    throw InvalidArgument("unknown plot kind `" + s + "` (series, periodogram, trace, overlay)");
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return columns[i];
    throw InvalidArgument("CSV has no column `" + name + "`");
}

CsvTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string(), 1, "missing header");
    t.header = split(line);
    t.columns.resize(t.header.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size()) throw ParseError(path.string(), line_no, "wrong number of fields");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), v);
            if (ec != std::errc() || ptr != cells[i].data() + cells[i].size())
                throw ParseError(path.string(), line_no, "non-numeric field `" + cells[i] + "`");
            t.columns[i].push_back(v);
        }
    }
    return t;
}

std::string render_svg(const std::vector<Polyline>& lines, const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& l : lines)
        for (const auto& [x, y] : l.points) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    if (x_hi == x_lo) x_hi = x_lo + 1.0;
    if (y_hi == y_lo) y_lo -= 0.5, y_hi += 0.5;
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto sy = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"450\" viewBox=\"0 0 800 450\">\n";
    svg << "<rect width=\"800\" height=\"450\" fill=\"#ffffff\"/>\n";
    svg << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << escape_xml(title) << "</text>\n";
    svg << "<g stroke=\"#888888\" stroke-width=\"1\" fill=\"none\">\n";
    svg << "<rect x=\"" << coord(kLeft) << "\" y=\"" << coord(kTop) << "\" width=\"" << coord(pw) << "\" height=\""
        << coord(ph) << "\"/>\n</g>\n";
    svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = x_lo + (x_hi - x_lo) * i / 4.0;
        const double fy = y_lo + (y_hi - y_lo) * i / 4.0;
        svg << "<text x=\"" << coord(sx(fx)) << "\" y=\"" << coord(kTop + ph + 16) << "\" text-anchor=\"middle\">"
            << num(fx) << "</text>\n";
        svg << "<text x=\"" << coord(kLeft - 6) << "\" y=\"" << coord(sy(fy) + 4) << "\" text-anchor=\"end\">"
            << num(fy) << "</text>\n";
    }
    svg << "<text x=\"" << coord(kLeft + pw / 2) << "\" y=\"" << coord(kHeight - 10)
        << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << coord(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << coord(kTop + ph / 2) << ")\">" << escape_xml(y_label) << "</text>\n";
    svg << "</g>\n";

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& l = lines[i];
        const std::string color = l.color.empty() ? kPalette[i % std::size(kPalette)] : l.color;
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\"";
        if (!l.label.empty()) svg << " data-label=\"" << escape_xml(l.label) << "\"";
        svg << " points=\"";
        for (std::size_t k = 0; k < l.points.size(); ++k) {
            if (k) svg << ' ';
            svg << coord(sx(l.points[k].first)) << ',' << coord(sy(l.points[k].second));
        }
        svg << "\"/>\n";
        if (!l.label.empty())
            svg << "<text x=\"" << coord(kLeft + 8) << "\" y=\"" << coord(kTop + 14 + 14 * static_cast<double>(i))
                << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">" << escape_xml(l.label)
                << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void render_plot(const PlotSpec& spec) {
    if (spec.inputs.empty()) throw InvalidArgument("plot needs at least one input");
    for (const auto& p : spec.inputs)
        if (!std::filesystem::exists(p)) throw InvalidArgument("plot input " + p.string() + " does not exist");

    std::vector<Polyline> lines;
    std::string x_label = "t";
    std::string y_label = "value";
    switch (spec.kind) {
    case PlotKind::series:
    case PlotKind::overlay: {
        const std::size_t count = spec.kind == PlotKind::series ? 1 : spec.inputs.size();
        for (std::size_t i = 0; i < count; ++i) {
            const auto ts = read_csv(spec.inputs[i]);
            Polyline l;
            l.label = spec.kind == PlotKind::overlay ? spec.inputs[i].stem().string() : std::string{};
            for (std::size_t k = 0; k < ts.size(); ++k) l.points.emplace_back(static_cast<double>(ts.time(k)), ts[k]);
            lines.push_back(std::move(l));
        }
        break;
    }
    case PlotKind::periodogram: {
        x_label = "frequency (cycles per step)";
        y_label = "power";
        const auto table = read_table(spec.inputs.front());
        Polyline l;
        if (std::find(table.header.begin(), table.header.end(), "freq") != table.header.end()) {
            const auto& f = table.column("freq");
            const auto& p = table.column("power");
            for (std::size_t k = 0; k < f.size(); ++k) l.points.emplace_back(f[k], p[k]);
        } else {
            const auto pg = periodogram(read_csv(spec.inputs.front()));
            for (std::size_t k = 0; k < pg.freqs.size(); ++k) l.points.emplace_back(pg.freqs[k], pg.power[k]);
        }
        lines.push_back(std::move(l));
        break;
    }
    case PlotKind::trace: {
        x_label = "iteration";
        y_label = spec.column;
        const auto table = read_table(spec.inputs.front());
        const auto& it = table.column("iter");
        const auto& v = table.column(spec.column);
        Polyline l;
        for (std::size_t k = 0; k < it.size(); ++k) l.points.emplace_back(it[k], v[k]);
        lines.push_back(std::move(l));
        break;
    }
    }

    std::ofstream out(spec.output, std::ios::binary);
    if (!out) throw Error("cannot write " + spec.output.string());
    out << render_svg(lines, spec.title, x_label, y_label);
}

} // namespace pcdecomp
