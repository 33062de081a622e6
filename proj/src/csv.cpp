#include "pcdecomp/error.hpp"
#include "pcdecomp/time_series.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace pcdecomp {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    text = trim(text);
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

} // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) throw Error("failed to format floating point value");
    return std::string(buf.data(), ptr);
}

TimeSeries parse_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(source, 1, "empty input, expected header `t,value`");
    ++line_no;
    if (trim(line) != "t,value") throw ParseError(source, line_no, "expected header `t,value`, got `" + line + "`");

    std::vector<double> values;
    std::int64_t t0 = 0;
    std::int64_t expected_t = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos)
            throw ParseError(source, line_no, "expected two comma-separated fields");
        std::int64_t t = 0;
        if (!parse_number(row.substr(0, comma), t))
            throw ParseError(source, line_no, "t is not an integer: `" + std::string(row.substr(0, comma)) + "`");
        double v = 0.0;
        if (!parse_number(row.substr(comma + 1), v) || !std::isfinite(v))
            throw ParseError(source, line_no, "value is not a finite number: `" + std::string(row.substr(comma + 1)) + "`");
        if (values.empty()) {
            t0 = t;
        } else if (t != expected_t) {
            throw ParseError(source, line_no,
                             "non-contiguous t: expected " + std::to_string(expected_t) + ", got " + std::to_string(t));
        }
        expected_t = t + 1;
        values.push_back(v);
    }
    if (values.empty()) throw ParseError(source, line_no, "no data rows");
    return TimeSeries(std::move(values), t0, source);
}

TimeSeries read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    auto series = parse_csv(in, path.string());
    series.set_name(path.stem().string());
    return series;
}

void write_csv(const TimeSeries& series, std::ostream& out) {
    out << "t,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) out << series.time(i) << ',' << format_double(series[i]) << '\n';
}

void write_csv(const TimeSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_csv(series, out);
    if (!out) throw Error("write failed for " + path.string());
}

} // namespace pcdecomp
