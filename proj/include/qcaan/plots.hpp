#pragma once

#include <string>
#include <vector>

namespace qcaan::plots {

struct Series {
    std::string name;
    std::vector<double> x, y;
};

struct BoxStats {
    std::string label;
    double min, q1, median, q3, max;
};

BoxStats box_stats(const std::string& label, std::vector<double> values);

struct Interval {
    std::string label;
    double center, lo, hi;
};

struct Bar {
    std::string group;
    std::string label;
    double value;
};

enum class Kind { line, box, interval, bar };

struct Plot {
    Kind kind = Kind::line;
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
    std::vector<BoxStats> boxes;
    std::vector<Interval> intervals;
    std::vector<Bar> bars;
};

/// The numbers a plot draws, as CSV.
std::string to_csv(const Plot& p);
std::string to_svg(const Plot& p);

/// Writes <stem>.csv always and <stem>.svg when `svg` is set; returns the paths written.
std::vector<std::string> write_plot(const Plot& p, const std::string& stem, bool svg);

}  // namespace qcaan::plots
