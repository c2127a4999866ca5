#include "qcaan/plots.hpp"

#include "qcaan/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qcaan::plots {

namespace {

constexpr double kWidth = 720, kHeight = 440;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 70;
const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

struct Range {
    double lo = INFINITY, hi = -INFINITY;

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(lo <= hi)) lo = 0, hi = 1;
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

class Canvas {
public:
    Canvas(const Plot& p, Range x, Range y) : x_(x), y_(y) {
        os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
            << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(p.title)
            << "</text>\n"
            << "<text x=\"" << kLeft + plot_w() / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
            << esc(p.xlabel) << "</text>\n"
            << "<text transform=\"translate(16," << kTop + plot_h() / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
            << esc(p.ylabel) << "</text>\n"
            << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w() << "\" height=\"" << plot_h()
            << "\" fill=\"none\" stroke=\"#333\"/>\n";
        for (int k = 0; k <= 4; ++k) {
            const double v = y_.lo + (y_.hi - y_.lo) * k / 4;
            os_ << "<line x1=\"" << kLeft - 4 << "\" x2=\"" << kLeft + plot_w() << "\" y1=\"" << py(v) << "\" y2=\""
                << py(v) << "\" stroke=\"#ddd\"/>\n"
                << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">" << fmt(v)
                << "</text>\n";
        }
    }

    double plot_w() const { return kWidth - kLeft - kRight; }
    double plot_h() const { return kHeight - kTop - kBottom; }
    double px(double v) const { return kLeft + (v - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
    double py(double v) const { return kTop + (1 - (v - y_.lo) / (y_.hi - y_.lo)) * plot_h(); }

    void x_ticks() {
        for (int k = 0; k <= 4; ++k) {
            const double v = x_.lo + (x_.hi - x_.lo) * k / 4;
            os_ << "<text x=\"" << px(v) << "\" y=\"" << kTop + plot_h() + 16 << "\" text-anchor=\"middle\">"
                << fmt(v) << "</text>\n";
        }
    }
    void category(double x, const std::string& label) {
        os_ << "<text x=\"" << x << "\" y=\"" << kTop + plot_h() + 16 << "\" text-anchor=\"middle\">" << esc(label)
            << "</text>\n";
    }
    void legend(std::size_t i, const std::string& label) {
        const double y = kTop + 10 + 18 * static_cast<double>(i);
        os_ << "<rect x=\"" << kWidth - kRight + 12 << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"12\" fill=\""
            << kPalette[i % 10] << "\"/>\n<text x=\"" << kWidth - kRight + 30 << "\" y=\"" << y + 1 << "\">"
            << esc(label) << "</text>\n";
    }
    std::ostringstream& os() { return os_; }
    std::string finish() {
        os_ << "</svg>\n";
        return os_.str();
    }

private:
    Range x_, y_;
    std::ostringstream os_;
};

std::string line_svg(const Plot& p) {
    Range x, y;
    for (const auto& s : p.series) {
        for (double v : s.x) x.add(v);
        for (double v : s.y) y.add(v);
    }
    x.finish();
    y.finish();
    Canvas c(p, x, y);
    c.x_ticks();
    for (std::size_t i = 0; i < p.series.size(); ++i) {
        const auto& s = p.series[i];
        c.os() << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << kPalette[i % 10] << "\" points=\"";
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k)
            if (std::isfinite(s.x[k]) && std::isfinite(s.y[k])) c.os() << c.px(s.x[k]) << ',' << c.py(s.y[k]) << ' ';
        c.os() << "\"/>\n";
        c.legend(i, s.name);
    }
    return c.finish();
}

std::string box_svg(const Plot& p) {
    Range y;
    for (const auto& b : p.boxes) {
        y.add(b.min);
        y.add(b.max);
    }
    y.finish();
    const double n = static_cast<double>(p.boxes.size());
    Canvas c(p, {0, std::max(1.0, n)}, y);
    for (std::size_t i = 0; i < p.boxes.size(); ++i) {
        const auto& b = p.boxes[i];
        const double cx = c.px(static_cast<double>(i) + 0.5), w = 0.3 * c.plot_w() / std::max(1.0, n);
        auto& os = c.os();
        os << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << c.py(b.min) << "\" y2=\"" << c.py(b.max)
           << "\" stroke=\"#333\"/>\n"
           << "<rect x=\"" << cx - w / 2 << "\" y=\"" << c.py(b.q3) << "\" width=\"" << w << "\" height=\""
           << c.py(b.q1) - c.py(b.q3) << "\" fill=\"" << kPalette[i % 10] << "\" fill-opacity=\"0.5\" stroke=\"#333\"/>\n"
           << "<line x1=\"" << cx - w / 2 << "\" x2=\"" << cx + w / 2 << "\" y1=\"" << c.py(b.median) << "\" y2=\""
           << c.py(b.median) << "\" stroke=\"#000\" stroke-width=\"2\"/>\n";
        c.category(cx, b.label);
    }
    return c.finish();
}

std::string interval_svg(const Plot& p) {
    Range y;
    for (const auto& iv : p.intervals) {
        y.add(iv.lo);
        y.add(iv.hi);
        y.add(iv.center);
    }
    y.finish();
    const double n = static_cast<double>(p.intervals.size());
    Canvas c(p, {0, std::max(1.0, n)}, y);
    for (std::size_t i = 0; i < p.intervals.size(); ++i) {
        const auto& iv = p.intervals[i];
        const double cx = c.px(static_cast<double>(i) + 0.5);
        c.os() << "<line x1=\"" << cx << "\" x2=\"" << cx << "\" y1=\"" << c.py(iv.lo) << "\" y2=\"" << c.py(iv.hi)
               << "\" stroke=\"" << kPalette[i % 10] << "\" stroke-width=\"3\"/>\n"
               << "<circle cx=\"" << cx << "\" cy=\"" << c.py(iv.center) << "\" r=\"4\" fill=\"#000\"/>\n";
        c.category(cx, iv.label);
    }
    return c.finish();
}

std::string bar_svg(const Plot& p) {
    Range y;
    y.add(0);
    for (const auto& b : p.bars) y.add(b.value);
    y.finish();
    std::vector<std::string> groups, labels;
    for (const auto& b : p.bars) {
        if (std::find(groups.begin(), groups.end(), b.group) == groups.end()) groups.push_back(b.group);
        if (std::find(labels.begin(), labels.end(), b.label) == labels.end()) labels.push_back(b.label);
    }
    const double n = static_cast<double>(labels.size());
    Canvas c(p, {0, std::max(1.0, n)}, y);
    const double slot = c.plot_w() / std::max(1.0, n);
    const double w = 0.8 * slot / static_cast<double>(std::max<std::size_t>(1, groups.size()));
    for (const auto& b : p.bars) {
        const auto li = static_cast<double>(std::find(labels.begin(), labels.end(), b.label) - labels.begin());
        const auto gi = static_cast<std::size_t>(std::find(groups.begin(), groups.end(), b.group) - groups.begin());
        const double x0 = c.px(li) + 0.1 * slot + w * static_cast<double>(gi);
        const double top = c.py(std::max(b.value, 0.0)), bottom = c.py(std::min(b.value, 0.0));
        c.os() << "<rect x=\"" << x0 << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << bottom - top
               << "\" fill=\"" << kPalette[gi % 10] << "\"/>\n";
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double cx = c.px(static_cast<double>(i) + 0.5);
        c.os() << "<text transform=\"translate(" << cx << ',' << kTop + c.plot_h() + 12
               << ") rotate(30)\" font-size=\"10\">" << esc(labels[i]) << "</text>\n";
    }
    if (groups.size() > 1)
        for (std::size_t g = 0; g < groups.size(); ++g) c.legend(g, groups[g]);
    return c.finish();
}

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

BoxStats box_stats(const std::string& label, std::vector<double> values) {
    if (values.empty()) throw Error("box_stats: no values for '" + label + "'");
    std::sort(values.begin(), values.end());
    return {label, values.front(), quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75), values.back()};
}

std::string to_csv(const Plot& p) {
    std::ostringstream os;
    switch (p.kind) {
        case Kind::line:
            os << "series,x,y\n";
            for (const auto& s : p.series)
                for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k)
                    os << s.name << ',' << format_double(s.x[k]) << ',' << format_double(s.y[k]) << '\n';
            break;
        case Kind::box:
            os << "label,min,q1,median,q3,max\n";
            for (const auto& b : p.boxes)
                os << b.label << ',' << format_double(b.min) << ',' << format_double(b.q1) << ','
                   << format_double(b.median) << ',' << format_double(b.q3) << ',' << format_double(b.max) << '\n';
            break;
        case Kind::interval:
            os << "label,center,lo,hi\n";
            for (const auto& iv : p.intervals)
                os << iv.label << ',' << format_double(iv.center) << ',' << format_double(iv.lo) << ','
                   << format_double(iv.hi) << '\n';
            break;
        case Kind::bar:
            os << "group,label,value\n";
            for (const auto& b : p.bars) os << b.group << ',' << b.label << ',' << format_double(b.value) << '\n';
            break;
    }
    return os.str();
}

std::string to_svg(const Plot& p) {
    switch (p.kind) {
        case Kind::line: return line_svg(p);
        case Kind::box: return box_svg(p);
        case Kind::interval: return interval_svg(p);
        case Kind::bar: return bar_svg(p);
    }
    return {};
}

std::vector<std::string> write_plot(const Plot& p, const std::string& stem, bool svg) {
    std::vector<std::string> written;
    auto put = [&](const std::string& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path);
        out << text;
        written.push_back(path);
    };
    put(stem + ".csv", to_csv(p));
    if (svg) put(stem + ".svg", to_svg(p));
    return written;
}

}  // namespace qcaan::plots
