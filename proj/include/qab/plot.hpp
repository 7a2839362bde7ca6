#pragma once

// SVG line plots of campaign series with +-1 std error bars.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "campaign.hpp"

namespace qab {

class PlotError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

inline std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
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

// A "nice" step so that the axis gets roughly `target` ticks.
inline double nice_step(double span, int target) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (m * mag >= raw) return m * mag;
    }
    return 10.0 * mag;
}

}  // namespace detail

struct PlotSeries {
    std::string label;
    SeriesStats stats;
};

/// The series a plot of `metric` shows: every strategy's raw and mitigated
/// variants, in strategy order.
inline std::vector<PlotSeries> plot_series(const CampaignResult& result, const std::string& metric) {
    std::vector<PlotSeries> out;
    for (const auto& [strategy, metrics] : result.series) {
        if (auto it = metrics.find(metric); it != metrics.end()) out.push_back({strategy, it->second});
        if (auto it = metrics.find(metric + "_mitigated"); it != metrics.end()) {
            out.push_back({strategy + " (mitigated)", it->second});
        }
    }
    return out;
}

inline std::string render_svg(const CampaignResult& result, const std::string& metric) {
    if (std::find(kMetricNames.begin(), kMetricNames.end(), metric) == kMetricNames.end()) {
        throw PlotError("unknown metric '" + metric + "' (expected fuzz, success or diff)");
    }
    const auto series = plot_series(result, metric);
    if (series.empty()) throw PlotError("result has no '" + metric + "' series to plot");
    std::size_t rounds = 0;
    double ymax = 0.0;
    double ymin = 0.0;
    for (const auto& s : series) {
        rounds = std::max(rounds, s.stats.mean.size());
        for (std::size_t i = 0; i < s.stats.mean.size(); ++i) {
            ymax = std::max(ymax, s.stats.mean[i] + s.stats.std[i]);
            ymin = std::min(ymin, s.stats.mean[i] - s.stats.std[i]);
        }
    }
    if (rounds == 0) throw PlotError("result has empty series");
    if (metric == "success") ymax = std::max(ymax, 1.0);
    if (ymax - ymin <= 0.0) ymax = ymin + 1.0;

    const double width = 720, height = 440;
    const double left = 70, right = 190, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;
    const double xlo = 0.5, xhi = static_cast<double>(rounds) + 0.5;
    auto sx = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
    auto sy = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::string title = metric;
    if (result.graph) title += " on " + result.graph->name();
    else if (!result.spec.device.empty()) title += " on " + result.spec.device;
    o << "<text x=\"" << detail::fmt(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << detail::xml_escape(title) << "</text>\n";

    // Axes and ticks.
    o << "<g stroke=\"black\" fill=\"none\">\n";
    o << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\"/>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
    o << "</g>\n<g font-size=\"11\">\n";
    const std::size_t xstep = std::max<std::size_t>(1, (rounds + 9) / 10);
    for (std::size_t r = 1; r <= rounds; r += xstep) {
        const double x = sx(static_cast<double>(r));
        o << "<line x1=\"" << detail::fmt(x) << "\" y1=\"" << top + ph << "\" x2=\"" << detail::fmt(x) << "\" y2=\""
          << top + ph + 5 << "\" stroke=\"black\"/>";
        o << "<text x=\"" << detail::fmt(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << r
          << "</text>\n";
    }
    const double ystep = detail::nice_step(ymax - ymin, 6);
    for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-12; y += ystep) {
        const double py = sy(y);
        o << "<line x1=\"" << left - 5 << "\" y1=\"" << detail::fmt(py) << "\" x2=\"" << left + pw << "\" y2=\""
          << detail::fmt(py) << "\" stroke=\"#dddddd\"/>";
        o << "<text x=\"" << left - 8 << "\" y=\"" << detail::fmt(py + 4) << "\" text-anchor=\"end\">"
          << detail::tick_label(std::abs(y) < 1e-12 ? 0.0 : y) << "</text>\n";
    }
    o << "</g>\n";
    o << "<text x=\"" << detail::fmt(left + pw / 2) << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\">round</text>\n";
    o << "<text transform=\"translate(18 " << detail::fmt(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << detail::xml_escape(metric) << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = palette[i % std::size(palette)];
        const bool dashed = s.label.find("(mitigated)") != std::string::npos;
        o << "<g class=\"series\" stroke=\"" << color << "\" fill=\"" << color << "\">\n";
        o << "<title>" << detail::xml_escape(s.label) << "</title>\n";
        if (s.stats.mean.size() > 1) {
            o << "<polyline fill=\"none\" stroke-width=\"1.5\"" << (dashed ? " stroke-dasharray=\"5,3\"" : "")
              << " points=\"";
            for (std::size_t r = 0; r < s.stats.mean.size(); ++r) {
                o << (r ? " " : "") << detail::fmt(sx(static_cast<double>(r + 1))) << ','
                  << detail::fmt(sy(s.stats.mean[r]));
            }
            o << "\"/>\n";
        }
        for (std::size_t r = 0; r < s.stats.mean.size(); ++r) {
            const double x = sx(static_cast<double>(r + 1));
            const double m = s.stats.mean[r];
            const double d = s.stats.std[r];
            o << "<line class=\"errorbar\" x1=\"" << detail::fmt(x) << "\" y1=\"" << detail::fmt(sy(m - d))
              << "\" x2=\"" << detail::fmt(x) << "\" y2=\"" << detail::fmt(sy(m + d)) << "\"/>";
            o << "<line x1=\"" << detail::fmt(x - 3) << "\" y1=\"" << detail::fmt(sy(m - d)) << "\" x2=\""
              << detail::fmt(x + 3) << "\" y2=\"" << detail::fmt(sy(m - d)) << "\"/>";
            o << "<line x1=\"" << detail::fmt(x - 3) << "\" y1=\"" << detail::fmt(sy(m + d)) << "\" x2=\""
              << detail::fmt(x + 3) << "\" y2=\"" << detail::fmt(sy(m + d)) << "\"/>";
            o << "<circle class=\"marker\" cx=\"" << detail::fmt(x) << "\" cy=\"" << detail::fmt(sy(m))
              << "\" r=\"3\"/>\n";
        }
        o << "</g>\n";
        const double ly = top + 10 + 20.0 * static_cast<double>(i);
        const double lx = left + pw + 15;
        o << "<g class=\"legend\"><line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 22 << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << (dashed ? " stroke-dasharray=\"5,3\"" : "")
          << "/><text x=\"" << lx + 28 << "\" y=\"" << ly + 4 << "\">" << detail::xml_escape(s.label)
          << "</text></g>\n";
    }
    o << "</svg>\n";
    return o.str();
}

inline void render_plot(const CampaignResult& result, const std::string& metric, const std::filesystem::path& path) {
    const auto svg = render_svg(result, metric);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << svg;
}

}  // namespace qab
