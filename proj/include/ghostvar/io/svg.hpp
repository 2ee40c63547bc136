#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ghostvar::svg {

inline std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct ReferenceLine {
    double value = 0.0;
    std::string color = "#1f5fbf";
    std::string label;
};

struct BarPanel {
    std::string title;
    std::vector<std::string> labels;
    std::vector<double> values;
    std::vector<ReferenceLine> lines;
    bool horizontal = true;  ///< one bar per row, labels on the left
};

namespace detail {

constexpr double kPanelWidth = 420.0;
constexpr double kTitleHeight = 28.0;
constexpr double kBarPitch = 16.0;
constexpr double kLabelWidth = 110.0;
constexpr double kMargin = 14.0;

inline double panel_height(const BarPanel& p) {
    if (p.horizontal) return kTitleHeight + kBarPitch * static_cast<double>(std::max<std::size_t>(p.values.size(), 1)) + 30.0;
    return 240.0;
}

inline void draw_panel(std::ostringstream& out, const BarPanel& p, double x0, double y0) {
    double lo = 0.0, hi = 0.0;
    for (double v : p.values) {
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    for (const auto& l : p.lines) {
        lo = std::min(lo, l.value);
        hi = std::max(hi, l.value);
    }
    if (hi - lo <= 0.0) hi = lo + 1.0;
    const double h = panel_height(p);
    out << "<g transform=\"translate(" << num(x0) << "," << num(y0) << ")\">\n";
    out << "<text x=\"" << num(kPanelWidth / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
        << escape(p.title) << "</text>\n";

    if (p.horizontal) {
        const double plot_x = kLabelWidth;
        const double plot_w = kPanelWidth - kLabelWidth - kMargin;
        auto sx = [&](double v) { return plot_x + (v - lo) / (hi - lo) * plot_w; };
        const double top = kTitleHeight;
        const double bottom = top + kBarPitch * static_cast<double>(p.values.size());
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            const double y = top + kBarPitch * static_cast<double>(i);
            const double v = std::isfinite(p.values[i]) ? p.values[i] : 0.0;
            const double a = sx(std::min(0.0, v));
            const double b = sx(std::max(0.0, v));
            out << "<text x=\"" << num(plot_x - 4) << "\" y=\"" << num(y + 11) << "\" text-anchor=\"end\" font-size=\"10\">"
                << escape(i < p.labels.size() ? p.labels[i] : std::to_string(i + 1)) << "</text>\n";
            out << "<rect x=\"" << num(a) << "\" y=\"" << num(y + 2) << "\" width=\"" << num(b - a)
                << "\" height=\"" << num(kBarPitch - 4) << "\" fill=\"#7f7f7f\"/>\n";
        }
        out << "<line x1=\"" << num(sx(0)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(sx(0)) << "\" y2=\""
            << num(bottom) << "\" stroke=\"#c0392b\" stroke-dasharray=\"4,3\"/>\n";
        for (const auto& l : p.lines)
            out << "<line x1=\"" << num(sx(l.value)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(sx(l.value))
                << "\" y2=\"" << num(bottom) << "\" stroke=\"" << escape(l.color)
                << "\" stroke-dasharray=\"6,3\"><title>" << escape(l.label) << "</title></line>\n";
        out << "<text x=\"" << num(plot_x) << "\" y=\"" << num(bottom + 14) << "\" font-size=\"9\">" << tick(lo)
            << "</text>\n";
        out << "<text x=\"" << num(plot_x + plot_w) << "\" y=\"" << num(bottom + 14)
            << "\" text-anchor=\"end\" font-size=\"9\">" << tick(hi) << "</text>\n";
    } else {
        const double plot_y = kTitleHeight;
        const double plot_h = h - kTitleHeight - 30.0;
        const double plot_x = 40.0;
        const double plot_w = kPanelWidth - plot_x - kMargin;
        auto sy = [&](double v) { return plot_y + (hi - v) / (hi - lo) * plot_h; };
        const double pitch = plot_w / static_cast<double>(std::max<std::size_t>(p.values.size(), 1));
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            const double v = std::isfinite(p.values[i]) ? p.values[i] : 0.0;
            const double a = sy(std::max(0.0, v));
            const double b = sy(std::min(0.0, v));
            out << "<rect x=\"" << num(plot_x + pitch * static_cast<double>(i) + pitch * 0.1) << "\" y=\"" << num(a)
                << "\" width=\"" << num(pitch * 0.8) << "\" height=\"" << num(b - a)
                << "\" fill=\"#7f7f7f\"><title>"
                << escape(i < p.labels.size() ? p.labels[i] : std::to_string(i + 1)) << "</title></rect>\n";
        }
        out << "<line x1=\"" << num(plot_x) << "\" y1=\"" << num(sy(0)) << "\" x2=\"" << num(plot_x + plot_w)
            << "\" y2=\"" << num(sy(0)) << "\" stroke=\"#c0392b\" stroke-dasharray=\"4,3\"/>\n";
        out << "<text x=\"" << num(plot_x - 4) << "\" y=\"" << num(plot_y + 8) << "\" text-anchor=\"end\" font-size=\"9\">"
            << tick(hi) << "</text>\n";
        out << "<text x=\"" << num(plot_x - 4) << "\" y=\"" << num(plot_y + plot_h)
            << "\" text-anchor=\"end\" font-size=\"9\">" << tick(lo) << "</text>\n";
        if (!p.labels.empty() && p.labels.size() <= 30)
            for (std::size_t i = 0; i < p.labels.size(); ++i)
                out << "<text x=\"" << num(plot_x + pitch * (static_cast<double>(i) + 0.5)) << "\" y=\""
                    << num(plot_y + plot_h + 12) << "\" text-anchor=\"middle\" font-size=\"9\">" << escape(p.labels[i])
                    << "</text>\n";
    }
    out << "</g>\n";
}

}  // namespace detail

/// Panels laid out on a grid, `columns` per row.
inline std::string bar_figure(const std::vector<BarPanel>& panels, std::size_t columns = 1) {
    columns = std::max<std::size_t>(columns, 1);
    std::vector<double> row_heights;
    for (std::size_t i = 0; i < panels.size(); i += columns) {
        double h = 0.0;
        for (std::size_t k = i; k < std::min(panels.size(), i + columns); ++k)
            h = std::max(h, detail::panel_height(panels[k]));
        row_heights.push_back(h);
    }
    double total_h = 0.0;
    for (double h : row_heights) total_h += h;
    const double total_w = detail::kPanelWidth * static_cast<double>(std::min(columns, std::max<std::size_t>(panels.size(), 1)));

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(total_w) << "\" height=\"" << num(total_h)
        << "\" viewBox=\"0 0 " << num(total_w) << " " << num(total_h) << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    double y = 0.0;
    for (std::size_t r = 0; r < row_heights.size(); ++r) {
        for (std::size_t c = 0; c < columns && r * columns + c < panels.size(); ++c)
            detail::draw_panel(out, panels[r * columns + c], detail::kPanelWidth * static_cast<double>(c), y);
        y += row_heights[r];
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace ghostvar::svg
