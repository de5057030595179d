// Copyright 2026 The toomdtc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "toomdtc/svg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace toomdtc {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 55;

const char *const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '&':
                out += "&amp;";
                break;
            case '"':
                out += "&quot;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream o;
    o.precision(6);
    o << v;
    return o.str();
}

struct Axis {
    double lo;
    double hi;
    bool log;
    double pixel_lo;
    double pixel_hi;

    double map(double v) const {
        double a = log ? std::log10(v) : v;
        double l = log ? std::log10(lo) : lo;
        double h = log ? std::log10(hi) : hi;
        return pixel_lo + (a - l) / (h - l) * (pixel_hi - pixel_lo);
    }
    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e++) {
                double v = std::pow(10.0, e);
                if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) {
                    out.push_back(v);
                }
            }
            if (out.size() < 2) {
                out = {lo, hi};
            }
            return out;
        }
        double span = hi - lo;
        double step = std::pow(10.0, std::floor(std::log10(span / 5)));
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            if (span / (step * m) <= 6) {
                step *= m;
                break;
            }
        }
        for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
            out.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
        }
        return out;
    }
};

void pad_range(double &lo, double &hi, bool log) {
    if (!(lo < hi)) {
        double c = std::isfinite(lo) ? lo : 0.0;
        lo = log ? c / 2 : c - 1;
        hi = log ? c * 2 : c + 1;
        return;
    }
    if (log) {
        lo /= 1.3;
        hi *= 1.3;
    } else {
        double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
}

std::string frame(const std::string &title, const std::string &xl, const std::string &yl, const Axis &ax,
                  const Axis &ay) {
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
    o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
      << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ax.ticks()) {
        double px = ax.map(t);
        o << "<line x1=\"" << num(px) << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << num(px) << "\" y2=\""
          << kHeight - kBottom + 5 << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(px) << "\" y=\"" << kHeight - kBottom + 18 << "\" text-anchor=\"middle\">" << num(t)
          << "</text>\n";
    }
    for (double t : ay.ticks()) {
        double py = ay.map(t);
        o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(py) << "\" x2=\"" << kLeft << "\" y2=\"" << num(py)
          << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">" << num(t)
          << "</text>\n";
    }
    o << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
      << escape(xl) << "</text>\n";
    o << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (kTop + kHeight - kBottom) / 2 << ")\">" << escape(yl) << "</text>\n";
    return o.str();
}

}  // namespace

std::string line_plot_svg(const PlotSpec &spec) {
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!spec.log_y || y > 0);
    };
    for (const auto &s : spec.series) {
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); i++) {
            if (!usable(s.x[i], s.y[i])) {
                continue;
            }
            double e = i < s.err.size() && std::isfinite(s.err[i]) ? s.err[i] : 0.0;
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            double lo = s.y[i] - e;
            ylo = std::min(ylo, spec.log_y && lo <= 0 ? s.y[i] : lo);
            yhi = std::max(yhi, s.y[i] + e);
        }
    }
    if (spec.marker_x && std::isfinite(*spec.marker_x)) {
        xlo = std::min(xlo, *spec.marker_x);
        xhi = std::max(xhi, *spec.marker_x);
    }
    if (!std::isfinite(xlo)) {
        xlo = 0;
        xhi = 1;
        ylo = spec.log_y ? 0.1 : 0;
        yhi = 1;
    }
    pad_range(xlo, xhi, false);
    pad_range(ylo, yhi, spec.log_y);
    Axis ax{xlo, xhi, false, kLeft, kWidth - kRight};
    Axis ay{ylo, yhi, spec.log_y, kHeight - kBottom, kTop};
    std::ostringstream o;
    o << frame(spec.title, spec.x_label, spec.y_label, ax, ay);
    for (size_t k = 0; k < spec.series.size(); k++) {
        const auto &s = spec.series[k];
        const char *colour = kColours[k % std::size(kColours)];
        std::ostringstream path;
        bool pen = false;
        for (size_t i = 0; i < s.x.size() && i < s.y.size(); i++) {
            if (!usable(s.x[i], s.y[i])) {
                pen = false;
                continue;
            }
            path << (pen ? " L" : " M") << num(ax.map(s.x[i])) << ',' << num(ay.map(s.y[i]));
            pen = true;
            if (i < s.err.size() && s.err[i] > 0 && std::isfinite(s.err[i])) {
                double lo = s.y[i] - s.err[i];
                if (spec.log_y && lo <= 0) {
                    lo = ylo;
                }
                o << "<line x1=\"" << num(ax.map(s.x[i])) << "\" y1=\"" << num(ay.map(lo)) << "\" x2=\""
                  << num(ax.map(s.x[i])) << "\" y2=\"" << num(ay.map(s.y[i] + s.err[i])) << "\" stroke=\"" << colour
                  << "\" stroke-width=\"0.8\"/>\n";
            }
            if (s.markers) {
                o << "<circle cx=\"" << num(ax.map(s.x[i])) << "\" cy=\"" << num(ay.map(s.y[i]))
                  << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
            }
        }
        o << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\"/>\n";
        if (!s.label.empty()) {
            double ly = kTop + 16 + 16 * static_cast<double>(k);
            o << "<line x1=\"" << kWidth - kRight - 120 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kWidth - kRight - 100
              << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
            o << "<text x=\"" << kWidth - kRight - 95 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
        }
    }
    if (spec.marker_x && std::isfinite(*spec.marker_x)) {
        double px = ax.map(*spec.marker_x);
        o << "<line x1=\"" << num(px) << "\" y1=\"" << kTop << "\" x2=\"" << num(px) << "\" y2=\"" << kHeight - kBottom
          << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string histogram_svg(const Histogram &h, const std::string &title, const std::string &x_label) {
    double top = 1;
    for (auto c : h.counts) {
        top = std::max(top, static_cast<double>(c));
    }
    Axis ax{h.lo, h.hi, false, kLeft, kWidth - kRight};
    Axis ay{0, top * 1.05, false, kHeight - kBottom, kTop};
    std::ostringstream o;
    o << frame(title, x_label, "count", ax, ay);
    double w = (h.hi - h.lo) / static_cast<double>(std::max<size_t>(1, h.bins()));
    for (size_t b = 0; b < h.bins(); b++) {
        double x0 = ax.map(h.lo + w * static_cast<double>(b));
        double x1 = ax.map(h.lo + w * static_cast<double>(b + 1));
        double y = ay.map(static_cast<double>(h.counts[b]));
        o << "<rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\"" << num(std::max(0.0, x1 - x0 - 0.5))
          << "\" height=\"" << num(kHeight - kBottom - y) << "\" fill=\"" << kColours[0] << "\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace toomdtc
