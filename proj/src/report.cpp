#include "accmax/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace accmax {

namespace {

const char* kColours[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            default: o += c;
        }
    }
    return o;
}

}  // namespace

void write_svg(const std::vector<SvgSeries>& series, const std::string& title, std::ostream& out) {
    const double W = 720, H = 480, L = 70, R = 160, Tm = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (auto [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x1 = x0 + 1e-6;
    if (y1 - y0 < 1e-12) y1 = y0 + 1e-6;
    const double px = (x1 - x0) * 0.05, py = (y1 - y0) * 0.05;
    x0 -= px, x1 += px, y0 -= py, y1 += py;
    auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tm - B); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">risk</text>\n";
    out << "<text x=\"18\" y=\"" << (Tm + H - B) / 2 << "\" transform=\"rotate(-90 18 " << (Tm + H - B) / 2
        << ")\" text-anchor=\"middle\">mean</text>\n";
    for (int k = 0; k <= 4; ++k) {
        double x = x0 + (x1 - x0) * k / 4, y = y0 + (y1 - y0) * k / 4;
        out << "<text x=\"" << sx(x) << "\" y=\"" << H - B + 16 << "\" font-size=\"10\" text-anchor=\"middle\">" << x
            << "</text>\n";
        out << "<text x=\"" << L - 6 << "\" y=\"" << sy(y) + 3 << "\" font-size=\"10\" text-anchor=\"end\">" << y
            << "</text>\n";
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* col = kColours[i % 10];
        if (!s.markers_only && s.points.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
            for (auto [x, y] : s.points) out << sx(x) << ',' << sy(y) << ' ';
            out << "\"/>\n";
        }
        for (auto [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"" << (s.markers_only ? 4 : 2)
                << "\" fill=\"" << col << "\"/>\n";
        }
        double ly = Tm + 16 * (i + 1);
        out << "<rect x=\"" << W - R + 10 << "\" y=\"" << ly - 8 << "\" width=\"10\" height=\"10\" fill=\"" << col
            << "\"/>\n";
        out << "<text x=\"" << W - R + 26 << "\" y=\"" << ly + 1 << "\" font-size=\"11\">" << escape(s.label)
            << "</text>\n";
    }
    out << "</svg>\n";
}

std::vector<SvgSeries> frontier_series(const FrontierSequence& seq, const std::vector<PolicyProfile>& profiles) {
    std::vector<SvgSeries> out;
    for (std::size_t t = 0; t < seq.frontiers.size(); ++t) {
        const auto& f = seq.frontiers[t];
        SvgSeries s{"F_" + std::to_string(t), f.vertices, false};
        if (f.ray && !f.vertices.empty()) {
            auto [r, m] = f.vertices.back();
            double span = std::max(1e-6, f.vertices.back().first - f.vertices.front().first);
            double k = 0.25 * span / std::max(f.ray->first, 1e-12);
            s.points.emplace_back(r + k * f.ray->first, m + k * f.ray->second);
        }
        out.push_back(std::move(s));
    }
    for (const auto& pp : profiles) {
        SvgSeries s{to_string(pp.policy), {}, true};
        for (const auto& p : pp.points) s.points.emplace_back(p.risk, p.mean);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace accmax
