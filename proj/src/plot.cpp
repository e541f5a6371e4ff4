#include "cradl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace cradl {

namespace {

constexpr double kWidth = 760, kHeight = 480;
constexpr double kLeft = 80, kRight = 220, kTop = 50, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Series {
    std::map<std::size_t, std::pair<double, std::size_t>> sums;  // iteration -> (sum, count)
};

using GroupKey = std::tuple<std::string, std::string, std::string, double, std::size_t, double>;

std::string escape(const std::string& s) {
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
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string short_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

std::string render_loss_svg(std::span<const ResultRow> rows, const std::string& title) {
    std::map<GroupKey, Series> groups;
    for (const auto& r : rows) {
        auto& cell = groups[{r.method, r.rule, r.attack, r.alpha, r.r, r.sigma_h}].sums[r.iteration];
        cell.first += r.loss;
        cell.second += 1;
    }

    // Label only by the fields that differ between lines.
    std::set<std::string> methods, rules, attacks;
    std::set<double> alphas, sigmas;
    std::set<std::size_t> rs;
    for (const auto& [k, s] : groups) {
        methods.insert(std::get<0>(k));
        rules.insert(std::get<1>(k));
        attacks.insert(std::get<2>(k));
        alphas.insert(std::get<3>(k));
        rs.insert(std::get<4>(k));
        sigmas.insert(std::get<5>(k));
    }

    double xmax = 1.0, ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
    for (const auto& [k, s] : groups) {
        for (const auto& [it, sc] : s.sums) {
            xmax = std::max(xmax, static_cast<double>(it));
            const double y = sc.first / static_cast<double>(sc.second);
            if (std::isfinite(y) && y > 0.0) {
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    }
    if (!(ymax > 0.0)) {
        ymin = 1.0;
        ymax = 10.0;
    }
    double lo = std::floor(std::log10(ymin));
    double hi = std::ceil(std::log10(ymax));
    if (hi <= lo) hi = lo + 1.0;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    const auto px = [&](double x) { return kLeft + pw * x / xmax; };
    const auto py = [&](double y) {
        const double ly = std::clamp(std::log10(y), lo, hi);
        return kTop + ph * (hi - ly) / (hi - lo);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(title) << "</text>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double e = lo; e <= hi + 1e-9; e += 1.0) {
        const double y = kTop + ph * (hi - e) / (hi - lo);
        svg << "<line x1=\"" << kLeft << "\" x2=\"" << num(kLeft + pw) << "\" y1=\"" << num(y) << "\" y2=\""
            << num(y) << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e"
            << static_cast<int>(e) << "</text>\n";
    }
    const double step = std::pow(10.0, std::floor(std::log10(xmax)));
    const double xstep = xmax / step >= 5 ? step : step / 2;
    for (double x = 0; x <= xmax + 1e-9; x += xstep) {
        svg << "<text x=\"" << num(px(x)) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
            << short_real(x) << "</text>\n";
    }
    svg << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 15)
        << "\" text-anchor=\"middle\">iteration</text>\n";
    svg << "<text transform=\"translate(18," << num(kTop + ph / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">training loss</text>\n";

    std::size_t color = 0;
    double ly = kTop + 10;
    for (const auto& [k, s] : groups) {
        const char* stroke = kPalette[color++ % std::size(kPalette)];
        std::string label = std::get<0>(k);
        if (rules.size() > 1) label += " " + std::get<1>(k);
        if (attacks.size() > 1) label += " " + std::get<2>(k);
        if (alphas.size() > 1) label += " a=" + short_real(std::get<3>(k));
        if (rs.size() > 1) label += " r=" + std::to_string(std::get<4>(k));
        if (sigmas.size() > 1) label += " sh=" + short_real(std::get<5>(k));

        svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& [it, sc] : s.sums) {
            const double y = sc.first / static_cast<double>(sc.second);
            if (!std::isfinite(y) || y <= 0.0) continue;
            svg << (first ? "" : " ") << num(px(static_cast<double>(it))) << "," << num(py(y));
            first = false;
        }
        svg << "\"/>\n";
        const double lx = kLeft + pw + 12;
        svg << "<line x1=\"" << num(lx) << "\" x2=\"" << num(lx + 22) << "\" y1=\"" << num(ly) << "\" y2=\""
            << num(ly) << "\" stroke=\"" << stroke << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly + 4) << "\">" << escape(label) << "</text>\n";
        ly += 18;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace cradl
