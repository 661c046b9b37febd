#include "tractdim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tractdim::svg {

namespace {

constexpr double kW = 640.0, kH = 480.0, kMargin = 56.0;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                               "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

void header(std::ostringstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
       << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << escape(title) << "</text>\n";
}

}  // namespace

std::string curves(const std::vector<Polyline>& paths, const std::vector<bool>& closed, const std::string& title) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& p : paths)
        for (cplx z : p) {
            x0 = std::min(x0, z.real());
            x1 = std::max(x1, z.real());
            y0 = std::min(y0, z.imag());
            y1 = std::max(y1, z.imag());
        }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    const double s = std::min((kW - 2 * kMargin) / (x1 - x0), (kH - 2 * kMargin) / (y1 - y0));
    const double ox = kW / 2 - s * (x0 + x1) / 2, oy = kH / 2 + s * (y0 + y1) / 2;
    std::ostringstream os;
    header(os, title);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        os << '<' << (i < closed.size() && closed[i] ? "polygon" : "polyline") << " fill=\"none\" stroke=\""
           << kColors[i % 10] << "\" stroke-width=\"1\" points=\"";
        for (cplx z : paths[i]) os << num(ox + s * z.real()) << ',' << num(oy - s * z.imag()) << ' ';
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string plot(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                 const std::string& y_label, bool log_y) {
    auto ty = [&](double v) { return log_y ? (v > 0.0 ? std::log10(v) : NAN) : v; };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            const double y = ty(s.y[i]);
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
    const double pw = kW - 2 * kMargin - 110.0, ph = kH - 2 * kMargin;
    auto px = [&](double x) { return kMargin + pw * (x - x0) / (x1 - x0); };
    auto py = [&](double y) { return kH - kMargin - ph * (y - y0) / (y1 - y0); };
    std::ostringstream os;
    header(os, title);
    os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double x = x0 + (x1 - x0) * k / 4, y = y0 + (y1 - y0) * k / 4;
        os << "<text x=\"" << num(px(x)) << "\" y=\"" << num(kH - kMargin + 16) << "\" text-anchor=\"middle\">"
           << tick(x) << "</text>\n";
        os << "<text x=\"" << num(kMargin - 6) << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">"
           << (log_y ? "1e" + tick(y) : tick(y)) << "</text>\n";
    }
    os << "<text x=\"" << num(kMargin + pw / 2) << "\" y=\"" << num(kH - 12) << "\" text-anchor=\"middle\">"
       << escape(x_label) << "</text>\n";
    os << "<text x=\"14\" y=\"" << num(kMargin + ph / 2) << "\" transform=\"rotate(-90 14 " << num(kMargin + ph / 2)
       << ")\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kColors[i % 10];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t j = 0; j < s.x.size() && j < s.y.size(); ++j) {
            const double y = ty(s.y[j]);
            if (std::isfinite(s.x[j]) && std::isfinite(y)) os << num(px(s.x[j])) << ',' << num(py(y)) << ' ';
        }
        os << "\"/>\n";
        const double ly = kMargin + 14.0 * (i + 1);
        os << "<line x1=\"" << num(kMargin + pw + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
           << num(kMargin + pw + 26) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color << "\"/>\n";
        os << "<text x=\"" << num(kMargin + pw + 30) << "\" y=\"" << num(ly) << "\">" << escape(s.label)
           << "</text>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

}  // namespace tractdim::svg
