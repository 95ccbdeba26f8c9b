#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "twistlab/error.hpp"
#include "twistlab/stats.hpp"

namespace twistlab {

namespace {

struct Rgb {
    int r, g, b;
};

constexpr Rgb kNegative{33, 102, 172};
constexpr Rgb kMiddle{247, 247, 247};
constexpr Rgb kPositive{178, 24, 43};
constexpr Rgb kMissing{128, 128, 128};

Rgb mix(Rgb a, Rgb b, double t)
{
    auto lerp = [t](int u, int v) { return static_cast<int>(std::lround(u + (v - u) * t)); };
    return {lerp(a.r, b.r), lerp(a.g, b.g), lerp(a.b, b.b)};
}

// Diverging scale: -scale -> blue, 0 -> near white, +scale -> red.
Rgb colour(double v, double scale)
{
    if (!std::isfinite(v)) {
        return kMissing;
    }
    const double t = std::clamp(v / scale, -1.0, 1.0);
    return t < 0.0 ? mix(kMiddle, kNegative, -t) : mix(kMiddle, kPositive, t);
}

std::string hex(Rgb c)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::string render_heatmap(const ScanResult& field, const HeatmapOptions& opts)
{
    const ScanConfig& cfg = field.config;
    if (cfg.mode != ScanMode::Grid) {
        throw InvalidArgument("heatmap needs a grid scan");
    }
    if (field.records.size() != cfg.grid_x * cfg.grid_y) {
        throw InvalidArgument("heatmap record count does not match the grid");
    }
    if (opts.cell_px < 1) {
        throw InvalidArgument("heatmap cell size must be positive");
    }

    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& r : field.records) {
        if (r.ok() && std::isfinite(r.torsion)) {
            lo = any ? std::min(lo, r.torsion) : r.torsion;
            hi = any ? std::max(hi, r.torsion) : r.torsion;
            any = true;
        }
    }
    double scale = opts.scale.value_or(std::max(std::abs(lo), std::abs(hi)));
    if (!(scale > 0.0)) {
        scale = 1.0;
    }

    const int cell = opts.cell_px;
    const int map_w = static_cast<int>(cfg.grid_x) * cell;
    const int map_h = static_cast<int>(cfg.grid_y) * cell;
    const int legend_h = 40;
    const int width = std::max(map_w, 200);
    const int height = map_h + legend_h;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<title>torsion field " << field.map_spec << "</title>\n";
    os << "<g shape-rendering=\"crispEdges\">\n";
    for (std::size_t j = 0; j < cfg.grid_y; ++j) {
        // Row j = 0 is the bottom of the box.
        const int top = static_cast<int>(cfg.grid_y - 1 - j) * cell;
        for (std::size_t i = 0; i < cfg.grid_x; ++i) {
            const auto& r = field.records[j * cfg.grid_x + i];
            os << "<rect class=\"cell\" x=\"" << static_cast<int>(i) * cell << "\" y=\"" << top << "\" width=\"" << cell
               << "\" height=\"" << cell << "\" fill=\"" << hex(colour(r.ok() ? r.torsion : NAN, scale)) << "\"/>\n";
        }
    }
    os << "</g>\n";

    // Legend: gradient bar over [-scale, scale] and the data range.
    const int bar_y = map_h + 6;
    const int steps = 20;
    const int bar_w = 8;
    os << "<g id=\"legend\" shape-rendering=\"crispEdges\">\n";
    for (int s = 0; s < steps; ++s) {
        const double v = -scale + (2.0 * scale) * (s + 0.5) / steps;
        os << "<rect x=\"" << s * bar_w << "\" y=\"" << bar_y << "\" width=\"" << bar_w << "\" height=\"10\" fill=\""
           << hex(colour(v, scale)) << "\"/>\n";
    }
    os << "</g>\n";
    os << "<text x=\"0\" y=\"" << bar_y + 26 << "\" font-family=\"monospace\" font-size=\"10\">scale=\xc2\xb1"
       << num(scale) << " min=" << (any ? num(lo) : "n/a") << " max=" << (any ? num(hi) : "n/a") << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace twistlab
