#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "twistlab/error.hpp"
#include "twistlab/format.hpp"
#include "twistlab/stats.hpp"

namespace twistlab {

std::string format_real(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_real(std::string_view s)
{
    if (s == "nan") {
        return std::nan("");
    }
    double v = 0.0;
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
        throw InvalidArgument("malformed number '" + std::string(s) + "'");
    }
    return v;
}

namespace {

void put(std::ostringstream& os, std::string_view key, const std::string& value)
{
    os << "# " << key << '=' << value << '\n';
}

}  // namespace

std::string scan_to_csv(const ScanResult& result)
{
    const ScanConfig& c = result.config;
    std::ostringstream os;
    put(os, "map", result.map_spec);
    put(os, "mode", c.mode == ScanMode::Grid ? "grid" : "montecarlo");
    put(os, "box", format_real(c.box.x0) + "," + format_real(c.box.x1) + "," + format_real(c.box.y0) + "," +
                       format_real(c.box.y1));
    if (c.mode == ScanMode::Grid) {
        put(os, "grid", std::to_string(c.grid_x) + "x" + std::to_string(c.grid_y));
    } else {
        put(os, "samples", std::to_string(c.samples));
        put(os, "seed", std::to_string(c.seed));
    }
    put(os, "horizon", std::to_string(c.horizon));
    put(os, "eps", format_real(c.eps));
    put(os, "period", std::to_string(c.period));
    const MeasureEstimate& s = result.summary;
    put(os, "count", std::to_string(s.count));
    put(os, "fraction_negative", format_real(s.fraction_negative));
    put(os, "fraction_nonzero", format_real(s.fraction_nonzero));
    put(os, "mean_torsion", format_real(s.mean_torsion));
    put(os, "stderr_negative", format_real(s.stderr_negative));
    put(os, "stderr_torsion", format_real(s.stderr_torsion));
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        if (!result.records[i].ok()) {
            put(os, "error." + std::to_string(i), result.records[i].error);
        }
    }
    os << "x,y,torsion,overconj_time,rotation\n";
    for (const auto& r : result.records) {
        os << format_real(r.point.x) << ',' << format_real(r.point.y) << ',' << format_real(r.torsion) << ',';
        if (r.overconjugate_time) {
            os << *r.overconjugate_time;
        }
        os << ',' << format_real(r.rotation) << '\n';
    }
    return os.str();
}

std::optional<std::string> ParsedScan::find(const std::string& key) const
{
    for (const auto& [k, v] : metadata) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

ParsedScan parse_scan_csv(const std::string& text)
{
    ParsedScan out;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            std::string_view body(line);
            body.remove_prefix(1);
            while (!body.empty() && body.front() == ' ') {
                body.remove_prefix(1);
            }
            const auto eq = body.find('=');
            if (eq != std::string_view::npos) {
                out.metadata.emplace_back(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
            }
            continue;
        }
        if (!header_seen) {
            if (line != "x,y,torsion,overconj_time,rotation") {
                throw InvalidArgument("unexpected scan CSV header '" + line + "'");
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> cols;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            cols.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (cols.size() != 5) {
            throw InvalidArgument("scan CSV row needs 5 columns: '" + line + "'");
        }
        ScanRecord r;
        r.point = {parse_real(cols[0]), parse_real(cols[1])};
        r.torsion = parse_real(cols[2]);
        if (!cols[3].empty()) {
            r.overconjugate_time = static_cast<long>(parse_real(cols[3]));
        }
        r.rotation = parse_real(cols[4]);
        out.records.push_back(std::move(r));
    }
    if (!header_seen) {
        throw InvalidArgument("scan CSV has no header row");
    }
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        if (auto msg = out.find("error." + std::to_string(i))) {
            out.records[i].error = *msg;
        } else if (std::isnan(out.records[i].torsion)) {
            out.records[i].error = "nan";
        }
    }
    if (auto eps = out.find("eps")) {
        out.eps = parse_real(*eps);
    }
    return out;
}

}  // namespace twistlab
