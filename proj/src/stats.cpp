#include "twistlab/stats.hpp"

#include <cmath>
#include <string>

#include "twistlab/error.hpp"
#include "twistlab/parallel.hpp"
#include "twistlab/torsion.hpp"

namespace twistlab {

namespace {

// Neumaier-compensated running sum; values are added in call order.
class CompensatedSum {
public:
    void add(double v)
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

ScanRecord scan_one(const LiftedMap& map, Point p, long horizon)
{
    ScanRecord rec;
    rec.point = p;
    try {
        TangentOrbit orbit(map, p, {0.0, 1.0});
        while (orbit.steps() < horizon) {
            orbit.advance();
            if (!rec.overconjugate_time && orbit.cumulative() < -0.5) {
                rec.overconjugate_time = orbit.steps();
            }
        }
        rec.torsion = orbit.cumulative() / static_cast<double>(horizon);
        rec.rotation = (orbit.base().x - p.x) / static_cast<double>(horizon);
    } catch (const Error& e) {
        rec.error = e.what();
        rec.torsion = std::nan("");
        rec.rotation = std::nan("");
        rec.overconjugate_time.reset();
    }
    return rec;
}

bool in_window(const Box& w, Point z)
{
    if (!(w.y0 <= z.y && z.y <= w.y1)) {
        return false;
    }
    const double width = w.x1 - w.x0;
    if (width >= 1.0) {
        return true;
    }
    const double offset = z.x - w.x0;
    return offset - std::floor(offset) <= width;
}

}  // namespace

void ScanConfig::validate() const
{
    if (!box.valid()) {
        throw InvalidArgument("scan box needs x0 < x1 and y0 < y1");
    }
    if (horizon < 1 || !(eps > 0.0) || period < 1) {
        throw InvalidArgument("scan needs horizon >= 1, eps > 0 and period >= 1");
    }
    if (sample_count() == 0) {
        throw InvalidArgument("scan has no samples");
    }
}

double uniform01(std::uint64_t seed, std::uint64_t counter)
{
    const std::uint64_t bits = splitmix64(splitmix64(seed) ^ counter);
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::vector<Point> scan_points(const ScanConfig& cfg)
{
    cfg.validate();
    const Box& b = cfg.box;
    std::vector<Point> pts;
    pts.reserve(cfg.sample_count());
    if (cfg.mode == ScanMode::Grid) {
        const double dx = (b.x1 - b.x0) / static_cast<double>(cfg.grid_x);
        const double dy = (b.y1 - b.y0) / static_cast<double>(cfg.grid_y);
        for (std::size_t j = 0; j < cfg.grid_y; ++j) {
            for (std::size_t i = 0; i < cfg.grid_x; ++i) {
                pts.push_back({b.x0 + (static_cast<double>(i) + 0.5) * dx, b.y0 + (static_cast<double>(j) + 0.5) * dy});
            }
        }
    } else {
        for (std::size_t i = 0; i < cfg.samples; ++i) {
            const double u = uniform01(cfg.seed, 2 * static_cast<std::uint64_t>(i));
            const double v = uniform01(cfg.seed, 2 * static_cast<std::uint64_t>(i) + 1);
            pts.push_back({b.x0 + u * (b.x1 - b.x0), b.y0 + v * (b.y1 - b.y0)});
        }
    }
    return pts;
}

MeasureEstimate summarize(const std::vector<ScanRecord>& records, double eps)
{
    MeasureEstimate m;
    std::size_t negative = 0, nonzero = 0;
    CompensatedSum sum, sum_sq;
    for (const auto& r : records) {
        if (!r.ok() || !std::isfinite(r.torsion)) {
            continue;
        }
        ++m.count;
        negative += r.torsion < -eps ? 1 : 0;
        nonzero += std::abs(r.torsion) > eps ? 1 : 0;
        sum.add(r.torsion);
    }
    if (m.count == 0) {
        return m;
    }
    const double n = static_cast<double>(m.count);
    m.fraction_negative = static_cast<double>(negative) / n;
    m.fraction_nonzero = static_cast<double>(nonzero) / n;
    m.mean_torsion = sum.value() / n;
    if (m.count > 1) {
        for (const auto& r : records) {
            if (r.ok() && std::isfinite(r.torsion)) {
                const double d = r.torsion - m.mean_torsion;
                sum_sq.add(d * d);
            }
        }
        const double p = m.fraction_negative;
        m.stderr_negative = std::sqrt(p * (1.0 - p) / (n - 1.0));
        m.stderr_torsion = std::sqrt(sum_sq.value() / (n - 1.0) / n);
    }
    return m;
}

ScanResult torsion_field(const LiftedMap& map, const ScanConfig& cfg)
{
    const std::vector<Point> pts = scan_points(cfg);
    ScanResult result;
    result.config = cfg;
    result.map_spec = map.describe();
    result.records.resize(pts.size());
    parallel_for(pts.size(), cfg.threads,
                 [&](std::size_t i) { result.records[i] = scan_one(map, pts[i], cfg.horizon); });
    result.summary = summarize(result.records, cfg.eps);
    return result;
}

MeasureEstimate island_measure(const LiftedMap& map, const ScanConfig& cfg)
{
    if (cfg.mode != ScanMode::MonteCarlo) {
        throw InvalidArgument("island_measure needs Monte-Carlo mode");
    }
    return torsion_field(map, cfg).summary;
}

IntegralEstimate torsion_integral(const ScanResult& result)
{
    const double area = result.config.box.area();
    return {area * result.summary.mean_torsion, area * result.summary.stderr_torsion};
}

IntegralEstimate torsion_integral(const LiftedMap& map, const ScanConfig& cfg)
{
    if (cfg.mode != ScanMode::MonteCarlo) {
        throw InvalidArgument("torsion_integral needs Monte-Carlo mode");
    }
    return torsion_integral(torsion_field(map, cfg));
}

FirstReturnReport first_return_torsion(const LiftedMap& map, const Box& window, Point p, long returns, long cap,
                                       long period)
{
    if (!window.valid() || returns < 1 || cap < 1 || period < 1) {
        throw InvalidArgument("first_return_torsion needs a valid window, returns >= 1, cap >= 1, period >= 1");
    }
    if (!in_window(window, p)) {
        throw InvalidArgument("start point is outside the window");
    }
    FirstReturnReport rep;
    rep.cap = cap;
    TangentOrbit orbit(map, p, {0.0, 1.0});
    double phi = 0.0;
    long tau = 0;
    long elapsed = 0;
    while (static_cast<long>(rep.return_times.size()) < returns && elapsed < cap) {
        for (long m = 0; m < period; ++m) {
            phi += orbit.advance();
        }
        ++tau;
        ++elapsed;
        if (in_window(window, orbit.base())) {
            rep.return_times.push_back(tau);
            rep.phi.push_back(phi);
            tau = 0;
            phi = 0.0;
        }
    }
    if (rep.return_times.empty()) {
        throw Error("no return to the window within the cap of " + std::to_string(cap) + " steps");
    }
    rep.complete = static_cast<long>(rep.return_times.size()) == returns;

    double phi_total = 0.0;
    for (std::size_t i = 0; i < rep.phi.size(); ++i) {
        phi_total += rep.phi[i];
        rep.total_time += rep.return_times[i];
    }
    const double n = static_cast<double>(rep.total_time);
    rep.ratio = phi_total / n;
    const TorsionTrace direct = torsion_trace(map, p, {0.0, 1.0}, rep.total_time * period);
    rep.direct = direct.cumulative.back() / n;
    rep.discrepancy = std::abs(rep.ratio - rep.direct);
    rep.identity_holds = rep.discrepancy <= 1e-12 * n;
    return rep;
}

}  // namespace twistlab
