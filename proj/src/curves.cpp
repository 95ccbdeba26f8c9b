#include "twistlab/curves.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "twistlab/error.hpp"
#include "twistlab/format.hpp"
#include "twistlab/parallel.hpp"
#include "twistlab/torsion.hpp"

namespace twistlab {

namespace {

constexpr int kMaxExpansions = 16;  // bracket half-width up to 2^16
constexpr int kMonotoneSamples = 65;
constexpr double kZeroIncrement = 1e-12;

struct Root {
    double y = 0.0;
    double residual = 0.0;
};

std::string at_x(double x) { return " at x = " + std::to_string(x); }

// Root of an increasing function by geometric bracket expansion followed by
// bisection. With check_monotone, g is also sampled across the bracket and
// every bisection midpoint must stay between the bracket values.
Root bracketed_root(const std::function<double(double)>& g, double tol, bool check_monotone, double x)
{
    double lo = -1.0, hi = 1.0;
    double glo = g(lo), ghi = g(hi);
    int expansions = 0;
    while (!(glo < 0.0 && ghi > 0.0)) {
        if (glo == 0.0) {
            return {lo, 0.0};
        }
        if (ghi == 0.0) {
            return {hi, 0.0};
        }
        if (check_monotone && glo > ghi) {
            throw NonMonotoneBracket("section decreases across [" + std::to_string(lo) + ", " +
                                     std::to_string(hi) + "]" + at_x(x));
        }
        if (++expansions > kMaxExpansions) {
            throw BracketFailure("no sign change within |y| <= 2^16" + at_x(x));
        }
        lo *= 2.0;
        hi *= 2.0;
        glo = g(lo);
        ghi = g(hi);
    }

    if (check_monotone) {
        double prev = glo;
        for (int i = 1; i < kMonotoneSamples; ++i) {
            const double y = lo + (hi - lo) * i / (kMonotoneSamples - 1);
            const double gy = i == kMonotoneSamples - 1 ? ghi : g(y);
            if (!(gy > prev)) {
                throw NonMonotoneBracket("section is not increasing near y = " + std::to_string(y) + at_x(x));
            }
            prev = gy;
        }
    }

    double mid = lo + 0.5 * (hi - lo);
    double gmid = g(mid);
    for (int iter = 0; iter < 2000; ++iter) {
        if (gmid == 0.0 || (hi - lo <= tol && std::abs(gmid) < tol)) {
            break;
        }
        if (check_monotone && !(glo <= gmid && gmid <= ghi)) {
            throw NonMonotoneBracket("bisection value leaves the bracket near y = " + std::to_string(mid) + at_x(x));
        }
        if (gmid < 0.0) {
            lo = mid;
            glo = gmid;
        } else {
            hi = mid;
            ghi = gmid;
        }
        const double next = lo + 0.5 * (hi - lo);
        if (next == lo || next == hi) {
            // Bracket collapsed to adjacent doubles: keep the better end.
            if (std::abs(glo) < std::abs(ghi)) {
                mid = lo;
                gmid = glo;
            } else {
                mid = hi;
                gmid = ghi;
            }
            break;
        }
        mid = next;
        gmid = g(mid);
    }
    return {mid, std::abs(gmid)};
}

void require_positive_twist(const LiftedMap& map)
{
    if (map.twist_sign() < 0) {
        throw TwistViolation("characteristic curves need a positive twist map");
    }
}

std::vector<double> uniform_grid(std::size_t resolution)
{
    if (resolution < 1) {
        throw InvalidArgument("curve resolution must be >= 1");
    }
    std::vector<double> xs(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
        xs[i] = static_cast<double>(i) / static_cast<double>(resolution);
    }
    return xs;
}

// d(p1 o F^q)/dy at (x, y): first component of DF^q v without normalization.
double section_slope(const LiftedMap& map, Point z, long q)
{
    Point w{0.0, 1.0};
    for (long i = 0; i < q; ++i) {
        w = map.derivative(z).apply(w);
        z = map.eval(z);
    }
    return w.x;
}

}  // namespace

double PeriodicCurve::at(double x) const
{
    const std::size_t n = xs.size();
    if (n == 0) {
        throw InvalidArgument("empty curve");
    }
    const double r = x - std::floor(x);
    const double pos = r * static_cast<double>(n);
    std::size_t i = static_cast<std::size_t>(pos);
    if (i >= n) {
        i = n - 1;
    }
    const double t = pos - static_cast<double>(i);
    return ys[i] + t * (ys[(i + 1) % n] - ys[i]);
}

double PeriodicCurve::max_residual() const
{
    return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
}

double PeriodicCurve::max_fixed_residual() const
{
    return fixed_residuals.empty() ? 0.0 : *std::max_element(fixed_residuals.begin(), fixed_residuals.end());
}

double PeriodicCurve::lipschitz() const
{
    const std::size_t n = xs.size();
    if (n < 2) {
        return 0.0;
    }
    const double h = 1.0 / static_cast<double>(n);
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        best = std::max(best, std::abs(ys[(i + 1) % n] - ys[i]) / h);
    }
    return best;
}

std::string PeriodicCurve::label_text() const
{
    switch (label) {
    case CurveLabel::Psi1:
        return "Psi1";
    case CurveLabel::PsiMinus1:
        return "PsiMinus1";
    case CurveLabel::PsiRho:
        return "PsiRho(" + std::to_string(p) + "/" + std::to_string(q) + ")";
    }
    return "?";
}

double psi1(const LiftedMap& map, double x, double tol)
{
    require_positive_twist(map);
    const auto g = [&](double y) { return map.eval({x, y}).x - x; };
    return bracketed_root(g, tol, false, x).y;
}

double psi_minus1(const LiftedMap& map, double x, double tol)
{
    return map.eval({x, psi1(map, x, tol)}).y;
}

PeriodicCurve psi1_curve(const LiftedMap& map, std::size_t resolution, double tol)
{
    require_positive_twist(map);
    PeriodicCurve c;
    c.label = CurveLabel::Psi1;
    c.xs = uniform_grid(resolution);
    for (double x : c.xs) {
        const auto g = [&](double y) { return map.eval({x, y}).x - x; };
        const Root r = bracketed_root(g, tol, false, x);
        c.ys.push_back(r.y);
        c.residuals.push_back(r.residual);
    }
    return c;
}

PeriodicCurve psi_minus1_curve(const LiftedMap& map, std::size_t resolution, double tol)
{
    PeriodicCurve c = psi1_curve(map, resolution, tol);
    c.label = CurveLabel::PsiMinus1;
    for (std::size_t i = 0; i < c.size(); ++i) {
        c.ys[i] = map.eval({c.xs[i], c.ys[i]}).y;
    }
    return c;
}

double flux(const LiftedMap& map, std::size_t resolution, double tol)
{
    if (resolution < 2) {
        throw InvalidArgument("flux needs resolution >= 2");
    }
    const PeriodicCurve lower = psi1_curve(map, resolution, tol);
    // Periodic integrand: the composite trapezoid rule is the plain node mean.
    double sum = 0.0;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const double upper = map.eval({lower.xs[i], lower.ys[i]}).y;
        sum += upper - lower.ys[i];
    }
    return sum / static_cast<double>(resolution);
}

bool RegionX::contains(Point z) const
{
    const double lo = lower.at(z.x);
    const double hi = upper.at(z.x);
    return lo < z.y && z.y < hi;
}

RegionX region_x(const LiftedMap& map, RegionSign sign, std::size_t resolution, double tol)
{
    RegionX r;
    r.sign = sign;
    PeriodicCurve c1 = psi1_curve(map, resolution, tol);
    PeriodicCurve cm1 = psi_minus1_curve(map, resolution, tol);
    if (sign == RegionSign::Minus) {
        r.lower = std::move(c1);
        r.upper = std::move(cm1);
    } else {
        r.lower = std::move(cm1);
        r.upper = std::move(c1);
    }
    return r;
}

RotationEstimate rotation_number(const LiftedMap& map, Point p, long horizon)
{
    if (horizon < 1) {
        throw InvalidArgument("rotation_number needs N >= 1");
    }
    const Point end = iterate_to(map, p, horizon);
    return {(end.x - p.x) / static_cast<double>(horizon), horizon};
}

PeriodicCurve periodic_curve(const LiftedMap& map, long p, long q, std::size_t resolution, double tol,
                             double fix_tol)
{
    require_positive_twist(map);
    if (q < 1) {
        throw InvalidArgument("rotation denominator must be positive");
    }
    if (std::gcd(p, q) != 1) {
        throw InvalidArgument("rotation " + std::to_string(p) + "/" + std::to_string(q) + " is not reduced");
    }
    PeriodicCurve c;
    c.label = CurveLabel::PsiRho;
    c.p = p;
    c.q = q;
    c.xs = uniform_grid(resolution);
    c.ys.resize(resolution);
    c.residuals.resize(resolution);
    c.fixed_residuals.resize(resolution);
    const double shift = static_cast<double>(p);
    for (std::size_t i = 0; i < resolution; ++i) {
        const double x = c.xs[i];
        const auto g = [&](double y) { return iterate_to(map, {x, y}, q).x - x - shift; };
        const Root r = bracketed_root(g, tol, true, x);
        if (!(section_slope(map, {x, r.y}, q) > 0.0)) {
            throw NonMonotoneBracket("d(p1 o F^" + std::to_string(q) + ")/dy <= 0 at the root" + at_x(x));
        }
        c.ys[i] = r.y;
        c.residuals[i] = r.residual;
        c.fixed_residuals[i] = std::abs(iterate_to(map, {x, r.y}, q).y - r.y);
    }
    c.fixed_ok = c.max_fixed_residual() < fix_tol;
    return c;
}

Rational parse_rational(const std::string& text)
{
    const auto slash = text.find('/');
    auto parse_long = [&](std::string_view s) {
        long v = 0;
        if (!s.empty() && s.front() == '+') {
            s.remove_prefix(1);
        }
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
            throw InvalidArgument("malformed rational '" + text + "'");
        }
        return v;
    };
    const std::string_view s(text);
    Rational r;
    r.p = parse_long(s.substr(0, slash));
    r.q = slash == std::string_view::npos ? 1 : parse_long(s.substr(slash + 1));
    if (r.q == 0) {
        throw InvalidArgument("zero denominator in '" + text + "'");
    }
    if (r.q < 0) {
        r.p = -r.p;
        r.q = -r.q;
    }
    const long g = std::gcd(r.p, r.q);
    r.p /= g;
    r.q /= g;
    return r;
}

double PsiFamily::max_residual() const
{
    double m = 0.0;
    for (const auto& e : entries) {
        m = std::max(m, e.curve.max_residual());
    }
    return m;
}

double PsiFamily::max_fixed_residual() const
{
    double m = 0.0;
    for (const auto& e : entries) {
        m = std::max(m, e.curve.max_fixed_residual());
    }
    return m;
}

bool PsiFamily::all_fixed() const
{
    return std::all_of(entries.begin(), entries.end(), [](const Entry& e) { return e.curve.fixed_ok; });
}

PsiFamily psi_family(const LiftedMap& map, const std::vector<Rational>& rationals, std::size_t resolution,
                     double tol, double fix_tol)
{
    for (std::size_t i = 1; i < rationals.size(); ++i) {
        if (!(rationals[i - 1].value() < rationals[i].value())) {
            throw InvalidArgument("rationals must be sorted and pairwise distinct");
        }
    }
    PsiFamily fam;
    for (const Rational& r : rationals) {
        PsiFamily::Entry e;
        e.rho = r;
        e.curve = periodic_curve(map, r.p, r.q, resolution, tol, fix_tol);
        e.lipschitz = e.curve.lipschitz();
        fam.entries.push_back(std::move(e));
    }
    for (std::size_t i = 1; i < fam.entries.size(); ++i) {
        const auto& below = fam.entries[i - 1];
        const auto& above = fam.entries[i];
        for (std::size_t j = 0; j < resolution; ++j) {
            if (!(below.curve.ys[j] < above.curve.ys[j])) {
                fam.monotone_ok = false;
                fam.ordering_violations.push_back(
                    "psi(" + std::to_string(below.rho.p) + "/" + std::to_string(below.rho.q) + ") >= psi(" +
                    std::to_string(above.rho.p) + "/" + std::to_string(above.rho.q) + ")" + at_x(below.curve.xs[j]));
                break;
            }
        }
    }
    return fam;
}

std::string to_string(Monotonicity m)
{
    switch (m) {
    case Monotonicity::Fixed:
        return "fixed";
    case Monotonicity::Monotone:
        return "monotone";
    case Monotonicity::SwitchInterior:
        return "switch_interior";
    case Monotonicity::SwitchTouching:
        return "switch_touching";
    case Monotonicity::Undetermined:
        return "undetermined";
    }
    return "?";
}

Monotonicity classify_monotonicity(const LiftedMap& map, Point p, long horizon)
{
    if (horizon < 1) {
        throw InvalidArgument("classify_monotonicity needs N >= 1");
    }
    // Orbit segment n = -N .. N.
    std::vector<Point> orbit = iterate(map, p, -horizon);
    std::reverse(orbit.begin(), orbit.end());
    const std::vector<Point> forward = iterate(map, p, horizon);
    orbit.insert(orbit.end(), forward.begin() + 1, forward.end());

    // The trichotomy needs f without over-conjugate points along the segment.
    if (map.twist_sign() < 0 || detect_overconjugate(map, orbit.front(), 2 * horizon)) {
        return Monotonicity::Undetermined;
    }

    const bool fixed = std::all_of(orbit.begin(), orbit.end(), [&](Point z) { return norm(z - p) <= 1e-12; });
    if (fixed) {
        return Monotonicity::Fixed;
    }

    std::vector<int> signs;
    signs.reserve(orbit.size() - 1);
    for (std::size_t i = 0; i + 1 < orbit.size(); ++i) {
        const double inc = orbit[i + 1].x - orbit[i].x;
        signs.push_back(std::abs(inc) <= kZeroIncrement ? 0 : (inc > 0.0 ? 1 : -1));
    }

    const auto zeros = std::count(signs.begin(), signs.end(), 0);
    int switches = 0;
    int last = 0;
    for (int s : signs) {
        if (s != 0) {
            if (last != 0 && s != last) {
                ++switches;
            }
            last = s;
        }
    }
    if (zeros == 0) {
        if (switches == 0) {
            return Monotonicity::Monotone;
        }
        if (switches == 1) {
            return Monotonicity::SwitchInterior;
        }
        return Monotonicity::Undetermined;
    }
    if (zeros == 1 && switches == 1) {
        const auto z = static_cast<std::size_t>(std::find(signs.begin(), signs.end(), 0) - signs.begin());
        if (z > 0 && z + 1 < signs.size() && signs[z - 1] == -signs[z + 1]) {
            return Monotonicity::SwitchTouching;
        }
    }
    return Monotonicity::Undetermined;
}

std::string to_string(ProbeVerdict v)
{
    switch (v) {
    case ProbeVerdict::NoObstructionFound:
        return "NO_OBSTRUCTION_FOUND";
    case ProbeVerdict::ConjugatePointsFound:
        return "CONJUGATE_POINTS_FOUND";
    case ProbeVerdict::NotApplicable:
        return "NOT_APPLICABLE";
    }
    return "?";
}

ProbeReport integrability_probe(const LiftedMap& map, const ProbeConfig& cfg)
{
    if (cfg.grid_x < 1 || cfg.grid_y < 1 || cfg.horizon < 1 || !(cfg.y_min < cfg.y_max)) {
        throw InvalidArgument("probe needs a non-empty grid, horizon >= 1 and y_min < y_max");
    }
    ProbeReport report;
    report.flux = flux(map, std::max<std::size_t>(cfg.curve_resolution, 2), cfg.tol);
    if (std::abs(report.flux) > cfg.flux_tol) {
        report.verdict = ProbeVerdict::NotApplicable;
        return report;
    }

    // Nodes: x in [-1/2, 1/2) (a fundamental domain centred on x = 0), y cell centres.
    const std::size_t count = cfg.grid_x * cfg.grid_y;
    auto node = [&](std::size_t idx) {
        const std::size_t i = idx % cfg.grid_x;
        const std::size_t j = idx / cfg.grid_x;
        const double x = -0.5 + static_cast<double>(i) / static_cast<double>(cfg.grid_x);
        const double y = cfg.y_min + (static_cast<double>(j) + 0.5) * (cfg.y_max - cfg.y_min) /
                                         static_cast<double>(cfg.grid_y);
        return Point{x, y};
    };
    std::vector<long> times(count, 0);
    parallel_for(count, cfg.threads, [&](std::size_t idx) {
        const auto t = detect_overconjugate(map, node(idx), cfg.horizon);
        times[idx] = t ? *t : 0;
    });

    // Earliest detection; ties go to the node nearest the grid centre.
    const Point centre{0.0, 0.5 * (cfg.y_min + cfg.y_max)};
    for (std::size_t idx = 0; idx < count; ++idx) {
        if (times[idx] == 0) {
            continue;
        }
        ++report.witnesses;
        const Point z = node(idx);
        const bool better = !report.witness || times[idx] < report.witness_time ||
                            (times[idx] == report.witness_time && norm(z - centre) < norm(*report.witness - centre));
        if (better) {
            report.witness = z;
            report.witness_time = times[idx];
        }
    }
    if (report.witness) {
        report.verdict = ProbeVerdict::ConjugatePointsFound;
        return report;
    }
    report.verdict = ProbeVerdict::NoObstructionFound;
    report.family = psi_family(map, cfg.rationals, cfg.curve_resolution, cfg.tol, cfg.fix_tol);
    return report;
}

std::string curves_to_csv(const std::vector<PeriodicCurve>& curves, const std::string& map_spec)
{
    std::ostringstream os;
    os << "# map=" << map_spec << '\n';
    for (const auto& c : curves) {
        os << "# curve=" << c.label_text() << " max_residual=" << format_real(c.max_residual());
        if (c.label == CurveLabel::PsiRho) {
            os << " max_fixed_residual=" << format_real(c.max_fixed_residual()) << " fixed=" << (c.fixed_ok ? "yes" : "no");
        }
        os << " lipschitz=" << format_real(c.lipschitz()) << '\n';
    }
    os << "x,y,residual,label\n";
    for (const auto& c : curves) {
        const std::string label = c.label_text();
        for (std::size_t i = 0; i < c.size(); ++i) {
            os << format_real(c.xs[i]) << ',' << format_real(c.ys[i]) << ',' << format_real(c.residuals[i]) << ',' << label << '\n';
        }
    }
    return os.str();
}

}  // namespace twistlab
