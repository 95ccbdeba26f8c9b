#include "twistlab/torsion.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "twistlab/error.hpp"

namespace twistlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr long kPersistenceSteps = 50;
constexpr double kHalfTurnFlagTol = 1e-6;

// Angle of w from the vertical in turns, in (-1/2, 1/2]. w must be non-zero.
double raw_angle(double wx, double wy)
{
    double a = std::atan2(-wx, wy) / kTwoPi;
    if (a <= -0.5) {
        a += 1.0;
    }
    return a;
}

Point normalized(Point w)
{
    const double len = std::hypot(w.x, w.y);
    return {w.x / len, w.y / len};
}

std::string where(Point p)
{
    return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

double vertical_variation(const Mat2& m)
{
    if (!(m.b > 0.0)) {
        throw TwistViolation("DF v does not point to the right (d(p1 o F)/dy = " + std::to_string(m.b) + ")");
    }
    return raw_angle(m.b, m.d);  // b > 0 puts this in (-1/2, 0)
}

// Anchored variation given angle(w) and angle(DF w).
double anchored(double from, double to, double vertical, double tol)
{
    double r = to - from - vertical;
    r -= std::nearbyint(r);
    if (std::abs(std::abs(r) - 0.5) < tol) {
        throw DegenerateAnchor("angle variation is a half turn away from the vertical's");
    }
    return vertical + r;
}

}  // namespace

double angle_from_vertical(Point w)
{
    if (w.x == 0.0 && w.y == 0.0) {
        throw InvalidArgument("angle of the zero vector");
    }
    return raw_angle(w.x, w.y);
}

double vertical_step_variation(const LiftedMap& map, Point p)
{
    try {
        return vertical_variation(map.derivative(p));
    } catch (const TwistViolation& e) {
        throw TwistViolation(std::string(e.what()) + " at " + where(p));
    }
}

double step_variation(const Mat2& jacobian, Point w, double anchor_tol)
{
    const double vertical = vertical_variation(jacobian);
    const Point image = jacobian.apply(w);
    return anchored(angle_from_vertical(w), angle_from_vertical(image), vertical, anchor_tol);
}

double step_variation(const LiftedMap& map, Point p, Point w, double anchor_tol)
{
    try {
        return step_variation(map.derivative(p), w, anchor_tol);
    } catch (const TwistViolation& e) {
        throw TwistViolation(std::string(e.what()) + " at " + where(p));
    }
}

TangentOrbit::TangentOrbit(const LiftedMap& map, Point base, Point dir, double anchor_tol)
    : map_(&map), base_(base), dir_(normalized(dir)), dir_angle_(angle_from_vertical(dir)), anchor_tol_(anchor_tol)
{
}

double TangentOrbit::advance()
{
    const Mat2 m = map_->derivative(base_);
    double vertical = 0.0;
    try {
        vertical = vertical_variation(m);
    } catch (const TwistViolation& e) {
        throw TwistViolation(std::string(e.what()) + " at " + where(base_));
    }
    const Point image = m.apply(dir_);
    const double image_angle = raw_angle(image.x, image.y);
    const double delta = anchored(dir_angle_, image_angle, vertical, anchor_tol_);

    dir_ = normalized(image);
    dir_angle_ = image_angle;
    base_ = map_->eval(base_);
    cumulative_ += delta;
    ++steps_;
    return delta;
}

TorsionTrace torsion_trace(const LiftedMap& map, Point p, Point w, long n, double anchor_tol)
{
    if (n < 1) {
        throw InvalidArgument("torsion_trace needs n >= 1");
    }
    TangentOrbit orbit(map, p, w, anchor_tol);
    TorsionTrace trace;
    trace.steps.reserve(static_cast<std::size_t>(n));
    trace.cumulative.reserve(static_cast<std::size_t>(n) + 1);
    trace.cumulative.push_back(0.0);
    for (long i = 0; i < n; ++i) {
        trace.steps.push_back(orbit.advance());
        trace.cumulative.push_back(orbit.cumulative());
    }
    trace.end_point = orbit.base();
    trace.end_dir = orbit.dir();
    return trace;
}

TorsionEstimate asymptotic_torsion(const LiftedMap& map, Point p, long horizon, long window)
{
    if (window < 1 || horizon < window) {
        throw InvalidArgument("asymptotic_torsion needs horizon >= window >= 1");
    }
    TangentOrbit orbit(map, p, {0.0, 1.0});
    const long mark = horizon - window;
    double earlier = 0.0;  // Torsion_0 is taken as 0 when window == horizon
    for (long i = 0; i < horizon; ++i) {
        orbit.advance();
        if (orbit.steps() == mark) {
            earlier = orbit.cumulative() / static_cast<double>(mark);
        }
    }
    TorsionEstimate est;
    est.horizon = horizon;
    est.value = orbit.cumulative() / static_cast<double>(horizon);
    est.last_window_drift = std::abs(est.value - earlier);
    return est;
}

std::optional<long> detect_overconjugate(const LiftedMap& map, Point p, long horizon)
{
    if (horizon < 1) {
        throw InvalidArgument("detect_overconjugate needs horizon >= 1");
    }
    TangentOrbit orbit(map, p, {0.0, 1.0});
    while (orbit.steps() < horizon) {
        orbit.advance();
        if (orbit.cumulative() < -0.5) {
            const long found = orbit.steps();
            const long until = std::min(found + kPersistenceSteps, horizon);
            while (orbit.steps() < until) {
                orbit.advance();
                if (!(orbit.cumulative() < -0.5)) {
                    throw Error("over-conjugate persistence failed at step " + std::to_string(orbit.steps()) +
                                " after detection at " + std::to_string(found) + " from " + where(p));
                }
            }
            return found;
        }
    }
    return std::nullopt;
}

std::optional<ConjugateEvent> detect_conjugate(const LiftedMap& map, Point p, long horizon, double tol)
{
    if (horizon < 1 || !(tol > 0.0)) {
        throw InvalidArgument("detect_conjugate needs horizon >= 1 and tol > 0");
    }
    TangentOrbit orbit(map, p, {0.0, 1.0});
    double prev_first = 0.0;  // first component of v itself
    double prev_cumulative = 0.0;
    while (orbit.steps() < horizon) {
        orbit.advance();
        const double first = orbit.dir().x;
        const double c = orbit.cumulative();
        const bool crossed = orbit.steps() >= 2 && std::signbit(first) != std::signbit(prev_first) &&
                             first != 0.0 && prev_first != 0.0;
        const bool touching = std::abs(first) < tol;
        if (crossed || touching) {
            long k = 0;
            if (crossed) {
                // The half-integer passed between the two times, nearest to c.
                const double lo = std::min(prev_cumulative, c);
                const double hi = std::max(prev_cumulative, c);
                const double m_lo = std::ceil(2.0 * lo);
                const double m_hi = std::floor(2.0 * hi);
                double m = std::nearbyint(2.0 * c);
                if (m_lo <= m_hi) {
                    m = std::clamp(m, m_lo, m_hi);
                }
                k = static_cast<long>(-m);
            } else {
                k = static_cast<long>(std::nearbyint(-2.0 * c));
            }
            if (k >= 1) {
                return ConjugateEvent{orbit.steps(), k, c};
            }
        }
        prev_first = first;
        prev_cumulative = c;
    }
    return std::nullopt;
}

ConjugateReport conjugate_report(const LiftedMap& map, Point p, long horizon, double tol)
{
    ConjugateReport report;
    report.first_overconjugate = detect_overconjugate(map, p, horizon);
    report.first_conjugate = detect_conjugate(map, p, horizon, tol);

    long at = horizon;
    if (report.first_overconjugate) {
        at = std::min(at, *report.first_overconjugate);
    }
    if (report.first_conjugate) {
        at = std::min(at, report.first_conjugate->n);
    }
    TangentOrbit orbit(map, p, {0.0, 1.0});
    while (orbit.steps() < at) {
        orbit.advance();
    }
    report.cumulative_at_detection = orbit.cumulative();
    return report;
}

std::optional<long> jacobi_conjugate_oracle(const LiftedMap& map, Point p, long horizon, double tol)
{
    if (!map.has_generating_function()) {
        throw NoGeneratingFunction("map '" + map.describe() + "' has no generating function h(x, x')");
    }
    if (horizon < 1) {
        throw InvalidArgument("jacobi_conjugate_oracle needs horizon >= 1");
    }
    // For h(x, x') = (x' - x)^2/2 + V(x):
    //   d12h = -1, d11h(x, x') = 1 + V''(x), d22h = 1.
    const auto d12 = [](double, double) { return -1.0; };
    const auto d11 = [&map](double x, double) { return 1.0 + map.potential_d2(x); };
    const auto d22 = [](double, double) { return 1.0; };

    Point prev_pt = p;
    Point cur_pt = map.eval(p);
    Point next_pt = map.eval(cur_pt);
    double xi_prev = 0.0;
    double xi = map.derivative(p).b;
    for (long n = 1; n < horizon; ++n) {
        const double x_prev = prev_pt.x, x = cur_pt.x, x_next = next_pt.x;
        const double xi_next =
            -(d12(x_prev, x) * xi_prev + (d11(x, x_next) + d22(x_prev, x)) * xi) / d12(x, x_next);

        // Tangent vector at time n+1 is (xi_{n+1}, xi_{n+1} - xi_n).
        const double scale = std::hypot(xi_next, xi_next - xi);
        if (xi_next == 0.0 || std::abs(xi_next) < tol * scale || std::signbit(xi_next) != std::signbit(xi)) {
            return n + 1;
        }
        xi_prev = xi / scale;
        xi = xi_next / scale;
        prev_pt = cur_pt;
        cur_pt = next_pt;
        next_pt = map.eval(next_pt);
    }
    return std::nullopt;
}

LinkingResult linking_number(const LiftedMap& map, Point p, Point q, long n)
{
    if (n < 1) {
        throw InvalidArgument("linking_number needs n >= 1");
    }
    if (p == q) {
        throw CoincidentPoints("linking number of coincident points " + where(p));
    }
    LinkingResult result;
    double total = 0.0;
    Point d = q - p;
    double angle = angle_from_vertical(d);
    for (long i = 0; i < n; ++i) {
        p = map.eval(p);
        q = map.eval(q);
        const Point next = q - p;
        if (next.x == 0.0 && next.y == 0.0) {
            throw CoincidentPoints("orbits of the two points coincide at step " + std::to_string(i + 1));
        }
        const double next_angle = angle_from_vertical(next);
        double step = next_angle - angle;
        step -= std::nearbyint(step);
        if (step == -0.5) {
            step = 0.5;
        }
        if (std::abs(std::abs(step) - 0.5) < kHalfTurnFlagTol) {
            result.near_half_turn = true;
        }
        total += step;
        angle = next_angle;
    }
    result.value = total / static_cast<double>(n);
    return result;
}

}  // namespace twistlab
