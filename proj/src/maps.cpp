#include "twistlab/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "twistlab/error.hpp"
#include "trig.hpp"

namespace twistlab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double norm(Point p) { return std::hypot(p.x, p.y); }

LiftedMap::LiftedMap(Family f, std::vector<double> params) : family_(f), params_(std::move(params))
{
    for (double v : params_) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("map parameters must be finite");
        }
    }
    if (f == Family::GeneratingFunction) {
        cos_coeffs_ = params_;
    }
}

LiftedMap LiftedMap::shear() { return LiftedMap(Family::Shear, {}); }

LiftedMap LiftedMap::drift_shear(double c) { return LiftedMap(Family::DriftShear, {c}); }

LiftedMap LiftedMap::standard(double k)
{
    if (k < 0.0) {
        throw InvalidArgument("standard map kick strength must be >= 0");
    }
    return LiftedMap(Family::Standard, {k});
}

LiftedMap LiftedMap::generating_function(std::vector<double> cos_coefficients)
{
    return LiftedMap(Family::GeneratingFunction, std::move(cos_coefficients));
}

LiftedMap LiftedMap::inverted() const
{
    LiftedMap m = *this;
    m.twist_sign_ = -twist_sign_;
    return m;
}

bool LiftedMap::has_generating_function() const
{
    return twist_sign_ > 0 && family_ != Family::DriftShear;
}

double LiftedMap::drift() const { return family_ == Family::DriftShear ? params_[0] : 0.0; }

double LiftedMap::potential(double x) const
{
    switch (family_) {
    case Family::Standard:
        return params_[0] / (kTwoPi * kTwoPi) * detail::cos_2pi(x);
    case Family::GeneratingFunction: {
        double v = 0.0;
        for (std::size_t i = 0; i < cos_coeffs_.size(); ++i) {
            v += cos_coeffs_[i] * detail::cos_2pi(static_cast<double>(i + 1) * x);
        }
        return v;
    }
    default:
        return 0.0;
    }
}

double LiftedMap::potential_d1(double x) const
{
    switch (family_) {
    case Family::Standard:
        return -params_[0] / kTwoPi * detail::sin_2pi(x);
    case Family::GeneratingFunction: {
        double v = 0.0;
        for (std::size_t i = 0; i < cos_coeffs_.size(); ++i) {
            const double freq = static_cast<double>(i + 1);
            v -= kTwoPi * freq * cos_coeffs_[i] * detail::sin_2pi(freq * x);
        }
        return v;
    }
    default:
        return 0.0;
    }
}

double LiftedMap::potential_d2(double x) const
{
    switch (family_) {
    case Family::Standard:
        return -params_[0] * detail::cos_2pi(x);
    case Family::GeneratingFunction: {
        double v = 0.0;
        for (std::size_t i = 0; i < cos_coeffs_.size(); ++i) {
            const double w = kTwoPi * static_cast<double>(i + 1);
            v -= w * w * cos_coeffs_[i] * detail::cos_2pi(static_cast<double>(i + 1) * x);
        }
        return v;
    }
    default:
        return 0.0;
    }
}

Point LiftedMap::forward(Point p) const
{
    const double yp = p.y + potential_d1(p.x);
    return {p.x + yp, yp + drift()};
}

Point LiftedMap::backward(Point p) const
{
    const double x = p.x - p.y + drift();
    return {x, p.y - drift() - potential_d1(x)};
}

Mat2 LiftedMap::forward_jacobian(Point p) const
{
    const double vpp = potential_d2(p.x);
    return {1.0 + vpp, 1.0, vpp, 1.0};
}

Mat2 LiftedMap::backward_jacobian(Point p) const
{
    const double vpp = potential_d2(p.x - p.y + drift());
    return {1.0, -1.0, -vpp, 1.0 + vpp};
}

Point LiftedMap::eval(Point p) const { return twist_sign_ > 0 ? forward(p) : backward(p); }

Point LiftedMap::eval_inverse(Point p) const { return twist_sign_ > 0 ? backward(p) : forward(p); }

Mat2 LiftedMap::derivative(Point p) const
{
    return twist_sign_ > 0 ? forward_jacobian(p) : backward_jacobian(p);
}

std::string LiftedMap::describe() const
{
    std::ostringstream os;
    os.precision(17);
    switch (family_) {
    case Family::Shear:
        os << "shear";
        break;
    case Family::DriftShear:
        os << "drift:c=" << params_[0];
        break;
    case Family::Standard:
        os << "std:k=" << params_[0];
        break;
    case Family::GeneratingFunction:
        os << "genfun:";
        for (std::size_t i = 0; i < params_.size(); ++i) {
            os << (i ? "," : "") << 'a' << i + 1 << '=' << params_[i];
        }
        break;
    }
    if (twist_sign_ < 0) {
        os << " (inverted)";
    }
    return os.str();
}

std::vector<Point> iterate(const LiftedMap& map, Point p, long n, long horizon_cap)
{
    const long steps = n < 0 ? -n : n;
    if (steps > horizon_cap) {
        throw HorizonExceeded("orbit length " + std::to_string(steps) + " exceeds horizon cap " +
                              std::to_string(horizon_cap));
    }
    std::vector<Point> orbit;
    orbit.reserve(static_cast<std::size_t>(steps) + 1);
    orbit.push_back(p);
    for (long i = 0; i < steps; ++i) {
        p = n > 0 ? map.eval(p) : map.eval_inverse(p);
        orbit.push_back(p);
    }
    return orbit;
}

Point iterate_to(const LiftedMap& map, Point p, long n, long horizon_cap)
{
    const long steps = n < 0 ? -n : n;
    if (steps > horizon_cap) {
        throw HorizonExceeded("orbit length " + std::to_string(steps) + " exceeds horizon cap " +
                              std::to_string(horizon_cap));
    }
    for (long i = 0; i < steps; ++i) {
        p = n > 0 ? map.eval(p) : map.eval_inverse(p);
    }
    return p;
}

TwistReport twist_check(const LiftedMap& map, std::size_t samples, std::uint64_t seed, double y_extent)
{
    if (samples == 0) {
        throw InvalidArgument("twist_check needs at least one sample");
    }
    // R2 additive recurrence (plastic-number Kronecker sequence), offset by the seed.
    constexpr double g = 1.32471795724474602596;
    constexpr double a1 = 1.0 / g;
    constexpr double a2 = 1.0 / (g * g);
    const double off1 = static_cast<double>(seed % 1000003) * a1;
    const double off2 = static_cast<double>(seed % 999983) * a2;

    TwistReport report;
    report.samples = samples;
    report.min_entry = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        const double n = static_cast<double>(i + 1);
        double u1 = off1 + n * a1;
        double u2 = off2 + n * a2;
        u1 -= std::floor(u1);
        u2 -= std::floor(u2);
        const Point at{u1, y_extent * (2.0 * u2 - 1.0)};
        const double entry = map.derivative(at).b;
        report.min_entry = std::min(report.min_entry, entry);
        if (!(entry > 0.0)) {
            report.violations.push_back({at, entry});
        }
    }
    return report;
}

}  // namespace twistlab
