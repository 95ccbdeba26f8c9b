#pragma once

#include <cmath>
#include <numbers>

namespace twistlab::detail {

// sin(2 pi x) and cos(2 pi x) with the argument reduced in turns first, so
// that the lattice of quarter turns is hit exactly (sin_2pi(0.5) == 0).
inline void sincos_2pi(double x, double& s, double& c)
{
    double r = x - std::floor(x);         // [0, 1)
    const double q = std::nearbyint(4.0 * r);  // nearest quarter turn, 0..4
    const double f = (r - 0.25 * q) * (2.0 * std::numbers::pi);  // |f| <= pi/4
    const double sf = std::sin(f);
    const double cf = std::cos(f);
    switch (static_cast<int>(q) & 3) {
    case 0: s = sf;  c = cf;  break;
    case 1: s = cf;  c = -sf; break;
    case 2: s = -sf; c = -cf; break;
    default: s = -cf; c = sf; break;
    }
}

inline double sin_2pi(double x)
{
    double s, c;
    sincos_2pi(x, s, c);
    return s;
}

inline double cos_2pi(double x)
{
    double s, c;
    sincos_2pi(x, s, c);
    return c;
}

}  // namespace twistlab::detail
