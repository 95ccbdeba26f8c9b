#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace twistlab {

struct Point {
    double x = 0.0;  // lifted first coordinate
    double y = 0.0;

    friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr bool operator==(Point, Point) = default;
};

double norm(Point p);

/// Row-major 2x2 matrix [[a, b], [c, d]]. Columns are the images of the
/// horizontal u = (1,0) and the vertical v = (0,1).
struct Mat2 {
    double a = 1.0, b = 0.0;
    double c = 0.0, d = 1.0;

    constexpr double det() const { return a * d - b * c; }
    constexpr double trace() const { return a + d; }
    constexpr Point apply(Point w) const { return {a * w.x + b * w.y, c * w.x + d * w.y}; }

    friend constexpr Mat2 operator*(const Mat2& l, const Mat2& r)
    {
        return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
                l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
    }
};

enum class Family { Shear, DriftShear, Standard, GeneratingFunction };

/// A twist map of the annulus T x R given by its lift to the plane.
///
/// Every family is written in generating-function form
///     x' = x + y + V'(x),   y' = y + V'(x) + c
/// with h(x, x') = (x' - x)^2 / 2 + V(x) when c = 0:
///   - Shear:              V = 0, c = 0
///   - DriftShear:         V = 0, c = drift (not exact symplectic: flux c)
///   - Standard:           V(x) = k / (4 pi^2) cos(2 pi x)
///   - GeneratingFunction: V(x) = sum_i a_i cos(2 pi i x)
/// twist_sign = -1 selects the inverse of the family (a negative twist map,
/// kept as a test fixture).
class LiftedMap {
public:
    static LiftedMap shear();
    static LiftedMap drift_shear(double c);
    static LiftedMap standard(double k);
    static LiftedMap generating_function(std::vector<double> cos_coefficients);

    /// The inverse map as a map in its own right.
    LiftedMap inverted() const;

    Family family() const { return family_; }
    const std::vector<double>& params() const { return params_; }
    int twist_sign() const { return twist_sign_; }

    /// True when the orbit relation comes from h(x, x') (no drift, not inverted).
    bool has_generating_function() const;

    Point eval(Point p) const;
    Point eval_inverse(Point p) const;
    Mat2 derivative(Point p) const;

    /// V'(x) and V''(x) of the potential.
    double potential_d1(double x) const;
    double potential_d2(double x) const;
    /// V(x) itself.
    double potential(double x) const;

    /// d1 h and d2 h of the generating function h(x, x') = (x' - x)^2/2 + V(x).
    double gen_d1(double x, double xp) const { return -(xp - x) + potential_d1(x); }
    double gen_d2(double x, double xp) const { return xp - x; }

    /// Map specification string in the CLI grammar.
    std::string describe() const;

private:
    LiftedMap(Family f, std::vector<double> params);

    Point forward(Point p) const;
    Point backward(Point p) const;
    Mat2 forward_jacobian(Point p) const;
    Mat2 backward_jacobian(Point p) const;
    double drift() const;

    Family family_;
    std::vector<double> params_;
    // Fourier cosine coefficients of V, index i -> cos(2 pi (i+1) x).
    std::vector<double> cos_coeffs_;
    int twist_sign_ = 1;
};

/// Parse `shear`, `drift:c=<r>`, `std:k=<r>`, `genfun:a1=<r>,a2=<r>,...`.
/// Throws InvalidArgument on unknown family or malformed parameters.
LiftedMap parse_map_spec(const std::string& spec);

inline constexpr long kDefaultHorizonCap = 100'000'000;

/// Orbit segment of length |n| + 1 starting at p; n < 0 iterates the inverse.
std::vector<Point> iterate(const LiftedMap& map, Point p, long n, long horizon_cap = kDefaultHorizonCap);

/// F^n(p) without storing the segment.
Point iterate_to(const LiftedMap& map, Point p, long n, long horizon_cap = kDefaultHorizonCap);

struct TwistViolationSample {
    Point at;
    double entry = 0.0;
};

struct TwistReport {
    double min_entry = 0.0;  // min of d(p1 o F)/dy over the samples
    std::size_t samples = 0;
    std::vector<TwistViolationSample> violations;
    bool positive() const { return violations.empty(); }
};

/// Samples d(p1 o F)/dy on a seeded low-discrepancy set over
/// [0,1] x [-y_extent, y_extent].
TwistReport twist_check(const LiftedMap& map, std::size_t samples, std::uint64_t seed, double y_extent = 10.0);

}  // namespace twistlab
