#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "twistlab/maps.hpp"

namespace twistlab {

inline constexpr double kDefaultRootTol = 1e-10;
inline constexpr double kDefaultFixTol = 1e-8;

enum class CurveLabel { Psi1, PsiMinus1, PsiRho };

/// A sampled 1-periodic graph y = psi(x) on the uniform grid x_i = i / R.
struct PeriodicCurve {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> residuals;        // first-coordinate root residuals
    std::vector<double> fixed_residuals;  // |p2 o G(x, y) - y|, PsiRho only
    CurveLabel label = CurveLabel::Psi1;
    long p = 0;  // rotation numerator (PsiRho)
    long q = 1;  // rotation denominator (PsiRho)
    bool fixed_ok = true;  // every fixed residual below the fix tolerance

    std::size_t size() const { return xs.size(); }
    /// Linear interpolation with wrap-around; x is any real.
    double at(double x) const;
    double max_residual() const;
    double max_fixed_residual() const;
    /// Max |dy/dx| over adjacent nodes, including the wrap segment.
    double lipschitz() const;
    std::string label_text() const;
};

/// Psi_1(x): the unique y with p1 o F(x, y) = x.
double psi1(const LiftedMap& map, double x, double tol = kDefaultRootTol);

/// Psi_{-1}(x) = p2 o F(x, Psi_1(x)); its graph is F(graph Psi_1).
double psi_minus1(const LiftedMap& map, double x, double tol = kDefaultRootTol);

PeriodicCurve psi1_curve(const LiftedMap& map, std::size_t resolution, double tol = kDefaultRootTol);
PeriodicCurve psi_minus1_curve(const LiftedMap& map, std::size_t resolution, double tol = kDefaultRootTol);

/// Trapezoid quadrature of the integral over [0,1] of Psi_{-1} - Psi_1.
double flux(const LiftedMap& map, std::size_t resolution, double tol = kDefaultRootTol);

enum class RegionSign { Minus, Plus };

/// X^- = {Psi_1 < y < Psi_{-1}}, X^+ = {Psi_{-1} < y < Psi_1}, with the
/// bounding graphs sampled on a uniform grid.
struct RegionX {
    RegionSign sign = RegionSign::Minus;
    PeriodicCurve lower;  // Psi1 for X^-, PsiMinus1 for X^+
    PeriodicCurve upper;

    bool contains(Point z) const;
    bool empty_at(double x) const { return !(lower.at(x) < upper.at(x)); }
};

RegionX region_x(const LiftedMap& map, RegionSign sign, std::size_t resolution, double tol = kDefaultRootTol);

struct RotationEstimate {
    double value = 0.0;
    long horizon = 0;
};

/// (p1 o F^N(p) - p1(p)) / N.
RotationEstimate rotation_number(const LiftedMap& map, Point p, long horizon);

/// Samples y -> p1 o F^q(x, y) - x - p on the grid and solves for its root;
/// the second-coordinate residual certifies that the root is a fixed point of
/// F^q - (p, 0). Throws NonMonotoneBracket when the section is not increasing
/// (conjugate points), BracketFailure when no sign change is found.
PeriodicCurve periodic_curve(const LiftedMap& map, long p, long q, std::size_t resolution,
                             double tol = kDefaultRootTol, double fix_tol = kDefaultFixTol);

struct Rational {
    long p = 0;
    long q = 1;
    double value() const { return static_cast<double>(p) / static_cast<double>(q); }
    friend bool operator==(Rational, Rational) = default;
};

/// Parses "p/q" (or an integer "p"); reduces and normalizes q > 0.
Rational parse_rational(const std::string& text);

struct PsiFamily {
    struct Entry {
        Rational rho;
        PeriodicCurve curve;
        double lipschitz = 0.0;
    };
    std::vector<Entry> entries;
    bool monotone_ok = true;
    std::vector<std::string> ordering_violations;

    double max_residual() const;
    double max_fixed_residual() const;
    bool all_fixed() const;
};

PsiFamily psi_family(const LiftedMap& map, const std::vector<Rational>& rationals, std::size_t resolution,
                     double tol = kDefaultRootTol, double fix_tol = kDefaultFixTol);

enum class Monotonicity { Fixed, Monotone, SwitchInterior, SwitchTouching, Undetermined };

std::string to_string(Monotonicity m);

/// Orbit trichotomy of the first coordinate over n in [-N, N].
Monotonicity classify_monotonicity(const LiftedMap& map, Point p, long horizon);

struct ProbeConfig {
    std::size_t grid_x = 64;
    std::size_t grid_y = 64;
    double y_min = -2.0;
    double y_max = 2.0;
    long horizon = 10'000;
    std::vector<Rational> rationals;
    std::size_t curve_resolution = 256;
    double tol = kDefaultRootTol;
    double fix_tol = kDefaultFixTol;
    double flux_tol = 1e-9;
    unsigned threads = 0;  // 0: hardware concurrency
};

enum class ProbeVerdict { NoObstructionFound, ConjugatePointsFound, NotApplicable };

std::string to_string(ProbeVerdict v);

struct ProbeReport {
    ProbeVerdict verdict = ProbeVerdict::NoObstructionFound;
    double flux = 0.0;
    std::optional<Point> witness;
    long witness_time = 0;
    std::size_t witnesses = 0;  // grid points with a detection
    std::optional<PsiFamily> family;
};

/// One-sided C0-integrability evidence for an exact map: scans a grid for
/// over-conjugate points; if none is found, builds the psi_rho family.
ProbeReport integrability_probe(const LiftedMap& map, const ProbeConfig& cfg);

/// CSV with header `x,y,residual,label`, preceded by `#` metadata lines.
std::string curves_to_csv(const std::vector<PeriodicCurve>& curves, const std::string& map_spec);

}  // namespace twistlab
