#pragma once

#include <optional>
#include <vector>

#include "twistlab/maps.hpp"

namespace twistlab {

// All angles are measured in turns (radians / 2 pi).

inline constexpr double kDefaultVerticalTol = 1e-9;
inline constexpr double kDefaultAnchorTol = 1e-9;

/// Oriented angle from the vertical v = (0,1) to w, counterclockwise
/// positive, principal representative in (-1/2, 1/2]. Throws InvalidArgument
/// for the zero vector.
double angle_from_vertical(Point w);

/// One-step angle variation of the vertical: the representative in (-1/2, 0)
/// of the angle of DF(p) v. Throws TwistViolation when DF(p) v does not point
/// strictly to the right.
double vertical_step_variation(const LiftedMap& map, Point p);

/// One-step angle variation of an arbitrary direction w at p, anchored to the
/// vertical: the representative of angle(DF w) - angle(w) (mod 1) lying
/// within 1/2 of vertical_step_variation(p). Result lies in (-1, 1/2).
double step_variation(const LiftedMap& map, Point p, Point w, double anchor_tol = kDefaultAnchorTol);

/// Same anchoring rule with the Jacobian already evaluated.
double step_variation(const Mat2& jacobian, Point w, double anchor_tol = kDefaultAnchorTol);

/// Incremental walk of a tangent half-line along an orbit: the angle cocycle
/// accumulated one step at a time. The direction is renormalized after every
/// application of DF.
class TangentOrbit {
public:
    TangentOrbit(const LiftedMap& map, Point base, Point dir, double anchor_tol = kDefaultAnchorTol);

    /// Applies one step; returns the step's angle variation.
    double advance();

    Point base() const { return base_; }
    Point dir() const { return dir_; }
    double cumulative() const { return cumulative_; }
    long steps() const { return steps_; }

private:
    const LiftedMap* map_;
    Point base_;
    Point dir_;
    double dir_angle_;
    double cumulative_ = 0.0;
    long steps_ = 0;
    double anchor_tol_;
};

struct TorsionTrace {
    std::vector<double> steps;       // per-step variations, size n
    std::vector<double> cumulative;  // cumulative[k] = sum_{i<k} steps[i], size n + 1
    Point end_point;                 // F^n(p)
    Point end_dir;                   // normalized DF^n(p) w

    long length() const { return static_cast<long>(steps.size()); }
    double torsion() const { return cumulative.back() / static_cast<double>(steps.size()); }
};

TorsionTrace torsion_trace(const LiftedMap& map, Point p, Point w, long n, double anchor_tol = kDefaultAnchorTol);

struct TorsionEstimate {
    double value = 0.0;              // Torsion_N
    double last_window_drift = 0.0;  // |Torsion_N - Torsion_{N - window}|
    long horizon = 0;
};

/// Finite-time torsion at horizon N for the vertical start, with a drift
/// diagnostic over the last `window` steps. No convergence is claimed.
TorsionEstimate asymptotic_torsion(const LiftedMap& map, Point p, long horizon, long window);

/// Smallest n <= horizon with cumulative vertical angle < -1/2. Once found, the
/// orbit is continued for up to 50 more steps (bounded by the horizon) to
/// check that the cumulative angle stays below -1/2; a failure there throws
/// Error since it contradicts the twist condition.
std::optional<long> detect_overconjugate(const LiftedMap& map, Point p, long horizon);

struct ConjugateEvent {
    long n = 0;               // first index past the verticality crossing
    long k = 0;               // number of half turns: cumulative ~ -k/2
    double cumulative = 0.0;  // cumulative vertical angle at n
};

/// First time the transported vertical returns to the vertical line (sign change
/// of the first component of DF^n(p) v, or magnitude below tol) with k >= 1.
std::optional<ConjugateEvent> detect_conjugate(const LiftedMap& map, Point p, long horizon,
                                               double tol = kDefaultVerticalTol);

struct ConjugateReport {
    std::optional<long> first_overconjugate;
    std::optional<ConjugateEvent> first_conjugate;
    double cumulative_at_detection = 0.0;  // at the earliest of the two events, else at horizon
};

ConjugateReport conjugate_report(const LiftedMap& map, Point p, long horizon, double tol = kDefaultVerticalTol);

/// Conjugate time from the discrete Jacobi equation along the configuration
/// orbit x_n = p1(F^n p):
///     d12h(x_{n-1},x_n) xi_{n-1} + [d11h(x_n,x_{n+1}) + d22h(x_{n-1},x_n)] xi_n
///         + d12h(x_n,x_{n+1}) xi_{n+1} = 0,
/// with xi_0 = 0 and xi_1 = d(p1 o F)/dy (p). Returns the first n >= 2 where xi
/// changes sign or vanishes (relative to the tangent vector norm, below tol).
/// Throws NoGeneratingFunction for families without h.
std::optional<long> jacobi_conjugate_oracle(const LiftedMap& map, Point p, long horizon,
                                            double tol = kDefaultVerticalTol);

struct LinkingResult {
    double value = 0.0;
    bool near_half_turn = false;  // some per-step class within 1e-6 of 1/2
};

/// Finite-time linking number of p and q: the winding of F^i(q) - F^i(p),
/// per-step representative in (-1/2, 1/2], divided by n. Diagnostic only.
LinkingResult linking_number(const LiftedMap& map, Point p, Point q, long n);

}  // namespace twistlab
