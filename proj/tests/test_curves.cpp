#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "twistlab/curves.hpp"
#include "twistlab/error.hpp"
#include "twistlab/torsion.hpp"

using namespace twistlab;

namespace {

std::vector<Rational> rationals(std::initializer_list<const char*> texts)
{
    std::vector<Rational> out;
    for (const char* t : texts) {
        out.push_back(parse_rational(t));
    }
    return out;
}

}  // namespace

TEST_CASE("psi1 and psi_minus1 examples")
{
    for (double x : {-0.7, 0.0, 0.25, 0.9}) {
        CHECK(std::abs(psi1(LiftedMap::shear(), x)) < 1e-10);
        CHECK(std::abs(psi1(LiftedMap::drift_shear(0.25), x)) < 1e-10);
        CHECK(std::abs(psi_minus1(LiftedMap::shear(), x)) < 1e-10);
        CHECK(std::abs(psi_minus1(LiftedMap::drift_shear(0.25), x) - 0.25) < 1e-10);
        CHECK(std::abs(psi_minus1(LiftedMap::standard(1.0), x)) < 1e-10);
    }
    const double y = psi1(LiftedMap::standard(1.0), 0.25);
    CHECK(std::abs(y - 1.0 / oracle::kTwoPi) < 1e-10);
    CHECK(std::abs(LiftedMap::standard(1.0).eval({0.25, y}).x - 0.25) < 1e-10);
    CHECK_THROWS_AS(psi1(LiftedMap::shear().inverted(), 0.0), TwistViolation);
}

TEST_CASE("psi1 root certificate on every family")
{
    for (const auto& map : {LiftedMap::shear(), LiftedMap::drift_shear(0.25), LiftedMap::standard(0.0),
                            LiftedMap::standard(1.0), LiftedMap::standard(3.0),
                            LiftedMap::generating_function({0.05, -0.02})}) {
        const auto c = psi1_curve(map, 64);
        REQUIRE(c.size() == 64);
        for (std::size_t i = 0; i < c.size(); ++i) {
            CHECK(std::abs(map.eval({c.xs[i], c.ys[i]}).x - c.xs[i]) < 1e-10);
        }
        CHECK(c.max_residual() < 1e-10);
        CHECK(std::isfinite(c.lipschitz()));
    }
}

TEST_CASE("flux")
{
    CHECK(std::abs(flux(LiftedMap::shear(), 256)) < 1e-12);
    CHECK(std::abs(flux(LiftedMap::drift_shear(0.25), 256) - 0.25) < 1e-12);
    CHECK(std::abs(flux(LiftedMap::standard(1.0), 256)) < 1e-10);
    CHECK(std::abs(flux(LiftedMap::generating_function({0.03, 0.01}), 128)) < 1e-10);
    CHECK_THROWS_AS(flux(LiftedMap::shear(), 1), InvalidArgument);
}

TEST_CASE("rotation_number")
{
    for (long n : {1L, 7L, 1000L}) {
        CHECK(rotation_number(LiftedMap::shear(), {0.0, 0.375}, n).value == 0.375);
        CHECK(rotation_number(LiftedMap::standard(1.0), {0.0, 0.0}, n).value == 0.0);
        CHECK(rotation_number(LiftedMap::standard(1.0), {0.5, 0.0}, n).value == 0.0);
    }
    CHECK(rotation_number(LiftedMap::shear(), {0.0, 0.375}, 9).horizon == 9);
    CHECK_THROWS_AS(rotation_number(LiftedMap::shear(), {0, 0}, 0), InvalidArgument);
}

TEST_CASE("periodic_curve examples")
{
    const auto third = periodic_curve(LiftedMap::shear(), 1, 3, 32);
    CHECK(third.label_text() == "PsiRho(1/3)");
    CHECK(third.fixed_ok);
    for (std::size_t i = 0; i < third.size(); ++i) {
        CHECK(std::abs(third.ys[i] - 1.0 / 3.0) < 1e-10);
    }
    CHECK(third.max_fixed_residual() < 1e-10);

    const auto zero = periodic_curve(LiftedMap::shear(), 0, 1, 16);
    for (double y : zero.ys) {
        CHECK(std::abs(y) < 1e-10);
    }

    const auto drift = periodic_curve(LiftedMap::drift_shear(0.25), 0, 1, 16);
    CHECK_FALSE(drift.fixed_ok);
    for (std::size_t i = 0; i < drift.size(); ++i) {
        CHECK(std::abs(drift.ys[i]) < 1e-10);
        CHECK(std::abs(drift.fixed_residuals[i] - 0.25) < 1e-10);
    }

    CHECK_THROWS_AS(periodic_curve(LiftedMap::shear(), 2, 4, 8), InvalidArgument);
    CHECK_THROWS_AS(periodic_curve(LiftedMap::shear(), 1, 0, 8), InvalidArgument);
}

TEST_CASE("parse_rational")
{
    CHECK(parse_rational("1/3") == Rational{1, 3});
    CHECK(parse_rational("-1/2") == Rational{-1, 2});
    CHECK(parse_rational("2/-4") == Rational{-1, 2});
    CHECK(parse_rational("1") == Rational{1, 1});
    CHECK_THROWS_AS(parse_rational("1/0"), InvalidArgument);
    CHECK_THROWS_AS(parse_rational("a/b"), InvalidArgument);
}

TEST_CASE("psi_family examples")
{
    for (const auto& map : {LiftedMap::shear(), LiftedMap::standard(0.0)}) {
        const auto fam = psi_family(map, rationals({"0/1", "1/3", "1/2", "1/1"}), 32);
        REQUIRE(fam.entries.size() == 4);
        const double want[] = {0.0, 1.0 / 3.0, 0.5, 1.0};
        for (std::size_t j = 0; j < 4; ++j) {
            for (double y : fam.entries[j].curve.ys) {
                CHECK(std::abs(y - want[j]) < 1e-10);
            }
        }
        CHECK(fam.monotone_ok);
        CHECK(fam.all_fixed());
        CHECK(fam.ordering_violations.empty());
    }

    // Near the island of k = 1 the curve is only a rotation section, not fixed.
    bool rejected = false;
    try {
        const auto fam = psi_family(LiftedMap::standard(1.0), rationals({"0/1"}), 64);
        rejected = !fam.all_fixed();
    } catch (const NonMonotoneBracket&) {
        rejected = true;
    }
    CHECK(rejected);

    CHECK_THROWS_AS(psi_family(LiftedMap::shear(), rationals({"1/2", "0/1"}), 8), InvalidArgument);
    CHECK_THROWS_AS(psi_family(LiftedMap::shear(), rationals({"1/2", "2/4"}), 8), InvalidArgument);
}

TEST_CASE("family ordering on the shear")
{
    const auto fam = psi_family(LiftedMap::shear(), rationals({"-1", "-1/2", "0", "1/2", "1"}), 64);
    CHECK(fam.monotone_ok);
    for (std::size_t j = 1; j < fam.entries.size(); ++j) {
        for (std::size_t i = 0; i < 64; ++i) {
            CHECK(fam.entries[j - 1].curve.ys[i] < fam.entries[j].curve.ys[i]);
        }
    }
}

TEST_CASE("image identity for exact maps without conjugate points")
{
    for (const auto& map : {LiftedMap::shear(), LiftedMap::standard(0.0)}) {
        const auto lo = psi1_curve(map, 256);
        const auto hi = psi_minus1_curve(map, 256);
        for (std::size_t i = 0; i < lo.size(); ++i) {
            CHECK(hi.ys[i] == map.eval({lo.xs[i], lo.ys[i]}).y);
            CHECK(std::abs(hi.ys[i] - lo.ys[i]) < 1e-9);
        }
    }
}

TEST_CASE("regions X- of the drift shear wander")
{
    const auto map = LiftedMap::drift_shear(0.25);
    const auto minus = region_x(map, RegionSign::Minus, 64);
    CHECK(minus.contains({0.3, 0.1}));
    CHECK_FALSE(minus.contains({0.3, 0.3}));
    CHECK_FALSE(minus.empty_at(0.4));
    const auto plus = region_x(map, RegionSign::Plus, 64);
    CHECK(plus.empty_at(0.4));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::uniform_real_distribution<double> uy(0.001, 0.249);
    for (int s = 0; s < 1000; ++s) {
        const Point z{ux(rng), uy(rng)};
        REQUIRE(minus.contains(z));
        for (long i = 0; i <= 5; ++i) {
            const Point zi = iterate_to(map, z, i);
            for (long j = 0; j <= 5; ++j) {
                if (j != i) {
                    // zi in F^j(X-) iff F^{-j}(zi) in X-.
                    CHECK_FALSE(minus.contains(iterate_to(map, zi, -j)));
                }
            }
        }
    }
}

TEST_CASE("iterates of integrable twist maps stay twist")
{
    for (const auto& map : {LiftedMap::shear(), LiftedMap::standard(0.0)}) {
        for (long q = 1; q <= 10; ++q) {
            for (double x : {-0.3, 0.0, 0.45}) {
                double prev = -INFINITY;
                for (int i = 0; i <= 200; ++i) {
                    const double y = -2.0 + 0.02 * i;
                    const double p1 = iterate_to(map, {x, y}, q).x;
                    CHECK(p1 > prev);
                    prev = p1;
                }
            }
        }
    }
}

TEST_CASE("classify_monotonicity")
{
    CHECK(classify_monotonicity(LiftedMap::shear(), {0.0, 0.375}, 50) == Monotonicity::Monotone);
    CHECK(classify_monotonicity(LiftedMap::drift_shear(0.25), {0.3, 0.1}, 50) == Monotonicity::SwitchInterior);
    CHECK(classify_monotonicity(LiftedMap::drift_shear(0.25), {0.3, 0.0}, 50) == Monotonicity::SwitchTouching);
    CHECK(classify_monotonicity(LiftedMap::standard(1.0), {0.5, 0.0}, 50) == Monotonicity::Fixed);
    // Inside the island orbits are over-conjugate quickly.
    CHECK(classify_monotonicity(LiftedMap::standard(1.0), {0.02, 0.0}, 50) == Monotonicity::Undetermined);
    CHECK(to_string(Monotonicity::SwitchTouching) == "switch_touching");
}

TEST_CASE("integrability_probe")
{
    ProbeConfig cfg;
    cfg.grid_x = 8;
    cfg.grid_y = 8;
    cfg.horizon = 2000;
    cfg.rationals = rationals({"-1", "-1/2", "0", "1/3", "1"});
    cfg.curve_resolution = 32;
    const auto integ = integrability_probe(LiftedMap::standard(0.0), cfg);
    CHECK(integ.verdict == ProbeVerdict::NoObstructionFound);
    REQUIRE(integ.family);
    CHECK(integ.family->monotone_ok);
    CHECK(integ.family->max_residual() < 1e-8);
    CHECK(integ.family->all_fixed());
    CHECK_FALSE(integ.witness);

    ProbeConfig island;
    island.horizon = 100;
    const auto found = integrability_probe(LiftedMap::standard(1.5), island);
    CHECK(found.verdict == ProbeVerdict::ConjugatePointsFound);
    REQUIRE(found.witness);
    CHECK(found.witness_time <= 10);
    CHECK(norm(*found.witness) < 0.1);
    CHECK_FALSE(found.family);

    const auto drift = integrability_probe(LiftedMap::drift_shear(0.25), island);
    CHECK(drift.verdict == ProbeVerdict::NotApplicable);
    CHECK(std::abs(drift.flux - 0.25) < 1e-12);
    CHECK(to_string(drift.verdict) == "NOT_APPLICABLE");
}

TEST_CASE("curves_to_csv")
{
    const auto c = psi1_curve(LiftedMap::shear(), 4);
    const std::string csv = curves_to_csv({c}, "shear");
    CHECK(csv.find("# map=shear\n") != std::string::npos);
    CHECK(csv.find("\nx,y,residual,label\n") != std::string::npos);
    CHECK(csv.find("0.25,0,0,Psi1\n") != std::string::npos);
}
