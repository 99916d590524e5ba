#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "grushin/geometry.hpp"
#include "grushin/quad2d.hpp"

using namespace grushin;

namespace {

std::vector<GrushinParams> test_triples() {
    std::vector<GrushinParams> out;
    for (auto [m, k] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {3, 2}})
        for (double a : {0.5, 1.0, 2.0}) out.push_back(GrushinParams::make(m, k, a));
    return out;
}

CylPoint random_point(std::mt19937_64& rng, double lo = 0.05, double hi = 8.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    return {d(rng), d(rng)};
}

} // namespace

TEST_CASE("gauge closed-form spot values") {
    CHECK(gauge(GrushinParams::make(2, 1, 1.0), {1.0, 0.0}) == Catch::Approx(1.0));
    CHECK(gauge(GrushinParams::make(2, 1, 1.0), {0.0, 1.0}) == Catch::Approx(2.0));
    CHECK(gauge(GrushinParams::make(2, 1, 0.0), {3.0, 2.0}) == Catch::Approx(5.0));
    CHECK(gauge(GrushinParams::make(2, 1, 1.0), {0.0, 0.0}) == 0.0);
}

TEST_CASE("psi spot values and range") {
    const GrushinParams g1 = GrushinParams::make(2, 1, 1.0);
    CHECK(psi(g1, {1.0, std::sqrt(15.0) / 4.0}) == Catch::Approx(0.25).epsilon(1e-12));
    CHECK(psi(GrushinParams::make(2, 1, 2.0), {0.0, 1.0}) == 0.0);
    CHECK(psi(GrushinParams::make(2, 1, 2.0), {5.0, 0.0}) == Catch::Approx(1.0));
    CHECK_THROWS_AS(psi(g1, {0.0, 0.0}), DomainError);

    std::mt19937_64 rng(3);
    for (const auto& gp : test_triples())
        for (int i = 0; i < 100; ++i) {
            const double v = psi(gp, random_point(rng));
            CHECK(v >= 0.0);
            CHECK(v <= 1.0 + 1e-15);
        }
}

TEST_CASE("dilate basics and gauge covariance") {
    const GrushinParams g1 = GrushinParams::make(2, 1, 1.0);
    const CylPoint q = dilate(g1, 2.0, {1.0, 1.0});
    CHECK(q.r == Catch::Approx(2.0));
    CHECK(q.s == Catch::Approx(4.0));
    CHECK_THROWS_AS(dilate(g1, 0.0, {1.0, 1.0}), ArgumentError);
    CHECK_THROWS_AS(dilate(g1, -1.0, {1.0, 1.0}), ArgumentError);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> lam(0.1, 10.0);
    for (const auto& gp : test_triples()) {
        for (int i = 0; i < 120; ++i) { // ~1000 (lambda, p) pairs over 9 triples
            const CylPoint p = random_point(rng);
            const double l = lam(rng);
            const double lhs = gauge(gp, dilate(gp, l, p));
            const double rhs = l * gauge(gp, p);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
        }
    }
}

TEST_CASE("gauge-polar coordinates invert each other") {
    const GrushinParams g1 = GrushinParams::make(2, 1, 1.0);
    const CylPoint top = from_gauge_coords(g1, {2.0, M_PI_2});
    CHECK(top.r == Catch::Approx(0.0).margin(1e-15));
    CHECK(top.s == Catch::Approx(1.0));
    const CylPoint side = from_gauge_coords(g1, {3.0, 0.0});
    CHECK(side.r == Catch::Approx(3.0));
    CHECK(side.s == 0.0);
    CHECK_THROWS_AS(from_gauge_coords(g1, {0.0, 0.3}), ArgumentError);
    CHECK_THROWS_AS(to_gauge_coords(g1, {0.0, 0.0}), DomainError);

    std::mt19937_64 rng(23);
    for (const auto& gp : test_triples()) {
        for (int i = 0; i < 1200; ++i) { // >= 1e4 round trips over the triples
            const CylPoint p = random_point(rng, 0.1, 5.0);
            const GaugeCoords c = to_gauge_coords(gp, p);
            const CylPoint q = from_gauge_coords(gp, c);
            CHECK(std::abs(p.r - q.r) <= 1e-12);
            CHECK(std::abs(p.s - q.s) <= 1e-12 * (1.0 + p.s));
            CHECK(std::abs(gauge(gp, q) - c.t) <= 1e-12 * c.t);
        }
        // far outside the working range the angle ulp amplifies like
        // beta r tan(phi); keep a coarse absolute bound there
        for (int i = 0; i < 200; ++i) {
            const CylPoint p = random_point(rng, 1e-3, 20.0);
            const CylPoint q = from_gauge_coords(gp, to_gauge_coords(gp, p));
            CHECK(std::abs(p.r - q.r) <= 1e-8);
            CHECK(std::abs(p.s - q.s) <= 1e-8 * (1.0 + p.s));
        }
    }
}

TEST_CASE("eikonal identity |grad_alpha rho|^2 = psi") {
    std::mt19937_64 rng(29);
    for (const auto& gp : test_triples()) {
        for (int i = 0; i < 1200; ++i) {
            const CylPoint p = random_point(rng, 1e-2, 10.0);
            const Jet2 j = gauge_jet(gp, p);
            const double r2a4 = 0.25 * std::pow(p.r, 2.0 * gp.alpha);
            const double lhs = j.dr * j.dr + r2a4 * j.ds * j.ds;
            CHECK(std::abs(lhs - psi(gp, p)) <= 1e-10);
        }
    }
}

TEST_CASE("sphere rule: weights positive, unit normalisation via 2-d oracle") {
    // alpha = 0, m = 2, k = 1: the unit gauge ball {r^2 + 4 s^2 < 1} is an
    // ellipsoid of volume 2 pi / 3, so the unit-sphere mass is Q V1 = 2 pi.
    const GrushinParams g0 = GrushinParams::make(2, 1, 0.0);
    const double v1 = unit_ball_volume(g0);
    CHECK(v1 == Catch::Approx(2.0 * M_PI / 3.0).epsilon(1e-9));
    const SphereRule rule = sphere_rule(g0, 1.0, 64);
    const double mass = rule.integrate([](double) { return 1.0; });
    CHECK(mass == Catch::Approx(2.0 * M_PI).epsilon(1e-10));

    CHECK_THROWS_AS(sphere_rule(g0, -1.0, 64), ArgumentError);
    CHECK_THROWS_AS(sphere_rule(g0, 1.0, 3), ArgumentError);

    for (const auto& gp : test_triples()) {
        const SphereRule r = sphere_rule(gp, 1.7, 80);
        for (double w : r.weights) CHECK(w > 0.0);
        const double m17 = r.integrate([](double) { return 1.0; });
        const double expected = gp.q * unit_ball_volume(gp) * std::pow(1.7, gp.q - 1.0);
        CHECK(std::abs(m17 - expected) <= 1e-6 * expected);
    }
}

TEST_CASE("sphere mass scales exactly like t^{Q-1}") {
    for (const auto& gp : test_triples()) {
        const double a = sphere_rule(gp, 0.5, 72).integrate([](double) { return 1.0; });
        const double b = sphere_rule(gp, 5.0, 72).integrate([](double) { return 1.0; });
        const double ra = a / std::pow(0.5, gp.q - 1.0);
        const double rb = b / std::pow(5.0, gp.q - 1.0);
        CHECK(std::abs(ra - rb) <= 1e-8 * std::abs(rb));
    }
}

TEST_CASE("sphere integral of psi matches thin-shell 2-d oracle") {
    const GrushinParams g1 = GrushinParams::make(2, 1, 1.0);
    const SphereRule rule = sphere_rule(g1, 1.0, 80);
    double got = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const SphereFrame f = sphere_frame(g1, 1.0, rule.nodes[i], rule.cphi[i], rule.sphi[i]);
        got += rule.weights[i] * f.psi;
    }
    const double oracle =
        shell_integral_2d(g1, 1.0, [&](CylPoint p) { return psi(g1, p); });
    CHECK(got == Catch::Approx(oracle).epsilon(2e-6));
    CHECK(got == Catch::Approx(M_PI).epsilon(1e-8)); // closed form of this case
}

TEST_CASE("ring integrals agree with the 2-d oracle") {
    const GrushinParams g0 = GrushinParams::make(2, 1, 0.0);
    const GaugeAnnulus ann(1.0, 2.0);

    const double ones = ring_integral(
        g0, ann, std::function<double(CylPoint)>([](CylPoint) { return 1.0; }), 64, 48);
    CHECK(ones == Catch::Approx(14.0 * M_PI / 3.0).epsilon(1e-9));

    const double zero = ring_integral(
        g0, ann, std::function<double(CylPoint)>([](CylPoint) { return 0.0; }), 16, 16);
    CHECK(zero == 0.0);

    for (const auto& gp : test_triples()) {
        auto h = [&](CylPoint p) { return std::exp(-gauge(gp, p)); };
        const double mine =
            ring_integral(gp, ann, std::function<double(CylPoint)>(h), 96, 64);
        const double oracle = ring_integral_2d(gp, 1.0, 2.0, h, 1e-11);
        CHECK(std::abs(mine - oracle) <= 1e-6 * std::abs(oracle));
    }
}

TEST_CASE("coarea consistency across five integrands") {
    const GrushinParams gp = GrushinParams::make(2, 1, 1.0);
    const GaugeAnnulus ann(0.8, 2.3);
    std::vector<std::function<double(CylPoint)>> integrands = {
        [](CylPoint) { return 1.0; },
        [&](CylPoint p) { return std::exp(-gauge(gp, p)); },
        [&](CylPoint p) { return psi(gp, p); },
        [](CylPoint p) { return std::exp(-(p.r * p.r + p.s * p.s)); },
        [](CylPoint p) { return p.r * p.r + 3.0 * p.s; },
    };
    for (const auto& h : integrands) {
        const double mine = ring_integral(gp, ann, h, 96, 72);
        const double oracle = ring_integral_2d(gp, 0.8, 2.3, h, 1e-11);
        CHECK(std::abs(mine - oracle) <= 1e-6 * std::abs(oracle));
    }
}

TEST_CASE("startup self-checks pass for all triples") {
    for (const auto& gp : test_triples()) CHECK_NOTHROW(run_self_checks(gp));
    CHECK_NOTHROW(run_self_checks(GrushinParams::make(2, 1, 0.0)));
}

TEST_CASE("params validation") {
    CHECK_THROWS_AS(GrushinParams::make(0, 1, 1.0), ArgumentError);
    CHECK_THROWS_AS(GrushinParams::make(1, 0, 1.0), ArgumentError);
    CHECK_THROWS_AS(GrushinParams::make(1, 1, -0.25), ArgumentError);
    const GrushinParams low = GrushinParams::make(1, 1, 0.5); // Q = 2.5
    CHECK_THROWS_AS(low.require_q_at_least(3.0), PreconditionError);
    CHECK(GrushinParams::make(2, 1, 1.0).q == Catch::Approx(4.0));
    CHECK_THROWS_AS(GaugeAnnulus(2.0, 1.0), ArgumentError);
}
