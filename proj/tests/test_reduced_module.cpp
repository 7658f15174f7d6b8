#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qcmod/reduced_module.hpp"

using namespace qcmod;

TEST_CASE("robin solve: disc closed forms") {
    SUBCASE("centered disc: ln R to 1e-6") {
        const auto res = reduced_module(JordanCurve::circle({0, 0}, 0.7, 256), {0, 0});
        CHECK(std::abs(res.value - std::log(0.7)) < 1e-6);
        CHECK(res.method == ReducedModuleMethod::robin_solve);
    }
    SUBCASE("translation invariance to 1e-10") {
        const auto base = reduced_module(JordanCurve::circle({0, 0}, 0.7, 256), {0, 0});
        const auto moved = reduced_module(JordanCurve::circle({5, 5}, 0.7, 256), {5, 5});
        CHECK(std::abs(base.value - moved.value) < 1e-10);
    }
    SUBCASE("off-center evaluation point: ln((R^2 - d^2)/R)") {
        const double R = 1.3;
        const Complex w0(0.2, 0.1);
        const auto res = reduced_module(JordanCurve::circle({0, 0}, R, 256), w0);
        CHECK(std::abs(res.value - std::log((R * R - std::norm(w0)) / R)) < 1e-6);
    }
    SUBCASE("scaling law m(s Omega, s w0) = m + ln s on random scales") {
        std::mt19937_64 rng(424242);
        std::uniform_real_distribution<double> S(0.5, 2.0);
        const auto base = reduced_module(JordanCurve::circle({0.3, -0.1}, 0.9, 256), {0.5, 0.0});
        for (int t = 0; t < 8; ++t) {
            const double s = S(rng);
            const auto scaled = reduced_module(
                JordanCurve::circle({s * 0.3, s * -0.1}, s * 0.9, 256), {s * 0.5, 0.0});
            CHECK(std::abs(scaled.value - base.value - std::log(s)) < 1e-4);
        }
    }
}

TEST_CASE("robin solve: domain validation") {
    const JordanCurve circle = JordanCurve::circle({0, 0}, 1.0, 64);
    CHECK_THROWS_AS(reduced_module(circle, {2.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(reduced_module(circle, {1.0, 0.0}), std::domain_error);
}

TEST_CASE("monotonicity under domain inclusion") {
    // nested discs
    const double m_small = reduced_module(JordanCurve::circle({0, 0}, 0.5, 128), {0, 0}).value;
    const double m_big = reduced_module(JordanCurve::circle({0, 0}, 0.9, 128), {0, 0}).value;
    CHECK(m_small < m_big);
    // nested ellipses, off-center evaluation
    const Complex w0(0.1, 0.05);
    const double e_small =
        reduced_module(JordanCurve::ellipse({0, 0}, 0.7, 0.4, 256), w0).value;
    const double e_big =
        reduced_module(JordanCurve::ellipse({0, 0}, 1.0, 0.6, 256), w0).value;
    CHECK(e_small < e_big);
}

TEST_CASE("robin solve vs punctured-module extrapolation on the domain battery") {
    const QcSolution sol = solve_extended(BeltramiField::power(0.3, 2.0),
                                          CartesianGrid(2.0, 256));
    const JordanCurve qc_disc = image_disc_boundary(sol, {1, 0}, 0.3);

    struct Entry {
        JordanCurve curve;
        Complex w0;
    };
    const std::vector<Entry> battery = {
        {JordanCurve::circle({0, 0}, 0.7, 256), {0, 0}},
        {JordanCurve::circle({0, 0}, 1.3, 256), {0.2, 0.1}},
        {JordanCurve::circle({2, 1}, 0.8, 256), {2, 1}},
        {JordanCurve::ellipse({0, 0}, 1.0, 0.6, 256), {0, 0}},
        {qc_disc, sol.trace().value(0.0)},
    };
    for (const auto& e : battery) {
        const auto robin = reduced_module(e.curve, e.w0);
        const auto extrap = reduced_module_extrapolated(e.curve, e.w0);
        CHECK(extrap.method == ReducedModuleMethod::extrapolation);
        CHECK(std::abs(robin.value - extrap.value) < 1e-2);
    }
}

TEST_CASE("module defect") {
    SUBCASE("zero field: the round module makes the sum ln r for every rho") {
        const auto d = module_defect(BeltramiField::zero(), {1, 0}, 0.5,
                                     {0.25, 0.125, 0.0625});
        CHECK(std::abs(d.value - std::log(0.5)) < 1e-5);
        for (double v : d.sequence) CHECK(std::abs(v - std::log(0.5)) < 1e-5);
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(module_defect(BeltramiField::zero(), {0.5, 0}, 0.5, {0.25, 0.12, 0.06}),
                        std::invalid_argument);
        CHECK_THROWS_AS(module_defect(BeltramiField::zero(), {1, 0}, 0.5, {0.25, 0.12}),
                        std::invalid_argument);
        CHECK_THROWS_AS(module_defect(BeltramiField::zero(), {1, 0}, 0.5, {0.7, 0.3, 0.1}),
                        std::invalid_argument);
    }
    SUBCASE("radial stretch: defect differs from the image reduced module by an "
            "r-independent local shape constant") {
        // The map is piecewise affine at the circle (radial slope K inside,
        // identity outside), so the limit picks up the logarithmic capacity of
        // that piecewise image of the unit disc rather than ln|f'| = 0.
        const BeltramiField f = BeltramiField::radial_stretch(1.0 / 3.0);
        const QcSolution sol = solve_extended(f, CartesianGrid(2.0, 256));
        double constants[2];
        int idx = 0;
        for (double r : {0.25, 0.15}) {
            const auto defect =
                module_defect(f, {1, 0}, r, {r / 2, r / 4, r / 8});
            const auto m = reduced_module(image_disc_boundary(sol, {1, 0}, r),
                                          sol.trace().value(0.0));
            constants[idx++] = m.value - defect.value;
        }
        CHECK(std::abs(constants[0] - constants[1]) < 0.02);
        CHECK(std::exp(constants[0]) > 1.05);  // strictly between 1 and K
        CHECK(std::exp(constants[0]) < 2.0);
    }
}

TEST_CASE("continuity probe") {
    SUBCASE("zero field: constant function ln r") {
        const QcSolution sol = solve_extended(BeltramiField::zero(), CartesianGrid(2.0, 128));
        const auto samples = continuity_probe(sol, {0.0, 1.0, 2.5, 4.0}, 0.3);
        for (const auto& [theta, m] : samples) CHECK(std::abs(m - std::log(0.3)) < 2e-3);
    }
    SUBCASE("radial stretch: matches values from the closed-form image curve") {
        const double K = 2.0;
        const QcSolution sol =
            solve_extended(BeltramiField::radial_stretch(1.0 / 3.0), CartesianGrid(2.0, 256));
        const double r = 0.25;
        const auto samples = continuity_probe(sol, {0.0, kPi / 3}, r);
        for (const auto& [theta, m] : samples) {
            const Complex zeta = std::polar(1.0, theta);
            std::vector<Complex> pts(512);
            for (int k = 0; k < 512; ++k) {
                const Complex z = zeta + std::polar(r, kTwoPi * k / 512);
                const double rr = std::abs(z);
                pts[k] = rr <= 1.0 ? z * std::pow(rr, K - 1.0) : z;
            }
            const double oracle =
                reduced_module(JordanCurve(pts).resample_arclength(256), zeta).value;
            CHECK(std::abs(m - oracle) < 1e-2);
        }
    }
}
