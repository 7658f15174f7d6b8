#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "qcmod/beltrami_field.hpp"
#include "qcmod/quadrature.hpp"

using namespace qcmod;

namespace {

// Wirtinger-quotient oracle: numerically differentiate a map and form
// (d/dzbar F) / (d/dz F) by central differences.
Complex numeric_mu(const std::function<Complex(Complex)>& F, Complex z, double h = 1e-6) {
    const Complex fx = (F(z + h) - F(z - h)) / (2.0 * h);
    const Complex fy = (F(z + Complex(0, h)) - F(z - Complex(0, h))) / (2.0 * h);
    const Complex dz = 0.5 * (fx - Complex(0, 1) * fy);
    const Complex dzbar = 0.5 * (fx + Complex(0, 1) * fy);
    return dzbar / dz;
}

Complex radial_stretch_map(Complex z, double K) {
    const double r = std::abs(z);
    if (r == 0.0) return {0, 0};
    return r >= 1.0 ? z : z * std::pow(r, K - 1.0);
}

}  // namespace

TEST_CASE("field evaluation: closed forms and support") {
    const BeltramiField zero = BeltramiField::zero();
    CHECK(std::abs(zero(Complex(0.3, 0.2))) == 0.0);

    SUBCASE("radial stretch coefficient matches the Wirtinger quotient of z |z|^{K-1}") {
        const double k = 1.0 / 3.0, K = (1 + k) / (1 - k);
        const BeltramiField f = BeltramiField::radial_stretch(k);
        CHECK(std::abs(f(Complex(0.5, 0.0)) - Complex(k, 0.0)) < 1e-14);
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> R(0.15, 0.85), T(0, kTwoPi);
        for (int i = 0; i < 32; ++i) {
            const Complex z = std::polar(R(rng), T(rng));
            const Complex oracle =
                numeric_mu([&](Complex w) { return radial_stretch_map(w, K); }, z);
            CHECK(std::abs(f(z) - oracle) < 1e-7);
        }
    }

    SUBCASE("power field vanishes on the circle and outside") {
        const BeltramiField f = BeltramiField::power(0.3, 2.0);
        CHECK(std::abs(f(std::polar(1.0, 0.7))) == 0.0);
        CHECK(std::abs(f(Complex(1.2, 0.3))) == 0.0);
        CHECK(std::abs(f(Complex(0, 0))) == doctest::Approx(0.3).epsilon(1e-14));
    }

    SUBCASE("sup bound is respected everywhere") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        for (const BeltramiField& f :
             {BeltramiField::power(0.5, 3.0), BeltramiField::radial_stretch(0.4),
              BeltramiField::radial_stretch_ring(0.3, 0.5), BeltramiField::angular_stretch(1.5),
              BeltramiField::constant(Complex(0.1, 0.15))}) {
            for (int i = 0; i < 500; ++i) {
                const Complex z(U(rng), U(rng));
                CHECK(std::abs(f(z)) <= f.sup_bound() + 1e-14);
            }
        }
    }

    CHECK_THROWS_AS(BeltramiField::constant(Complex(1.0, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(BeltramiField::radial_stretch(1.0), std::invalid_argument);
}

TEST_CASE("p-norm: closed forms for the power family") {
    // integral of c (1-r^2)^alpha against dsigma = c pi / (alpha - 1) at p = 1
    struct Case { double c, alpha; };
    for (const Case t : {Case{0.3, 2.0}, Case{0.2, 1.5}, Case{0.5, 3.0}}) {
        const PNormResult res = p_norm(BeltramiField::power(t.c, t.alpha), 1.0);
        REQUIRE(res.converged);
        const double closed = t.c * kPi / (t.alpha - 1.0);
        // substitute r = 1 - s^2 so the endpoint weight (1-r^2)^{alpha-2} is smooth
        const double oracle = kTwoPi * t.c *
                              adaptive_simpson(
                                  [&](double s) {
                                      const double r = 1.0 - s * s;
                                      return 2.0 * std::pow(s, 2.0 * t.alpha - 3.0) *
                                             std::pow(1.0 + r, t.alpha - 2.0) * r;
                                  },
                                  0.0, 1.0, 1e-12);
        CHECK(std::abs(closed - oracle) < 1e-8);  // oracle agrees with the formula
        CHECK(std::abs(res.value - closed) / closed < 1e-4);
    }
}

TEST_CASE("p-norm: zero field and divergent fields") {
    const PNormResult zero = p_norm(BeltramiField::zero(), 1.0);
    CHECK(zero.converged);
    CHECK(zero.value == doctest::Approx(0.0));

    SUBCASE("constant field diverges with shell integrals growing like 2^j") {
        const double c = 0.2;
        const PNormResult res = p_norm(BeltramiField::constant(Complex(c, 0.0)), 1.0);
        CHECK(res.diverged);
        CHECK(std::isinf(res.value));
        // oracle: the exact shell integral is c pi (1/(1-rb^2) - 1/(1-ra^2))
        for (int j = 1; j <= 10; ++j) {
            const double ra = 1.0 - std::ldexp(1.0, -j);
            const double rb = 1.0 - std::ldexp(1.0, -j - 1);
            const double exact = c * kPi * (1.0 / (1.0 - rb * rb) - 1.0 / (1.0 - ra * ra));
            CHECK(std::abs(res.shell_values[j] - exact) / exact < 1e-9);
        }
    }

    SUBCASE("radial stretch (constant modulus) diverges") {
        CHECK(p_norm(BeltramiField::radial_stretch(1.0 / 3.0), 1.0).diverged);
    }

    CHECK_THROWS_AS(p_norm(BeltramiField::zero(), 0.0), std::invalid_argument);
}

TEST_CASE("p-norm: monotonicity in p and homogeneity in the amplitude") {
    const BeltramiField f = BeltramiField::power(0.3, 2.0);
    const PNormResult n1 = p_norm(f, 1.0);
    const PNormResult n2 = p_norm(f, 2.0);
    REQUIRE(n1.converged);
    REQUIRE(n2.converged);  // |mu|^q <= |mu|^p for q > p, |mu| <= 1
    CHECK(n2.value <= n1.value + 1e-12);
    CHECK(n2.value == doctest::Approx(0.09 * kPi / 3.0).epsilon(1e-4));

    for (double p : {1.0, 2.0}) {
        const double s = 0.5;
        const PNormResult base = p_norm(BeltramiField::power(0.3, 2.0), p);
        const PNormResult scaled = p_norm(BeltramiField::power(s * 0.3, 2.0), p);
        CHECK(scaled.value ==
              doctest::Approx(std::pow(s, p) * base.value).epsilon(5e-4));
    }
}

TEST_CASE("twb integral: zero, finite, divergent") {
    CHECK(twb_integral(BeltramiField::zero(), Complex(1, 0), 0.5).value ==
          doctest::Approx(0.0));

    SUBCASE("power fields: finite, bounded by four times the restricted 1-norm") {
        for (const BeltramiField& g :
             {BeltramiField::power(0.5, 3.0), BeltramiField::power(0.2, 1.5)}) {
            const PNormResult tw = twb_integral(g, Complex(0, 1), 0.4);
            const PNormResult rn = p_norm_near_boundary_point(g, 1.0, Complex(0, 1), 0.4);
            REQUIRE(tw.converged);
            REQUIRE(rn.converged);
            CHECK(tw.value <= 4.0 * rn.value + 1e-6);
        }
        const BeltramiField f = BeltramiField::power(0.3, 2.0);
        const PNormResult twb = twb_integral(f, Complex(1, 0), 0.5);
        REQUIRE(twb.converged);
        const PNormResult restricted = p_norm_near_boundary_point(f, 1.0, Complex(1, 0), 0.5);
        REQUIRE(restricted.converged);
        CHECK(twb.value <= 4.0 * restricted.value + 1e-6);

        // independent oracle: Cartesian midpoint grid over the cap; the integrand
        // |mu|/|z-1|^2 is bounded there because |mu| vanishes quadratically
        const int n = 1200;
        const double h = 1.5 / n;
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Complex z(0.5 + (i + 0.5) * h - 0.0, -0.75 + (j + 0.5) * h);
                if (std::abs(z - Complex(1, 0)) >= 0.5 || std::abs(z) >= 1.0) continue;
                sum += std::abs(f(z)) / std::norm(z - Complex(1, 0)) * h * h;
            }
        CHECK(std::abs(twb.value - sum) / sum < 2e-2);
    }

    SUBCASE("constant field diverges at the boundary point") {
        CHECK(twb_integral(BeltramiField::constant(Complex(0.2, 0.0)), Complex(1, 0), 0.5)
                  .diverged);
    }

    CHECK_THROWS_AS(twb_integral(BeltramiField::zero(), Complex(0.5, 0), 0.5),
                    std::invalid_argument);
}

TEST_CASE("pointwise kernel bound") {
    CHECK(boundary_kernel_bound_holds(Complex(0, 0), Complex(1, 0)));   // 1 < 4
    CHECK(boundary_kernel_bound_holds(Complex(0.9, 0), Complex(1, 0)));  // 100 < 110.8
    CHECK(boundary_kernel_bound_holds(Complex(-0.9, 0), Complex(1, 0)));
    std::mt19937_64 rng(2718281);
    std::uniform_real_distribution<double> R(0.0, 1.0), T(0.0, kTwoPi);
    for (int i = 0; i < 100'000; ++i) {
        const Complex z = std::polar(std::sqrt(R(rng)), T(rng));
        const Complex zeta0 = std::polar(1.0, T(rng));
        if (std::abs(z) >= 1.0) continue;
        CHECK(boundary_kernel_bound_holds(z, zeta0));
    }
}

TEST_CASE("membership classification") {
    CHECK(classify_tp(BeltramiField::power(0.3, 2.0), 1.0) == TpVerdict::in_tp);
    CHECK(classify_tp(BeltramiField::power(0.3, 0.5), 1.0) == TpVerdict::not_in_tp);
    CHECK(classify_tp(BeltramiField::radial_stretch(1.0 / 3.0), 1.0) == TpVerdict::not_in_tp);
    // decay 2^{-0.01 j}: neither Cauchy within the budget nor non-decreasing
    CHECK(classify_tp(BeltramiField::power(0.3, 1.01), 1.0) == TpVerdict::inconclusive);
}

TEST_CASE("grid fields: csv load, interpolation, rejection") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path();

    SUBCASE("valid grid loads and interpolates") {
        const auto path = dir / "qcmod_mu_ok.csv";
        std::ofstream out(path);
        out << "nx=21,ny=21\nx,y,re_mu,im_mu\n";
        for (int i = 0; i <= 20; ++i)
            for (int j = 0; j <= 20; ++j) {
                const double x = -1.0 + 0.1 * i, y = -1.0 + 0.1 * j;
                const Complex mu = 0.2 * Complex(x, y);  // |mu| <= 0.2 sqrt2 < 1
                out << x << ',' << y << ',' << mu.real() << ',' << mu.imag() << '\n';
            }
        out.close();
        const BeltramiField f = BeltramiField::from_grid_csv(path.string());
        CHECK(f.family() == MuFamily::grid);
        CHECK(std::abs(f(Complex(0.5, 0.5)) - 0.2 * Complex(0.5, 0.5)) < 1e-12);
        CHECK(std::abs(f(Complex(1.4, 0.0))) == 0.0);  // outside the unit disc
        fs::remove(path);
    }

    SUBCASE("|mu| >= 1 rejected at load") {
        const auto path = dir / "qcmod_mu_bad.csv";
        std::ofstream out(path);
        out << "nx=2,ny=2\n";
        out << "0,0,0.0,0.0\n0,1,0.0,0.0\n1,0,0.0,0.0\n1,1,1.0,0.0\n";
        out.close();
        CHECK_THROWS_AS(BeltramiField::from_grid_csv(path.string()), std::invalid_argument);
        fs::remove(path);
    }

    SUBCASE("missing dimension header rejected") {
        const auto path = dir / "qcmod_mu_nohdr.csv";
        std::ofstream out(path);
        out << "0,0,0.0,0.0\n";
        out.close();
        CHECK_THROWS_AS(BeltramiField::from_grid_csv(path.string()), std::invalid_argument);
        fs::remove(path);
    }
}
