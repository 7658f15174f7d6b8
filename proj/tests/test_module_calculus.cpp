#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qcmod/module_calculus.hpp"
#include "qcmod/quadrature.hpp"

using namespace qcmod;

namespace {

ModuleEstimate solve_mod(const BeltramiField& f, const AnnulusSpec& a, int nr = 64,
                         int nt = 128) {
    return mod_image_annulus(f, a, PolarAnnulusGrid(a, nr, nt));
}

// 1-D reduction for fields with radial |mu| about the annulus center: the map
// with coefficient m(r) e^{2 i theta} sends round circles to round circles, so
// the image module is the log-integral of the distortion ratio.
double radial_profile_module(const std::function<double(double)>& abs_mu, double r_in,
                             double r_out) {
    return adaptive_simpson(
        [&](double s) {
            const double m = abs_mu(std::exp(s));
            return (1.0 + m) / (1.0 - m);
        },
        std::log(r_in), std::log(r_out), 1e-12);
}

}  // namespace

TEST_CASE("distortion tensor: identity at zero, unit determinant") {
    CHECK((distortion_tensor({0, 0}) - Eigen::Matrix2d::Identity()).norm() == 0.0);
    const AnnulusSpec a({0.3, -0.2}, 0.1, 0.8);
    DistortionTensorField T(BeltramiField::power(0.5, 3.0), PolarAnnulusGrid(a, 16, 32));
    CHECK(T.max_det_deviation() < 1e-10);
    DistortionTensorField T2(BeltramiField::angular_stretch(1.5), PolarAnnulusGrid(a, 16, 32));
    CHECK(T2.max_det_deviation() < 1e-10);
}

TEST_CASE("image module: round-annulus and radial-stretch oracles") {
    SUBCASE("zero field reduces to the round-annulus problem") {
        const auto est = solve_mod(BeltramiField::zero(), AnnulusSpec({0, 0}, 0.5, 1.0));
        CHECK(std::abs(est.computed - std::log(2.0)) < 1e-3);
        CHECK(std::abs(est.lower_bound - std::log(2.0)) < 1e-6);
        CHECK(std::abs(est.upper_bound - std::log(2.0)) < 1e-6);
    }

    SUBCASE("radial stretch maps A(0.25, 1) to a round annulus of module K ln 4") {
        // also pins the tensor orientation: the inverted tensor returns ln(4)/K
        const auto est =
            solve_mod(BeltramiField::radial_stretch(1.0 / 3.0), AnnulusSpec({0, 0}, 0.25, 1.0));
        CHECK(std::abs(est.computed - 2.0 * std::log(4.0)) / (2.0 * std::log(4.0)) < 0.01);
    }

    SUBCASE("ring stretch with the jump mid-annulus: piecewise closed form") {
        // image radii: 0.5 rho^K at the inner edge (K = 2, rho = 0.5), 1 outside
        const double expect = std::log(1.0 / 0.125);
        const auto est = solve_mod(BeltramiField::radial_stretch_ring(1.0 / 3.0, 0.5),
                                   AnnulusSpec({0, 0}, 0.25, 1.0), 96, 192);
        CHECK(std::abs(est.computed - expect) / expect < 0.01);
    }

    SUBCASE("conformal invariance witness: zero field independent of the center") {
        const double base = solve_mod(BeltramiField::zero(), AnnulusSpec({0, 0}, 0.1, 0.3)).computed;
        for (const Complex c : {Complex(2, 1), Complex(-4, 0.5)}) {
            const double moved = solve_mod(BeltramiField::zero(), AnnulusSpec(c, 0.1, 0.3)).computed;
            CHECK(std::abs(moved - base) < 1e-6);
        }
    }

    SUBCASE("grid mismatch rejected") {
        const AnnulusSpec a({0, 0}, 0.5, 1.0), b({0, 0}, 0.4, 1.0);
        CHECK_THROWS_AS(mod_image_annulus(BeltramiField::zero(), a, PolarAnnulusGrid(b, 16, 32)),
                        std::invalid_argument);
    }
}

TEST_CASE("grid convergence against the radial-profile reduction") {
    const AnnulusSpec a({0, 0}, 0.3, 0.9);
    const BeltramiField f = BeltramiField::power(0.4, 2.0);
    const double oracle =
        radial_profile_module([](double r) { return 0.4 * std::pow(1 - r * r, 2.0); }, 0.3, 0.9);
    const ImageModuleOptions fast{false, false, 1e-10};
    const double e32 =
        std::abs(mod_image_annulus(f, a, PolarAnnulusGrid(a, 32, 64), fast).computed - oracle);
    const double e64 =
        std::abs(mod_image_annulus(f, a, PolarAnnulusGrid(a, 64, 128), fast).computed - oracle);
    CHECK(e64 < e32 / 2.0);

    // the two exactly-representable oracles sit at the rounding floor on every grid
    const double z32 = std::abs(
        mod_image_annulus(BeltramiField::zero(), AnnulusSpec({0, 0}, 0.5, 1.0),
                          PolarAnnulusGrid(AnnulusSpec({0, 0}, 0.5, 1.0), 32, 64), fast)
            .computed -
        std::log(2.0));
    const double z64 = std::abs(
        mod_image_annulus(BeltramiField::zero(), AnnulusSpec({0, 0}, 0.5, 1.0),
                          PolarAnnulusGrid(AnnulusSpec({0, 0}, 0.5, 1.0), 64, 128), fast)
            .computed -
        std::log(2.0));
    CHECK(z64 <= std::max(z32 / 2.0, 5e-9));
}

TEST_CASE("two-sided bounds") {
    SUBCASE("zero field: both bounds equal the round module to 1e-6") {
        const AnnulusSpec a({0.7, -0.3}, 0.05, 2.5);
        CHECK(std::abs(mod_upper_bound(BeltramiField::zero(), a) - mod_round_annulus(a)) < 1e-6);
        CHECK(std::abs(mod_lower_bound(BeltramiField::zero(), a) - mod_round_annulus(a)) < 1e-6);
    }

    SUBCASE("constant modulus on an interior annulus: exact arithmetic values") {
        const AnnulusSpec a({0, 0}, 0.2, 0.6);
        const BeltramiField f = BeltramiField::constant({0.2, 0.0});
        const double D = 1.2 / 0.8;
        CHECK(mod_upper_bound(f, a) == doctest::Approx(D * std::log(3.0)).epsilon(1e-10));
        CHECK(mod_lower_bound(f, a) == doctest::Approx(std::log(3.0) / D).epsilon(1e-10));
    }

    SUBCASE("boundary-straddling annulus: bounds sandwich the energy solve") {
        const AnnulusSpec a({1, 0}, 0.05, 0.1);
        const BeltramiField f = BeltramiField::power(0.3, 2.0);
        const auto est = solve_mod(f, a);
        CHECK(est.upper_bound >= est.computed - est.tolerance);
        CHECK(est.lower_bound <= est.computed + est.tolerance);
    }
}

TEST_CASE("sandwich property across a battery of fields and annuli") {
    const std::vector<BeltramiField> fields = {
        BeltramiField::zero(), BeltramiField::constant({0.2, 0.0}),
        BeltramiField::power(0.3, 2.0), BeltramiField::radial_stretch(1.0 / 3.0),
        BeltramiField::radial_stretch_ring(0.3, 0.5)};
    const std::vector<AnnulusSpec> annuli = {AnnulusSpec({0, 0}, 0.2, 0.6),
                                             AnnulusSpec({0.2, 0.1}, 0.1, 0.4),
                                             AnnulusSpec({1, 0}, 0.1, 0.3)};
    for (const auto& f : fields)
        for (const auto& a : annuli) {
            const auto est = solve_mod(f, a, 48, 96);
            CHECK(est.lower_bound - est.tolerance <= est.computed);
            CHECK(est.computed <= est.upper_bound + est.tolerance);
        }
}

TEST_CASE("superadditivity on concentric triples") {
    const AnnulusSpec a1({0, 0}, 0.2, 0.4), a2({0, 0}, 0.4, 0.8), a3({0, 0}, 0.2, 0.8);

    SUBCASE("zero field: exact equality") {
        const double m1 = solve_mod(BeltramiField::zero(), a1).computed;
        const double m2 = solve_mod(BeltramiField::zero(), a2).computed;
        const double m3 = solve_mod(BeltramiField::zero(), a3).computed;
        CHECK(std::abs(m1 + m2 - m3) < 1e-6);
    }

    SUBCASE("inequality under the example fields") {
        for (const auto& f :
             {BeltramiField::power(0.3, 2.0), BeltramiField::radial_stretch(1.0 / 3.0),
              BeltramiField::constant({0.15, 0.1})}) {
            const auto e1 = solve_mod(f, a1), e2 = solve_mod(f, a2), e3 = solve_mod(f, a3);
            const double tol = e1.tolerance + e2.tolerance + e3.tolerance;
            CHECK(e1.computed + e2.computed <= e3.computed + 2.0 * tol + 1e-9);
        }
    }
}

TEST_CASE("module gap with its integral bound") {
    const BeltramiField f = BeltramiField::power(0.3, 2.0);
    SUBCASE("zero field: gap and bound vanish") {
        const auto g = module_gap(BeltramiField::zero(), {1, 0}, 0.05, 0.1, 48, 96);
        CHECK(std::abs(g.gap) < 1e-6);
        CHECK(g.bound == doctest::Approx(0.0));
    }
    SUBCASE("power field: |gap| <= bound, bound shrinking with the annulus") {
        double prev_bound = 1e300;
        for (double rho1 : {0.2, 0.1, 0.05}) {
            const auto g = module_gap(f, {1, 0}, rho1 / 2, rho1, 48, 96);
            CHECK(std::abs(g.gap) <= g.bound + g.tolerance);
            CHECK(g.bound <= prev_bound);
            prev_bound = g.bound;
        }
    }
    CHECK_THROWS_AS(module_gap(f, {0.5, 0}, 0.05, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(module_gap(f, {1, 0}, 0.1, 0.05), std::invalid_argument);
}
