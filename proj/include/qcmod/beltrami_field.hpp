#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "qcmod/common.hpp"
#include "qcmod/geometry.hpp"

namespace qcmod {

enum class MuFamily { zero, constant, power, radial_stretch, radial_stretch_ring,
                      angular_stretch, grid };

/// Measurable Beltrami coefficient on the unit disc with |mu| <= k < 1, extended
/// by zero outside the closed disc (and, by convention, on the circle itself).
class BeltramiField {
public:
    static BeltramiField zero();
    /// mu = c on the open disc.
    static BeltramiField constant(Complex c);
    /// mu = c (1 - |z|^2)^alpha e^{i(2 theta + phase)}; vanishes on the circle.
    static BeltramiField power(double c, double alpha, double phase = 0.0);
    /// Coefficient of z -> z |z|^{K-1}, K = (1+k)/(1-k): mu = k e^{2 i theta}.
    static BeltramiField radial_stretch(double k);
    /// Radial stretch confined to the ring rho <= |z| < 1; zero on |z| < rho.
    static BeltramiField radial_stretch_ring(double k, double rho);
    /// Coefficient of the sector map r e^{i theta} -> r e^{i g(theta)} with
    /// g' = a on (0, pi) and g' = 2 - a on (-pi, 0).
    static BeltramiField angular_stretch(double a);
    /// Bilinear interpolation of samples on a uniform rectangular lattice.
    static BeltramiField from_grid_csv(const std::string& path);

    /// mu~(z); zero whenever |z| >= 1.
    Complex operator()(Complex z) const;

    double sup_bound() const { return k_; }
    MuFamily family() const { return family_; }
    std::string describe() const;

    /// Radii of origin-centered circles across which mu jumps (quadrature hints).
    std::vector<double> radial_jumps() const;
    /// Azimuths of origin rays along which mu jumps (quadrature hints).
    std::vector<double> angular_jumps() const;

    double param_c() const { return p1_; }
    double param_alpha() const { return p2_; }

private:
    struct GridData;
    BeltramiField(MuFamily f, double k) : family_(f), k_(k) {}

    MuFamily family_ = MuFamily::zero;
    double k_ = 0.0;
    Complex c_{0.0, 0.0};
    double p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
    std::shared_ptr<const GridData> grid_;
};

/// Result of a hyperbolic-measure integral with dyadic boundary shells.
/// Exactly one of {finite value, divergence flag} holds; when neither a
/// convergence trend nor divergence was detected within the shell budget,
/// `converged` and `diverged` are both false and the partial sum is reported.
struct PNormResult {
    double p = 0.0;
    double value = 0.0;
    double tolerance = 0.0;
    bool converged = false;
    bool diverged = false;
    std::vector<double> shell_values;
};

inline constexpr int kShellBudget = 40;

/// Integral of |mu|^p against the hyperbolic measure (1-|z|^2)^{-2} dxdy over
/// the unit disc. Adaptive polar quadrature refined toward |z| = 1 by dyadic
/// shells; the divergence flag is set when the shell partial sums fail to form
/// a Cauchy sequence within the shell budget.
PNormResult p_norm(const BeltramiField& field, double p);

/// Same integral restricted to D(zeta0, r) intersected with the disc, zeta0 on
/// the unit circle. This is the right-hand side of the local conformality bound.
PNormResult p_norm_near_boundary_point(const BeltramiField& field, double p,
                                       Complex zeta0, double r);

/// Integral of |mu(z)| / |z - zeta0|^2 over D(zeta0, r) intersected with the
/// disc, zeta0 on the unit circle; finiteness is the pointwise conformality
/// criterion. Shells are dyadic in the distance to zeta0.
PNormResult twb_integral(const BeltramiField& field, Complex zeta0, double r);

/// Pointwise bound 1/|z - zeta0|^2 < 4/(1 - |z|^2)^2 for |z| < 1, |zeta0| = 1.
/// Holds for every valid input.
bool boundary_kernel_bound_holds(Complex z, Complex zeta0);

enum class TpVerdict { in_tp, not_in_tp, inconclusive };

/// Membership of the field's boundary class in the p-integrable family:
/// finite norm -> in, divergent shells -> not, budget exhausted without a
/// trend -> inconclusive.
TpVerdict classify_tp(const BeltramiField& field, double p);

}  // namespace qcmod
