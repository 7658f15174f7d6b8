#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "qcmod/beltrami_field.hpp"
#include "qcmod/circle_map.hpp"
#include "qcmod/common.hpp"
#include "qcmod/geometry.hpp"

namespace qcmod {

/// Moebius transformation w -> (a w + b) / (c w + d) of the sphere.
struct MobiusTransform {
    Complex a{1, 0}, b{0, 0}, c{0, 0}, d{1, 0};

    Complex operator()(Complex w) const { return (a * w + b) / (c * w + d); }

    /// The unique transformation sending (w1, w2, w3) to (t1, t2, t3).
    static MobiusTransform three_point(Complex w1, Complex w2, Complex w3, Complex t1,
                                       Complex t2, Complex t3);
};

/// Grid-sampled normalized quasiconformal map of the plane with coefficient
/// mu~ (the field extended by zero), conformal outside the unit disc, fixing
/// 1, i, -1; plus its boundary trace on the circle.
class QcSolution {
public:
    QcSolution(BeltramiField field, CartesianGrid grid, Eigen::MatrixXcd values,
               std::vector<double> residuals, MobiusTransform normalization,
               std::optional<CircleMap> trace, double trace_defect);

    const BeltramiField& field() const { return field_; }
    const CartesianGrid& grid() const { return grid_; }
    const Eigen::MatrixXcd& values() const { return values_; }
    const std::vector<double>& residual_history() const { return residuals_; }
    int iterations() const { return static_cast<int>(residuals_.size()); }
    const MobiusTransform& normalization() const { return normalization_; }
    /// The map does not always send the circle near the circle (only fields
    /// vanishing toward the boundary do); accessing a trace that failed its
    /// quality gate rethrows the TraceQualityError.
    bool has_trace() const { return trace_.has_value(); }
    const CircleMap& trace() const;
    /// Largest distance of a raw trace sample from the circle before projection.
    double trace_radial_defect() const { return trace_defect_; }

    /// Bilinear interpolation of the solved map.
    Complex map(Complex z) const { return interp_complex(sampled_, z); }

    /// Smallest discrete Jacobian |dF/dz|^2 - |dF/dzbar|^2 over grid-interior nodes.
    double min_interior_jacobian() const;

    /// Max |dF/dzbar| by central differences over nodes with |z| > 1 + margin
    /// (and at least `margin` from the box edge); the map is conformal there.
    double exterior_dbar_residual(double margin) const;
    /// Same quantity over |z| < quantile-interior region, as a comparison floor.
    double interior_dbar_floor(double radius_cap) const;

private:
    BeltramiField field_;
    CartesianGrid grid_;
    Eigen::MatrixXcd values_;
    CartesianField sampled_;
    std::vector<double> residuals_;
    MobiusTransform normalization_;
    std::optional<CircleMap> trace_;
    double trace_defect_ = 0.0;
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 200;
    int trace_samples = 1024;
};

/// Solve the Beltrami equation dF/dzbar = mu~ dF/dz on the plane: principal
/// solution F = z + (Cauchy transform of h), h = mu~ (Beurling h) + mu~ by
/// contraction, both transforms evaluated spectrally on the periodic box; then
/// post-compose with the Moebius transformation fixing 1, i, -1.
QcSolution solve_extended(const BeltramiField& field, const CartesianGrid& grid,
                          const SolveOptions& opts = {});

/// Boundary trace resampled at n points: the map is evaluated from the exterior
/// (conformal) side via a discrete Cauchy-integral continuation from the circle
/// of radius 1 + 2 grid cells, then projected radially onto the circle. Raises
/// TraceQualityError when the radial defect exceeds 1e-2.
CircleMap boundary_trace(const QcSolution& solution, int n_samples);

struct ConformalitySample {
    double radius = 0.0;
    double modulus_spread = 0.0;    // max/min of |difference quotient| over directions
    double argument_spread = 0.0;   // spread of arg(difference quotient)
};

/// Difference-quotient spread of (F(zeta0 + rho e) - F(zeta0)) / (rho e) over 64
/// directions for each radius; a spread shrinking toward 1 (resp. 0) is the
/// numerical signature of conformality at zeta0.
std::vector<ConformalitySample> conformality_probe(const QcSolution& solution, Complex zeta0,
                                                   const std::vector<double>& radii);

}  // namespace qcmod
