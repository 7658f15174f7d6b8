#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qcmod/common.hpp"

namespace qcmod {

/// Round annulus { r_inner < |z - center| < r_outer }.
struct AnnulusSpec {
    Complex center;
    double r_inner = 0.0;
    double r_outer = 0.0;

    AnnulusSpec(Complex c, double ri, double ro) : center(c), r_inner(ri), r_outer(ro) {
        if (!(ri > 0.0) || !(ro > ri) || !std::isfinite(ro))
            throw std::invalid_argument("AnnulusSpec: need 0 < r_inner < r_outer < inf");
    }
};

struct DiscSpec {
    Complex center;
    double radius = 0.0;

    DiscSpec(Complex c, double r) : center(c), radius(r) {
        if (!(r > 0.0)) throw std::invalid_argument("DiscSpec: radius must be positive");
    }
};

/// Module of a round annulus, ln(r_outer / r_inner). Invariant under translation
/// of the center and joint scaling of the radii.
inline double mod_round_annulus(const AnnulusSpec& a) {
    return std::log(a.r_outer / a.r_inner);
}

/// Radial node placement. Both rules put the radii in geometric progression,
/// i.e. uniformly spaced in log r, so the dr/r measure is uniformly weighted.
enum class RadialRule { geometric, log_uniform };

/// Tensor-product grid on an annulus, nodes at (log-spaced radius) x (uniform angle).
struct PolarAnnulusGrid {
    AnnulusSpec spec;
    int n_radial = 0;   // radial cells; nodes 0..n_radial
    int n_angular = 0;  // angular cells == angular nodes (periodic)
    RadialRule rule = RadialRule::log_uniform;

    PolarAnnulusGrid(AnnulusSpec a, int nr, int nt, RadialRule r = RadialRule::log_uniform)
        : spec(a), n_radial(nr), n_angular(nt), rule(r) {
        if (nr < 8 || nt < 16)
            throw std::invalid_argument("PolarAnnulusGrid: need n_radial >= 8, n_angular >= 16");
    }

    double s_inner() const { return std::log(spec.r_inner); }
    double s_outer() const { return std::log(spec.r_outer); }
    double ds() const { return (s_outer() - s_inner()) / n_radial; }
    double dtheta() const { return kTwoPi / n_angular; }
    double s_node(int i) const { return s_inner() + i * ds(); }
    double radius_node(int i) const { return std::exp(s_node(i)); }
    double theta_node(int j) const { return j * dtheta(); }
    Complex point(int i, int j) const {
        return spec.center + std::polar(radius_node(i), theta_node(j));
    }
};

/// Square periodic grid [-L, L]^2, n nodes per side, containing the closed unit
/// disc with margin; n is a power of two for the spectral transforms.
struct CartesianGrid {
    double half_width = 0.0;
    int n = 0;

    CartesianGrid(double L, int n_side) : half_width(L), n(n_side) {
        if (!(L >= 2.0)) throw std::invalid_argument("CartesianGrid: half-width must be >= 2");
        if (n_side < 4 || (n_side & (n_side - 1)) != 0)
            throw std::invalid_argument("CartesianGrid: n must be a power of two >= 4");
    }

    double cell() const { return 2.0 * half_width / n; }
    double coord(int j) const { return -half_width + j * cell(); }
    Complex point(int ix, int iy) const { return {coord(ix), coord(iy)}; }
};

/// Positively oriented closed polygon sampled from a Jordan curve.
class JordanCurve {
public:
    explicit JordanCurve(std::vector<Complex> points);

    const std::vector<Complex>& points() const { return pts_; }
    std::size_t size() const { return pts_.size(); }

    double signed_area() const;
    double perimeter() const;
    int winding_number(Complex w) const;
    bool contains(Complex w) const { return winding_number(w) != 0; }

    /// Resample to m points spaced uniformly in arclength along the polygon.
    JordanCurve resample_arclength(int m) const;

    static JordanCurve circle(Complex center, double radius, int n = 256);
    static JordanCurve ellipse(Complex center, double semi_a, double semi_b, int n = 256);

    static JordanCurve read_csv(const std::string& path);
    void write_csv(const std::string& path) const;

private:
    std::vector<Complex> pts_;
};

/// Complex samples on a Cartesian grid; values(ix, iy) at grid.point(ix, iy).
struct CartesianField {
    CartesianGrid grid;
    Eigen::MatrixXcd values;

    CartesianField(CartesianGrid g, Eigen::MatrixXcd v) : grid(g), values(std::move(v)) {
        if (values.rows() != grid.n || values.cols() != grid.n)
            throw std::invalid_argument("CartesianField: sample dimensions do not match grid");
    }
};

/// Complex samples on a polar annulus grid; values(i, j) at grid.point(i, j).
struct PolarField {
    PolarAnnulusGrid grid;
    Eigen::MatrixXcd values;

    PolarField(PolarAnnulusGrid g, Eigen::MatrixXcd v) : grid(g), values(std::move(v)) {
        if (values.rows() != grid.n_radial + 1 || values.cols() != grid.n_angular)
            throw std::invalid_argument("PolarField: sample dimensions do not match grid");
    }
};

/// Bilinear interpolation, periodic across the box seam; exact at nodes and for
/// affine fields. Queries outside [-L, L]^2 are a domain error.
Complex interp_complex(const CartesianField& field, Complex z);

/// Bilinear in (log r, theta); theta periodic. Queries outside the annulus radii
/// are a domain error.
Complex interp_complex(const PolarField& field, Complex z);

/// Measure attached to overlap quadrature weights: plain area dxdy, or the
/// log-polar measure ds dphi = dxdy / |z - center|^2 used by the module bounds.
enum class OverlapMeasure { area, log_polar };

struct QuadratureRule2D {
    std::vector<Complex> nodes;
    std::vector<double> weights;

    double weight_sum() const { return pairwise_sum(weights); }
    bool empty() const { return nodes.empty(); }
};

/// Quadrature nodes/weights for (annulus intersect unit disc). Cells straddling
/// |z| = 1 are subdivided adaptively up to `max_depth` levels. An empty
/// intersection yields an empty (valid) rule.
QuadratureRule2D annulus_disc_overlap(const AnnulusSpec& annulus,
                                      OverlapMeasure measure = OverlapMeasure::area,
                                      int n_radial = 64, int n_angular = 256,
                                      int max_depth = 6);

}  // namespace qcmod
