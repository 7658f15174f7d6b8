#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qcmod/beltrami_field.hpp"
#include "qcmod/common.hpp"
#include "qcmod/geometry.hpp"

namespace qcmod {

/// Unit-determinant symmetric positive-definite distortion tensor of a Beltrami
/// coefficient mu = a + ib:
///   A = 1/(1-|mu|^2) * [ (1-a)^2 + b^2,  -2b;  -2b,  (1+a)^2 + b^2 ].
/// The Dirichlet energy of u against A on a parameter annulus computes the
/// module of the image annulus under the map with coefficient mu.
Eigen::Matrix2d distortion_tensor(Complex mu);

/// Tensor sampled over a polar annulus grid; det A = 1 at every node within 1e-10.
struct DistortionTensorField {
    PolarAnnulusGrid grid;
    std::vector<Eigen::Matrix2d> values;  // node-major: (n_radial+1) x n_angular

    DistortionTensorField(const BeltramiField& field, PolarAnnulusGrid g);
    const Eigen::Matrix2d& at(int i, int j) const { return values[i * grid.n_angular + j]; }
    double max_det_deviation() const;
};

struct ModuleDiagnostics {
    double energy = 0.0;
    int n_radial = 0;
    int n_angular = 0;
    int cg_iterations = 0;
    double cg_residual = 0.0;
};

struct ModuleEstimate {
    double computed = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    double tolerance = 0.0;  // Richardson estimate from two grid levels
    ModuleDiagnostics diagnostics;
};

struct ImageModuleOptions {
    bool richardson = true;   // second solve at half resolution for the tolerance
    bool with_bounds = true;  // fill lower_bound / upper_bound
    double cg_tol = 1e-10;
};

/// Module of the image of a round annulus under the map with coefficient mu~,
/// computed on the parameter annulus: Mod = 2 pi / E*, E* the minimal
/// anisotropic Dirichlet energy (u = 0 inner, u = 1 outer), discretized with
/// bilinear elements on the (log r, theta) rectangle; cells cut by the circle
/// |z| = 1 (where the tensor jumps to the identity) get subdivided quadrature.
ModuleEstimate mod_image_annulus(const BeltramiField& field, const AnnulusSpec& annulus,
                                 const PolarAnnulusGrid& grid,
                                 const ImageModuleOptions& opts = {});

/// Convenience grid for an annulus (log-uniform radial nodes).
PolarAnnulusGrid default_module_grid(const AnnulusSpec& annulus, int n_radial = 96,
                                     int n_angular = 192);

/// Integral-average upper bound for the image module:
///   (1/2pi) Int_A (1+|mu|)/(1-|mu|) dxdy/|z-zeta|^2.
/// Equals ln(r_outer/r_inner) exactly when mu vanishes on the annulus.
double mod_upper_bound(const BeltramiField& field, const AnnulusSpec& annulus);

/// Radial harmonic-mean lower bound for the image module:
///   2pi Int dr / ( r * Int_0^{2pi} (1+|mu|)/(1-|mu|) dtheta ).
double mod_lower_bound(const BeltramiField& field, const AnnulusSpec& annulus);

struct GapResult {
    double gap = 0.0;        // Mod(image annulus) - ln(rho1/rho2)
    double bound = 0.0;      // (1/(pi (1-k))) Int_{A cap disc} |mu| / |z-zeta|^2
    double tolerance = 0.0;  // discretization tolerance of the module solve
};

/// Deviation of the image module of A_{zeta, rho2, rho1} from the round module,
/// with the integral bound controlling it from both sides; zeta on the circle.
GapResult module_gap(const BeltramiField& field, Complex zeta, double rho2, double rho1,
                     int n_radial = 96, int n_angular = 192);

}  // namespace qcmod
