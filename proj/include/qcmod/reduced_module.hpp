#pragma once

#include <utility>
#include <vector>

#include "qcmod/beltrami_solver.hpp"
#include "qcmod/common.hpp"
#include "qcmod/geometry.hpp"
#include "qcmod/module_calculus.hpp"

namespace qcmod {

enum class ReducedModuleMethod { robin_solve, extrapolation };

struct ReducedModuleResult {
    double value = 0.0;
    ReducedModuleMethod method = ReducedModuleMethod::robin_solve;
    double tolerance = 0.0;
};

/// Reduced module m(Omega, w0) of the domain bounded by the curve, at an
/// interior point: the Robin constant h(w0) of the harmonic function with
/// boundary values ln|w - w0|, solved by a double-layer Nystroem method on
/// arclength panels. For a disc of radius R about its center this is ln R.
ReducedModuleResult reduced_module(const JordanCurve& boundary, Complex w0,
                                   int panels = 256);

/// Independent route through the definition: Mod(Omega minus D(w0, rho)) + ln rho,
/// evaluated by a two-boundary Laplace solve at several rho and extrapolated.
/// Default rho values are geometric below half the distance to the boundary.
ReducedModuleResult reduced_module_extrapolated(const JordanCurve& boundary, Complex w0,
                                                std::vector<double> rhos = {},
                                                int panels = 256);

struct ModuleDefectOptions {
    int cells_per_octave = 48;  // radial resolution per factor-two of annulus extent
    int n_angular = 128;
    bool richardson = false;    // per-solve two-grid tolerance (slower)
};

struct ModuleDefectResult {
    double value = 0.0;      // extrapolated limit of Mod(image annulus) + ln rho
    double tolerance = 0.0;
    std::vector<double> sequence;  // the raw values per rho, largest rho first
};

/// The limit of Mod(F(A_{zeta, rho, r})) + ln rho as rho -> 0, Richardson/Aitken
/// extrapolated from at least three geometrically spaced rho values. Throws
/// ExtrapolationError (carrying the sequence) when the differences do not shrink.
ModuleDefectResult module_defect(const BeltramiField& field, Complex zeta, double r,
                                 const std::vector<double>& rhos,
                                 const ModuleDefectOptions& opts = {});

/// Image of the circle |z - zeta| = r under the solved map, as a Jordan curve
/// resampled by arclength.
JordanCurve image_disc_boundary(const QcSolution& solution, Complex zeta, double r,
                                int samples = 512, int panels = 256);

/// Reduced module of F(D(zeta, r)) at f(zeta) for each probe angle; the sampled
/// function whose oscillation under refinement witnesses continuity.
std::vector<std::pair<double, double>> continuity_probe(const QcSolution& solution,
                                                        const std::vector<double>& zeta_args,
                                                        double r);

}  // namespace qcmod
