#pragma once

#include <vector>

#include "qcmod/beltrami_solver.hpp"
#include "qcmod/circle_map.hpp"
#include "qcmod/common.hpp"
#include "qcmod/reduced_module.hpp"

namespace qcmod {

enum class DerivativeMethod { finite_difference, modules };

struct DerivativeEstimate {
    Complex zeta;
    double magnitude = 0.0;  // |f'(zeta)|, positive for a diffeomorphism
    DerivativeMethod method = DerivativeMethod::finite_difference;
    double tolerance = 0.0;
};

/// Central-difference magnitude |f(e^{i(t+h)}) - f(e^{i(t-h)})| / |e^{i(t+h)} - e^{i(t-h)}|.
/// Tolerance from comparing against a halved step. Steps below the map's
/// sample resolution raise ResolutionError.
DerivativeEstimate derivative_fd(const CircleMap& f, double theta, double step);

/// |f'(zeta)| through the module route:
///   exp( m(F(D(zeta, r)), f(zeta)) - lim_{rho->0}[ Mod(F(A_{zeta, rho, r})) + ln rho ] ).
/// Requires the conformality integral at zeta to be finite (checked first);
/// divergence or an uncertifiable integral raises PreconditionError.
DerivativeEstimate derivative_via_modules(const BeltramiField& field,
                                          const QcSolution& solution, Complex zeta, double r,
                                          const std::vector<double>& rhos,
                                          const ModuleDefectOptions& opts = {});

struct RingExtremes {
    double rho = 0.0;
    double min_abs = 0.0;  // min over the circle |z - zeta| = rho of |F(z) - f(zeta)|
    double max_abs = 0.0;
};

/// Extremes of |F - f(zeta)| over 256 samples of the circle of radius rho at zeta.
RingExtremes ring_extremes(const QcSolution& solution, Complex zeta, double rho);

/// Three-point ratio |f(e^{i(t+s)}) - f(e^{it})| / |f(e^{it}) - f(e^{i(t-s)})|.
double symmetry_ratio(const CircleMap& f, double theta, double t);

/// Max over the sample angles and the given steps of max(ratio, 1/ratio); a
/// lower bound for the quasisymmetry constant.
double quasisymmetry_constant(const CircleMap& f, const std::vector<double>& t_grid);

struct OscillationSweep {
    std::vector<double> theta;      // midpoint-offset probe angles, increasing
    std::vector<double> log_deriv;  // ln |f'| at the kept angles
    std::vector<double> tolerance;
    std::vector<double> skipped_theta;  // probe angles whose estimate failed
    double max_adjacent_oscillation = 0.0;
    DerivativeMethod method = DerivativeMethod::modules;
};

/// ln|f'| at n_zeta equispaced (half-step offset) boundary points via the
/// module route; per-point failures are recorded and skipped. The maximal
/// adjacent difference is the continuity signature under grid refinement.
OscillationSweep derivative_oscillation(const BeltramiField& field, const QcSolution& solution,
                                        int n_zeta, double r,
                                        const ModuleDefectOptions& opts = {});

/// Finite-difference variant for maps whose coefficient is not integrable;
/// the step is clamped to a quarter of the probe spacing.
OscillationSweep derivative_oscillation(const CircleMap& f, int n_zeta, double step);

}  // namespace qcmod
