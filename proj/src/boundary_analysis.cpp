#include "qcmod/boundary_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "qcmod/beltrami_field.hpp"

namespace qcmod {

namespace {

double fd_magnitude(const CircleMap& f, double theta, double step) {
    const Complex num = f.value(theta + step) - f.value(theta - step);
    const Complex den = std::polar(1.0, theta + step) - std::polar(1.0, theta - step);
    return std::abs(num) / std::abs(den);
}

double max_adjacent(const std::vector<double>& values, bool wrap) {
    double worst = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i)
        worst = std::max(worst, std::abs(values[i] - values[i - 1]));
    if (wrap && values.size() > 2)
        worst = std::max(worst, std::abs(values.front() - values.back()));
    return worst;
}

}  // namespace

DerivativeEstimate derivative_fd(const CircleMap& f, double theta, double step) {
    if (!(step > 0.0 && step < kPi / 8))
        throw std::invalid_argument("derivative_fd: need 0 < step < pi/8");
    if (step < f.resolution())
        throw ResolutionError("derivative_fd: step below the circle-map resolution");
    const double est = fd_magnitude(f, theta, step);
    const double cmp_step = step / 2 >= f.resolution() ? step / 2 : step * 2;
    const double tol = std::abs(est - fd_magnitude(f, theta, cmp_step));
    return {std::polar(1.0, theta), est, DerivativeMethod::finite_difference, tol};
}

DerivativeEstimate derivative_via_modules(const BeltramiField& field,
                                          const QcSolution& solution, Complex zeta, double r,
                                          const std::vector<double>& rhos,
                                          const ModuleDefectOptions& opts) {
    if (std::abs(std::abs(zeta) - 1.0) > 1e-12)
        throw std::invalid_argument("derivative_via_modules: zeta must lie on the circle");
    const PNormResult twb = twb_integral(field, zeta, r);
    if (twb.diverged)
        throw PreconditionError(
            "derivative_via_modules: conformality integral diverges at this point");
    if (!twb.converged)
        throw PreconditionError(
            "derivative_via_modules: conformality integral could not be certified finite");

    const ModuleDefectResult defect = module_defect(field, zeta, r, rhos, opts);
    const JordanCurve curve = image_disc_boundary(solution, zeta, r);
    const Complex fz = solution.trace().value(std::arg(zeta));
    const ReducedModuleResult m = reduced_module(curve, fz);
    const double magnitude = std::exp(m.value - defect.value);
    const double tol = magnitude * (m.tolerance + defect.tolerance);
    return {zeta, magnitude, DerivativeMethod::modules, tol};
}

RingExtremes ring_extremes(const QcSolution& solution, Complex zeta, double rho) {
    if (std::abs(std::abs(zeta) - 1.0) > 1e-12)
        throw std::invalid_argument("ring_extremes: zeta must lie on the circle");
    if (rho < 4.0 * solution.grid().cell())
        throw ResolutionError("ring_extremes: radius below 4 grid cells");
    const Complex fz = solution.trace().value(std::arg(zeta));
    RingExtremes out{rho, 1e300, 0.0};
    for (int k = 0; k < 256; ++k) {
        const Complex z = zeta + std::polar(rho, kTwoPi * k / 256);
        const double d = std::abs(solution.map(z) - fz);
        out.min_abs = std::min(out.min_abs, d);
        out.max_abs = std::max(out.max_abs, d);
    }
    return out;
}

double symmetry_ratio(const CircleMap& f, double theta, double t) {
    if (!(t > 0.0 && t < kPi / 2))
        throw std::invalid_argument("symmetry_ratio: need 0 < t < pi/2");
    const Complex mid = f.value(theta);
    const double num = std::abs(f.value(theta + t) - mid);
    const double den = std::abs(mid - f.value(theta - t));
    if (den < 1e-14)
        throw NumericError("symmetry_ratio: degenerate denominator");
    return num / den;
}

double quasisymmetry_constant(const CircleMap& f, const std::vector<double>& t_grid) {
    if (t_grid.empty())
        throw std::invalid_argument("quasisymmetry_constant: empty step grid");
    double worst = 1.0;
    const int n = f.size();
    for (double t : t_grid) {
        for (int k = 0; k < n; ++k) {
            const double ratio = symmetry_ratio(f, kTwoPi * k / n, t);
            worst = std::max(worst, std::max(ratio, 1.0 / ratio));
        }
    }
    return worst;
}

OscillationSweep derivative_oscillation(const BeltramiField& field, const QcSolution& solution,
                                        int n_zeta, double r,
                                        const ModuleDefectOptions& opts) {
    if (n_zeta < 16) throw std::invalid_argument("derivative_oscillation: need n_zeta >= 16");
    OscillationSweep out;
    out.method = DerivativeMethod::modules;
    const std::vector<double> rhos = {r / 2, r / 4, r / 8};
    for (int j = 0; j < n_zeta; ++j) {
        const double theta = kTwoPi * (j + 0.5) / n_zeta;
        try {
            const DerivativeEstimate est = derivative_via_modules(
                field, solution, std::polar(1.0, theta), r, rhos, opts);
            out.theta.push_back(theta);
            out.log_deriv.push_back(std::log(est.magnitude));
            out.tolerance.push_back(est.tolerance / est.magnitude);
        } catch (const NumericError&) {
            out.skipped_theta.push_back(theta);
        }
    }
    out.max_adjacent_oscillation = max_adjacent(out.log_deriv, /*wrap=*/true);
    return out;
}

OscillationSweep derivative_oscillation(const CircleMap& f, int n_zeta, double step) {
    if (n_zeta < 16) throw std::invalid_argument("derivative_oscillation: need n_zeta >= 16");
    OscillationSweep out;
    out.method = DerivativeMethod::finite_difference;
    const double spacing = kTwoPi / n_zeta;
    const double used = std::min(step, 0.25 * spacing);
    for (int j = 0; j < n_zeta; ++j) {
        const double theta = spacing * (j + 0.5);
        try {
            const DerivativeEstimate est = derivative_fd(f, theta, used);
            out.theta.push_back(theta);
            out.log_deriv.push_back(std::log(est.magnitude));
            out.tolerance.push_back(est.tolerance / est.magnitude);
        } catch (const std::exception&) {
            out.skipped_theta.push_back(theta);
        }
    }
    out.max_adjacent_oscillation = max_adjacent(out.log_deriv, /*wrap=*/true);
    return out;
}

}  // namespace qcmod
