#pragma once

#include <functional>
#include <vector>

#include "qcmod/common.hpp"

namespace qcmod {

/// Gauss-Legendre rule on [-1, 1]; nodes/weights computed once per order and cached.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    static const GaussLegendre& get(int order);
};

/// Integrate f over [a, b] with a single Gauss-Legendre panel.
double gauss_panel(const std::function<double(double)>& f, double a, double b, int order);

/// Composite Gauss-Legendre over [a, b] split into n equal panels.
double gauss_composite(const std::function<double(double)>& f, double a, double b,
                       int panels, int order);

/// Composite Gauss-Legendre over [a, b] with interior breakpoints (kept in order,
/// clamped to the interval); each smooth piece gets `panels` panels.
double gauss_piecewise(const std::function<double(double)>& f, double a, double b,
                       std::vector<double> breakpoints, int panels, int order);

/// Adaptive Simpson on [a, b] to absolute tolerance; independent path used by tests
/// and by the reduced-module extrapolation oracle.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 30);

}  // namespace qcmod
