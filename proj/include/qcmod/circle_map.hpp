#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qcmod/common.hpp"

namespace qcmod {

/// Orientation-preserving circle homeomorphism sampled at uniform angles
/// theta_k = 2 pi k / n. Interpolation is a periodic cubic spline in theta of
/// the lifted argument, so interpolated values lie exactly on the circle.
class CircleMap {
public:
    /// Validates: samples within trace_tol of the circle, strictly increasing
    /// lifted argument (orientation), winding number 1.
    explicit CircleMap(std::vector<Complex> samples, double trace_tol = 1e-6);

    static CircleMap identity(int n);
    /// f(e^{i theta}) = e^{i g(theta)} with g' = a on (0, pi), g' = 2 - a on (pi, 2 pi).
    static CircleMap angular_stretch(double a, int n);
    /// Sample an arbitrary increasing phase function g with g(2 pi) = g(0) + 2 pi.
    static CircleMap from_phase(const std::function<double(double)>& g, int n);

    int size() const { return n_; }
    double resolution() const { return kTwoPi / n_; }
    int winding_number() const { return 1; }
    const std::vector<Complex>& samples() const { return samples_; }

    /// Lifted argument of f(e^{i theta}); increasing, phase(t + 2 pi) = phase(t) + 2 pi.
    double phase(double theta) const;
    /// f(e^{i theta}), unit modulus by construction.
    Complex value(double theta) const;

    void write_csv(const std::string& path) const;

private:
    CircleMap() = default;
    void build_spline();

    int n_ = 0;
    std::vector<Complex> samples_;
    std::vector<double> psi_;    // phase(theta_k) - theta_k, periodic in k
    std::vector<double> d2_;     // spline second derivatives of psi
};

}  // namespace qcmod
