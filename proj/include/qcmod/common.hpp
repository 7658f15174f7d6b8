#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcmod {

inline constexpr const char* kVersion = "0.1.0";

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Numerical failure of an iterative or quadrature scheme.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iteration did not contract / did not reach tolerance; carries the residual trace.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, std::vector<double> residuals)
        : NumericError(what), residual_trace(std::move(residuals)) {}
    std::vector<double> residual_trace;
};

/// A limit sequence whose successive differences do not shrink; carries the raw sequence.
class ExtrapolationError : public NumericError {
public:
    ExtrapolationError(const std::string& what, std::vector<double> sequence)
        : NumericError(what), raw_sequence(std::move(sequence)) {}
    std::vector<double> raw_sequence;
};

/// Degenerate or self-intersecting sampled geometry.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A probe was asked for below the resolution of the discrete object it reads.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Boundary trace failed its radial-defect quality gate.
class TraceQualityError : public NumericError {
public:
    using NumericError::NumericError;
};

/// A mathematical precondition of the requested quantity could not be
/// certified (e.g. a required integral diverges).
class PreconditionError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Deterministic pairwise summation; order is fixed by the input order.
inline double pairwise_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double sqr(double x) { return x * x; }

}  // namespace qcmod
