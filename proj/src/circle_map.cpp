#include "qcmod/circle_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "qcmod/geometry.hpp"

namespace qcmod {

namespace {

// Cyclic tridiagonal solve (constant diagonals) via Thomas + Sherman-Morrison:
// A = T + u v^T with u = (gamma, 0, .., sup)^T, v = (1, 0, .., sub/gamma)^T.
std::vector<double> solve_cyclic_tridiag(double sub, double diag, double sup,
                                         std::vector<double> rhs) {
    const int n = static_cast<int>(rhs.size());
    const double gamma = -diag;
    auto thomas_mod = [&](std::vector<double> r) {
        std::vector<double> dd(n, diag), cc(n, 0.0);
        dd[0] = diag - gamma;
        dd[n - 1] = diag - sub * sup / gamma;
        double beta = dd[0];
        r[0] /= beta;
        for (int i = 1; i < n; ++i) {
            cc[i] = sup / beta;
            beta = dd[i] - sub * cc[i];
            r[i] = (r[i] - sub * r[i - 1]) / beta;
        }
        for (int i = n - 2; i >= 0; --i) r[i] -= cc[i + 1] * r[i + 1];
        return r;
    };
    const std::vector<double> y = thomas_mod(rhs);
    std::vector<double> q(n, 0.0);
    q[0] = gamma;
    q[n - 1] = sup;
    const std::vector<double> z = thomas_mod(q);
    const double vy = y[0] + (sub / gamma) * y[n - 1];
    const double vz = z[0] + (sub / gamma) * z[n - 1];
    const double factor = vy / (1.0 + vz);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = y[i] - factor * z[i];
    return x;
}

}  // namespace

CircleMap::CircleMap(std::vector<Complex> samples, double trace_tol) {
    n_ = static_cast<int>(samples.size());
    if (n_ < 16) throw std::invalid_argument("CircleMap: need at least 16 samples");
    samples_ = std::move(samples);
    psi_.resize(n_);
    double phase = std::arg(samples_[0]);
    double total = 0.0;
    for (int k = 0; k < n_; ++k) {
        const double r = std::abs(samples_[k]);
        if (std::abs(r - 1.0) > trace_tol)
            throw GeometryError("CircleMap: sample off the unit circle beyond tolerance");
        if (k > 0) {
            const double step = std::arg(samples_[k] / samples_[k - 1]);
            if (step <= 0.0)
                throw GeometryError("CircleMap: argument not strictly increasing");
            phase += step;
            total += step;
        }
        psi_[k] = phase - kTwoPi * k / n_;
    }
    const double closing = std::arg(samples_[0] / samples_[n_ - 1]);
    if (closing <= 0.0) throw GeometryError("CircleMap: argument not strictly increasing");
    total += closing;
    if (std::abs(total - kTwoPi) > 1e-9)
        throw GeometryError("CircleMap: winding number is not 1");
    build_spline();
}

CircleMap CircleMap::identity(int n) {
    std::vector<Complex> s(n);
    for (int k = 0; k < n; ++k) s[k] = std::polar(1.0, kTwoPi * k / n);
    return CircleMap(std::move(s), 1e-12);
}

CircleMap CircleMap::from_phase(const std::function<double(double)>& g, int n) {
    std::vector<Complex> s(n);
    for (int k = 0; k < n; ++k) s[k] = std::polar(1.0, g(kTwoPi * k / n));
    return CircleMap(std::move(s), 1e-12);
}

CircleMap CircleMap::angular_stretch(double a, int n) {
    if (!(a > 0.0 && a < 2.0))
        throw std::invalid_argument("CircleMap::angular_stretch: need 0 < a < 2");
    const double b = 2.0 - a;
    return from_phase(
        [a, b](double t) { return t <= kPi ? a * t : a * kPi + b * (t - kPi); }, n);
}

void CircleMap::build_spline() {
    const double h = kTwoPi / n_;
    std::vector<double> rhs(n_);
    for (int k = 0; k < n_; ++k) {
        const double prev = psi_[(k + n_ - 1) % n_];
        const double next = psi_[(k + 1) % n_];
        rhs[k] = 6.0 * (next - 2.0 * psi_[k] + prev) / (h * h);
    }
    d2_ = solve_cyclic_tridiag(1.0, 4.0, 1.0, std::move(rhs));
}

double CircleMap::phase(double theta) const {
    const double h = kTwoPi / n_;
    double t = std::fmod(theta, kTwoPi);
    if (t < 0) t += kTwoPi;
    int k = std::min(static_cast<int>(t / h), n_ - 1);
    const double x = t - k * h;
    const int k1 = (k + 1) % n_;
    const double A = (h - x) / h, B = x / h;
    const double psi = A * psi_[k] + B * psi_[k1] +
                       ((A * A * A - A) * d2_[k] + (B * B * B - B) * d2_[k1]) * h * h / 6.0;
    return theta + psi;  // psi is periodic, so the lift advances by 2 pi per turn
}

Complex CircleMap::value(double theta) const { return std::polar(1.0, phase(theta)); }

void CircleMap::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write circle map file: " + path);
    out.precision(17);
    out << "theta,re_f,im_f\n";
    for (int k = 0; k < n_; ++k) {
        const double theta = kTwoPi * k / n_;
        out << theta << ',' << samples_[k].real() << ',' << samples_[k].imag() << '\n';
    }
}

}  // namespace qcmod
