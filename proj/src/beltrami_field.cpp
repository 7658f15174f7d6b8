#include "qcmod/beltrami_field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qcmod/quadrature.hpp"

namespace qcmod {

// ---------------------------------------------------------------------------
// Field families
// ---------------------------------------------------------------------------

struct BeltramiField::GridData {
    int nx = 0, ny = 0;
    double x0 = 0, y0 = 0, dx = 0, dy = 0;
    Eigen::MatrixXcd values;

    Complex eval(Complex z) const {
        const double fx = (z.real() - x0) / dx;
        const double fy = (z.imag() - y0) / dy;
        if (fx < 0 || fy < 0 || fx > nx - 1 || fy > ny - 1) return {0.0, 0.0};
        int ix = std::min(static_cast<int>(fx), nx - 2);
        int iy = std::min(static_cast<int>(fy), ny - 2);
        const double tx = fx - ix, ty = fy - iy;
        return (1 - tx) * (1 - ty) * values(ix, iy) + tx * (1 - ty) * values(ix + 1, iy) +
               (1 - tx) * ty * values(ix, iy + 1) + tx * ty * values(ix + 1, iy + 1);
    }
};

BeltramiField BeltramiField::zero() { return BeltramiField(MuFamily::zero, 0.0); }

BeltramiField BeltramiField::constant(Complex c) {
    if (!(std::abs(c) < 1.0))
        throw std::invalid_argument("BeltramiField::constant: need |c| < 1");
    BeltramiField f(MuFamily::constant, std::abs(c));
    f.c_ = c;
    return f;
}

BeltramiField BeltramiField::power(double c, double alpha, double phase) {
    if (!(c >= 0.0 && c < 1.0))
        throw std::invalid_argument("BeltramiField::power: need 0 <= c < 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("BeltramiField::power: need alpha > 0");
    BeltramiField f(MuFamily::power, c);
    f.p1_ = c;
    f.p2_ = alpha;
    f.p3_ = phase;
    return f;
}

BeltramiField BeltramiField::radial_stretch(double k) {
    if (!(k >= 0.0 && k < 1.0))
        throw std::invalid_argument("BeltramiField::radial_stretch: need 0 <= k < 1");
    BeltramiField f(MuFamily::radial_stretch, k);
    f.p1_ = k;
    return f;
}

BeltramiField BeltramiField::radial_stretch_ring(double k, double rho) {
    if (!(k >= 0.0 && k < 1.0))
        throw std::invalid_argument("BeltramiField::radial_stretch_ring: need 0 <= k < 1");
    if (!(rho > 0.0 && rho < 1.0))
        throw std::invalid_argument("BeltramiField::radial_stretch_ring: need 0 < rho < 1");
    BeltramiField f(MuFamily::radial_stretch_ring, k);
    f.p1_ = k;
    f.p2_ = rho;
    return f;
}

BeltramiField BeltramiField::angular_stretch(double a) {
    if (!(a > 0.0 && a < 2.0))
        throw std::invalid_argument("BeltramiField::angular_stretch: need 0 < a < 2");
    const double b = 2.0 - a;
    const double ka = std::abs(1.0 - a) / (1.0 + a);
    const double kb = std::abs(1.0 - b) / (1.0 + b);
    BeltramiField f(MuFamily::angular_stretch, std::max(ka, kb));
    f.p1_ = a;
    return f;
}

BeltramiField BeltramiField::from_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mu grid file: " + path);
    std::string line;
    int nx = -1, ny = -1;
    // header: nx=<int>,ny=<int>
    while (std::getline(in, line) && line.empty()) {}
    {
        std::string h = line;
        std::replace(h.begin(), h.end(), ',', ' ');
        std::replace(h.begin(), h.end(), '=', ' ');
        std::istringstream ss(h);
        std::string kx, ky;
        if (!(ss >> kx >> nx >> ky >> ny) || kx != "nx" || ky != "ny")
            throw std::invalid_argument("mu grid: header must name dimensions, nx=..,ny=..");
    }
    if (nx < 2 || ny < 2) throw std::invalid_argument("mu grid: need nx, ny >= 2");

    struct Row { double x, y; Complex mu; };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (std::isalpha(static_cast<unsigned char>(line[0]))) continue;  // column header
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, y, re, im;
        if (ss >> x >> y >> re >> im) rows.push_back({x, y, Complex(re, im)});
    }
    if (rows.size() != static_cast<std::size_t>(nx) * ny)
        throw std::invalid_argument("mu grid: row count does not match nx*ny");

    auto axis = [](std::vector<double> v, const char* name) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                v.end());
        if (v.size() < 2) throw std::invalid_argument(std::string("mu grid: degenerate ") + name);
        const double d = v[1] - v[0];
        for (std::size_t i = 1; i < v.size(); ++i)
            if (std::abs(v[i] - v[i - 1] - d) > 1e-9 * std::abs(d))
                throw std::invalid_argument(std::string("mu grid: non-uniform ") + name);
        return v;
    };
    std::vector<double> xs, ys;
    xs.reserve(rows.size());
    ys.reserve(rows.size());
    for (const Row& r : rows) { xs.push_back(r.x); ys.push_back(r.y); }
    xs = axis(std::move(xs), "x axis");
    ys = axis(std::move(ys), "y axis");
    if (static_cast<int>(xs.size()) != nx || static_cast<int>(ys.size()) != ny)
        throw std::invalid_argument("mu grid: lattice does not match declared dimensions");

    auto data = std::make_shared<GridData>();
    data->nx = nx;
    data->ny = ny;
    data->x0 = xs.front();
    data->y0 = ys.front();
    data->dx = (xs.back() - xs.front()) / (nx - 1);
    data->dy = (ys.back() - ys.front()) / (ny - 1);
    data->values.setZero(nx, ny);
    double k = 0.0;
    for (const Row& r : rows) {
        const double m = std::abs(r.mu);
        if (m >= 1.0)
            throw std::invalid_argument("mu grid: sample with |mu| >= 1 rejected at load");
        k = std::max(k, m);
        const int ix = static_cast<int>(std::lround((r.x - data->x0) / data->dx));
        const int iy = static_cast<int>(std::lround((r.y - data->y0) / data->dy));
        data->values(ix, iy) = r.mu;
    }
    BeltramiField f(MuFamily::grid, k);
    f.grid_ = std::move(data);
    return f;
}

Complex BeltramiField::operator()(Complex z) const {
    const double r2 = std::norm(z);
    if (r2 >= 1.0) return {0.0, 0.0};  // extension by zero; circle evaluates to 0
    const Complex phase2 = r2 > 0.0 ? z * z / r2 : Complex(1.0, 0.0);  // e^{2 i theta}
    switch (family_) {
        case MuFamily::zero:
            return {0.0, 0.0};
        case MuFamily::constant:
            return c_;
        case MuFamily::power:
            return p1_ * std::pow(1.0 - r2, p2_) * phase2 * std::polar(1.0, p3_);
        case MuFamily::radial_stretch:
            return p1_ * phase2;
        case MuFamily::radial_stretch_ring:
            return r2 >= p2_ * p2_ ? p1_ * phase2 : Complex(0.0, 0.0);
        case MuFamily::angular_stretch: {
            const double slope = z.imag() >= 0.0 ? p1_ : 2.0 - p1_;
            return phase2 * ((1.0 - slope) / (1.0 + slope));
        }
        case MuFamily::grid:
            return grid_->eval(z);
    }
    return {0.0, 0.0};
}

std::string BeltramiField::describe() const {
    std::ostringstream ss;
    switch (family_) {
        case MuFamily::zero: ss << "zero"; break;
        case MuFamily::constant:
            ss << "constant(" << c_.real() << (c_.imag() < 0 ? "" : "+") << c_.imag() << "i)";
            break;
        case MuFamily::power: ss << "power(c=" << p1_ << ", alpha=" << p2_ << ")"; break;
        case MuFamily::radial_stretch: ss << "radial_stretch(k=" << p1_ << ")"; break;
        case MuFamily::radial_stretch_ring:
            ss << "radial_stretch_ring(k=" << p1_ << ", rho=" << p2_ << ")";
            break;
        case MuFamily::angular_stretch: ss << "angular_stretch(a=" << p1_ << ")"; break;
        case MuFamily::grid: ss << "grid"; break;
    }
    return ss.str();
}

std::vector<double> BeltramiField::radial_jumps() const {
    if (family_ == MuFamily::radial_stretch_ring) return {p2_};
    return {};
}

std::vector<double> BeltramiField::angular_jumps() const {
    if (family_ == MuFamily::angular_stretch) return {0.0, kPi};
    return {};
}

// ---------------------------------------------------------------------------
// Shell quadrature engine
// ---------------------------------------------------------------------------

namespace {

constexpr double kAbsTol = 1e-6;
constexpr double kRelTol = 1e-4;
constexpr double kTiny = 1e-250;

// Angular integral of f over [lo, hi] with interior jump azimuths handled as
// panel breakpoints (all azimuths taken mod 2*pi relative to lo).
double angular_integral(const std::function<double(double)>& f, double lo, double hi,
                        const std::vector<double>& breaks) {
    std::vector<double> cuts;
    for (double b : breaks) {
        double t = std::fmod(b - lo, kTwoPi);
        if (t < 0) t += kTwoPi;
        const double pos = lo + t;
        if (pos > lo && pos < hi) cuts.push_back(pos);
    }
    return gauss_piecewise(f, lo, hi, std::move(cuts), 4, 10);
}

struct ShellOutcome {
    double value = 0.0;
    double tolerance = 0.0;
    bool converged = false;
    bool diverged = false;
    std::vector<double> shells;
};

// Accumulate dyadic shell integrals until the geometric tail estimate drops
// below tolerance, the trend is non-decreasing (divergence), or the budget runs out.
ShellOutcome run_shells(const std::function<double(int)>& shell_integral) {
    ShellOutcome out;
    double partial = 0.0;
    for (int j = 0; j <= kShellBudget; ++j) {
        const double v = shell_integral(j);
        out.shells.push_back(v);
        partial += v;
        const double tol_stop = std::max(kAbsTol, kRelTol * std::abs(partial));
        if (j >= 1) {
            const double prev = out.shells[j - 1];
            if (prev > kTiny && v > kTiny) {
                const double rho = v / prev;
                if (rho < 0.95) {
                    const double tail = v * rho / (1.0 - rho);
                    if (tail < 0.5 * tol_stop) {
                        out.value = partial + tail;
                        out.tolerance = tol_stop;
                        out.converged = true;
                        return out;
                    }
                }
            }
        }
    }
    // budget exhausted: classify by the trailing trend
    const int n = static_cast<int>(out.shells.size());
    double ratio_sum = 0.0;
    int ratio_count = 0;
    for (int j = std::max(1, n - 5); j < n; ++j) {
        if (out.shells[j - 1] > kTiny) {
            ratio_sum += out.shells[j] / out.shells[j - 1];
            ++ratio_count;
        }
    }
    const double tol_stop = std::max(kAbsTol, kRelTol * std::abs(partial));
    if (ratio_count == 0) {
        // nothing ever accumulated: the integrand is zero
        out.value = partial;
        out.tolerance = tol_stop;
        out.converged = std::abs(partial) <= tol_stop;
        return out;
    }
    if (ratio_sum / ratio_count >= 0.9999) {
        out.value = std::numeric_limits<double>::infinity();
        out.tolerance = tol_stop;
        out.diverged = true;
        return out;
    }
    out.value = partial;  // still shrinking, but too slowly to certify
    out.tolerance = tol_stop;
    return out;
}

// Integral of |mu|^p dsigma over an origin ring [ra, rb], optionally restricted
// to the disc cap D(zeta0, rc) with |zeta0| = 1.
double origin_ring_integral(const BeltramiField& field, double p, double ra, double rb,
                            bool capped, double beta, double rc) {
    std::vector<double> radial_cuts;
    for (double rj : field.radial_jumps())
        if (rj > ra && rj < rb) radial_cuts.push_back(rj);
    if (capped) {
        const double tangent = 1.0 - rc;  // cap first touches this origin circle
        if (tangent > ra && tangent < rb) radial_cuts.push_back(tangent);
    }
    const std::vector<double> az = field.angular_jumps();

    auto radial_integrand = [&](double r) -> double {
        const double weight = r / sqr(1.0 - r * r);
        auto f = [&](double theta) { return std::pow(std::abs(field(std::polar(r, theta))), p); };
        double lo = 0.0, hi = kTwoPi;
        if (capped) {
            const double cosw = (r * r + 1.0 - rc * rc) / (2.0 * r);
            if (cosw >= 1.0) return 0.0;
            const double w = std::acos(std::max(cosw, -1.0));
            lo = beta - w;
            hi = beta + w;
        }
        return weight * angular_integral(f, lo, hi, az);
    };
    return gauss_piecewise(radial_integrand, ra, rb, std::move(radial_cuts), 2, 16);
}

}  // namespace

PNormResult p_norm(const BeltramiField& field, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("p_norm: need p > 0");
    auto shell = [&](int j) -> double {
        if (j == 0) return origin_ring_integral(field, p, 1e-12, 0.5, false, 0.0, 0.0);
        const double ra = 1.0 - std::ldexp(1.0, -j);       // 1 - 2^{-j}
        const double rb = 1.0 - std::ldexp(1.0, -j - 1);   // 1 - 2^{-j-1}
        return origin_ring_integral(field, p, ra, rb, false, 0.0, 0.0);
    };
    ShellOutcome out = run_shells(shell);
    return PNormResult{p, out.value, out.tolerance, out.converged, out.diverged,
                       std::move(out.shells)};
}

PNormResult p_norm_near_boundary_point(const BeltramiField& field, double p, Complex zeta0,
                                       double r) {
    if (!(p > 0.0)) throw std::invalid_argument("p_norm_near_boundary_point: need p > 0");
    if (std::abs(std::abs(zeta0) - 1.0) > 1e-12)
        throw std::invalid_argument("p_norm_near_boundary_point: zeta0 must lie on the circle");
    if (!(r > 0.0)) throw std::invalid_argument("p_norm_near_boundary_point: need r > 0");
    const double beta = std::arg(zeta0);
    auto shell = [&](int j) -> double {
        if (j == 0) return origin_ring_integral(field, p, 1e-12, 0.5, true, beta, r);
        const double ra = 1.0 - std::ldexp(1.0, -j);
        const double rb = 1.0 - std::ldexp(1.0, -j - 1);
        return origin_ring_integral(field, p, ra, rb, true, beta, r);
    };
    ShellOutcome out = run_shells(shell);
    return PNormResult{p, out.value, out.tolerance, out.converged, out.diverged,
                       std::move(out.shells)};
}

PNormResult twb_integral(const BeltramiField& field, Complex zeta0, double r) {
    if (std::abs(std::abs(zeta0) - 1.0) > 1e-12)
        throw std::invalid_argument("twb_integral: zeta0 must lie on the circle");
    if (!(r > 0.0)) throw std::invalid_argument("twb_integral: need r > 0");
    const double beta = std::arg(zeta0);
    std::vector<double> jump_radii = field.radial_jumps();
    const std::vector<double> az = field.angular_jumps();

    // distance-to-zeta0 values where the arc topology can change
    std::vector<double> rho_breaks;
    for (double rj : jump_radii) {
        rho_breaks.push_back(std::abs(1.0 - rj));
        rho_breaks.push_back(1.0 + rj);
    }

    auto rho_integrand = [&](double rho) -> double {
        if (rho >= 2.0) return 0.0;
        const double w = std::acos(std::min(1.0, rho / 2.0));  // inside-disc arc half-width
        if (w <= 0.0) return 0.0;
        const double mid = beta + kPi;
        std::vector<double> phi_cuts;
        for (double rj : jump_radii) {
            const double c = (rj * rj - 1.0 - rho * rho) / (2.0 * rho);
            if (c > -1.0 && c < 1.0) {
                const double d = std::acos(c);
                phi_cuts.push_back(beta + d);
                phi_cuts.push_back(beta - d);
            }
        }
        // crossings of the horizontal jump rays (angular-discontinuity fields)
        if (!az.empty() && std::abs(zeta0.imag()) <= rho) {
            const double s = std::asin(std::clamp(-zeta0.imag() / rho, -1.0, 1.0));
            phi_cuts.push_back(s);
            phi_cuts.push_back(kPi - s);
        }
        auto f = [&](double phi) { return std::abs(field(zeta0 + std::polar(rho, phi))); };
        return angular_integral(f, mid - w, mid + w, phi_cuts) / rho;
    };

    auto shell = [&](int j) -> double {
        const double rb = r * std::ldexp(1.0, -j);
        const double ra = 0.5 * rb;
        std::vector<double> cuts;
        for (double c : rho_breaks)
            if (c > ra && c < rb) cuts.push_back(c);
        return gauss_piecewise(rho_integrand, ra, rb, std::move(cuts), 2, 16);
    };
    ShellOutcome out = run_shells(shell);
    return PNormResult{1.0, out.value, out.tolerance, out.converged, out.diverged,
                       std::move(out.shells)};
}

bool boundary_kernel_bound_holds(Complex z, Complex zeta0) {
    return sqr(1.0 - std::norm(z)) < 4.0 * std::norm(z - zeta0);
}

TpVerdict classify_tp(const BeltramiField& field, double p) {
    const PNormResult res = p_norm(field, p);
    if (res.converged) return TpVerdict::in_tp;
    if (res.diverged) return TpVerdict::not_in_tp;
    return TpVerdict::inconclusive;
}

}  // namespace qcmod
