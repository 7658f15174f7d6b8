#include "qcmod/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qcmod {

// ---------------------------------------------------------------------------
// JordanCurve
// ---------------------------------------------------------------------------

JordanCurve::JordanCurve(std::vector<Complex> points) : pts_(std::move(points)) {
    if (pts_.size() < 16) throw GeometryError("JordanCurve: need at least 16 samples");
    const std::size_t n = pts_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Complex a = pts_[i];
        const Complex b = pts_[(i + 1) % n];
        const Complex c = pts_[(i + 2) % n];
        const Complex u = b - a, v = c - b;
        const double lu = std::abs(u), lv = std::abs(v);
        if (lu < 1e-300) throw GeometryError("JordanCurve: degenerate (zero-length) segment");
        const double cross = u.real() * v.imag() - u.imag() * v.real();
        const double dot = u.real() * v.real() + u.imag() * v.imag();
        // consecutive segments fold back onto each other: collapsed corner angle
        if (dot < 0.0 && std::abs(cross) < 1e-12 * lu * lv)
            throw GeometryError("JordanCurve: consecutive segments self-intersect");
    }
    if (signed_area() <= 0.0)
        throw GeometryError("JordanCurve: curve must be positively oriented");
}

double JordanCurve::signed_area() const {
    const std::size_t n = pts_.size();
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex a = pts_[i], b = pts_[(i + 1) % n];
        terms[i] = a.real() * b.imag() - b.real() * a.imag();
    }
    return 0.5 * pairwise_sum(terms);
}

double JordanCurve::perimeter() const {
    const std::size_t n = pts_.size();
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) terms[i] = std::abs(pts_[(i + 1) % n] - pts_[i]);
    return pairwise_sum(terms);
}

int JordanCurve::winding_number(Complex w) const {
    const std::size_t n = pts_.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Complex a = pts_[i] - w, b = pts_[(i + 1) % n] - w;
        total += std::arg(b / a);
    }
    return static_cast<int>(std::lround(total / kTwoPi));
}

JordanCurve JordanCurve::resample_arclength(int m) const {
    if (m < 16) throw std::invalid_argument("resample_arclength: need m >= 16");
    const std::size_t n = pts_.size();
    std::vector<double> cum(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        cum[i + 1] = cum[i] + std::abs(pts_[(i + 1) % n] - pts_[i]);
    const double total = cum[n];
    std::vector<Complex> out(m);
    std::size_t seg = 0;
    for (int k = 0; k < m; ++k) {
        const double target = total * k / m;
        while (seg + 1 < n && cum[seg + 1] < target) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double t = len > 0.0 ? (target - cum[seg]) / len : 0.0;
        out[k] = pts_[seg] + t * (pts_[(seg + 1) % n] - pts_[seg]);
    }
    return JordanCurve(std::move(out));
}

JordanCurve JordanCurve::circle(Complex center, double radius, int n) {
    std::vector<Complex> pts(n);
    for (int k = 0; k < n; ++k) pts[k] = center + std::polar(radius, kTwoPi * k / n);
    return JordanCurve(std::move(pts));
}

JordanCurve JordanCurve::ellipse(Complex center, double semi_a, double semi_b, int n) {
    std::vector<Complex> pts(n);
    for (int k = 0; k < n; ++k) {
        const double t = kTwoPi * k / n;
        pts[k] = center + Complex(semi_a * std::cos(t), semi_b * std::sin(t));
    }
    return JordanCurve(std::move(pts));
}

JordanCurve JordanCurve::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open curve file: " + path);
    std::vector<Complex> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, y;
        if (ss >> x >> y) pts.emplace_back(x, y);
    }
    return JordanCurve(std::move(pts));
}

void JordanCurve::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write curve file: " + path);
    out.precision(17);
    out << "x,y\n";
    for (const Complex& p : pts_) out << p.real() << ',' << p.imag() << '\n';
}

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

Complex interp_complex(const CartesianField& field, Complex z) {
    const CartesianGrid& g = field.grid;
    const double L = g.half_width, h = g.cell();
    if (z.real() < -L || z.real() > L || z.imag() < -L || z.imag() > L)
        throw std::domain_error("interp_complex: query outside grid hull");
    const double fx = (z.real() + L) / h;
    const double fy = (z.imag() + L) / h;
    int ix = static_cast<int>(std::floor(fx));
    int iy = static_cast<int>(std::floor(fy));
    ix = std::clamp(ix, 0, g.n - 1);
    iy = std::clamp(iy, 0, g.n - 1);
    const double tx = fx - ix, ty = fy - iy;
    const int ix1 = (ix + 1) % g.n, iy1 = (iy + 1) % g.n;  // periodic seam cell
    const Complex v00 = field.values(ix, iy), v10 = field.values(ix1, iy);
    const Complex v01 = field.values(ix, iy1), v11 = field.values(ix1, iy1);
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 +
           tx * ty * v11;
}

Complex interp_complex(const PolarField& field, Complex z) {
    const PolarAnnulusGrid& g = field.grid;
    const Complex rel = z - g.spec.center;
    const double r = std::abs(rel);
    if (r < g.spec.r_inner * (1 - 1e-12) || r > g.spec.r_outer * (1 + 1e-12))
        throw std::domain_error("interp_complex: query outside annulus");
    const double s = std::log(std::max(r, g.spec.r_inner));
    double theta = std::arg(rel);
    if (theta < 0) theta += kTwoPi;
    const double fi = std::clamp((s - g.s_inner()) / g.ds(), 0.0, double(g.n_radial));
    const double fj = theta / g.dtheta();
    int i = std::min(static_cast<int>(std::floor(fi)), g.n_radial - 1);
    int j = static_cast<int>(std::floor(fj)) % g.n_angular;
    const double ti = fi - i, tj = fj - std::floor(fj);
    const int j1 = (j + 1) % g.n_angular;
    const Complex v00 = field.values(i, j), v10 = field.values(i + 1, j);
    const Complex v01 = field.values(i, j1), v11 = field.values(i + 1, j1);
    return (1 - ti) * (1 - tj) * v00 + ti * (1 - tj) * v10 + (1 - ti) * tj * v01 +
           ti * tj * v11;
}

// ---------------------------------------------------------------------------
// Overlap quadrature
// ---------------------------------------------------------------------------

namespace {

struct OverlapBuilder {
    Complex center;
    OverlapMeasure measure;
    int max_depth;
    std::vector<Complex> nodes;
    std::vector<double> weights;

    double cell_weight(double s0, double s1, double phi0, double phi1) const {
        if (measure == OverlapMeasure::log_polar) return (s1 - s0) * (phi1 - phi0);
        const double r0 = std::exp(s0), r1 = std::exp(s1);
        return 0.5 * (r1 * r1 - r0 * r0) * (phi1 - phi0);
    }

    Complex cell_node(double s0, double s1, double phi0, double phi1) const {
        return center + std::polar(std::exp(0.5 * (s0 + s1)), 0.5 * (phi0 + phi1));
    }

    // -1 fully outside unit disc, +1 fully inside, 0 straddling (conservative)
    int classify(double s0, double s1, double phi0, double phi1) const {
        const double r1 = std::exp(s1);
        const double diam = (r1 - std::exp(s0)) + r1 * (phi1 - phi0);
        double lo = 1e300, hi = -1e300;
        for (double s : {s0, s1})
            for (double phi : {phi0, phi1}) {
                const double d = std::abs(center + std::polar(std::exp(s), phi));
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        if (lo - diam > 1.0) return -1;
        if (hi + diam < 1.0) return +1;
        return 0;
    }

    void visit(double s0, double s1, double phi0, double phi1, int depth) {
        const int c = classify(s0, s1, phi0, phi1);
        if (c < 0) return;
        if (c > 0) {
            nodes.push_back(cell_node(s0, s1, phi0, phi1));
            weights.push_back(cell_weight(s0, s1, phi0, phi1));
            return;
        }
        if (depth >= max_depth) {
            const Complex mid = cell_node(s0, s1, phi0, phi1);
            if (std::abs(mid) < 1.0) {
                nodes.push_back(mid);
                weights.push_back(cell_weight(s0, s1, phi0, phi1));
            }
            return;
        }
        const double sm = 0.5 * (s0 + s1), pm = 0.5 * (phi0 + phi1);
        visit(s0, sm, phi0, pm, depth + 1);
        visit(sm, s1, phi0, pm, depth + 1);
        visit(s0, sm, pm, phi1, depth + 1);
        visit(sm, s1, pm, phi1, depth + 1);
    }
};

}  // namespace

QuadratureRule2D annulus_disc_overlap(const AnnulusSpec& annulus, OverlapMeasure measure,
                                      int n_radial, int n_angular, int max_depth) {
    OverlapBuilder b{annulus.center, measure, max_depth, {}, {}};
    const double s_in = std::log(annulus.r_inner), s_out = std::log(annulus.r_outer);
    const double ds = (s_out - s_in) / n_radial;
    const double dphi = kTwoPi / n_angular;
    for (int i = 0; i < n_radial; ++i)
        for (int j = 0; j < n_angular; ++j)
            b.visit(s_in + i * ds, s_in + (i + 1) * ds, j * dphi, (j + 1) * dphi, 0);
    return QuadratureRule2D{std::move(b.nodes), std::move(b.weights)};
}

}  // namespace qcmod
