#include "qcmod/beltrami_solver.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>

namespace qcmod {

// ---------------------------------------------------------------------------
// Moebius
// ---------------------------------------------------------------------------

namespace {

struct Mat2c {
    Complex a, b, c, d;

    Mat2c mul(const Mat2c& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2c inverse() const { return {d, -b, -c, a}; }
};

// matrix of the map sending (w1, w2, w3) -> (0, 1, inf)
Mat2c to_standard(Complex w1, Complex w2, Complex w3) {
    return {w2 - w3, -w1 * (w2 - w3), w2 - w1, -w3 * (w2 - w1)};
}

}  // namespace

MobiusTransform MobiusTransform::three_point(Complex w1, Complex w2, Complex w3, Complex t1,
                                             Complex t2, Complex t3) {
    const Mat2c m = to_standard(t1, t2, t3).inverse().mul(to_standard(w1, w2, w3));
    const Complex scale = std::sqrt(m.a * m.d - m.b * m.c);
    if (std::abs(scale) == 0.0)
        throw NumericError("MobiusTransform: degenerate three-point data");
    return MobiusTransform{m.a / scale, m.b / scale, m.c / scale, m.d / scale};
}

// ---------------------------------------------------------------------------
// Spectral transforms on the periodic box
// ---------------------------------------------------------------------------

namespace {

// In-place 2-D FFT, columns then rows. forward: no scaling; inverse: 1/N^2.
void fft2(Eigen::MatrixXcd& A, bool inverse) {
    Eigen::FFT<double> fft;
    const int n = static_cast<int>(A.rows());
    Eigen::VectorXcd in(n), out(n);
    for (int j = 0; j < n; ++j) {
        in = A.col(j);
        if (inverse)
            fft.inv(out, in);
        else
            fft.fwd(out, in);
        A.col(j) = out;
    }
    for (int i = 0; i < n; ++i) {
        in = A.row(i).transpose();
        if (inverse)
            fft.inv(out, in);
        else
            fft.fwd(out, in);
        A.row(i) = out.transpose();
    }
}

int wavenumber(int k, int n) { return k < n / 2 ? k : k - n; }

// Beurling multiplier conj(kappa)/kappa; Cauchy multiplier -2i/kappa with
// kappa = (pi/L)(m1 + i m2); both zero on the mean mode.
void apply_multiplier(Eigen::MatrixXcd& H, double L, bool beurling) {
    const int n = static_cast<int>(H.rows());
    const double scale = kPi / L;
    for (int kx = 0; kx < n; ++kx) {
        const int m1 = wavenumber(kx, n);
        for (int ky = 0; ky < n; ++ky) {
            const int m2 = wavenumber(ky, n);
            if (m1 == 0 && m2 == 0) {
                H(kx, ky) = Complex(0, 0);
                continue;
            }
            const Complex kappa(scale * m1, scale * m2);
            H(kx, ky) *= beurling ? std::conj(kappa) / kappa : Complex(0, -2) / kappa;
        }
    }
}

Eigen::MatrixXcd spectral_apply(const Eigen::MatrixXcd& h, double L, bool beurling) {
    Eigen::MatrixXcd H = h;
    fft2(H, false);
    apply_multiplier(H, L, beurling);
    fft2(H, true);
    return H;
}

}  // namespace

// ---------------------------------------------------------------------------
// QcSolution
// ---------------------------------------------------------------------------

QcSolution::QcSolution(BeltramiField field, CartesianGrid grid, Eigen::MatrixXcd values,
                       std::vector<double> residuals, MobiusTransform normalization,
                       std::optional<CircleMap> trace, double trace_defect)
    : field_(std::move(field)),
      grid_(grid),
      values_(std::move(values)),
      sampled_(grid, values_),
      residuals_(std::move(residuals)),
      normalization_(normalization),
      trace_(std::move(trace)),
      trace_defect_(trace_defect) {}

const CircleMap& QcSolution::trace() const {
    if (!trace_)
        throw TraceQualityError("boundary trace: radial defect " +
                                std::to_string(trace_defect_) + " exceeds 1e-2");
    return *trace_;
}

double QcSolution::min_interior_jacobian() const {
    const int n = grid_.n;
    const double inv2h = 1.0 / (2.0 * grid_.cell());
    double jmin = 1e300;
    for (int i = 1; i < n - 1; ++i)
        for (int j = 1; j < n - 1; ++j) {
            const Complex fx = (values_(i + 1, j) - values_(i - 1, j)) * inv2h;
            const Complex fy = (values_(i, j + 1) - values_(i, j - 1)) * inv2h;
            const Complex dz = 0.5 * (fx - Complex(0, 1) * fy);
            const Complex dzb = 0.5 * (fx + Complex(0, 1) * fy);
            jmin = std::min(jmin, std::norm(dz) - std::norm(dzb));
        }
    return jmin;
}

double QcSolution::exterior_dbar_residual(double margin) const {
    const int n = grid_.n;
    const double inv2h = 1.0 / (2.0 * grid_.cell());
    const double edge = grid_.half_width - margin;
    double worst = 0.0;
    for (int i = 1; i < n - 1; ++i)
        for (int j = 1; j < n - 1; ++j) {
            const Complex z = grid_.point(i, j);
            if (std::abs(z) < 1.0 + margin) continue;
            if (std::abs(z.real()) > edge || std::abs(z.imag()) > edge) continue;
            const Complex fx = (values_(i + 1, j) - values_(i - 1, j)) * inv2h;
            const Complex fy = (values_(i, j + 1) - values_(i, j - 1)) * inv2h;
            worst = std::max(worst, 0.5 * std::abs(fx + Complex(0, 1) * fy));
        }
    return worst;
}

double QcSolution::interior_dbar_floor(double radius_cap) const {
    const int n = grid_.n;
    const double inv2h = 1.0 / (2.0 * grid_.cell());
    std::vector<double> residuals;
    for (int i = 1; i < n - 1; ++i)
        for (int j = 1; j < n - 1; ++j) {
            const Complex z = grid_.point(i, j);
            if (std::abs(z) > radius_cap) continue;
            const Complex fx = (values_(i + 1, j) - values_(i - 1, j)) * inv2h;
            const Complex fy = (values_(i, j + 1) - values_(i, j - 1)) * inv2h;
            const Complex dzb = 0.5 * (fx + Complex(0, 1) * fy);
            const Complex dz = 0.5 * (fx - Complex(0, 1) * fy);
            residuals.push_back(std::abs(dzb - field_(z) * dz));
        }
    std::sort(residuals.begin(), residuals.end());
    if (residuals.empty()) return 0.0;
    return residuals[static_cast<std::size_t>(0.95 * (residuals.size() - 1))];
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

namespace {

struct TraceResult {
    std::optional<CircleMap> map;
    double defect = 0.0;
};

// Catmull-Rom bicubic sampling of the grid map, periodic across the box; the
// smoother kernel keeps the fine-scale interpolation error out of the Laurent
// modes that the trace continuation amplifies.
Complex sample_bicubic(const CartesianField& F, Complex z) {
    const CartesianGrid& g = F.grid;
    const int n = g.n;
    const double h = g.cell();
    const double fx = (z.real() + g.half_width) / h;
    const double fy = (z.imag() + g.half_width) / h;
    const int ix = static_cast<int>(std::floor(fx)), iy = static_cast<int>(std::floor(fy));
    const double tx = fx - ix, ty = fy - iy;
    auto cr = [](double t, const Complex* v) {
        return v[1] + 0.5 * t *
                          (v[2] - v[0] +
                           t * (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3] +
                                t * (3.0 * (v[1] - v[2]) + v[3] - v[0])));
    };
    Complex rows[4];
    for (int dy = -1; dy <= 2; ++dy) {
        Complex vals[4];
        const int jy = ((iy + dy) % n + n) % n;
        for (int dx = -1; dx <= 2; ++dx)
            vals[dx + 1] = F.values(((ix + dx) % n + n) % n, jy);
        rows[dy + 1] = cr(tx, vals);
    }
    return cr(ty, rows);
}

// Exterior-side evaluation of F on the unit circle: sample on |z| = 1 + 2h,
// split off the principal part z, continue the low negative Laurent modes down
// to radius 1 (amplification-capped), carry the remainder unchanged, project.
TraceResult trace_from_exterior(const CartesianField& F, int n_samples) {
    const double h = F.grid.cell();
    const double R = 1.0 + 2.0 * h;
    int M = 2048;
    while (M < 2 * n_samples) M *= 2;

    Eigen::VectorXcd g(M);
    for (int j = 0; j < M; ++j) {
        const Complex w = std::polar(R, kTwoPi * j / M);
        g(j) = sample_bicubic(F, w) - w;
    }
    Eigen::FFT<double> fft;
    Eigen::VectorXcd coeff(M);
    fft.fwd(coeff, g);
    coeff /= double(M);  // coeff(k) multiplies e^{+i k theta}, k as stored index

    // continue modes e^{-i m theta}, m = 1..m_max, from radius R to radius 1;
    // higher modes are carried from radius R unchanged. The cap trades mode
    // truncation against amplified interpolation noise.
    const double amp_cap = 30.0;
    const int m_max = std::min(M / 2 - 1, static_cast<int>(std::log(amp_cap) / std::log(R)));
    for (int m = 1; m <= m_max; ++m) coeff(M - m) *= std::pow(R, m);

    Eigen::VectorXcd values(M);
    fft.inv(values, coeff);
    values *= double(M);

    const int stride = M / n_samples;
    std::vector<Complex> samples(n_samples);
    double defect = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const Complex z = std::polar(1.0, kTwoPi * k / n_samples);
        const Complex raw = z + values(k * stride);
        defect = std::max(defect, std::abs(std::abs(raw) - 1.0));
        samples[k] = raw / std::abs(raw);
    }
    if (defect > 1e-2) return TraceResult{std::nullopt, defect};
    return TraceResult{CircleMap(std::move(samples), 2e-15), defect};
}

}  // namespace

QcSolution solve_extended(const BeltramiField& field, const CartesianGrid& grid,
                          const SolveOptions& opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_extended: need tol > 0");
    if (field.sup_bound() > 0.9)
        throw std::invalid_argument("solve_extended: coefficients with k > 0.9 unsupported");
    const int n = grid.n;
    const double L = grid.half_width;
    const double cell_area = sqr(grid.cell());

    std::vector<double> jump_radii = field.radial_jumps();
    jump_radii.push_back(1.0);

    // nodes whose cell straddles a coefficient jump circle get the cell average
    // of mu~ (4x4 subsamples); plain staircase sampling leaves grid-aligned
    // wiggles near the circle's axis tangency points
    Eigen::MatrixXcd mu(n, n);
    Eigen::MatrixXd chi(n, n);  // disc indicator at nodes
    const double cell = grid.cell();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Complex z = grid.point(i, j);
            const double r = std::abs(z);
            bool near_jump = false;
            for (double rj : jump_radii) near_jump |= std::abs(r - rj) < cell;
            if (near_jump) {
                Complex acc(0, 0);
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b)
                        acc += field(z + Complex((a - 1.5) * cell / 4.0,
                                                 (b - 1.5) * cell / 4.0));
                mu(i, j) = acc / 16.0;
            } else {
                mu(i, j) = field(z);
            }
            chi(i, j) = r < 1.0 ? 1.0 : 0.0;
        }
    const double chi_count = chi.sum();

    // The periodic transforms only see the mean-zero part of h. The mean is
    // carried by a disc-indicator multiple, whose free-space Cauchy transform
    // is zbar inside / 1/z outside and whose Beurling transform vanishes
    // inside the disc, so the iteration needs only the mean-zero piece.
    auto split_mean = [&](const Eigen::MatrixXcd& h, Complex& a) {
        a = h.sum() / chi_count;
        return Eigen::MatrixXcd(h - a * chi.cast<Complex>());
    };

    Eigen::MatrixXcd h = mu;
    std::vector<double> residuals;
    bool converged = false;
    int rising = 0;
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        Complex a;
        const Eigen::MatrixXcd Sh = spectral_apply(split_mean(h, a), L, /*beurling=*/true);
        Eigen::MatrixXcd h_next = mu.cwiseProduct(Sh) + mu;
        const double res = std::sqrt((h_next - h).cwiseAbs2().sum() * cell_area);
        residuals.push_back(res);
        h.swap(h_next);
        if (res <= opts.tol) {
            converged = true;
            break;
        }
        if (residuals.size() >= 2 && res > residuals[residuals.size() - 2]) {
            if (++rising >= 3)
                throw ConvergenceError("solve_extended: iteration stopped contracting",
                                       residuals);
        } else {
            rising = 0;
        }
    }
    if (!converged)
        throw ConvergenceError("solve_extended: max_iter exceeded before tolerance",
                               residuals);

    Complex a;
    Eigen::MatrixXcd F = spectral_apply(split_mean(h, a), L, /*beurling=*/false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Complex z = grid.point(i, j);
            const Complex chi_cauchy =
                std::abs(z) < 1.0 ? std::conj(z) : (std::abs(z) > 0.0 ? 1.0 / z : Complex(0, 0));
            F(i, j) += z + a * chi_cauchy;
        }

    // exact three-point normalization; the fixed points are grid nodes
    const int q = n / 4;
    const Complex f_one = F(3 * q, 2 * q);
    const Complex f_i = F(2 * q, 3 * q);
    const Complex f_minus = F(q, 2 * q);
    const MobiusTransform mob = MobiusTransform::three_point(
        f_one, f_i, f_minus, Complex(1, 0), Complex(0, 1), Complex(-1, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) F(i, j) = mob(F(i, j));

    CartesianField sampled(grid, F);
    TraceResult tr = trace_from_exterior(sampled, opts.trace_samples);
    return QcSolution(field, grid, std::move(F), std::move(residuals), mob,
                      std::move(tr.map), tr.defect);
}

CircleMap boundary_trace(const QcSolution& solution, int n_samples) {
    if (solution.has_trace() && n_samples == solution.trace().size()) return solution.trace();
    CartesianField sampled(solution.grid(), solution.values());
    TraceResult tr = trace_from_exterior(sampled, n_samples);
    if (!tr.map)
        throw TraceQualityError("boundary trace: radial defect " + std::to_string(tr.defect) +
                                " exceeds 1e-2");
    return *tr.map;
}

std::vector<ConformalitySample> conformality_probe(const QcSolution& solution, Complex zeta0,
                                                   const std::vector<double>& radii) {
    if (std::abs(std::abs(zeta0) - 1.0) > 1e-12)
        throw std::invalid_argument("conformality_probe: zeta0 must lie on the circle");
    const double h = solution.grid().cell();
    const Complex f0 = solution.map(zeta0);
    constexpr int kDirections = 64;
    std::vector<ConformalitySample> out;
    out.reserve(radii.size());
    for (double rho : radii) {
        if (rho < 4.0 * h)
            throw ResolutionError("conformality_probe: radius below 4 grid cells");
        std::vector<Complex> q(kDirections);
        Complex mean(0, 0);
        for (int d = 0; d < kDirections; ++d) {
            const Complex dir = std::polar(rho, kTwoPi * d / kDirections);
            q[d] = (solution.map(zeta0 + dir) - f0) / dir;
            mean += q[d];
        }
        mean /= double(kDirections);
        double lo = 1e300, hi = 0.0, alo = 1e300, ahi = -1e300;
        for (const Complex& v : q) {
            lo = std::min(lo, std::abs(v));
            hi = std::max(hi, std::abs(v));
            const double a = std::arg(v / mean);
            alo = std::min(alo, a);
            ahi = std::max(ahi, a);
        }
        out.push_back({rho, hi / std::max(lo, 1e-300), ahi - alo});
    }
    return out;
}

}  // namespace qcmod
