#include "qcmod/module_calculus.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>

#include "qcmod/quadrature.hpp"

namespace qcmod {

Eigen::Matrix2d distortion_tensor(Complex mu) {
    const double a = mu.real(), b = mu.imag();
    const double m2 = a * a + b * b;
    Eigen::Matrix2d A;
    A << sqr(1.0 - a) + b * b, -2.0 * b, -2.0 * b, sqr(1.0 + a) + b * b;
    return A / (1.0 - m2);
}

DistortionTensorField::DistortionTensorField(const BeltramiField& field, PolarAnnulusGrid g)
    : grid(g) {
    values.reserve(static_cast<std::size_t>(grid.n_radial + 1) * grid.n_angular);
    for (int i = 0; i <= grid.n_radial; ++i)
        for (int j = 0; j < grid.n_angular; ++j)
            values.push_back(distortion_tensor(field(grid.point(i, j))));
}

double DistortionTensorField::max_det_deviation() const {
    double worst = 0.0;
    for (const auto& A : values) worst = std::max(worst, std::abs(A.determinant() - 1.0));
    return worst;
}

// ---------------------------------------------------------------------------
// Image-module energy solve
// ---------------------------------------------------------------------------

namespace {

// Distortion tensor rotated into the local polar frame at angle theta; the
// (log r, theta) energy density is grad_u^T Atilde grad_u with unit Jacobian.
Eigen::Matrix2d polar_frame_tensor(const BeltramiField& field, Complex center, double s,
                                   double theta) {
    const Complex z = center + std::polar(std::exp(s), theta);
    const Eigen::Matrix2d A = distortion_tensor(field(z));
    Eigen::Matrix2d R;
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return R.transpose() * A * R;
}

struct CellGeometry {
    double s0, s1, t0, t1;
};

// Does the coefficient jump anywhere inside the cell (unit circle, field jump
// circles, field jump rays)? Conservative test via corner values plus diameter.
bool cell_needs_subdivision(const BeltramiField& field, Complex center,
                            const CellGeometry& c) {
    const double r1 = std::exp(c.s1);
    const double diam = (r1 - std::exp(c.s0)) + r1 * (c.t1 - c.t0);
    double lo = 1e300, hi = -1e300, im_lo = 1e300, im_hi = -1e300;
    for (double s : {c.s0, c.s1})
        for (double t : {c.t0, c.t1}) {
            const Complex z = center + std::polar(std::exp(s), t);
            const double d = std::abs(z);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
            im_lo = std::min(im_lo, z.imag());
            im_hi = std::max(im_hi, z.imag());
        }
    auto crosses = [&](double radius) { return lo - diam <= radius && radius <= hi + diam; };
    if (crosses(1.0)) return true;
    for (double rj : field.radial_jumps())
        if (crosses(rj)) return true;
    if (!field.angular_jumps().empty() && im_lo - diam <= 0.0 && 0.0 <= im_hi + diam)
        return true;
    return false;
}

// 2x2 Gauss rule on the reference square, with shape gradients per point.
struct Q1Rule {
    struct Point {
        double xi, eta, w;
    };
    std::array<Point, 4> pts;

    Q1Rule() {
        const double g = 1.0 / std::sqrt(3.0);
        int k = 0;
        for (double xi : {-g, g})
            for (double eta : {-g, g}) pts[k++] = {xi, eta, 1.0};
    }
};

// Element stiffness for the cell, with optional m x m subcell quadrature.
Eigen::Matrix4d element_stiffness(const BeltramiField& field, Complex center,
                                  const CellGeometry& cell, int subdiv) {
    static const Q1Rule rule;
    const double hs = cell.s1 - cell.s0, ht = cell.t1 - cell.t0;
    Eigen::Matrix4d K = Eigen::Matrix4d::Zero();
    for (int a = 0; a < subdiv; ++a)
        for (int b = 0; b < subdiv; ++b) {
            const double ss0 = cell.s0 + hs * a / subdiv, ss1 = cell.s0 + hs * (a + 1) / subdiv;
            const double tt0 = cell.t0 + ht * b / subdiv, tt1 = cell.t0 + ht * (b + 1) / subdiv;
            const double jac = 0.25 * (ss1 - ss0) * (tt1 - tt0);
            for (const auto& gp : rule.pts) {
                const double s = 0.5 * (ss0 + ss1) + 0.5 * (ss1 - ss0) * gp.xi;
                const double t = 0.5 * (tt0 + tt1) + 0.5 * (tt1 - tt0) * gp.eta;
                const Eigen::Matrix2d At = polar_frame_tensor(field, center, s, t);
                // shape gradients on the *parent* cell, evaluated at (s, t)
                const double xs = (s - cell.s0) / hs, xt = (t - cell.t0) / ht;
                const double dNs[4] = {-(1 - xt) / hs, (1 - xt) / hs, -xt / hs, xt / hs};
                const double dNt[4] = {-(1 - xs) / ht, -xs / ht, (1 - xs) / ht, xs / ht};
                for (int p = 0; p < 4; ++p)
                    for (int q = 0; q < 4; ++q) {
                        const double e = At(0, 0) * dNs[p] * dNs[q] +
                                         At(0, 1) * (dNs[p] * dNt[q] + dNt[p] * dNs[q]) +
                                         At(1, 1) * dNt[p] * dNt[q];
                        K(p, q) += gp.w * jac * e;
                    }
            }
        }
    return K;
}

struct EnergySolve {
    double energy = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

EnergySolve solve_energy(const BeltramiField& field, const AnnulusSpec& annulus, int n_r,
                         int n_t, double cg_tol) {
    const double s_in = std::log(annulus.r_inner), s_out = std::log(annulus.r_outer);
    const double ds = (s_out - s_in) / n_r, dt = kTwoPi / n_t;
    const Complex center = annulus.center;

    // node numbering: radial level i in [0, n_r], angular j in [0, n_t)
    auto node = [&](int i, int j) { return i * n_t + ((j % n_t) + n_t) % n_t; };
    const int n_nodes = (n_r + 1) * n_t;
    auto unknown = [&](int id) {
        const int i = id / n_t;
        return (i >= 1 && i <= n_r - 1) ? id - n_t : -1;  // interior levels only
    };
    const int n_unknowns = (n_r - 1) * n_t;

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n_unknowns) * 9);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknowns);
    Eigen::VectorXd lift = Eigen::VectorXd::Zero(n_nodes);
    for (int j = 0; j < n_t; ++j) lift[node(n_r, j)] = 1.0;  // u = 1 on the outer circle

    std::vector<Eigen::Matrix4d> cell_K(static_cast<std::size_t>(n_r) * n_t);
    for (int i = 0; i < n_r; ++i)
        for (int j = 0; j < n_t; ++j) {
            const CellGeometry cell{s_in + i * ds, s_in + (i + 1) * ds, j * dt, (j + 1) * dt};
            const int subdiv = cell_needs_subdivision(field, center, cell) ? 4 : 1;
            const Eigen::Matrix4d K = element_stiffness(field, center, cell, subdiv);
            cell_K[static_cast<std::size_t>(i) * n_t + j] = K;
            const int ids[4] = {node(i, j), node(i + 1, j), node(i, j + 1),
                                node(i + 1, j + 1)};
            for (int p = 0; p < 4; ++p) {
                const int up = unknown(ids[p]);
                if (up < 0) continue;
                for (int q = 0; q < 4; ++q) {
                    const int uq = unknown(ids[q]);
                    if (uq >= 0)
                        trips.emplace_back(up, uq, K(p, q));
                    else
                        rhs[up] -= K(p, q) * lift[ids[q]];
                }
            }
        }

    Eigen::SparseMatrix<double> A(n_unknowns, n_unknowns);
    A.setFromTriplets(trips.begin(), trips.end());

    Eigen::VectorXd u;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(cg_tol);
    cg.setMaxIterations(40L * (n_r + n_t));
    cg.compute(A);
    EnergySolve out;
    if (cg.info() == Eigen::Success) {
        u = cg.solve(rhs);
        out.iterations = static_cast<int>(cg.iterations());
        out.residual = cg.error();
    }
    if (cg.info() != Eigen::Success || out.residual > cg_tol * 10.0) {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>
            plain;
        plain.setTolerance(cg_tol);
        plain.setMaxIterations(200L * (n_r + n_t));
        plain.compute(A);
        u = plain.solve(rhs);
        out.iterations = static_cast<int>(plain.iterations());
        out.residual = plain.error();
        if (plain.info() != Eigen::Success)
            throw NumericError("mod_image_annulus: conjugate gradient did not converge, "
                               "residual " + std::to_string(plain.error()));
    }

    // full nodal solution, then the energy through the same element quadrature
    Eigen::VectorXd full = lift;
    for (int id = 0; id < n_nodes; ++id) {
        const int uq = unknown(id);
        if (uq >= 0) full[id] = u[uq];
    }
    std::vector<double> cell_energy(static_cast<std::size_t>(n_r) * n_t);
    for (int i = 0; i < n_r; ++i)
        for (int j = 0; j < n_t; ++j) {
            const Eigen::Matrix4d& K = cell_K[static_cast<std::size_t>(i) * n_t + j];
            const int ids[4] = {node(i, j), node(i + 1, j), node(i, j + 1),
                                node(i + 1, j + 1)};
            Eigen::Vector4d v;
            for (int p = 0; p < 4; ++p) v[p] = full[ids[p]];
            cell_energy[static_cast<std::size_t>(i) * n_t + j] = v.dot(K * v);
        }
    out.energy = pairwise_sum(cell_energy);
    return out;
}

}  // namespace

PolarAnnulusGrid default_module_grid(const AnnulusSpec& annulus, int n_radial, int n_angular) {
    return PolarAnnulusGrid(annulus, n_radial, n_angular);
}

ModuleEstimate mod_image_annulus(const BeltramiField& field, const AnnulusSpec& annulus,
                                 const PolarAnnulusGrid& grid, const ImageModuleOptions& opts) {
    if (std::abs(grid.spec.center - annulus.center) > 1e-12 ||
        std::abs(grid.spec.r_inner - annulus.r_inner) > 1e-12 * annulus.r_inner ||
        std::abs(grid.spec.r_outer - annulus.r_outer) > 1e-12 * annulus.r_outer)
        throw std::invalid_argument("mod_image_annulus: grid does not cover the annulus");

    const EnergySolve fine =
        solve_energy(field, annulus, grid.n_radial, grid.n_angular, opts.cg_tol);
    ModuleEstimate est;
    est.computed = kTwoPi / fine.energy;
    est.diagnostics = {fine.energy, grid.n_radial, grid.n_angular, fine.iterations,
                       fine.residual};
    if (opts.richardson) {
        const int cr = std::max(8, grid.n_radial / 2), ct = std::max(16, grid.n_angular / 2);
        const EnergySolve coarse = solve_energy(field, annulus, cr, ct, opts.cg_tol);
        est.tolerance = std::abs(est.computed - kTwoPi / coarse.energy) + 1e-9;
    } else {
        est.tolerance = 1e-6 + 10.0 * fine.residual * est.computed;
    }
    if (opts.with_bounds) {
        est.lower_bound = mod_lower_bound(field, annulus);
        est.upper_bound = mod_upper_bound(field, annulus);
    } else {
        est.lower_bound = -std::numeric_limits<double>::infinity();
        est.upper_bound = std::numeric_limits<double>::infinity();
    }
    return est;
}

// ---------------------------------------------------------------------------
// Two-sided integral bounds
// ---------------------------------------------------------------------------

namespace {

double distortion_ratio(double abs_mu) { return (1.0 + abs_mu) / (1.0 - abs_mu); }

// angular crossing breakpoints of |center + r e^{i phi}| = radius
void circle_crossings(Complex center, double r, double radius, std::vector<double>& out) {
    const double d = std::abs(center);
    if (d < 1e-15) return;
    const double c = (radius * radius - d * d - r * r) / (2.0 * d * r);
    if (c <= -1.0 || c >= 1.0) return;
    const double beta = std::arg(center);
    const double w = std::acos(c);
    out.push_back(beta + w);
    out.push_back(beta - w);
}

}  // namespace

double mod_upper_bound(const BeltramiField& field, const AnnulusSpec& annulus) {
    // exact split: the integral of 1/|z-zeta|^2 over the annulus is 2 pi ln(r1/r2);
    // the excess (D - 1) lives only on the part inside the unit disc.
    const double base = mod_round_annulus(annulus);
    const QuadratureRule2D rule = annulus_disc_overlap(annulus, OverlapMeasure::log_polar);
    std::vector<double> terms(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        terms[i] =
            (distortion_ratio(std::abs(field(rule.nodes[i]))) - 1.0) * rule.weights[i];
    return base + pairwise_sum(terms) / kTwoPi;
}

double mod_lower_bound(const BeltramiField& field, const AnnulusSpec& annulus) {
    const Complex center = annulus.center;
    const double d = std::abs(center);
    std::vector<double> radial_breaks;
    auto add_tangency = [&](double radius) {
        radial_breaks.push_back(std::abs(radius - d));
        radial_breaks.push_back(radius + d);
    };
    add_tangency(1.0);
    for (double rj : field.radial_jumps()) add_tangency(rj);
    std::vector<double> s_breaks;
    for (double r : radial_breaks)
        if (r > annulus.r_inner && r < annulus.r_outer) s_breaks.push_back(std::log(r));

    const std::vector<double> az = field.angular_jumps();
    auto angular_mean = [&](double s) {
        const double r = std::exp(s);
        std::vector<double> cuts;
        circle_crossings(center, r, 1.0, cuts);
        for (double rj : field.radial_jumps()) circle_crossings(center, r, rj, cuts);
        if (!az.empty() && std::abs(center.imag()) <= r) {
            const double a0 = std::asin(std::clamp(-center.imag() / r, -1.0, 1.0));
            cuts.push_back(a0);
            cuts.push_back(kPi - a0);
        }
        auto f = [&](double phi) {
            return distortion_ratio(std::abs(field(center + std::polar(r, phi))));
        };
        // piecewise-smooth angular integral with jump azimuths as panel breaks
        std::vector<double> local;
        for (double c : cuts) {
            double t = std::fmod(c, kTwoPi);
            if (t < 0) t += kTwoPi;
            local.push_back(t);
        }
        return gauss_piecewise(f, 0.0, kTwoPi, std::move(local), 8, 10);
    };

    auto integrand = [&](double s) { return kTwoPi / angular_mean(s); };
    return gauss_piecewise(integrand, std::log(annulus.r_inner), std::log(annulus.r_outer),
                           std::move(s_breaks), 16, 12);
}

GapResult module_gap(const BeltramiField& field, Complex zeta, double rho2, double rho1,
                     int n_radial, int n_angular) {
    if (std::abs(std::abs(zeta) - 1.0) > 1e-12)
        throw std::invalid_argument("module_gap: zeta must lie on the circle");
    if (!(rho2 > 0.0 && rho2 < rho1))
        throw std::invalid_argument("module_gap: need 0 < rho2 < rho1");
    const AnnulusSpec annulus(zeta, rho2, rho1);
    const PolarAnnulusGrid grid(annulus, n_radial, n_angular);
    const ModuleEstimate est = mod_image_annulus(field, annulus, grid,
                                                 ImageModuleOptions{true, false, 1e-10});
    GapResult out;
    out.gap = est.computed - mod_round_annulus(annulus);
    out.tolerance = est.tolerance;
    const QuadratureRule2D rule = annulus_disc_overlap(annulus, OverlapMeasure::log_polar);
    std::vector<double> terms(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        terms[i] = std::abs(field(rule.nodes[i])) * rule.weights[i];
    out.bound = pairwise_sum(terms) / (kPi * (1.0 - field.sup_bound()));
    return out;
}

}  // namespace qcmod
