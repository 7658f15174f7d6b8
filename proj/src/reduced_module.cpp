#include "qcmod/reduced_module.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace qcmod {

namespace {

struct PanelSet {
    std::vector<Complex> pos;     // panel midpoints (the resampled curve nodes)
    std::vector<Complex> normal;  // outward unit normals
    std::vector<double> weight;   // arclength weights
};

PanelSet make_panels(const JordanCurve& curve, int panels) {
    const JordanCurve fine = curve.resample_arclength(panels);
    PanelSet p;
    p.pos = fine.points();
    p.normal.resize(panels);
    p.weight.resize(panels);
    for (int i = 0; i < panels; ++i) {
        const Complex prev = p.pos[(i + panels - 1) % panels];
        const Complex next = p.pos[(i + 1) % panels];
        const Complex tangent = next - prev;
        const double len = std::abs(tangent);
        if (len < 1e-300) throw GeometryError("reduced_module: degenerate panelization");
        // outward normal of a positively oriented curve: tangent rotated by -90 deg
        p.normal[i] = Complex(tangent.imag(), -tangent.real()) / len;
        p.weight[i] = 0.5 * len;
    }
    return p;
}

double kernel(const Complex& target, const Complex& source, const Complex& normal) {
    const Complex d = source - target;
    return (normal.real() * d.real() + normal.imag() * d.imag()) / (kTwoPi * std::norm(d));
}

// Double-layer matrix with the row-sum (Gauss-identity) diagonal: K 1 = 1/2.
Eigen::MatrixXd double_layer_matrix(const PanelSet& p) {
    const int n = static_cast<int>(p.pos.size());
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            K(i, j) = kernel(p.pos[i], p.pos[j], p.normal[j]) * p.weight[j];
            row += K(i, j);
        }
        K(i, i) = 0.5 - row;
    }
    return K;
}

double evaluate_double_layer(const PanelSet& p, const Eigen::VectorXd& density, Complex at) {
    const int n = static_cast<int>(p.pos.size());
    std::vector<double> terms(n);
    for (int j = 0; j < n; ++j)
        terms[j] = density[j] * kernel(at, p.pos[j], p.normal[j]) * p.weight[j];
    return pairwise_sum(terms);
}

double robin_value(const JordanCurve& curve, Complex w0, int panels) {
    const PanelSet p = make_panels(curve, panels);
    const int n = panels;
    Eigen::MatrixXd A = double_layer_matrix(p);
    A.diagonal().array() += 0.5;  // interior limit: (I/2 + K) psi = g
    Eigen::VectorXd g(n);
    for (int j = 0; j < n; ++j) g[j] = std::log(std::abs(p.pos[j] - w0));
    const Eigen::VectorXd psi = A.partialPivLu().solve(g);
    return evaluate_double_layer(p, psi, w0);
}

// Module of (domain bounded by curve) minus D(w0, rho): two double layers plus
// a point source a ln|z - w0| carrying the flux; Mod = 1/a.
double punctured_module(const PanelSet& outer, Complex w0, double rho, int inner_panels) {
    const PanelSet inner = make_panels(JordanCurve::circle(w0, rho, 4 * inner_panels),
                                       inner_panels);
    const int n1 = static_cast<int>(outer.pos.size());
    const int n2 = inner_panels;
    const int n = n1 + n2 + 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    // rows on the outer curve: interior side of outer, u = 1
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n1; ++j)
            A(i, j) = (i == j) ? 0.0 : kernel(outer.pos[i], outer.pos[j], outer.normal[j]) *
                                           outer.weight[j];
        double row = 0.0;
        for (int j = 0; j < n1; ++j) row += A(i, j);
        A(i, i) = 0.5 - row + 0.5;  // Gauss diagonal plus the +I/2 jump term
        for (int j = 0; j < n2; ++j)
            A(i, n1 + j) = kernel(outer.pos[i], inner.pos[j], inner.normal[j]) *
                           inner.weight[j];
        A(i, n1 + n2) = std::log(std::abs(outer.pos[i] - w0));
        rhs[i] = 1.0;
    }
    // rows on the inner circle: domain lies outside it, u = 0
    for (int i = 0; i < n2; ++i) {
        const int row_id = n1 + i;
        for (int j = 0; j < n2; ++j)
            A(row_id, n1 + j) = (i == j) ? 0.0
                                         : kernel(inner.pos[i], inner.pos[j], inner.normal[j]) *
                                               inner.weight[j];
        double row = 0.0;
        for (int j = 0; j < n2; ++j) row += A(row_id, n1 + j);
        // Gauss row sum is 1/2 on the curve; exterior limit subtracts the jump
        A(row_id, n1 + i) = 0.5 - row - 0.5;
        for (int j = 0; j < n1; ++j)
            A(row_id, j) = kernel(inner.pos[i], outer.pos[j], outer.normal[j]) *
                           outer.weight[j];
        A(row_id, n1 + n2) = std::log(std::abs(inner.pos[i] - w0));
        rhs[row_id] = 0.0;
    }
    // closure: the inner density carries no net charge
    for (int j = 0; j < n2; ++j) A(n1 + n2, n1 + j) = inner.weight[j];
    const Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
    const double a = sol[n1 + n2];
    if (!(a > 0.0))
        throw NumericError("reduced_module_extrapolated: non-positive source strength");
    return 1.0 / a;
}

double distance_to_curve(const JordanCurve& curve, Complex w0) {
    double d = 1e300;
    for (const Complex& p : curve.points()) d = std::min(d, std::abs(p - w0));
    return d;
}

struct Extrapolated {
    double value;
    double tolerance;
};

// Aitken delta-squared on the last three entries, with a plain fallback when
// the differences are already below the noise floor.
Extrapolated aitken_limit(const std::vector<double>& seq, double floor) {
    const std::size_t n = seq.size();
    const double d1 = seq[n - 2] - seq[n - 3];
    const double d2 = seq[n - 1] - seq[n - 2];
    if (std::abs(d2) <= floor)
        return {seq[n - 1], std::max(std::abs(d2), floor)};
    const double denom = d2 - d1;
    if (std::abs(denom) < 0.25 * std::abs(d2))
        return {seq[n - 1], std::abs(d2)};  // no stable geometric trend; stay raw
    const double limit = seq[n - 1] - d2 * d2 / denom;
    return {limit, std::abs(limit - seq[n - 1]) + floor};
}

}  // namespace

ReducedModuleResult reduced_module(const JordanCurve& boundary, Complex w0, int panels) {
    if (!boundary.contains(w0))
        throw std::domain_error("reduced_module: w0 must lie strictly inside the curve");
    // the Nystroem value converges at second order in the panel width; one
    // Richardson step removes the chord-versus-arc weight bias
    const double fine = robin_value(boundary, w0, panels);
    const double coarse = robin_value(boundary, w0, panels / 2);
    const double value = (4.0 * fine - coarse) / 3.0;
    return {value, ReducedModuleMethod::robin_solve, std::abs(fine - coarse) / 3.0 + 1e-12};
}

ReducedModuleResult reduced_module_extrapolated(const JordanCurve& boundary, Complex w0,
                                                std::vector<double> rhos, int panels) {
    if (!boundary.contains(w0))
        throw std::domain_error("reduced_module_extrapolated: w0 must lie inside the curve");
    if (rhos.empty()) {
        const double d = distance_to_curve(boundary, w0);
        rhos = {0.2 * d, 0.1 * d, 0.05 * d};
    }
    if (rhos.size() < 3)
        throw std::invalid_argument("reduced_module_extrapolated: need at least 3 rho values");
    std::sort(rhos.rbegin(), rhos.rend());
    const PanelSet outer = make_panels(boundary, panels);
    std::vector<double> seq;
    seq.reserve(rhos.size());
    for (double rho : rhos)
        seq.push_back(punctured_module(outer, w0, rho, std::max(64, panels / 4)) +
                      std::log(rho));
    const Extrapolated ex = aitken_limit(seq, 1e-10);
    return {ex.value, ReducedModuleMethod::extrapolation, ex.tolerance + 1e-4};
}

ModuleDefectResult module_defect(const BeltramiField& field, Complex zeta, double r,
                                 const std::vector<double>& rhos,
                                 const ModuleDefectOptions& opts) {
    if (std::abs(std::abs(zeta) - 1.0) > 1e-12)
        throw std::invalid_argument("module_defect: zeta must lie on the circle");
    std::vector<double> sorted = rhos;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted.size() < 3)
        throw std::invalid_argument("module_defect: need at least 3 rho values");
    if (sorted.front() >= r || sorted.back() <= 0.0)
        throw std::invalid_argument("module_defect: rho values must lie in (0, r)");

    ModuleDefectResult out;
    for (double rho : sorted) {
        const AnnulusSpec annulus(zeta, rho, r);
        const double octaves = std::log2(r / rho);
        const int n_r = std::max(24, static_cast<int>(std::lround(opts.cells_per_octave * octaves)));
        const PolarAnnulusGrid grid(annulus, n_r, opts.n_angular);
        const ModuleEstimate est = mod_image_annulus(
            field, annulus, grid, ImageModuleOptions{opts.richardson, false, 1e-10});
        out.sequence.push_back(est.computed + std::log(rho));
    }
    // convergence diagnostic: successive differences must not grow
    for (std::size_t i = 2; i < out.sequence.size(); ++i) {
        const double prev = std::abs(out.sequence[i - 1] - out.sequence[i - 2]);
        const double cur = std::abs(out.sequence[i] - out.sequence[i - 1]);
        if (cur > 1.25 * prev + 1e-6)
            throw ExtrapolationError("module_defect: successive differences not shrinking",
                                     out.sequence);
    }
    const Extrapolated ex = aitken_limit(out.sequence, 1e-6);
    out.value = ex.value;
    out.tolerance = ex.tolerance;
    return out;
}

JordanCurve image_disc_boundary(const QcSolution& solution, Complex zeta, double r,
                                int samples, int panels) {
    std::vector<Complex> pts(samples);
    for (int k = 0; k < samples; ++k)
        pts[k] = solution.map(zeta + std::polar(r, kTwoPi * k / samples));
    return JordanCurve(std::move(pts)).resample_arclength(panels);
}

std::vector<std::pair<double, double>> continuity_probe(const QcSolution& solution,
                                                        const std::vector<double>& zeta_args,
                                                        double r) {
    std::vector<std::pair<double, double>> out;
    out.reserve(zeta_args.size());
    for (double t : zeta_args) {
        const Complex zeta = std::polar(1.0, t);
        const JordanCurve curve = image_disc_boundary(solution, zeta, r);
        const Complex w0 = solution.trace().value(t);
        out.emplace_back(t, reduced_module(curve, w0).value);
    }
    return out;
}

}  // namespace qcmod
