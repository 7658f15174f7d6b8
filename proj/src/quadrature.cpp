#include "qcmod/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace qcmod {

namespace {

// Newton iteration on Legendre polynomials; standard construction, deterministic.
GaussLegendre build_rule(int order) {
    GaussLegendre rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = order * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    return rule;
}

}  // namespace

const GaussLegendre& GaussLegendre::get(int order) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
    return it->second;
}

double gauss_panel(const std::function<double(double)>& f, double a, double b, int order) {
    const auto& rule = GaussLegendre::get(order);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::vector<double> terms(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        terms[i] = rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * pairwise_sum(terms);
}

double gauss_composite(const std::function<double(double)>& f, double a, double b,
                       int panels, int order) {
    std::vector<double> parts(panels);
    const double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i)
        parts[i] = gauss_panel(f, a + i * h, a + (i + 1) * h, order);
    return pairwise_sum(parts);
}

double gauss_piecewise(const std::function<double(double)>& f, double a, double b,
                       std::vector<double> breakpoints, int panels, int order) {
    std::vector<double> cuts{a, b};
    for (double c : breakpoints)
        if (c > a + 1e-14 && c < b - 1e-14) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> parts;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i])
            parts.push_back(gauss_composite(f, cuts[i], cuts[i + 1], panels, order));
    return pairwise_sum(parts);
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = simpson(a, fa, b, fb, fm);
    return adaptive_step(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

}  // namespace qcmod
