#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "glmb/errors.hpp"

namespace glmb {

struct QuadratureOptions {
    double rel_tol = 1e-6;
    std::size_t max_evals = 100000;
};

namespace detail {

struct SimpsonState {
    std::size_t evals = 0;
    std::size_t budget = 0;
};

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double fa, double b, double fb, double m,
                            double fm, double whole, double eps, int depth,
                            SimpsonState& st) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    if (st.evals + 2 > st.budget) {
        throw IntegrationFailureError("adaptive quadrature: evaluation budget exceeded");
    }
    const double flm = f(lm);
    const double frm = f(rm);
    st.evals += 2;
    const double h = b - a;
    const double left = (h / 12.0) * (fa + 4.0 * flm + fm);
    const double right = (h / 12.0) * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) {
        throw IntegrationFailureError("adaptive quadrature: max depth exceeded");
    }
    if (std::abs(delta) <= 15.0 * eps) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1, st) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1, st);
}

}  // namespace detail

/// Adaptive Simpson integration of f on [a, b] to absolute tolerance eps.
/// Shares the evaluation budget in `st` across segments.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double eps,
                        detail::SimpsonState& st) {
    if (!(b > a)) return 0.0;
    if (st.evals + 3 > st.budget) {
        throw IntegrationFailureError("adaptive quadrature: evaluation budget exceeded");
    }
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    st.evals += 3;
    const double whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole,
                                        std::max(eps, 1e-300), 48, st);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, const QuadratureOptions& opts,
                        double scale_hint = 1.0) {
    detail::SimpsonState st{0, opts.max_evals};
    return adaptive_simpson(f, a, b, opts.rel_tol * scale_hint, st);
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed with Newton iteration on the Legendre recurrence.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
}

/// Composite Gauss-Legendre grid on [a, b] with `panels` panels of the
/// given order. Accurate to near machine precision for smooth integrands
/// once panels resolve the integrand's length scale.
struct QuadratureGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline QuadratureGrid composite_gauss_legendre(double a, double b, int panels, int order = 16) {
    std::vector<double> xs, ws;
    gauss_legendre(order, xs, ws);
    QuadratureGrid grid;
    grid.nodes.reserve(static_cast<std::size_t>(panels * order));
    grid.weights.reserve(static_cast<std::size_t>(panels * order));
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h;
        for (int i = 0; i < order; ++i) {
            grid.nodes.push_back(mid + 0.5 * h * xs[static_cast<std::size_t>(i)]);
            grid.weights.push_back(0.5 * h * ws[static_cast<std::size_t>(i)]);
        }
    }
    return grid;
}

}  // namespace glmb
