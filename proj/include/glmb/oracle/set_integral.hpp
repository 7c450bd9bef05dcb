#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "glmb/density.hpp"
#include "glmb/errors.hpp"
#include "glmb/numeric.hpp"
#include "glmb/quadrature.hpp"
#include "glmb/random.hpp"

namespace glmb::oracle {

// Brute-force evaluation of the set integral
//
//   integral K^{|X|} phi(X) psi(X) dX
//
// by explicit enumeration of label subsets with per-subset tensor-grid
// quadrature. Labeled sets are enumerated as subsets (not ordered
// tuples), which absorbs the 1/i! of the set integral. Exponential in the
// label count and grid size — a test oracle, deliberately independent of
// the closed-form inner product path.

struct SetIntegralOptions {
    int max_labels = 3;
    double tail_sigmas = 9.0;   // grid extent beyond extreme means
    double panel_scale = 0.5;   // panel width as a fraction of the smallest sd
    int panel_order = 16;
    std::size_t max_grid_points = 40000000;  // total tensor budget per subset
};

namespace detail {

/// 1-D quadrature grid covering every mixture in both densities.
inline QuadratureGrid build_grid(const GlmbDensity& phi, const GlmbDensity& psi,
                                 const SetIntegralOptions& opt) {
    double lo = 0.0, hi = 0.0, sd_min = kInf;
    bool first = true;
    auto scan = [&](const GlmbDensity& d) {
        for (const auto& c : d.components) {
            for (const auto& gm : c.densities) {
                for (std::size_t i = 0; i < gm.size(); ++i) {
                    const double m = gm.component(i).mean()[0];
                    const double sd = std::sqrt(gm.component(i).cov()(0, 0));
                    if (first) {
                        lo = hi = m;
                        first = false;
                    }
                    lo = std::min(lo, m - opt.tail_sigmas * sd);
                    hi = std::max(hi, m + opt.tail_sigmas * sd);
                    sd_min = std::min(sd_min, sd);
                }
            }
        }
    };
    scan(phi);
    scan(psi);
    if (first) {
        lo = -1.0;
        hi = 1.0;
        sd_min = 1.0;
    }
    const int panels = std::max(
        4, static_cast<int>(std::ceil((hi - lo) / (opt.panel_scale * sd_min))));
    return composite_gauss_legendre(lo, hi, panels, opt.panel_order);
}

/// Per-axis pdf table of one mixture on the grid.
inline Eigen::VectorXd axis_table(const GaussianMixture& gm, const QuadratureGrid& grid) {
    const Eigen::Index m = static_cast<Eigen::Index>(grid.nodes.size());
    Eigen::VectorXd out(m);
    Eigen::VectorXd x(1);
    for (Eigen::Index g = 0; g < m; ++g) {
        x[0] = grid.nodes[static_cast<std::size_t>(g)];
        out[g] = gm.pdf(x);
    }
    return out;
}

/// phi restricted to the label subset, tabulated on the tensor grid.
/// Rank-one structure per component keeps this vectorizable: the n = 2
/// case is a sum of outer products, n = 3 a stack of them.
struct SubsetTable {
    int n = 0;
    double scalar = 0.0;          // n = 0
    Eigen::VectorXd vec;          // n = 1
    Eigen::MatrixXd mat;          // n = 2
    std::vector<Eigen::MatrixXd> cube;  // n = 3, indexed by the first axis
};

inline SubsetTable density_on_grid(const GlmbDensity& d, const std::vector<Label>& subset,
                                   const QuadratureGrid& grid) {
    const Eigen::Index m = static_cast<Eigen::Index>(grid.nodes.size());
    SubsetTable t;
    t.n = static_cast<int>(subset.size());
    if (t.n == 1) t.vec = Eigen::VectorXd::Zero(m);
    if (t.n == 2) t.mat = Eigen::MatrixXd::Zero(m, m);
    if (t.n == 3) t.cube.assign(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(m, m));

    for (const auto& c : d.components) {
        if (c.labels != subset) continue;
        const double w = c.weight();
        switch (t.n) {
            case 0:
                t.scalar += w;
                break;
            case 1:
                t.vec += w * axis_table(c.densities[0], grid);
                break;
            case 2: {
                const Eigen::VectorXd a = axis_table(c.densities[0], grid);
                const Eigen::VectorXd b = axis_table(c.densities[1], grid);
                t.mat.noalias() += w * a * b.transpose();
                break;
            }
            default: {
                const Eigen::VectorXd a = axis_table(c.densities[0], grid);
                const Eigen::VectorXd b = axis_table(c.densities[1], grid);
                const Eigen::VectorXd cc = axis_table(c.densities[2], grid);
                const Eigen::MatrixXd outer = b * cc.transpose();
                for (Eigen::Index i = 0; i < m; ++i) {
                    t.cube[static_cast<std::size_t>(i)].noalias() += (w * a[i]) * outer;
                }
                break;
            }
        }
    }
    return t;
}

}  // namespace detail

/// The set-integral inner product <phi, psi>_K by quadrature; test-only.
inline double set_integral_inner_product(const GlmbDensity& phi, const GlmbDensity& psi,
                                         const SetIntegralOptions& opt = {}) {
    if (phi.state_dim != 1 || psi.state_dim != 1) {
        throw TooLargeError("set_integral_inner_product: requires state_dim = 1");
    }
    if (phi.hypervolume_unit != psi.hypervolume_unit) {
        throw UnitMismatchError("set_integral_inner_product: hyper-volume units differ");
    }
    std::vector<Label> labels = all_labels(phi);
    for (const Label& l : all_labels(psi)) labels.push_back(l);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (static_cast<int>(labels.size()) > opt.max_labels || labels.size() > 3) {
        throw TooLargeError("set_integral_inner_product: label space too large");
    }

    const QuadratureGrid grid = detail::build_grid(phi, psi, opt);
    const Eigen::Index m = static_cast<Eigen::Index>(grid.nodes.size());
    const Eigen::VectorXd wq =
        Eigen::Map<const Eigen::VectorXd>(grid.weights.data(), m);

    double total = 0.0;
    const std::size_t n_subsets = std::size_t{1} << labels.size();
    for (std::size_t mask = 0; mask < n_subsets; ++mask) {
        std::vector<Label> subset;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (mask & (std::size_t{1} << i)) subset.push_back(labels[i]);
        }
        const std::size_t n = subset.size();
        double points = 1.0;
        for (std::size_t i = 0; i < n; ++i) points *= static_cast<double>(m);
        if (points > static_cast<double>(opt.max_grid_points)) {
            throw TooLargeError("set_integral_inner_product: grid too large");
        }

        const detail::SubsetTable f = detail::density_on_grid(phi, subset, grid);
        const detail::SubsetTable g = detail::density_on_grid(psi, subset, grid);
        const double unit = std::pow(phi.hypervolume_unit, static_cast<double>(n));

        double acc = 0.0;
        switch (f.n) {
            case 0:
                acc = f.scalar * g.scalar;
                break;
            case 1:
                acc = (f.vec.cwiseProduct(g.vec)).dot(wq);
                break;
            case 2:
                acc = wq.dot((f.mat.cwiseProduct(g.mat)) * wq);
                break;
            default:
                for (Eigen::Index i = 0; i < m; ++i) {
                    const auto& fs = f.cube[static_cast<std::size_t>(i)];
                    const auto& gs = g.cube[static_cast<std::size_t>(i)];
                    acc += wq[i] * wq.dot((fs.cwiseProduct(gs)) * wq);
                }
                break;
        }
        total += unit * acc;
    }
    return total;
}

/// Divergence computed entirely from set-integral quadrature.
inline double set_integral_cs_divergence(const GlmbDensity& phi, const GlmbDensity& psi,
                                         const SetIntegralOptions& opt = {}) {
    const double cross = set_integral_inner_product(phi, psi, opt);
    const double self_phi = set_integral_inner_product(phi, phi, opt);
    const double self_psi = set_integral_inner_product(psi, psi, opt);
    if (cross <= 0.0) return kInf;
    return -(std::log(cross) - 0.5 * std::log(self_phi) - 0.5 * std::log(self_psi));
}

/// Importance-sampling estimate of <phi, psi>_K: the mean over
/// realizations X ~ phi of K^{|X|} psi(X). Slow-converging but model-free;
/// used to cross-check the quadrature oracle itself.
inline std::pair<double, double> importance_sampled_inner_product(const GlmbDensity& phi,
                                                                  const GlmbDensity& psi,
                                                                  int samples,
                                                                  RandomStream& rng) {
    double acc = 0.0, acc_sq = 0.0;
    std::vector<Label> subset;
    for (int s = 0; s < samples; ++s) {
        const auto realization = sample_realization(phi, rng);
        subset.clear();
        for (const auto& [label, x] : realization) subset.push_back(label);
        double value = 0.0;
        for (const auto& c : psi.components) {
            if (c.labels != subset) continue;
            double prod = c.weight();
            for (std::size_t i = 0; i < realization.size(); ++i) {
                prod *= c.densities[i].pdf(realization[i].second);
            }
            value += prod;
        }
        value *= std::pow(phi.hypervolume_unit, static_cast<double>(subset.size()));
        acc += value;
        acc_sq += value * value;
    }
    const double mean = acc / samples;
    const double var = std::max(acc_sq / samples - mean * mean, 0.0);
    return {mean, std::sqrt(var / samples)};
}

}  // namespace glmb::oracle
