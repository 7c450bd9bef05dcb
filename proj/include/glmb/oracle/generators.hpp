#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "glmb/density.hpp"
#include "glmb/gaussian.hpp"
#include "glmb/random.hpp"

namespace glmb::oracle {

/// Knobs for randomized GLMB instances used by oracle suites and
/// property tests.
struct DensityGeneratorOptions {
    int state_dim = 1;
    int max_labels = 2;       // size of the label pool
    int max_components = 3;   // GLMB components
    int max_gaussians = 2;    // mixture components per single-object density
    double mean_range = 3.0;  // means drawn from [-range, range]
    double sd_min = 0.5;
    double sd_max = 1.5;
    bool correlated = true;   // allow correlated covariances (dim > 1)
    double hypervolume_unit = 1.0;
    int label_birth_time = 0;
};

inline Gaussian random_gaussian(const DensityGeneratorOptions& opt, RandomStream& rng) {
    const int d = opt.state_dim;
    Eigen::VectorXd mean(d);
    for (int i = 0; i < d; ++i) mean[i] = rng.uniform(-opt.mean_range, opt.mean_range);
    Eigen::VectorXd sd(d);
    for (int i = 0; i < d; ++i) sd[i] = rng.uniform(opt.sd_min, opt.sd_max);
    Eigen::MatrixXd cov;
    if (opt.correlated && d > 1) {
        // a random Gram matrix rescaled to the drawn sds: PSD by construction
        Eigen::MatrixXd a(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
        }
        Eigen::MatrixXd gram = a * a.transpose() +
                               0.1 * static_cast<double>(d) * Eigen::MatrixXd::Identity(d, d);
        const Eigen::VectorXd scale =
            (sd.array() / gram.diagonal().array().sqrt()).matrix();
        cov = scale.asDiagonal() * gram * scale.asDiagonal();
    } else {
        cov = sd.array().square().matrix().asDiagonal();
    }
    return Gaussian(std::move(mean), std::move(cov));
}

inline GaussianMixture random_mixture(const DensityGeneratorOptions& opt, RandomStream& rng) {
    const int n = 1 + static_cast<int>(rng.pick_uniform(
                          static_cast<std::size_t>(opt.max_gaussians)));
    std::vector<double> w(static_cast<std::size_t>(n));
    double total = 0.0;
    for (auto& x : w) {
        x = rng.uniform(0.2, 1.0);
        total += x;
    }
    GaussianMixture gm;
    for (int i = 0; i < n; ++i) {
        gm.add(w[static_cast<std::size_t>(i)] / total, random_gaussian(opt, rng));
    }
    return gm;
}

/// Random normalized GLMB over a small label pool. Contains the empty
/// label set with positive probability so random pairs are rarely
/// orthogonal; callers that need guaranteed overlap should check.
inline GlmbDensity random_density(const DensityGeneratorOptions& opt, RandomStream& rng) {
    std::vector<Label> pool;
    for (int i = 0; i < opt.max_labels; ++i) pool.push_back(Label{opt.label_birth_time, i});

    GlmbDensity d;
    d.state_dim = opt.state_dim;
    d.hypervolume_unit = opt.hypervolume_unit;
    const int n_comp = 1 + static_cast<int>(rng.pick_uniform(
                               static_cast<std::size_t>(opt.max_components)));
    std::uint64_t history = 1;
    std::set<std::pair<std::uint64_t, std::vector<Label>>> seen;
    for (int c = 0; c < n_comp; ++c) {
        GlmbComponent comp;
        comp.history = history++;
        for (const Label& l : pool) {
            if (rng.bernoulli(0.5)) {
                comp.labels.push_back(l);
                comp.densities.push_back(random_mixture(opt, rng));
            }
        }
        comp.log_weight = std::log(rng.uniform(0.1, 1.0));
        if (!seen.insert({comp.history, comp.labels}).second) continue;
        d.components.push_back(std::move(comp));
    }
    return normalize(std::move(d));
}

/// As random_density, with all labels shifted so two densities never
/// share a label (used by the independent-union property).
inline GlmbDensity random_density_with_offset(const DensityGeneratorOptions& opt,
                                              RandomStream& rng, int birth_time_offset) {
    DensityGeneratorOptions shifted = opt;
    shifted.label_birth_time = birth_time_offset;
    return random_density(shifted, rng);
}

/// Concatenation of two GLMBs with disjoint label spaces: the cross
/// product of components with summed label sets and multiplied weights.
inline GlmbDensity concatenate_independent(const GlmbDensity& a, const GlmbDensity& b) {
    if (a.state_dim != b.state_dim) {
        throw DimensionMismatchError("concatenate_independent: dimension mismatch");
    }
    GlmbDensity out;
    out.state_dim = a.state_dim;
    out.hypervolume_unit = a.hypervolume_unit;
    std::uint64_t history = 1;
    for (const auto& ca : a.components) {
        for (const auto& cb : b.components) {
            GlmbComponent c;
            c.history = history++;
            c.log_weight = ca.log_weight + cb.log_weight;
            c.labels = ca.labels;
            c.densities = ca.densities;
            for (std::size_t i = 0; i < cb.labels.size(); ++i) {
                c.labels.push_back(cb.labels[i]);
                c.densities.push_back(cb.densities[i]);
            }
            // disjoint spaces: a simple merge keeps the sorted order
            std::vector<std::size_t> order(c.labels.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                return c.labels[x] < c.labels[y];
            });
            GlmbComponent sorted_c;
            sorted_c.history = c.history;
            sorted_c.log_weight = c.log_weight;
            for (const std::size_t i : order) {
                sorted_c.labels.push_back(c.labels[i]);
                sorted_c.densities.push_back(std::move(c.densities[i]));
            }
            out.components.push_back(std::move(sorted_c));
        }
    }
    return normalize(std::move(out));
}

}  // namespace glmb::oracle
