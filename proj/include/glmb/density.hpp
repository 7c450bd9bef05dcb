#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "glmb/errors.hpp"
#include "glmb/gaussian.hpp"
#include "glmb/label.hpp"
#include "glmb/numeric.hpp"
#include "glmb/random.hpp"

namespace glmb {

/// One term of a GLMB mixture: a weight on a label set, an opaque history
/// index distinguishing terms with equal label sets, and one single-object
/// density per label. Labels are kept sorted; `densities[i]` belongs to
/// `labels[i]`.
struct GlmbComponent {
    std::uint64_t history = 0;
    std::vector<Label> labels;
    double log_weight = 0.0;
    std::vector<GaussianMixture> densities;

    double weight() const { return std::exp(log_weight); }

    int label_index(const Label& l) const {
        const auto it = std::lower_bound(labels.begin(), labels.end(), l);
        if (it == labels.end() || *it != l) return -1;
        return static_cast<int>(it - labels.begin());
    }

    const GaussianMixture* density_of(const Label& l) const {
        const int i = label_index(l);
        return i < 0 ? nullptr : &densities[static_cast<std::size_t>(i)];
    }
};

/// Generalized labeled multi-Bernoulli density: a normalized mixture of
/// components over (history, label-set) pairs. `hypervolume_unit` carries
/// the unit of hyper-volume so unit invariance is testable.
struct GlmbDensity {
    std::vector<GlmbComponent> components;
    int state_dim = 0;
    double hypervolume_unit = 1.0;

    static GlmbDensity certain_empty(int state_dim, double hypervolume_unit = 1.0) {
        GlmbDensity d;
        d.state_dim = state_dim;
        d.hypervolume_unit = hypervolume_unit;
        d.components.push_back(GlmbComponent{});
        return d;
    }
};

struct CardinalityDistribution {
    std::vector<double> pmf;

    double mean() const {
        double m = 0.0;
        for (std::size_t n = 0; n < pmf.size(); ++n) m += static_cast<double>(n) * pmf[n];
        return m;
    }

    std::size_t argmax() const {
        std::size_t best = 0;
        for (std::size_t n = 1; n < pmf.size(); ++n) {
            if (pmf[n] > pmf[best]) best = n;  // ties resolve to the smaller n
        }
        return best;
    }
};

/// Rescale weights so they sum to one; component order is preserved.
inline GlmbDensity normalize(GlmbDensity density) {
    if (density.components.empty()) {
        throw EmptyDensityError("normalize: density has no components");
    }
    std::vector<double> lw;
    lw.reserve(density.components.size());
    for (const auto& c : density.components) lw.push_back(c.log_weight);
    const double lse = log_sum_exp(lw);
    if (!std::isfinite(lse)) {
        throw EmptyDensityError("normalize: no component has finite weight");
    }
    for (auto& c : density.components) c.log_weight -= lse;
    return density;
}

inline bool is_normalized(const GlmbDensity& density, double tol = 1e-9) {
    std::vector<double> lw;
    lw.reserve(density.components.size());
    for (const auto& c : density.components) lw.push_back(c.log_weight);
    return std::abs(log_sum_exp(lw)) <= tol;
}

inline CardinalityDistribution cardinality_distribution(const GlmbDensity& density) {
    std::size_t n_max = 0;
    for (const auto& c : density.components) n_max = std::max(n_max, c.labels.size());
    CardinalityDistribution out;
    out.pmf.assign(n_max + 1, 0.0);
    for (const auto& c : density.components) out.pmf[c.labels.size()] += c.weight();
    return out;
}

/// Sorted union of labels appearing in any component.
inline std::vector<Label> all_labels(const GlmbDensity& density) {
    std::vector<Label> out;
    for (const auto& c : density.components) {
        out.insert(out.end(), c.labels.begin(), c.labels.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Unnormalized first-moment contribution of one label: the mixture
/// sum_c w_c p_c(., l) over components containing l. `mass` is the
/// existence probability of the label; summed over all labels it gives
/// the expected cardinality.
struct LabelIntensity {
    double mass = 0.0;
    GaussianMixture mixture;
};

inline LabelIntensity intensity_function(const GlmbDensity& density, const Label& label) {
    LabelIntensity out;
    for (const auto& c : density.components) {
        const GaussianMixture* p = c.density_of(label);
        if (!p) continue;
        const double w = c.weight();
        out.mass += w;
        for (std::size_t i = 0; i < p->size(); ++i) {
            out.mixture.add(w * p->weight(i), p->component(i));
        }
    }
    return out;
}

struct TruncationResult {
    GlmbDensity density;
    /// Exact L1 distance between the densities before and after the cut:
    /// the sum of discarded weights, before renormalization.
    double l1_error = 0.0;
};

/// Keep the `max_components` highest-weight components with weight at
/// least `min_weight`; renormalize the survivors. Kept components stay in
/// their original order and the discarded mass is summed in original
/// order so the report is reproducible.
inline TruncationResult truncate(const GlmbDensity& density, std::size_t max_components,
                                 double min_weight) {
    const std::size_t n = density.components.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return density.components[a].log_weight > density.components[b].log_weight;
    });

    std::vector<char> keep(n, 0);
    std::size_t kept = 0;
    for (const std::size_t i : order) {
        if (kept >= max_components) break;
        if (density.components[i].weight() < min_weight) break;  // sorted: rest are smaller
        keep[i] = 1;
        ++kept;
    }
    if (kept == 0) {
        throw EmptyDensityError("truncate: all components discarded");
    }

    TruncationResult out;
    out.density.state_dim = density.state_dim;
    out.density.hypervolume_unit = density.hypervolume_unit;
    out.density.components.reserve(kept);
    for (std::size_t i = 0; i < n; ++i) {
        if (keep[i]) {
            out.density.components.push_back(density.components[i]);
        } else {
            out.l1_error += density.components[i].weight();
        }
    }
    out.density = normalize(std::move(out.density));
    return out;
}

/// Draw one realization: a component proportional to its weight, then one
/// state per label from that component's mixtures. Labels are distinct by
/// construction.
inline std::vector<std::pair<Label, Eigen::VectorXd>> sample_realization(
    const GlmbDensity& density, RandomStream& rng) {
    if (density.components.empty()) {
        throw EmptyDensityError("sample_realization: density has no components");
    }
    std::vector<double> w;
    w.reserve(density.components.size());
    for (const auto& c : density.components) w.push_back(c.weight());
    const GlmbComponent& c = density.components[rng.pick_weighted(w)];
    std::vector<std::pair<Label, Eigen::VectorXd>> out;
    out.reserve(c.labels.size());
    for (std::size_t i = 0; i < c.labels.size(); ++i) {
        out.emplace_back(c.labels[i], c.densities[i].sample(rng));
    }
    return out;
}

/// Check every structural invariant; throws with a description on failure.
inline void validate(const GlmbDensity& density, double tol = 1e-9) {
    if (density.components.empty()) {
        throw EmptyDensityError("validate: density has no components");
    }
    if (density.state_dim <= 0) throw Error("validate: state_dim must be positive");
    if (!(density.hypervolume_unit > 0.0)) {
        throw Error("validate: hypervolume_unit must be positive");
    }
    std::map<std::pair<std::uint64_t, std::vector<Label>>, int> seen;
    for (const auto& c : density.components) {
        if (!std::isfinite(c.log_weight)) throw Error("validate: non-finite log weight");
        if (!std::is_sorted(c.labels.begin(), c.labels.end())) {
            throw Error("validate: labels not sorted");
        }
        if (std::adjacent_find(c.labels.begin(), c.labels.end()) != c.labels.end()) {
            throw Error("validate: duplicate label in component");
        }
        if (c.densities.size() != c.labels.size()) {
            throw Error("validate: densities do not match labels");
        }
        for (const auto& gm : c.densities) {
            if (gm.dim() != density.state_dim) {
                throw DimensionMismatchError("validate: density dimension mismatch");
            }
            if (!gm.is_normalized(1e-6)) {
                throw Error("validate: single-object density not normalized");
            }
        }
        if (++seen[{c.history, c.labels}] > 1) {
            throw Error("validate: duplicate (history, labels) pair");
        }
    }
    if (!is_normalized(density, tol)) throw Error("validate: weights do not sum to 1");
}

}  // namespace glmb
