#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "glmb/density.hpp"
#include "glmb/errors.hpp"
#include "glmb/gaussian.hpp"
#include "glmb/numeric.hpp"

namespace glmb {

/// log( K * <a, b> ) for Gaussian mixtures, via the pairwise product
/// integral N(m_i; m_j, P_i + P_j). Kept in the log domain: products of
/// these terms over labels underflow long before they stop mattering.
inline double log_gaussian_mixture_inner_product(const GaussianMixture& a,
                                                 const GaussianMixture& b, double log_unit) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatchError("mixture inner product: dimension mismatch");
    }
    double acc = kNegInf;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double lw = std::log(a.weight(i));
        for (std::size_t j = 0; j < b.size(); ++j) {
            acc = log_add(acc, lw + std::log(b.weight(j)) +
                                   log_gaussian_pair_integral(a.component(i), b.component(j)));
        }
    }
    return log_unit + acc;
}

/// K * <a, b>; dimensionless, strictly positive for valid mixtures
/// (may underflow to zero in linear representation — use the log form
/// when values can be extreme).
inline double gaussian_mixture_inner_product(const GaussianMixture& a,
                                             const GaussianMixture& b, double unit) {
    return std::exp(log_gaussian_mixture_inner_product(a, b, std::log(unit)));
}

/// <phi, psi>_K in log form. `is_zero` marks exact orthogonality: no pair
/// of components with equal label sets, which the divergence maps to
/// +infinity.
struct GlmbInnerProduct {
    double log_value = kNegInf;
    bool is_zero = true;
};

namespace detail {

struct LabelSetHash {
    std::size_t operator()(const std::vector<Label>& ls) const {
        return static_cast<std::size_t>(hash_value(ls));
    }
};

using LabelSetBuckets =
    std::unordered_map<std::vector<Label>, std::vector<std::size_t>, LabelSetHash>;

inline LabelSetBuckets bucket_by_label_set(const GlmbDensity& d) {
    LabelSetBuckets buckets;
    for (std::size_t i = 0; i < d.components.size(); ++i) {
        buckets[d.components[i].labels].push_back(i);
    }
    return buckets;
}

}  // namespace detail

/// <phi, psi>_K: only pairs of components with identical label sets
/// contribute, so components are bucketed by canonical label set and
/// non-matching pairs cost nothing.
inline GlmbInnerProduct glmb_inner_product(const GlmbDensity& phi, const GlmbDensity& psi) {
    if (phi.state_dim != psi.state_dim) {
        throw DimensionMismatchError("glmb_inner_product: state dimension mismatch");
    }
    if (phi.hypervolume_unit != psi.hypervolume_unit) {
        throw UnitMismatchError("glmb_inner_product: hyper-volume units differ");
    }
    const double log_unit = std::log(phi.hypervolume_unit);
    const auto psi_buckets = detail::bucket_by_label_set(psi);

    GlmbInnerProduct out;
    std::vector<double> terms;
    for (std::size_t ci = 0; ci < phi.components.size(); ++ci) {
        const auto& pc = phi.components[ci];
        const auto it = psi_buckets.find(pc.labels);
        if (it == psi_buckets.end()) continue;
        for (const std::size_t di : it->second) {
            const auto& qd = psi.components[di];
            double term = pc.log_weight + qd.log_weight;
            for (std::size_t li = 0; li < pc.labels.size(); ++li) {
                term += log_gaussian_mixture_inner_product(pc.densities[li], qd.densities[li],
                                                           log_unit);
            }
            terms.push_back(term);
            out.is_zero = false;
        }
    }
    out.log_value = log_sum_exp(terms);
    return out;
}

/// Cauchy-Schwarz divergence between two GLMBs, computed in the log
/// domain. Returns +infinity when the supports are orthogonal; exactly 0
/// for identical inputs.
inline double cs_divergence(const GlmbDensity& phi, const GlmbDensity& psi) {
    const GlmbInnerProduct cross = glmb_inner_product(phi, psi);
    if (cross.is_zero) return kInf;
    const GlmbInnerProduct self_phi = glmb_inner_product(phi, phi);
    const GlmbInnerProduct self_psi = glmb_inner_product(psi, psi);
    return -(cross.log_value - 0.5 * self_phi.log_value - 0.5 * self_psi.log_value);
}

}  // namespace glmb
