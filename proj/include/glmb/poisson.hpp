#pragma once

#include <cmath>

#include "glmb/errors.hpp"
#include "glmb/gaussian.hpp"
#include "glmb/region.hpp"
#include "glmb/void_probability.hpp"

namespace glmb {

/// Poisson point process, characterized by its (unnormalized) Gaussian
/// mixture intensity. Used as an independent cross-check for void
/// probabilities and the Cauchy-Schwarz divergence.
struct PoissonProcess {
    GaussianMixture intensity;

    double mean_count() const { return intensity.total_mass(); }
};

/// Q(S) = exp(-<1_S, v>).
inline double poisson_void_probability(const PoissonProcess& proc, const Region& region,
                                       const QuadratureOptions& opts = {}) {
    if (proc.intensity.empty()) return 1.0;
    return std::exp(-region_mass(proc.intensity, region, opts));
}

/// Plain L2 inner product <u, v> of two mixtures (no unit factor),
/// via the Gaussian product integral.
inline double mixture_l2_inner_product(const GaussianMixture& a, const GaussianMixture& b) {
    if (a.empty() || b.empty()) return 0.0;
    if (a.dim() != b.dim()) {
        throw DimensionMismatchError("mixture_l2_inner_product: dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            acc += a.weight(i) * b.weight(j) *
                   std::exp(log_gaussian_pair_integral(a.component(i), b.component(j)));
        }
    }
    return acc;
}

/// Cauchy-Schwarz divergence between Poisson processes: (K/2) ||u - v||^2,
/// evaluated in closed form from pairwise Gaussian product integrals.
inline double poisson_cs_divergence(const PoissonProcess& a, const PoissonProcess& b,
                                    double unit) {
    const double uu = mixture_l2_inner_product(a.intensity, a.intensity);
    const double uv = mixture_l2_inner_product(a.intensity, b.intensity);
    const double vv = mixture_l2_inner_product(b.intensity, b.intensity);
    return std::max(0.5 * unit * (uu - 2.0 * uv + vv), 0.0);
}

}  // namespace glmb
