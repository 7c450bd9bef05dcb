#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "glmb/density.hpp"
#include "glmb/errors.hpp"
#include "glmb/gaussian.hpp"
#include "glmb/numeric.hpp"
#include "glmb/quadrature.hpp"
#include "glmb/region.hpp"

namespace glmb {

namespace detail {

/// Positional marginal of a Gaussian state density.
inline Gaussian positional_marginal(const Gaussian& g, const std::vector<int>& dims) {
    const auto n = static_cast<Eigen::Index>(dims.size());
    Eigen::VectorXd m(n);
    Eigen::MatrixXd P(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m[i] = g.mean()[dims[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j < n; ++j) {
            P(i, j) = g.cov()(dims[static_cast<std::size_t>(i)],
                              dims[static_cast<std::size_t>(j)]);
        }
    }
    return Gaussian(std::move(m), std::move(P));
}

inline double halfspace_probability(const Gaussian& pos, const HalfSpace& hs) {
    const double mu = hs.normal.dot(pos.mean());
    const double var = hs.normal.dot(pos.cov() * hs.normal);
    if (var <= 0.0) return mu <= hs.offset ? 1.0 : 0.0;
    return normal_cdf((hs.offset - mu) / std::sqrt(var));
}

inline double interval_probability(double mu, double sd, double lo, double hi) {
    if (sd <= 0.0) return (mu >= lo && mu <= hi) ? 1.0 : 0.0;
    return normal_cdf((hi - mu) / sd) - normal_cdf((lo - mu) / sd);
}

inline double box_probability(const Gaussian& pos, const AxisBox& box,
                              const QuadratureOptions& opts, SimpsonState& st) {
    const Eigen::Index n = pos.mean().size();
    // detect a (numerically) diagonal covariance: CDF products are exact
    bool diagonal = true;
    for (Eigen::Index i = 0; i < n && diagonal; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::abs(pos.cov()(i, j)) >
                1e-12 * std::sqrt(pos.cov()(i, i) * pos.cov()(j, j))) {
                diagonal = false;
                break;
            }
        }
    }
    if (diagonal || n == 1) {
        double p = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            p *= interval_probability(pos.mean()[i], std::sqrt(pos.cov()(i, i)),
                                      box.lower[i], box.upper[i]);
        }
        return p;
    }
    if (n != 2) {
        throw TooLargeError("box_probability: correlated boxes supported up to 2 dims");
    }
    // correlated 2-D box: integrate the conditional of dim 1 given dim 0
    const double m0 = pos.mean()[0], m1 = pos.mean()[1];
    const double v0 = pos.cov()(0, 0), v1 = pos.cov()(1, 1), c01 = pos.cov()(0, 1);
    const double s0 = std::sqrt(v0);
    const double slope = c01 / v0;
    const double cond_var = std::max(v1 - c01 * c01 / v0, 0.0);
    const double cond_sd = std::sqrt(cond_var);
    const double lo = std::max(box.lower[0], m0 - 10.0 * s0);
    const double hi = std::min(box.upper[0], m0 + 10.0 * s0);
    if (!(hi > lo)) return 0.0;
    auto f = [&](double x) {
        const double mc = m1 + slope * (x - m0);
        const double z = (x - m0) / s0;
        const double pdf0 = std::exp(-0.5 * z * z) / (s0 * std::sqrt(2.0 * std::numbers::pi));
        return pdf0 * interval_probability(mc, cond_sd, box.lower[1], box.upper[1]);
    };
    return adaptive_simpson(f, lo, hi, opts.rel_tol, st);
}

/// Probability that a 2-D Gaussian falls inside a disc. Works in the
/// whitened space of the Gaussian, where the radial integral has a closed
/// form and only the angle needs quadrature. Panel boundaries are packed
/// geometrically around the disc direction so narrow far-away discs are
/// not missed by the sampler.
inline double disc_probability(const Gaussian& pos, const Disc& disc,
                               const QuadratureOptions& opts, SimpsonState& st) {
    const Eigen::Matrix2d L = pos.chol_lower();
    const Eigen::Vector2d d = disc.center - pos.mean().head<2>();
    const double r2 = disc.radius * disc.radius;
    const double dd = d.squaredNorm();

    auto segment_mass = [&](double theta) {
        const Eigen::Vector2d v = L * Eigen::Vector2d(std::cos(theta), std::sin(theta));
        const double a = v.squaredNorm();
        const double b = v.dot(d);
        const double disc_q = b * b - a * (dd - r2);
        if (disc_q <= 0.0 || a <= 0.0) return 0.0;
        const double sq = std::sqrt(disc_q);
        const double t_hi = (b + sq) / a;
        if (t_hi <= 0.0) return 0.0;
        const double t_lo = std::max((b - sq) / a, 0.0);
        return (std::exp(-0.5 * t_lo * t_lo) - std::exp(-0.5 * t_hi * t_hi)) /
               (2.0 * std::numbers::pi);
    };

    // whitened direction of the disc center; arbitrary when on top of it
    const Eigen::Vector2d zc = L.triangularView<Eigen::Lower>().solve(d);
    const double theta_c = (zc.norm() > 0.0) ? std::atan2(zc.y(), zc.x()) : 0.0;

    std::vector<double> bounds;
    bounds.push_back(theta_c - std::numbers::pi);
    bounds.push_back(theta_c + std::numbers::pi);
    for (int j = 1; j <= 20; ++j) {
        const double w = std::numbers::pi * std::pow(0.5, j);
        bounds.push_back(theta_c - w);
        bounds.push_back(theta_c + w);
    }
    bounds.push_back(theta_c);
    std::sort(bounds.begin(), bounds.end());

    const double eps_per_segment = opts.rel_tol / static_cast<double>(bounds.size());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        total += adaptive_simpson(segment_mass, bounds[i], bounds[i + 1], eps_per_segment, st);
    }
    return total;
}

struct MixtureKey {
    const GaussianMixture* mixture;
    std::uint64_t hash;
};

struct MixtureKeyHash {
    std::size_t operator()(const MixtureKey& k) const { return k.hash; }
};

struct MixtureKeyEq {
    bool operator()(const MixtureKey& a, const MixtureKey& b) const {
        return a.hash == b.hash && *a.mixture == *b.mixture;
    }
};

}  // namespace detail

/// P( position of X in S ) for a single Gaussian state density.
inline double gaussian_region_probability(const Gaussian& g, const Region& region,
                                          const QuadratureOptions& opts = {}) {
    detail::SimpsonState st{0, opts.max_evals};
    const Gaussian pos = detail::positional_marginal(g, region.position_dims());
    double p = 0.0;
    if (const auto* hs = std::get_if<HalfSpace>(&region.shape())) {
        p = detail::halfspace_probability(pos, *hs);
    } else if (const auto* box = std::get_if<AxisBox>(&region.shape())) {
        p = detail::box_probability(pos, *box, opts, st);
    } else {
        p = detail::disc_probability(pos, std::get<Disc>(region.shape()), opts, st);
    }
    return std::clamp(p, 0.0, 1.0);
}

/// Mass of the mixture inside S: sum_i w_i P(component i in S). For a
/// normalized mixture this is the inclusion probability; for an intensity
/// it is the expected count in S.
inline double region_mass(const GaussianMixture& gm, const Region& region,
                          const QuadratureOptions& opts = {}) {
    double mass = 0.0;
    for (std::size_t i = 0; i < gm.size(); ++i) {
        mass += gm.weight(i) * gaussian_region_probability(gm.component(i), region, opts);
    }
    return mass;
}

/// <1 - 1_S, p> for a normalized single-object density: the probability
/// that the object lies outside S. Clamped to [0, 1] so quadrature noise
/// cannot break the probability contract.
inline double escape_probability(const GaussianMixture& gm, const Region& region,
                                 const QuadratureOptions& opts = {}) {
    return std::clamp(1.0 - region_mass(gm, region, opts), 0.0, 1.0);
}

/// Void probability of a GLMB: sum_c w_c prod_l <1 - 1_S, p_c(., l)>.
/// Each unique single-object density is integrated once per call; the
/// cache is local to the call so concurrent use never shares state.
inline double glmb_void_probability(const GlmbDensity& density, const Region& region,
                                    const QuadratureOptions& opts = {}) {
    std::unordered_map<detail::MixtureKey, double, detail::MixtureKeyHash,
                       detail::MixtureKeyEq>
        cache;
    auto escape = [&](const GaussianMixture& gm) {
        const detail::MixtureKey key{&gm, gm.content_hash()};
        const auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const double q = escape_probability(gm, region, opts);
        cache.emplace(key, q);
        return q;
    };
    double total = 0.0;
    for (const auto& c : density.components) {
        double prod = 1.0;
        for (const auto& gm : c.densities) {
            prod *= escape(gm);
            if (prod == 0.0) break;
        }
        total += c.weight() * prod;
    }
    return std::clamp(total, 0.0, 1.0);
}

}  // namespace glmb
