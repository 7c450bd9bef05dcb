#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "glmb/errors.hpp"
#include "glmb/numeric.hpp"
#include "glmb/random.hpp"

namespace glmb {

/// Multivariate Gaussian with a cached Cholesky factor of its covariance.
/// Covariance validity is enforced at construction: if the factorization
/// fails, a jitter of 1e-12 * trace/d is added to the diagonal once; a
/// second failure is a hard error.
class Gaussian {
public:
    Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov)
        : mean_(std::move(mean)), cov_(std::move(cov)) {
        if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size()) {
            throw DimensionMismatchError("Gaussian: covariance shape does not match mean");
        }
        cov_ = 0.5 * (cov_ + cov_.transpose().eval());
        if (!factorize()) {
            const double d = static_cast<double>(dim());
            const double jitter = 1e-12 * cov_.trace() / std::max(d, 1.0);
            cov_.diagonal().array() += std::max(jitter, 1e-300);
            if (!factorize()) {
                throw Error("Gaussian: covariance not positive definite after jitter");
            }
        }
    }

    int dim() const { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    const Eigen::MatrixXd& chol_lower() const { return chol_lower_; }
    double log_det_cov() const { return log_det_; }

    double log_pdf(const Eigen::VectorXd& x) const {
        const Eigen::VectorXd y =
            chol_lower_.triangularView<Eigen::Lower>().solve(x - mean_);
        return -0.5 * (dim() * std::log(2.0 * std::numbers::pi) + log_det_ + y.squaredNorm());
    }

    double pdf(const Eigen::VectorXd& x) const { return std::exp(log_pdf(x)); }

    /// Squared Mahalanobis distance of x from the mean.
    double mahalanobis_sq(const Eigen::VectorXd& x) const {
        const Eigen::VectorXd y =
            chol_lower_.triangularView<Eigen::Lower>().solve(x - mean_);
        return y.squaredNorm();
    }

    Eigen::VectorXd sample(RandomStream& rng) const {
        return mean_ + chol_lower_ * rng.normal_vector(dim());
    }

    bool operator==(const Gaussian& o) const {
        return mean_ == o.mean_ && cov_ == o.cov_;
    }

private:
    bool factorize() {
        Eigen::LLT<Eigen::MatrixXd> llt(cov_);
        if (llt.info() != Eigen::Success) return false;
        chol_lower_ = llt.matrixL();
        log_det_ = 2.0 * chol_lower_.diagonal().array().log().sum();
        return std::isfinite(log_det_);
    }

    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd chol_lower_;
    double log_det_ = 0.0;
};

/// log N(a.mean; b.mean, a.cov + b.cov) — the Gaussian product integral
/// identity used by every closed-form inner product in the library.
inline double log_gaussian_pair_integral(const Gaussian& a, const Gaussian& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatchError("log_gaussian_pair_integral: dimension mismatch");
    }
    const Gaussian merged(b.mean(), a.cov() + b.cov());
    return merged.log_pdf(a.mean());
}

/// Weighted Gaussian mixture. Weights are positive but not required to
/// sum to one: normalized mixtures serve as single-object densities,
/// unnormalized ones as intensity functions carrying a total mass.
/// Copy-on-write: copies share an immutable payload, so passing mixtures
/// around the filter's hypothesis expansion costs a refcount, not heap
/// traffic. Mutation is only legal on an object a single thread owns.
class GaussianMixture {
    struct Data {
        std::vector<double> weights;
        std::vector<Gaussian> components;
    };

public:
    GaussianMixture() = default;

    void add(double weight, Gaussian g) {
        if (!(weight > 0.0) || !std::isfinite(weight)) {
            throw Error("GaussianMixture: weights must be positive and finite");
        }
        if (!empty() && g.dim() != dim()) {
            throw DimensionMismatchError("GaussianMixture: component dimension mismatch");
        }
        Data& d = own();
        d.weights.push_back(weight);
        d.components.push_back(std::move(g));
    }

    std::size_t size() const { return data_ ? data_->components.size() : 0; }
    bool empty() const { return size() == 0; }
    int dim() const { return empty() ? 0 : data_->components.front().dim(); }
    double weight(std::size_t i) const { return data_->weights[i]; }
    const Gaussian& component(std::size_t i) const { return data_->components[i]; }

    const std::vector<double>& weights() const {
        static const std::vector<double> none;
        return data_ ? data_->weights : none;
    }

    double total_mass() const {
        double s = 0.0;
        for (double w : weights()) s += w;
        return s;
    }

    bool is_normalized(double tol = 1e-9) const {
        return std::abs(total_mass() - 1.0) <= tol;
    }

    GaussianMixture normalized() const {
        const double mass = total_mass();
        if (!(mass > 0.0)) throw Error("GaussianMixture: cannot normalize zero mass");
        GaussianMixture out;
        for (std::size_t i = 0; i < size(); ++i) out.add(weight(i) / mass, component(i));
        return out;
    }

    GaussianMixture scaled(double factor) const {
        GaussianMixture out;
        for (std::size_t i = 0; i < size(); ++i) out.add(weight(i) * factor, component(i));
        return out;
    }

    double log_pdf(const Eigen::VectorXd& x) const {
        double acc = kNegInf;
        for (std::size_t i = 0; i < size(); ++i) {
            acc = log_add(acc, std::log(weight(i)) + component(i).log_pdf(x));
        }
        return acc;
    }

    double pdf(const Eigen::VectorXd& x) const { return std::exp(log_pdf(x)); }

    /// Mass-weighted mean of the mixture.
    Eigen::VectorXd mean() const {
        if (empty()) throw EmptyDensityError("GaussianMixture::mean on empty mixture");
        Eigen::VectorXd m = Eigen::VectorXd::Zero(dim());
        for (std::size_t i = 0; i < size(); ++i) m += weight(i) * component(i).mean();
        return m / total_mass();
    }

    /// Draw one point; weights are treated as selection probabilities.
    Eigen::VectorXd sample(RandomStream& rng) const {
        if (empty()) throw EmptyDensityError("GaussianMixture::sample on empty mixture");
        const std::size_t i = rng.pick_weighted(weights());
        return component(i).sample(rng);
    }

    bool operator==(const GaussianMixture& o) const {
        if (data_ == o.data_) return true;
        if (!data_ || !o.data_) return empty() && o.empty();
        return data_->weights == o.data_->weights && data_->components == o.data_->components;
    }

    /// Bit-exact content hash; used to memoize per-density integrals.
    std::uint64_t content_hash() const {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        auto mix = [&h](double v) {
            h ^= std::bit_cast<std::uint64_t>(v);
            h *= 0x100000001B3ULL;
        };
        for (std::size_t i = 0; i < size(); ++i) {
            mix(weight(i));
            const auto& g = component(i);
            for (int r = 0; r < g.dim(); ++r) mix(g.mean()[r]);
            for (int r = 0; r < g.dim(); ++r) {
                for (int c = 0; c < g.dim(); ++c) mix(g.cov()(r, c));
            }
        }
        return h;
    }

private:
    Data& own() {
        if (!data_) {
            data_ = std::make_shared<Data>();
        } else if (data_.use_count() > 1) {
            data_ = std::make_shared<Data>(*data_);
        }
        return const_cast<Data&>(*data_);
    }

    std::shared_ptr<const Data> data_;
};

/// Convenience factory for a one-component mixture.
inline GaussianMixture single_gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
    GaussianMixture gm;
    gm.add(1.0, Gaussian(std::move(mean), std::move(cov)));
    return gm;
}

}  // namespace glmb
