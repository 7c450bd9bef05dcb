#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace glmb {

/// splitmix64 step; also used as the mixing function for stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream. Self-contained so that results are
/// bit-reproducible across standard library versions and worker counts.
/// Substreams are derived by hashing a seed with a list of salts, so a
/// stream for (seed, run, purpose) never overlaps its siblings.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {
        // decorrelate trivially related seeds
        (void)splitmix64(state_);
    }

    static RandomStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> salts) {
        std::uint64_t s = seed;
        for (std::uint64_t salt : salts) {
            std::uint64_t mix = s ^ (salt + 0x9E3779B97F4A7C15ULL);
            s = splitmix64(mix);
        }
        return RandomStream(s);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; caches the second draw.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    Eigen::VectorXd normal_vector(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Poisson count by exponential inter-arrival accumulation.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        int n = -1;
        double t = 0.0;
        while (t < mean) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            t += -std::log(u);
            ++n;
        }
        return n;
    }

    /// Index drawn proportionally to the given non-negative weights.
    std::size_t pick_weighted(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    /// Uniform integer in [0, n).
    std::size_t pick_uniform(std::size_t n) {
        return n == 0 ? 0 : static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[pick_uniform(i)]);
        }
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace glmb
