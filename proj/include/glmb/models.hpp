#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "glmb/errors.hpp"
#include "glmb/gaussian.hpp"
#include "glmb/label.hpp"
#include "glmb/numeric.hpp"
#include "glmb/random.hpp"
#include "glmb/region.hpp"

namespace glmb {

/// Affine-Gaussian transition kernel x' = F x + G w, w ~ N(0, I), plus a
/// constant survival probability per step. `noise_factor` is G, so the
/// process noise covariance is G G^T and sampling needs no factorization.
struct MotionModel {
    Eigen::MatrixXd transition;    // F
    Eigen::MatrixXd noise_factor;  // G
    double survival_probability = 1.0;

    Eigen::MatrixXd process_noise() const { return noise_factor * noise_factor.transpose(); }
};

/// Discrete white noise acceleration model on state [px, vx, py, vy]:
/// per-axis blocks F = [[1, dt], [0, 1]], Gamma = [dt^2/2, dt]^T, and
/// acceleration noise sd `accel_sd` on each axis.
inline MotionModel constant_velocity_model(double dt, double accel_sd,
                                           double survival_probability) {
    Eigen::MatrixXd F = Eigen::MatrixXd::Identity(4, 4);
    F(0, 1) = dt;
    F(2, 3) = dt;
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(4, 2);
    gamma(0, 0) = 0.5 * dt * dt;
    gamma(1, 0) = dt;
    gamma(2, 1) = 0.5 * dt * dt;
    gamma(3, 1) = dt;
    return MotionModel{std::move(F), accel_sd * gamma, survival_probability};
}

/// Chapman-Kolmogorov closed form for one Gaussian: m -> Fm,
/// P -> F P F^T + Q.
inline Gaussian propagate(const MotionModel& model, const Gaussian& g) {
    return Gaussian(model.transition * g.mean(),
                    model.transition * g.cov() * model.transition.transpose() +
                        model.process_noise());
}

inline GaussianMixture propagate(const MotionModel& model, const GaussianMixture& gm) {
    GaussianMixture out;
    for (std::size_t i = 0; i < gm.size(); ++i) {
        out.add(gm.weight(i), propagate(model, gm.component(i)));
    }
    return out;
}

/// Draw a noisy transition of a single state.
inline Eigen::VectorXd sample_transition(const MotionModel& model, const Eigen::VectorXd& x,
                                         RandomStream& rng) {
    return model.transition * x +
           model.noise_factor * rng.normal_vector(static_cast<int>(model.noise_factor.cols()));
}

/// Labeled multi-Bernoulli birth: one label per slot with independent
/// existence probability and its own spawn density. Labels must carry the
/// current step as birth_time.
struct BirthModel {
    std::vector<Label> labels;
    std::vector<double> existence;
    std::vector<GaussianMixture> densities;

    static BirthModel none() { return {}; }
    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    void add(Label label, double existence_probability, GaussianMixture density) {
        if (!(existence_probability > 0.0) || !(existence_probability < 1.0)) {
            throw Error("BirthModel: existence probability must lie in (0, 1)");
        }
        labels.push_back(label);
        existence.push_back(existence_probability);
        densities.push_back(std::move(density));
    }
};

/// Piecewise range noise: sd = eta * range, clamped to [eta*r1, eta*r2].
struct RangeNoiseProfile {
    double eta = 0.1;
    double r1 = 1000.0;
    double r2 = 10000.0;

    double sd(double range) const { return eta * std::clamp(range, r1, r2); }
};

/// Bearing/range sensor with range-dependent noise and detection
/// probability. The measurement is [bearing, range] of the positional
/// part of the state relative to the sensor position.
class BearingRangeSensor {
public:
    Eigen::Vector2d position{0.0, 0.0};
    double bearing_sd = 2.0 * std::numbers::pi / 180.0;
    RangeNoiseProfile range_noise;
    double detection_sd = 20000.0;  // range scale of the detection roll-off
    double clutter_rate = 0.0;
    AxisBox clutter_box;            // spatial window implying the measurement window
    std::vector<int> position_dims{0, 2};

    int measurement_dim() const { return 2; }

    Eigen::Vector2d target_offset(const Eigen::VectorXd& state) const {
        return Eigen::Vector2d(state[position_dims[0]], state[position_dims[1]]) - position;
    }

    double range_to(const Eigen::VectorXd& state) const {
        return std::max(target_offset(state).norm(), 1e-9);
    }

    Eigen::VectorXd measure(const Eigen::VectorXd& state) const {
        const Eigen::Vector2d d = target_offset(state);
        Eigen::VectorXd z(2);
        z[0] = std::atan2(d.y(), d.x());
        z[1] = std::max(d.norm(), 1e-9);
        return z;
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& state) const {
        const Eigen::Vector2d d = target_offset(state);
        const double r2 = std::max(d.squaredNorm(), 1e-18);
        const double r = std::sqrt(r2);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, state.size());
        H(0, position_dims[0]) = -d.y() / r2;
        H(0, position_dims[1]) = d.x() / r2;
        H(1, position_dims[0]) = d.x() / r;
        H(1, position_dims[1]) = d.y() / r;
        return H;
    }

    /// Measurement noise evaluated at a linearization state.
    Eigen::MatrixXd noise(const Eigen::VectorXd& state) const {
        const double sr = range_noise.sd(range_to(state));
        Eigen::MatrixXd R = Eigen::MatrixXd::Zero(2, 2);
        R(0, 0) = bearing_sd * bearing_sd;
        R(1, 1) = sr * sr;
        return R;
    }

    /// Residual with the bearing wrapped to (-pi, pi].
    Eigen::VectorXd residual(const Eigen::VectorXd& z, const Eigen::VectorXd& predicted) const {
        Eigen::VectorXd r = z - predicted;
        r[0] = wrap_angle(r[0]);
        return r;
    }

    /// p_D(x) = N(range; 0, detection_sd^2) / N(0; 0, detection_sd^2).
    double detection_probability(const Eigen::VectorXd& state) const {
        const double r = range_to(state);
        return std::exp(-0.5 * r * r / (detection_sd * detection_sd));
    }

    /// Range extent of the measurement window: the diagonal of the
    /// clutter box. Independent of the sensor position, so the clutter
    /// field keeps the same density wherever the platform moves.
    double max_clutter_range() const {
        const double dx = clutter_box.upper[0] - clutter_box.lower[0];
        const double dy = clutter_box.upper[1] - clutter_box.lower[1];
        return std::max(std::hypot(dx, dy), 1.0);
    }

    /// Clutter intensity: rate x uniform density on the bearing/range
    /// window [-pi, pi] x [0, max_clutter_range]. Floored so likelihood
    /// ratios stay finite when the rate is zero.
    double log_clutter_intensity(const Eigen::VectorXd&) const {
        const double window = 2.0 * std::numbers::pi * max_clutter_range();
        return std::log(std::max(clutter_rate, 1e-30) / window);
    }

    Eigen::VectorXd sample_clutter(RandomStream& rng) const {
        Eigen::VectorXd z(2);
        z[0] = rng.uniform(-std::numbers::pi, std::numbers::pi);
        z[1] = rng.uniform(0.0, max_clutter_range());
        return z;
    }

    Eigen::VectorXd sample_detection(const Eigen::VectorXd& state, RandomStream& rng) const {
        Eigen::VectorXd z = measure(state);
        z[0] = wrap_angle(z[0] + bearing_sd * rng.normal());
        z[1] += range_noise.sd(z[1]) * rng.normal();
        return z;
    }
};

/// Linear-Gaussian sensor stub: z = H x + noise, constant detection
/// probability and clutter density. Used for oracle tests against the
/// standard single-target Gaussian update.
class LinearSensor {
public:
    Eigen::MatrixXd observation;  // H
    Eigen::MatrixXd noise_cov;    // R
    double detection_prob = 1.0;
    double clutter_rate = 0.0;
    double clutter_density = 1e-6;  // uniform kappa over the window
    double window_volume = 1.0;

    int measurement_dim() const { return static_cast<int>(observation.rows()); }

    Eigen::VectorXd measure(const Eigen::VectorXd& state) const { return observation * state; }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd&) const { return observation; }

    Eigen::MatrixXd noise(const Eigen::VectorXd&) const { return noise_cov; }

    Eigen::VectorXd residual(const Eigen::VectorXd& z, const Eigen::VectorXd& predicted) const {
        return z - predicted;
    }

    double detection_probability(const Eigen::VectorXd&) const { return detection_prob; }

    double log_clutter_intensity(const Eigen::VectorXd&) const {
        return std::log(std::max(clutter_density, 1e-300));
    }

    Eigen::VectorXd sample_detection(const Eigen::VectorXd& state, RandomStream& rng) const {
        const Eigen::LLT<Eigen::MatrixXd> llt(noise_cov);
        return measure(state) +
               Eigen::MatrixXd(llt.matrixL()) * rng.normal_vector(measurement_dim());
    }
};

/// Standard multi-object observation: each state detected with p_D(x)
/// producing h(x) + noise, plus Poisson clutter, in randomized order.
template <typename Sensor>
std::vector<Eigen::VectorXd> simulate_measurements(const std::vector<Eigen::VectorXd>& states,
                                                   const Sensor& sensor, RandomStream& rng) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& x : states) {
        if (rng.bernoulli(sensor.detection_probability(x))) {
            out.push_back(sensor.sample_detection(x, rng));
        }
    }
    if constexpr (requires { sensor.sample_clutter(rng); }) {
        const int n_clutter = rng.poisson(sensor.clutter_rate);
        for (int i = 0; i < n_clutter; ++i) out.push_back(sensor.sample_clutter(rng));
    }
    rng.shuffle(out);
    return out;
}

}  // namespace glmb
