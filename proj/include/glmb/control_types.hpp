#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "glmb/filter.hpp"
#include "glmb/models.hpp"
#include "glmb/numeric.hpp"
#include "glmb/quadrature.hpp"

namespace glmb {

/// Discrete space of course-change actions, executed at constant speed.
/// `control_interval` is both the horizon step length and the decision
/// period; `horizon` is the number of lookahead steps.
struct ActionSpace {
    std::vector<double> course_changes;  // radians, sorted
    double speed = 0.0;                  // m/s
    double control_interval = 80.0;      // seconds per horizon step
    int horizon = 5;
};

/// Uniform action grid: -pi..pi in steps of `step` radians.
inline std::vector<double> action_grid(double step) {
    std::vector<double> grid;
    const int n = static_cast<int>(std::round(std::numbers::pi / step));
    for (int i = -n; i <= n; ++i) grid.push_back(static_cast<double>(i) * step);
    return grid;
}

struct ControlConfig {
    int sample_count = 50;           // reward samples N
    double exclusion_radius = 1000;  // r_v, meters
    double void_min = 0.95;          // P_vmin
    std::uint64_t seed = 0;          // per-decision seed
    double reward_clamp = 1e6;       // cap for infinite sample rewards, nats
    bool lookahead_birth = false;
    double max_failure_fraction = 0.2;
    int jobs = 1;
    FilterParams rollout_filter{};
    QuadratureOptions quadrature{};
    std::vector<int> position_dims{0, 2};
};

/// Sensor platform pose used by the lookahead: position, current heading
/// and cruise speed.
struct SensorKinematics {
    Eigen::Vector2d position{0.0, 0.0};
    double heading = 0.0;  // radians, 0 = +x
    double speed = 0.0;
};

/// Everything the lookahead needs: the per-step motion model, the sensor
/// prototype's kinematic state, and (optionally) a birth model per
/// lookahead step when rollout birth is enabled.
struct LookaheadModel {
    MotionModel motion;
    SensorKinematics sensor_state;
    std::function<BirthModel(int)> birth_for_step;  // may be empty
};

struct FeasibilityResult {
    bool feasible = false;
    std::vector<double> step_void;
    double min_void = 1.0;
};

struct RewardEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    int used = 0;
    int failed = 0;
};

struct ActionDiagnostics {
    double course_change = 0.0;
    bool feasible = false;
    std::vector<double> step_void;
    double min_void = 1.0;
    bool evaluated = false;
    double mean_reward = 0.0;
    double reward_stderr = 0.0;
    int failed_samples = 0;
};

struct ControlDecision {
    int action_index = -1;
    double course_change = 0.0;
    bool constraint_relaxed = false;
    std::vector<ActionDiagnostics> actions;
};

}  // namespace glmb
