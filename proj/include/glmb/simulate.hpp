#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "glmb/models.hpp"
#include "glmb/random.hpp"
#include "glmb/scenario.hpp"

namespace glmb {

struct TruthTarget {
    int id = 0;
    Eigen::VectorXd state;
};

/// Ground truth per filter step (step k covers time k * filter_interval,
/// k = 1..steps). Targets spawn at their scheduled state and follow the
/// dynamic model until their scheduled death; deterministic given the
/// stream.
inline std::vector<std::vector<TruthTarget>> simulate_truth(const ScenarioConfig& cfg,
                                                            RandomStream& rng) {
    const MotionModel motion = cfg.motion_model();
    const int steps = cfg.steps();
    std::vector<Eigen::VectorXd> current(cfg.targets.size());
    std::vector<bool> alive(cfg.targets.size(), false);

    std::vector<std::vector<TruthTarget>> out(static_cast<std::size_t>(steps));
    for (int k = 1; k <= steps; ++k) {
        const double t = k * cfg.filter_interval;
        auto& snapshot = out[static_cast<std::size_t>(k - 1)];
        for (std::size_t i = 0; i < cfg.targets.size(); ++i) {
            const auto& sched = cfg.targets[i];
            const bool should_live = t >= sched.birth_time && t < sched.death_time;
            if (should_live && !alive[i]) {
                current[i] = sched.initial_state;
                alive[i] = true;
            } else if (should_live) {
                current[i] = sample_transition(motion, current[i], rng);
            } else {
                alive[i] = false;
            }
            if (alive[i]) snapshot.push_back({static_cast<int>(i), current[i]});
        }
    }
    return out;
}

inline std::vector<Eigen::VectorXd> truth_states(const std::vector<TruthTarget>& truth) {
    std::vector<Eigen::VectorXd> s;
    s.reserve(truth.size());
    for (const auto& t : truth) s.push_back(t.state);
    return s;
}

inline std::vector<Eigen::VectorXd> positions_of(const std::vector<Eigen::VectorXd>& states) {
    std::vector<Eigen::VectorXd> p;
    p.reserve(states.size());
    for (const auto& s : states) {
        Eigen::VectorXd xy(2);
        xy << s[0], s[2];
        p.push_back(std::move(xy));
    }
    return p;
}

}  // namespace glmb
