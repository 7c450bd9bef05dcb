#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "glmb/control_types.hpp"
#include "glmb/cs_divergence.hpp"
#include "glmb/density.hpp"
#include "glmb/errors.hpp"
#include "glmb/filter.hpp"
#include "glmb/models.hpp"
#include "glmb/numeric.hpp"
#include "glmb/parallel.hpp"
#include "glmb/random.hpp"
#include "glmb/region.hpp"
#include "glmb/void_probability.hpp"

namespace glmb {

/// Sensor position `elapsed` seconds after committing to the course
/// change: straight-line motion on the new heading.
inline Eigen::Vector2d sensor_position_after(const SensorKinematics& kin, double course_change,
                                             double elapsed) {
    const double heading = kin.heading + course_change;
    return kin.position +
           kin.speed * elapsed * Eigen::Vector2d(std::cos(heading), std::sin(heading));
}

/// Measurement-free prediction sequence pi_{k+1..k+H}. Birth is excluded
/// unless a per-step birth source is supplied (lookahead birth).
inline std::vector<GlmbDensity> predict_sequence(const GlmbDensity& posterior,
                                                 const LookaheadModel& look, int horizon,
                                                 const FilterParams& params,
                                                 bool with_birth = false) {
    std::vector<GlmbDensity> seq;
    seq.reserve(static_cast<std::size_t>(horizon));
    const GlmbDensity* current = &posterior;
    for (int i = 1; i <= horizon; ++i) {
        const BirthModel birth = (with_birth && look.birth_for_step)
                                     ? look.birth_for_step(i)
                                     : BirthModel::none();
        seq.push_back(predict(*current, look.motion, birth, params));
        current = &seq.back();
    }
    return seq;
}

/// Void-probability feasibility of one action: the minimum over horizon
/// steps of Q over the exclusion disc around the propagated sensor
/// position must exceed the threshold.
inline FeasibilityResult feasible(double course_change,
                                  const std::vector<GlmbDensity>& predicted_seq,
                                  const SensorKinematics& kin, const ActionSpace& space,
                                  const ControlConfig& cfg) {
    FeasibilityResult out;
    out.step_void.reserve(predicted_seq.size());
    for (std::size_t i = 0; i < predicted_seq.size(); ++i) {
        const double elapsed = static_cast<double>(i + 1) * space.control_interval;
        const Eigen::Vector2d center = sensor_position_after(kin, course_change, elapsed);
        const Region disc = Region::disc(center, cfg.exclusion_radius, cfg.position_dims);
        const double q = glmb_void_probability(predicted_seq[i], disc, cfg.quadrature);
        out.step_void.push_back(q);
        out.min_void = std::min(out.min_void, q);
    }
    out.feasible = out.min_void > cfg.void_min;
    return out;
}

namespace detail {

struct RolloutTarget {
    Label label;
    Eigen::VectorXd state;
};

/// One Monte Carlo reward sample: draw a multi-target future from the
/// posterior, simulate the measurements the action would produce, run the
/// filter along the horizon, and score the divergence between the
/// measurement-free prediction and the sample's posterior.
template <typename Sensor>
double sample_reward(double course_change, const GlmbDensity& posterior,
                     const GlmbDensity& pred_free, const LookaheadModel& look,
                     const Sensor& sensor_prototype, const ActionSpace& space,
                     const ControlConfig& cfg, int sample_index) {
    // trajectory and measurement streams exclude the action so the same
    // sampled futures are reused by every action (common random numbers)
    RandomStream traj_rng = RandomStream::derive(cfg.seed, {0x7452414AULL,
                                                            static_cast<std::uint64_t>(sample_index)});
    RandomStream meas_rng = RandomStream::derive(cfg.seed, {0x4D454153ULL,
                                                            static_cast<std::uint64_t>(sample_index)});

    std::vector<RolloutTarget> targets;
    for (auto& [label, state] : sample_realization(posterior, traj_rng)) {
        targets.push_back({label, std::move(state)});
    }

    GlmbDensity dens = posterior;
    const bool with_birth = cfg.lookahead_birth && look.birth_for_step != nullptr;
    for (int i = 1; i <= space.horizon; ++i) {
        std::vector<RolloutTarget> alive;
        alive.reserve(targets.size());
        for (auto& t : targets) {
            const bool survives = traj_rng.bernoulli(look.motion.survival_probability);
            if (!survives) continue;
            t.state = sample_transition(look.motion, t.state, traj_rng);
            alive.push_back(std::move(t));
        }
        targets = std::move(alive);

        const BirthModel birth = with_birth ? look.birth_for_step(i) : BirthModel::none();
        for (std::size_t b = 0; b < birth.size(); ++b) {
            if (traj_rng.bernoulli(birth.existence[b])) {
                targets.push_back({birth.labels[b], birth.densities[b].sample(traj_rng)});
            }
        }

        Sensor sensor = sensor_prototype;
        sensor.position = sensor_position_after(
            look.sensor_state, course_change, static_cast<double>(i) * space.control_interval);
        std::vector<Eigen::VectorXd> states;
        states.reserve(targets.size());
        for (const auto& t : targets) states.push_back(t.state);
        const std::vector<Eigen::VectorXd> z = simulate_measurements(states, sensor, meas_rng);

        dens = update(predict(dens, look.motion, birth, cfg.rollout_filter), z, sensor,
                      cfg.rollout_filter);
    }
    double reward = cs_divergence(pred_free, dens);
    if (!std::isfinite(reward)) reward = cfg.reward_clamp;
    return std::min(reward, cfg.reward_clamp);
}

}  // namespace detail

/// Monte Carlo estimate of the expected information gain of an action:
/// the mean over sampled futures of the divergence between the
/// measurement-free prediction at the horizon and the posterior given the
/// sampled measurements. Infinite sample rewards are clamped before
/// averaging; failed samples are dropped and counted.
template <typename Sensor>
RewardEstimate expected_reward(double course_change, const GlmbDensity& posterior,
                               const GlmbDensity& pred_free, const LookaheadModel& look,
                               const Sensor& sensor_prototype, const ActionSpace& space,
                               const ControlConfig& cfg) {
    const int n = cfg.sample_count;
    std::vector<double> rewards(static_cast<std::size_t>(n), 0.0);
    std::vector<char> ok(static_cast<std::size_t>(n), 0);
    parallel_for(static_cast<std::size_t>(n), cfg.jobs, [&](std::size_t s) {
        try {
            rewards[s] = detail::sample_reward(course_change, posterior, pred_free, look,
                                               sensor_prototype, space, cfg,
                                               static_cast<int>(s));
            ok[s] = 1;
        } catch (const Error&) {
            ok[s] = 0;  // dropped; accounted below
        }
    });

    RewardEstimate out;
    std::vector<double> used;
    used.reserve(static_cast<std::size_t>(n));
    for (std::size_t s = 0; s < rewards.size(); ++s) {
        if (ok[s]) used.push_back(rewards[s]);
        else ++out.failed;
    }
    if (static_cast<double>(out.failed) > cfg.max_failure_fraction * n) {
        throw Error("expected_reward: too many failed reward samples");
    }
    if (used.empty()) throw Error("expected_reward: no reward sample succeeded");
    out.used = static_cast<int>(used.size());
    out.mean = pairwise_sum(used) / static_cast<double>(used.size());
    if (used.size() > 1) {
        std::vector<double> sq;
        sq.reserve(used.size());
        for (double r : used) sq.push_back((r - out.mean) * (r - out.mean));
        const double var = pairwise_sum(sq) / static_cast<double>(used.size() - 1);
        out.stderr_ = std::sqrt(var / static_cast<double>(used.size()));
    }
    return out;
}

/// Constrained myopic action selection: evaluate feasibility of every
/// action, maximize expected reward over the feasible ones (ties broken
/// by smallest course change, positive before negative), and fall back to
/// the max-min-void action with a relaxed flag when nothing is feasible.
template <typename Sensor>
ControlDecision select_action(const GlmbDensity& posterior, const LookaheadModel& look,
                              const Sensor& sensor_prototype, const ActionSpace& space,
                              const ControlConfig& cfg) {
    if (space.course_changes.empty()) {
        throw NoActionsError("select_action: empty action space");
    }
    const std::size_t n_actions = space.course_changes.size();

    ControlDecision decision;
    decision.actions.resize(n_actions);

    const std::vector<GlmbDensity> pred_seq =
        predict_sequence(posterior, look, space.horizon, cfg.rollout_filter, false);
    for (std::size_t a = 0; a < n_actions; ++a) {
        auto& diag = decision.actions[a];
        diag.course_change = space.course_changes[a];
        const FeasibilityResult fr =
            feasible(diag.course_change, pred_seq, look.sensor_state, space, cfg);
        diag.feasible = fr.feasible;
        diag.step_void = fr.step_void;
        diag.min_void = fr.min_void;
    }

    const bool any_feasible = std::any_of(decision.actions.begin(), decision.actions.end(),
                                          [](const ActionDiagnostics& d) { return d.feasible; });

    // tie order: smaller |course change| first, then positive before negative
    auto preferred = [&](double alpha, double beta) {
        const double aa = std::abs(alpha), ab = std::abs(beta);
        if (aa != ab) return aa < ab;
        return alpha > beta;
    };

    if (any_feasible) {
        const GlmbDensity pred_free =
            (cfg.lookahead_birth && look.birth_for_step)
                ? predict_sequence(posterior, look, space.horizon, cfg.rollout_filter, true)
                      .back()
                : pred_seq.back();
        for (std::size_t a = 0; a < n_actions; ++a) {
            auto& diag = decision.actions[a];
            if (!diag.feasible) continue;
            const RewardEstimate est =
                expected_reward(diag.course_change, posterior, pred_free, look,
                                sensor_prototype, space, cfg);
            diag.evaluated = true;
            diag.mean_reward = est.mean;
            diag.reward_stderr = est.stderr_;
            diag.failed_samples = est.failed;
        }
        int best = -1;
        for (std::size_t a = 0; a < n_actions; ++a) {
            const auto& diag = decision.actions[a];
            if (!diag.feasible) continue;
            if (best < 0) {
                best = static_cast<int>(a);
                continue;
            }
            const auto& cur = decision.actions[static_cast<std::size_t>(best)];
            if (diag.mean_reward > cur.mean_reward + 1e-12) {
                best = static_cast<int>(a);
            } else if (std::abs(diag.mean_reward - cur.mean_reward) <= 1e-12 &&
                       preferred(diag.course_change, cur.course_change)) {
                best = static_cast<int>(a);
            }
        }
        decision.action_index = best;
    } else {
        decision.constraint_relaxed = true;
        int best = 0;
        for (std::size_t a = 1; a < n_actions; ++a) {
            const auto& diag = decision.actions[a];
            const auto& cur = decision.actions[static_cast<std::size_t>(best)];
            if (diag.min_void > cur.min_void ||
                (diag.min_void == cur.min_void &&
                 preferred(diag.course_change, cur.course_change))) {
                best = static_cast<int>(a);
            }
        }
        decision.action_index = best;
    }
    decision.course_change =
        space.course_changes[static_cast<std::size_t>(decision.action_index)];
    return decision;
}

}  // namespace glmb
