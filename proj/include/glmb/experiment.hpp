#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "glmb/control.hpp"
#include "glmb/density.hpp"
#include "glmb/errors.hpp"
#include "glmb/filter.hpp"
#include "glmb/ospa.hpp"
#include "glmb/parallel.hpp"
#include "glmb/random.hpp"
#include "glmb/scenario.hpp"
#include "glmb/simulate.hpp"

namespace glmb {

struct StepRecord {
    int run = 0;
    int step = 0;
    double time = 0.0;
    double ospa = 0.0;
    double ospa_loc = 0.0;
    double ospa_card = 0.0;
    int truth_n = 0;
    int est_n = 0;
    double sensor_x = 0.0;
    double sensor_y = 0.0;
};

/// One row per candidate action per control decision.
struct ControlLogRow {
    int run = 0;
    double time = 0.0;
    double action_deg = 0.0;
    bool feasible = false;
    double min_void = 1.0;
    std::vector<double> step_void;
    bool evaluated = false;
    double mean_reward = 0.0;
    double reward_stderr = 0.0;
    bool chosen = false;
    bool relaxed = false;
    /// Independent recomputation of the chosen action's min void
    /// probability (constraint audit); NaN on non-chosen rows.
    double audit_min_void = std::numeric_limits<double>::quiet_NaN();
};

struct ReplicateResult {
    std::vector<StepRecord> steps;
    std::vector<ControlLogRow> control_log;
    std::map<std::pair<int, int>, long> heatmap;
    bool aborted = false;
    std::string abort_reason;
    double mean_ospa = 0.0;
};

struct ExperimentOptions {
    int jobs = 1;
    std::string out_dir;  // empty: no files written
};

struct ExperimentResult {
    std::vector<ReplicateResult> runs;
    int aborted_runs = 0;
    double mean_ospa = 0.0;   // mean over completed runs of per-run time averages
    double se_ospa = 0.0;     // standard error of that mean
    std::vector<double> per_run_mean;
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> salts) {
    return RandomStream::derive(seed, salts).next_u64();
}

inline ReplicateResult run_replicate(const ScenarioConfig& cfg, int run, int sample_jobs) {
    ReplicateResult rep;
    // ground truth is controller-independent: same stream per (seed, run)
    RandomStream truth_rng = RandomStream::derive(cfg.seed, {0x545255ULL,
                                                             static_cast<std::uint64_t>(run)});
    RandomStream meas_rng = RandomStream::derive(cfg.seed, {0x4D4553ULL,
                                                            static_cast<std::uint64_t>(run)});
    RandomStream pick_rng = RandomStream::derive(cfg.seed, {0x504B52ULL,
                                                            static_cast<std::uint64_t>(run)});

    const auto truth = simulate_truth(cfg, truth_rng);
    const MotionModel motion = cfg.motion_model();
    const MotionModel ctrl_motion = cfg.control_motion_model();
    const ActionSpace space = cfg.action_space();
    const BearingRangeSensor sensor_proto = cfg.sensor_prototype();
    const int steps_per_control =
        static_cast<int>(std::llround(cfg.control_interval / cfg.filter_interval));
    const bool moving = cfg.controller != "stationary";

    GlmbDensity posterior = GlmbDensity::certain_empty(4);
    Eigen::Vector2d position(cfg.sensor_x, cfg.sensor_y);
    double heading = cfg.sensor_heading_deg * std::numbers::pi / 180.0;
    int decision_index = 0;

    try {
        for (int k = 1; k <= cfg.steps(); ++k) {
            const double t = k * cfg.filter_interval;
            const double t_prev = t - cfg.filter_interval;
            if (moving && t_prev >= cfg.sensor_start_time) {
                position += cfg.sensor_speed * cfg.filter_interval *
                            Eigen::Vector2d(std::cos(heading), std::sin(heading));
            }

            BearingRangeSensor sensor = sensor_proto;
            sensor.position = position;
            const auto& truth_k = truth[static_cast<std::size_t>(k - 1)];
            const std::vector<Eigen::VectorXd> z =
                simulate_measurements(truth_states(truth_k), sensor, meas_rng);

            posterior = update(predict(posterior, motion, cfg.birth_model_at(k),
                                       cfg.filter_params),
                               z, sensor, cfg.filter_params);

            const auto estimates = estimate_state(posterior);
            std::vector<Eigen::VectorXd> est_states;
            est_states.reserve(estimates.size());
            for (const auto& [label, state] : estimates) est_states.push_back(state);
            const OspaResult score = ospa(positions_of(est_states),
                                          positions_of(truth_states(truth_k)),
                                          cfg.ospa_cutoff, cfg.ospa_order);

            StepRecord rec;
            rec.run = run;
            rec.step = k;
            rec.time = t;
            rec.ospa = score.distance;
            rec.ospa_loc = score.localization;
            rec.ospa_card = score.cardinality;
            rec.truth_n = static_cast<int>(truth_k.size());
            rec.est_n = static_cast<int>(estimates.size());
            rec.sensor_x = position.x();
            rec.sensor_y = position.y();
            rep.steps.push_back(rec);

            const int bx = static_cast<int>(
                std::floor((position.x() - cfg.region_xmin) / cfg.heatmap_bin));
            const int by = static_cast<int>(
                std::floor((position.y() - cfg.region_ymin) / cfg.heatmap_bin));
            ++rep.heatmap[{bx, by}];

            const bool decision_time =
                moving && t >= cfg.sensor_start_time && t < cfg.duration &&
                std::abs(std::remainder(t - cfg.sensor_start_time,
                                        cfg.effective_decision_interval())) < 1e-9;
            if (!decision_time) continue;

            LookaheadModel look;
            look.motion = ctrl_motion;
            look.sensor_state = SensorKinematics{position, heading, cfg.sensor_speed};
            if (cfg.lookahead_birth) {
                const int base_step = k;
                const ScenarioConfig* cp = &cfg;
                look.birth_for_step = [cp, base_step, steps_per_control](int i) {
                    return cp->birth_model_at(base_step + i * steps_per_control);
                };
            }
            ControlConfig cc = cfg.control_config();
            cc.seed = derive_seed(cfg.seed, {0xC4ULL, static_cast<std::uint64_t>(run),
                                             static_cast<std::uint64_t>(decision_index)});
            cc.jobs = sample_jobs;

            ControlDecision decision;
            if (cfg.controller == "csd") {
                decision = select_action(posterior, look, sensor, space, cc);
            } else {  // random: uniform over feasible actions, constraint enforced
                const auto pred_seq = predict_sequence(posterior, look, space.horizon,
                                                       cc.rollout_filter, false);
                decision.actions.resize(space.course_changes.size());
                std::vector<int> feasible_idx;
                for (std::size_t a = 0; a < space.course_changes.size(); ++a) {
                    auto& diag = decision.actions[a];
                    diag.course_change = space.course_changes[a];
                    const FeasibilityResult fr =
                        feasible(diag.course_change, pred_seq, look.sensor_state, space, cc);
                    diag.feasible = fr.feasible;
                    diag.step_void = fr.step_void;
                    diag.min_void = fr.min_void;
                    if (fr.feasible) feasible_idx.push_back(static_cast<int>(a));
                }
                if (!feasible_idx.empty()) {
                    decision.action_index =
                        feasible_idx[pick_rng.pick_uniform(feasible_idx.size())];
                } else {
                    decision.constraint_relaxed = true;
                    int best = 0;
                    for (std::size_t a = 1; a < decision.actions.size(); ++a) {
                        if (decision.actions[a].min_void >
                            decision.actions[static_cast<std::size_t>(best)].min_void) {
                            best = static_cast<int>(a);
                        }
                    }
                    decision.action_index = best;
                }
                decision.course_change =
                    space.course_changes[static_cast<std::size_t>(decision.action_index)];
            }

            // constraint audit: recompute the chosen action's void
            // probabilities from scratch
            const auto audit_seq = predict_sequence(posterior, look, space.horizon,
                                                    cc.rollout_filter, false);
            const FeasibilityResult audit =
                feasible(decision.course_change, audit_seq, look.sensor_state, space, cc);

            for (std::size_t a = 0; a < decision.actions.size(); ++a) {
                const auto& diag = decision.actions[a];
                ControlLogRow row;
                row.run = run;
                row.time = t;
                row.action_deg = diag.course_change * 180.0 / std::numbers::pi;
                row.feasible = diag.feasible;
                row.min_void = diag.min_void;
                row.step_void = diag.step_void;
                row.evaluated = diag.evaluated;
                row.mean_reward = diag.mean_reward;
                row.reward_stderr = diag.reward_stderr;
                row.chosen = static_cast<int>(a) == decision.action_index;
                row.relaxed = decision.constraint_relaxed;
                if (row.chosen) row.audit_min_void = audit.min_void;
                rep.control_log.push_back(std::move(row));
            }

            heading += decision.course_change;
            ++decision_index;
        }
    } catch (const Error& e) {
        rep.aborted = true;
        rep.abort_reason = e.what();
        return rep;
    }

    if (!rep.steps.empty()) {
        double acc = 0.0;
        for (const auto& s : rep.steps) acc += s.ospa;
        rep.mean_ospa = acc / static_cast<double>(rep.steps.size());
    }
    return rep;
}

inline std::string fmt(double v, const char* spec = "%.10g") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace detail

inline void write_experiment_outputs(const ScenarioConfig& cfg, const ExperimentResult& result,
                                     const std::string& out_dir);

/// Run `monte_carlo_runs` independent replicates of the configured
/// controller. Replicates are parallel and individually seeded; outputs
/// are identical for identical (config, seed) regardless of job count.
/// Fails when more than 10% of replicates abort on filter divergence.
inline ExperimentResult run_experiment(const ScenarioConfig& cfg,
                                       const ExperimentOptions& opts = {}) {
    const int runs = cfg.monte_carlo_runs;
    const int replicate_jobs = std::max(1, std::min(opts.jobs, runs));
    const int sample_jobs = std::max(1, opts.jobs / replicate_jobs);

    ExperimentResult result;
    result.runs.resize(static_cast<std::size_t>(runs));
    parallel_for(static_cast<std::size_t>(runs), replicate_jobs, [&](std::size_t r) {
        result.runs[r] = detail::run_replicate(cfg, static_cast<int>(r), sample_jobs);
    });

    std::vector<double> means;
    for (const auto& rep : result.runs) {
        if (rep.aborted) {
            ++result.aborted_runs;
        } else {
            means.push_back(rep.mean_ospa);
            result.per_run_mean.push_back(rep.mean_ospa);
        }
    }
    if (result.aborted_runs * 10 > runs) {
        throw Error("run_experiment: more than 10% of replicates aborted (" +
                    std::to_string(result.aborted_runs) + "/" + std::to_string(runs) + ")");
    }
    if (!means.empty()) {
        result.mean_ospa = pairwise_sum(means) / static_cast<double>(means.size());
        if (means.size() > 1) {
            double var = 0.0;
            for (double m : means) var += (m - result.mean_ospa) * (m - result.mean_ospa);
            var /= static_cast<double>(means.size() - 1);
            result.se_ospa = std::sqrt(var / static_cast<double>(means.size()));
        }
    }

    if (!opts.out_dir.empty()) write_experiment_outputs(cfg, result, opts.out_dir);
    return result;
}

inline void write_experiment_outputs(const ScenarioConfig& cfg, const ExperimentResult& result,
                                     const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string prefix = out_dir + "/";

    {
        std::ofstream os(prefix + "ospa.csv");
        os << "step,time,run,controller,ospa,ospa_loc,ospa_card,cardinality_truth,"
              "cardinality_est,sensor_x,sensor_y\n";
        for (const auto& rep : result.runs) {
            for (const auto& s : rep.steps) {
                os << s.step << "," << detail::fmt(s.time) << "," << s.run << ","
                   << cfg.controller << "," << detail::fmt(s.ospa) << ","
                   << detail::fmt(s.ospa_loc) << "," << detail::fmt(s.ospa_card) << ","
                   << s.truth_n << "," << s.est_n << "," << detail::fmt(s.sensor_x) << ","
                   << detail::fmt(s.sensor_y) << "\n";
            }
        }
    }
    {
        std::map<std::pair<int, int>, long> heat;
        for (const auto& rep : result.runs) {
            for (const auto& [bin, count] : rep.heatmap) heat[bin] += count;
        }
        std::ofstream os(prefix + "heatmap.csv");
        os << "x_bin,y_bin,count\n";
        for (const auto& [bin, count] : heat) {
            os << bin.first << "," << bin.second << "," << count << "\n";
        }
    }
    {
        std::ofstream os(prefix + "control_log.csv");
        os << "run,time,controller,action_deg,feasible,min_void,mean_reward,reward_stderr,"
              "evaluated,chosen,relaxed,audit_min_void";
        int horizon = cfg.control_horizon;
        for (int i = 1; i <= horizon; ++i) os << ",void_" << i;
        os << "\n";
        for (const auto& rep : result.runs) {
            for (const auto& row : rep.control_log) {
                os << row.run << "," << detail::fmt(row.time) << "," << cfg.controller << ","
                   << detail::fmt(row.action_deg) << "," << (row.feasible ? 1 : 0) << ","
                   << detail::fmt(row.min_void, "%.12g") << ","
                   << detail::fmt(row.mean_reward) << "," << detail::fmt(row.reward_stderr)
                   << "," << (row.evaluated ? 1 : 0) << "," << (row.chosen ? 1 : 0) << ","
                   << (row.relaxed ? 1 : 0) << ",";
                if (std::isnan(row.audit_min_void)) {
                    os << "";
                } else {
                    os << detail::fmt(row.audit_min_void, "%.12g");
                }
                for (int i = 0; i < horizon; ++i) {
                    os << ",";
                    if (i < static_cast<int>(row.step_void.size())) {
                        os << detail::fmt(row.step_void[static_cast<std::size_t>(i)], "%.12g");
                    }
                }
                os << "\n";
            }
        }
    }
    {
        std::ofstream os(prefix + "resolved.cfg");
        write_resolved_config(os, cfg);
    }
    {
        std::ofstream os(prefix + "summary.txt");
        os << "controller " << cfg.controller << "\n";
        os << "runs " << cfg.monte_carlo_runs << "\n";
        os << "aborted " << result.aborted_runs << "\n";
        os << "mean_ospa " << detail::fmt(result.mean_ospa) << "\n";
        os << "se_ospa " << detail::fmt(result.se_ospa) << "\n";
    }
    {
        std::ofstream os(prefix + "plot_results.py");
        os << R"PY(#!/usr/bin/env python3
"""Render OSPA-versus-time and sensor heatmap figures from run CSVs.

Usage: plot_results.py [run_dir ...]
Each run_dir must contain ospa.csv and heatmap.csv (as written by the
experiment harness). Figures are saved next to this script.
"""
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

dirs = sys.argv[1:] or ["."]
out_dir = os.path.dirname(os.path.abspath(__file__))

plt.figure(figsize=(8, 4.5))
for d in dirs:
    by_time = defaultdict(list)
    controller = d
    with open(os.path.join(d, "ospa.csv")) as f:
        for row in csv.DictReader(f):
            by_time[float(row["time"])].append(float(row["ospa"]))
            controller = row["controller"]
    times = sorted(by_time)
    means = [sum(by_time[t]) / len(by_time[t]) for t in times]
    plt.plot(times, means, label=controller)
plt.xlabel("time (s)")
plt.ylabel("mean OSPA (m)")
plt.legend()
plt.grid(True, alpha=0.3)
plt.tight_layout()
plt.savefig(os.path.join(out_dir, "ospa_vs_time.png"), dpi=150)

for d in dirs:
    heat = {}
    with open(os.path.join(d, "heatmap.csv")) as f:
        for row in csv.DictReader(f):
            heat[(int(row["x_bin"]), int(row["y_bin"]))] = int(row["count"])
    if not heat:
        continue
    xs = [k[0] for k in heat]
    ys = [k[1] for k in heat]
    grid = [[0] * (max(xs) - min(xs) + 1) for _ in range(max(ys) - min(ys) + 1)]
    for (x, y), c in heat.items():
        grid[y - min(ys)][x - min(xs)] = c
    plt.figure(figsize=(6, 5))
    plt.imshow(grid, origin="lower", cmap="inferno")
    plt.colorbar(label="visits")
    plt.title(os.path.basename(os.path.abspath(d)) or d)
    plt.tight_layout()
    name = "heatmap_" + (os.path.basename(os.path.normpath(d)) or "run") + ".png"
    plt.savefig(os.path.join(out_dir, name), dpi=150)
)PY";
    }
}

}  // namespace glmb
