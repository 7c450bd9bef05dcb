#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "glmb/control_types.hpp"
#include "glmb/errors.hpp"
#include "glmb/filter.hpp"
#include "glmb/models.hpp"
#include "glmb/region.hpp"

namespace glmb {

// Scenario files are human-editable key-value documents:
//
//   glmb-scenario v1
//   # comment
//   key = value
//   target = <birth_s> <death_s> <px> <vx> <py> <vy>      (repeatable)
//   birth.site = <x> <y>                                  (repeatable)
//
// Later scalar assignments override earlier ones, which is also how
// command-line overrides (key=value) are applied after parsing.

struct TargetSchedule {
    double birth_time = 0.0;
    double death_time = 0.0;
    Eigen::Vector4d initial_state{0, 0, 0, 0};  // [px, vx, py, vy]
};

struct ScenarioConfig {
    std::string name = "scenario";
    double duration = 2000.0;
    double filter_interval = 10.0;
    double control_interval = 80.0;   // lookahead horizon step
    double decision_interval = 0.0;   // course-change period; 0 = control_interval
    int monte_carlo_runs = 20;
    std::string controller = "csd";  // csd | random | stationary
    std::uint64_t seed = 1;

    double region_xmin = -10000.0, region_xmax = 10000.0;
    double region_ymin = -10000.0, region_ymax = 10000.0;

    double sensor_x = 0.0, sensor_y = 0.0;
    double sensor_heading_deg = 0.0;
    double sensor_speed = 7.0;
    double sensor_start_time = 400.0;
    double bearing_sd_deg = 2.0;
    double range_eta = 0.1;
    double range_r1 = 1000.0;
    double range_r2 = 10000.0;
    double detection_sd = 20000.0;
    double clutter_rate = 100.0;

    double accel_sd = 0.01;
    double survival = 0.99;

    double birth_existence = 0.02;
    double birth_pos_sd = 1500.0;
    double birth_vel_sd = 3.0;
    std::vector<Eigen::Vector2d> birth_sites;

    std::vector<TargetSchedule> targets;

    FilterParams filter_params{};
    FilterParams rollout_params{.max_components = 12,
                                .min_component_weight = 1e-4,
                                .max_hypotheses_per_component = 12,
                                .gate_sigma = 6.0,
                                .prediction_floor = 1e-6};

    int control_samples = 50;
    int control_horizon = 5;
    double control_grid_deg = 20.0;
    double exclusion_radius = 1000.0;
    double void_min = 0.95;
    double reward_clamp = 1e6;
    bool lookahead_birth = false;

    double ospa_cutoff = 200.0;
    double ospa_order = 2.0;
    double heatmap_bin = 500.0;

    int steps() const { return static_cast<int>(std::llround(duration / filter_interval)); }

    double effective_decision_interval() const {
        return decision_interval > 0.0 ? decision_interval : control_interval;
    }

    AxisBox region_box() const {
        Eigen::VectorXd lo(2), hi(2);
        lo << region_xmin, region_ymin;
        hi << region_xmax, region_ymax;
        return AxisBox{lo, hi};
    }

    MotionModel motion_model() const {
        return constant_velocity_model(filter_interval, accel_sd, survival);
    }

    /// Motion model per control/lookahead step, with survival compounded
    /// over the contained filter steps.
    MotionModel control_motion_model() const {
        const double ratio = control_interval / filter_interval;
        return constant_velocity_model(control_interval, accel_sd, std::pow(survival, ratio));
    }

    BearingRangeSensor sensor_prototype() const {
        BearingRangeSensor s;
        s.position = Eigen::Vector2d(sensor_x, sensor_y);
        s.bearing_sd = bearing_sd_deg * std::numbers::pi / 180.0;
        s.range_noise = RangeNoiseProfile{range_eta, range_r1, range_r2};
        s.detection_sd = detection_sd;
        s.clutter_rate = clutter_rate;
        s.clutter_box = region_box();
        return s;
    }

    /// Birth model for filter step k: one label (k, i) per configured site.
    BirthModel birth_model_at(int step) const {
        BirthModel b;
        for (std::size_t i = 0; i < birth_sites.size(); ++i) {
            Eigen::VectorXd mean(4);
            mean << birth_sites[i].x(), 0.0, birth_sites[i].y(), 0.0;
            Eigen::VectorXd diag(4);
            diag << birth_pos_sd * birth_pos_sd, birth_vel_sd * birth_vel_sd,
                birth_pos_sd * birth_pos_sd, birth_vel_sd * birth_vel_sd;
            b.add(Label{step, static_cast<int>(i)}, birth_existence,
                  single_gaussian(mean, diag.asDiagonal()));
        }
        return b;
    }

    ActionSpace action_space() const {
        ActionSpace space;
        space.course_changes = action_grid(control_grid_deg * std::numbers::pi / 180.0);
        space.speed = sensor_speed;
        space.control_interval = control_interval;
        space.horizon = control_horizon;
        return space;
    }

    ControlConfig control_config() const {
        ControlConfig c;
        c.sample_count = control_samples;
        c.exclusion_radius = exclusion_radius;
        c.void_min = void_min;
        c.reward_clamp = reward_clamp;
        c.lookahead_birth = lookahead_birth;
        c.rollout_filter = rollout_params;
        return c;
    }
};

namespace detail {

struct RawConfig {
    std::map<std::string, std::string> scalars;
    std::vector<std::string> targets;
    std::vector<std::string> birth_sites;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline void assign_raw(RawConfig& raw, const std::string& key, const std::string& value) {
    if (key == "target") {
        raw.targets.push_back(value);
    } else if (key == "birth.site") {
        raw.birth_sites.push_back(value);
    } else {
        raw.scalars[key] = value;
    }
}

inline RawConfig parse_raw_config(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != "glmb-scenario v1") {
        throw ConfigError("scenario file: first line must be 'glmb-scenario v1'");
    }
    RawConfig raw;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("scenario file line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        assign_raw(raw, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return raw;
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
    }
}

}  // namespace detail

/// Apply dotted-path overrides of the form "key=value".
inline void apply_overrides(detail::RawConfig& raw, const std::vector<std::string>& overrides) {
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override must be key=value: '" + ov + "'");
        }
        detail::assign_raw(raw, detail::trim(ov.substr(0, eq)),
                           detail::trim(ov.substr(eq + 1)));
    }
}

inline ScenarioConfig config_from_raw(const detail::RawConfig& raw) {
    ScenarioConfig cfg;
    auto get = [&](const char* key, auto& field) {
        const auto it = raw.scalars.find(key);
        if (it == raw.scalars.end()) return;
        using T = std::decay_t<decltype(field)>;
        if constexpr (std::is_same_v<T, std::string>) {
            field = it->second;
        } else if constexpr (std::is_same_v<T, bool>) {
            field = detail::to_double(key, it->second) != 0.0;
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            field = static_cast<std::uint64_t>(std::stoull(it->second));
        } else if constexpr (std::is_integral_v<T>) {
            field = static_cast<T>(std::llround(detail::to_double(key, it->second)));
        } else {
            field = detail::to_double(key, it->second);
        }
    };
    get("name", cfg.name);
    get("duration", cfg.duration);
    get("filter_interval", cfg.filter_interval);
    get("control_interval", cfg.control_interval);
    get("control.decision_interval", cfg.decision_interval);
    get("monte_carlo_runs", cfg.monte_carlo_runs);
    get("controller", cfg.controller);
    get("seed", cfg.seed);
    get("region.xmin", cfg.region_xmin);
    get("region.xmax", cfg.region_xmax);
    get("region.ymin", cfg.region_ymin);
    get("region.ymax", cfg.region_ymax);
    get("sensor.x", cfg.sensor_x);
    get("sensor.y", cfg.sensor_y);
    get("sensor.heading_deg", cfg.sensor_heading_deg);
    get("sensor.speed", cfg.sensor_speed);
    get("sensor.start_time", cfg.sensor_start_time);
    get("sensor.bearing_sd_deg", cfg.bearing_sd_deg);
    get("sensor.eta", cfg.range_eta);
    get("sensor.r1", cfg.range_r1);
    get("sensor.r2", cfg.range_r2);
    get("sensor.detection_sd", cfg.detection_sd);
    get("sensor.clutter_rate", cfg.clutter_rate);
    get("motion.accel_sd", cfg.accel_sd);
    get("motion.survival", cfg.survival);
    get("birth.existence", cfg.birth_existence);
    get("birth.pos_sd", cfg.birth_pos_sd);
    get("birth.vel_sd", cfg.birth_vel_sd);
    get("filter.max_components", cfg.filter_params.max_components);
    get("filter.min_weight", cfg.filter_params.min_component_weight);
    get("filter.max_hypotheses", cfg.filter_params.max_hypotheses_per_component);
    get("filter.gate_sigma", cfg.filter_params.gate_sigma);
    get("filter.prediction_floor", cfg.filter_params.prediction_floor);
    get("control.samples", cfg.control_samples);
    get("control.horizon", cfg.control_horizon);
    get("control.grid_deg", cfg.control_grid_deg);
    get("control.exclusion_radius", cfg.exclusion_radius);
    get("control.void_min", cfg.void_min);
    get("control.reward_clamp", cfg.reward_clamp);
    get("control.lookahead_birth", cfg.lookahead_birth);
    get("control.rollout_max_components", cfg.rollout_params.max_components);
    get("control.rollout_min_weight", cfg.rollout_params.min_component_weight);
    get("control.rollout_max_hypotheses", cfg.rollout_params.max_hypotheses_per_component);
    get("control.rollout_gate_sigma", cfg.rollout_params.gate_sigma);
    get("control.rollout_prediction_floor", cfg.rollout_params.prediction_floor);
    get("ospa.cutoff", cfg.ospa_cutoff);
    get("ospa.order", cfg.ospa_order);
    get("heatmap.bin", cfg.heatmap_bin);

    for (const std::string& t : raw.targets) {
        std::istringstream ss(t);
        TargetSchedule ts;
        if (!(ss >> ts.birth_time >> ts.death_time >> ts.initial_state[0] >>
              ts.initial_state[1] >> ts.initial_state[2] >> ts.initial_state[3])) {
            throw ConfigError("target row needs 6 numbers: '" + t + "'");
        }
        cfg.targets.push_back(ts);
    }
    for (const std::string& s : raw.birth_sites) {
        std::istringstream ss(s);
        Eigen::Vector2d xy;
        if (!(ss >> xy.x() >> xy.y())) {
            throw ConfigError("birth.site row needs 2 numbers: '" + s + "'");
        }
        cfg.birth_sites.push_back(xy);
    }
    return cfg;
}

/// Validate the parsed configuration; throws ConfigError listing the
/// first violated rule.
inline void validate(const ScenarioConfig& cfg) {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (!(cfg.duration > 0)) fail("duration must be positive");
    if (!(cfg.filter_interval > 0)) fail("filter_interval must be positive");
    if (std::abs(std::remainder(cfg.duration, cfg.filter_interval)) > 1e-9) {
        fail("filter_interval must divide duration");
    }
    if (std::abs(std::remainder(cfg.control_interval, cfg.filter_interval)) > 1e-9) {
        fail("filter_interval must divide control_interval");
    }
    if (std::abs(std::remainder(cfg.duration, cfg.control_interval)) > 1e-9) {
        fail("control_interval must divide duration");
    }
    if (cfg.decision_interval < 0.0) fail("control.decision_interval must be non-negative");
    if (cfg.decision_interval > 0.0 &&
        std::abs(std::remainder(cfg.decision_interval, cfg.filter_interval)) > 1e-9) {
        fail("filter_interval must divide control.decision_interval");
    }
    if (cfg.controller != "csd" && cfg.controller != "random" &&
        cfg.controller != "stationary") {
        fail("controller must be csd, random, or stationary");
    }
    if (cfg.monte_carlo_runs < 1) fail("monte_carlo_runs must be at least 1");
    if (!(cfg.region_xmin < cfg.region_xmax && cfg.region_ymin < cfg.region_ymax)) {
        fail("region bounds must satisfy min < max");
    }
    if (!(cfg.range_eta > 0)) fail("sensor.eta must be positive");
    if (!(0 < cfg.range_r1 && cfg.range_r1 < cfg.range_r2)) fail("need 0 < r1 < r2");
    if (!(cfg.detection_sd > 0)) fail("sensor.detection_sd must be positive");
    if (cfg.clutter_rate < 0) fail("sensor.clutter_rate must be non-negative");
    if (!(cfg.survival > 0 && cfg.survival <= 1)) fail("motion.survival must be in (0, 1]");
    if (!(cfg.birth_existence > 0 && cfg.birth_existence < 1)) {
        fail("birth.existence must be in (0, 1)");
    }
    for (const auto& t : cfg.targets) {
        if (!(t.death_time > t.birth_time)) fail("every target needs death > birth");
    }
    if (cfg.control_samples < 1) fail("control.samples must be at least 1");
    if (cfg.control_horizon < 1) fail("control.horizon must be at least 1");
    if (!(cfg.control_grid_deg > 0 && cfg.control_grid_deg <= 180)) {
        fail("control.grid_deg must be in (0, 180]");
    }
    if (!(cfg.void_min >= 0 && cfg.void_min < 1)) fail("control.void_min must be in [0, 1)");
    if (!(cfg.exclusion_radius > 0)) fail("control.exclusion_radius must be positive");
    if (!(cfg.ospa_cutoff > 0)) fail("ospa.cutoff must be positive");
    if (!(cfg.ospa_order >= 1)) fail("ospa.order must be >= 1");
    if (!(cfg.heatmap_bin > 0)) fail("heatmap.bin must be positive");
}

inline ScenarioConfig load_scenario(const std::string& path,
                                    const std::vector<std::string>& overrides = {}) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open scenario file: " + path);
    detail::RawConfig raw = detail::parse_raw_config(is);
    apply_overrides(raw, overrides);
    ScenarioConfig cfg = config_from_raw(raw);
    validate(cfg);
    return cfg;
}

/// Write the fully resolved configuration back out in scenario syntax.
inline void write_resolved_config(std::ostream& os, const ScenarioConfig& cfg) {
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    os << "glmb-scenario v1\n";
    os << "name = " << cfg.name << "\n";
    os << "duration = " << num(cfg.duration) << "\n";
    os << "filter_interval = " << num(cfg.filter_interval) << "\n";
    os << "control_interval = " << num(cfg.control_interval) << "\n";
    os << "monte_carlo_runs = " << cfg.monte_carlo_runs << "\n";
    os << "controller = " << cfg.controller << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "region.xmin = " << num(cfg.region_xmin) << "\n";
    os << "region.xmax = " << num(cfg.region_xmax) << "\n";
    os << "region.ymin = " << num(cfg.region_ymin) << "\n";
    os << "region.ymax = " << num(cfg.region_ymax) << "\n";
    os << "sensor.x = " << num(cfg.sensor_x) << "\n";
    os << "sensor.y = " << num(cfg.sensor_y) << "\n";
    os << "sensor.heading_deg = " << num(cfg.sensor_heading_deg) << "\n";
    os << "sensor.speed = " << num(cfg.sensor_speed) << "\n";
    os << "sensor.start_time = " << num(cfg.sensor_start_time) << "\n";
    os << "sensor.bearing_sd_deg = " << num(cfg.bearing_sd_deg) << "\n";
    os << "sensor.eta = " << num(cfg.range_eta) << "\n";
    os << "sensor.r1 = " << num(cfg.range_r1) << "\n";
    os << "sensor.r2 = " << num(cfg.range_r2) << "\n";
    os << "sensor.detection_sd = " << num(cfg.detection_sd) << "\n";
    os << "sensor.clutter_rate = " << num(cfg.clutter_rate) << "\n";
    os << "motion.accel_sd = " << num(cfg.accel_sd) << "\n";
    os << "motion.survival = " << num(cfg.survival) << "\n";
    os << "birth.existence = " << num(cfg.birth_existence) << "\n";
    os << "birth.pos_sd = " << num(cfg.birth_pos_sd) << "\n";
    os << "birth.vel_sd = " << num(cfg.birth_vel_sd) << "\n";
    for (const auto& s : cfg.birth_sites) {
        os << "birth.site = " << num(s.x()) << " " << num(s.y()) << "\n";
    }
    for (const auto& t : cfg.targets) {
        os << "target = " << num(t.birth_time) << " " << num(t.death_time) << " "
           << num(t.initial_state[0]) << " " << num(t.initial_state[1]) << " "
           << num(t.initial_state[2]) << " " << num(t.initial_state[3]) << "\n";
    }
    os << "filter.max_components = " << cfg.filter_params.max_components << "\n";
    os << "filter.min_weight = " << num(cfg.filter_params.min_component_weight) << "\n";
    os << "filter.max_hypotheses = " << cfg.filter_params.max_hypotheses_per_component << "\n";
    os << "filter.gate_sigma = " << num(cfg.filter_params.gate_sigma) << "\n";
    os << "filter.prediction_floor = " << num(cfg.filter_params.prediction_floor) << "\n";
    os << "control.decision_interval = " << num(cfg.decision_interval) << "\n";
    os << "control.samples = " << cfg.control_samples << "\n";
    os << "control.horizon = " << cfg.control_horizon << "\n";
    os << "control.grid_deg = " << num(cfg.control_grid_deg) << "\n";
    os << "control.exclusion_radius = " << num(cfg.exclusion_radius) << "\n";
    os << "control.void_min = " << num(cfg.void_min) << "\n";
    os << "control.reward_clamp = " << num(cfg.reward_clamp) << "\n";
    os << "control.lookahead_birth = " << (cfg.lookahead_birth ? 1 : 0) << "\n";
    os << "control.rollout_max_components = " << cfg.rollout_params.max_components << "\n";
    os << "control.rollout_min_weight = " << num(cfg.rollout_params.min_component_weight)
       << "\n";
    os << "control.rollout_max_hypotheses = "
       << cfg.rollout_params.max_hypotheses_per_component << "\n";
    os << "control.rollout_gate_sigma = " << num(cfg.rollout_params.gate_sigma) << "\n";
    os << "control.rollout_prediction_floor = " << num(cfg.rollout_params.prediction_floor)
       << "\n";
    os << "ospa.cutoff = " << num(cfg.ospa_cutoff) << "\n";
    os << "ospa.order = " << num(cfg.ospa_order) << "\n";
    os << "heatmap.bin = " << num(cfg.heatmap_bin) << "\n";
}

}  // namespace glmb
