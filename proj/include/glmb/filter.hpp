#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "glmb/density.hpp"
#include "glmb/errors.hpp"
#include "glmb/gaussian.hpp"
#include "glmb/models.hpp"
#include "glmb/numeric.hpp"

namespace glmb {

struct FilterParams {
    std::size_t max_components = 300;
    double min_component_weight = 1e-8;
    /// Cap on association maps kept per predicted component.
    std::size_t max_hypotheses_per_component = 100;
    /// Measurements outside this Mahalanobis gate (per linearized
    /// predicted measurement) are not considered for a label.
    double gate_sigma = 6.0;
    /// Survival/birth subsets whose within-component weight factor falls
    /// below this floor are dropped during prediction (0 disables).
    double prediction_floor = 1e-9;
};

/// Assignment of a component's labels (in sorted order) to measurement
/// indices; 0 means undetected. Positive values must be injective.
struct AssociationMap {
    std::vector<int> assignment;

    bool injective_on_positives() const {
        std::set<int> seen;
        for (int a : assignment) {
            if (a > 0 && !seen.insert(a).second) return false;
        }
        return true;
    }
};

struct PredictStats {
    /// log of the total weight before renormalization; 0 when nothing
    /// was pruned or truncated.
    double log_mass = 0.0;
    double pruned_weight = 0.0;
    double truncation_l1 = 0.0;
};

struct UpdateStats {
    /// Set when association enumeration was pruned before exhausting the
    /// maps of some component (cap exceeded). Recorded, not fatal.
    bool hypotheses_capped = false;
    std::size_t components_before_truncation = 0;
    double truncation_l1 = 0.0;
};

namespace detail {

inline std::uint64_t mix_hash(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    return h;
}

/// History index of an updated component: the prior history combined with
/// the association map. Opaque; collisions are possible in principle but
/// negligible at 64 bits.
inline std::uint64_t extend_history(std::uint64_t history, const std::vector<Label>& labels,
                                    const std::vector<int>& assignment) {
    std::uint64_t h = mix_hash(history, 0xA0761D6478BD642FULL);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        h = mix_hash(h, hash_value(labels[i]));
        h = mix_hash(h, static_cast<std::uint64_t>(assignment[i] + 1));
    }
    return h;
}

struct ComponentKeyLess {
    bool operator()(const GlmbComponent& a, const GlmbComponent& b) const {
        if (a.history != b.history) return a.history < b.history;
        return a.labels < b.labels;
    }
};

}  // namespace detail

/// GLMB prediction under survival (constant P_S per step) and labeled
/// multi-Bernoulli birth. Every survivor subset of each component is
/// expanded with every birth subset; subsets below the configured weight
/// floor are pruned with their mass tracked exactly. Components that end
/// up with equal (history, label set) are merged; single-object densities
/// depend only on (history, label), so merging is well defined. The
/// result is normalized and truncated to the configured caps.
inline GlmbDensity predict(const GlmbDensity& prior, const MotionModel& motion,
                           const BirthModel& birth, const FilterParams& params = {},
                           PredictStats* stats = nullptr) {
    // birth labels must be sorted, unique, and new
    for (std::size_t i = 0; i + 1 < birth.labels.size(); ++i) {
        if (!(birth.labels[i] < birth.labels[i + 1])) {
            throw Error("predict: birth labels must be sorted and unique");
        }
    }
    const std::vector<Label> prior_labels = all_labels(prior);
    for (const Label& bl : birth.labels) {
        if (std::binary_search(prior_labels.begin(), prior_labels.end(), bl)) {
            throw LabelClashError("predict: birth label already present: " + to_string(bl));
        }
    }

    const double log_ps = std::log(motion.survival_probability);
    const double log_qs = motion.survival_probability < 1.0
                              ? std::log1p(-motion.survival_probability)
                              : kNegInf;
    std::vector<double> log_rb(birth.size()), log_qb(birth.size());
    for (std::size_t i = 0; i < birth.size(); ++i) {
        log_rb[i] = std::log(birth.existence[i]);
        log_qb[i] = std::log1p(-birth.existence[i]);
    }
    const double log_floor =
        params.prediction_floor > 0.0 ? std::log(params.prediction_floor) : kNegInf;

    // propagated densities are shared across components with equal history
    std::map<std::pair<std::uint64_t, Label>, GaussianMixture> propagated;
    auto propagate_once = [&](std::uint64_t history, const Label& l,
                              const GaussianMixture& gm) -> const GaussianMixture& {
        const auto key = std::make_pair(history, l);
        auto it = propagated.find(key);
        if (it == propagated.end()) {
            it = propagated.emplace(key, propagate(motion, gm)).first;
        }
        return it->second;
    };

    std::map<std::pair<std::uint64_t, std::vector<Label>>, std::size_t> merged;
    GlmbDensity out;
    out.state_dim = prior.state_dim;
    out.hypervolume_unit = prior.hypervolume_unit;
    double pruned_weight = 0.0;

    for (const auto& c : prior.components) {
        const std::size_t n = c.labels.size();
        std::vector<char> survive(n, 0);
        std::vector<char> born(birth.size(), 0);

        auto emit = [&](double log_factor) {
            GlmbComponent next;
            next.history = c.history;
            next.log_weight = c.log_weight + log_factor;
            // merge sorted survivor and birth label lists
            std::vector<Label> labels;
            std::vector<const GaussianMixture*> densities;
            std::size_t si = 0, bi = 0;
            auto next_survivor = [&]() -> int {
                while (si < n && !survive[si]) ++si;
                return si < n ? static_cast<int>(si) : -1;
            };
            auto next_birth = [&]() -> int {
                while (bi < birth.size() && !born[bi]) ++bi;
                return bi < birth.size() ? static_cast<int>(bi) : -1;
            };
            for (;;) {
                const int s = next_survivor();
                const int b = next_birth();
                if (s < 0 && b < 0) break;
                const bool take_survivor =
                    b < 0 || (s >= 0 && c.labels[static_cast<std::size_t>(s)] <
                                            birth.labels[static_cast<std::size_t>(b)]);
                if (take_survivor) {
                    const auto& l = c.labels[static_cast<std::size_t>(s)];
                    labels.push_back(l);
                    densities.push_back(
                        &propagate_once(c.history, l, c.densities[static_cast<std::size_t>(s)]));
                    ++si;
                } else {
                    labels.push_back(birth.labels[static_cast<std::size_t>(b)]);
                    densities.push_back(&birth.densities[static_cast<std::size_t>(b)]);
                    ++bi;
                }
            }
            next.labels = std::move(labels);
            const auto key = std::make_pair(next.history, next.labels);
            const auto it = merged.find(key);
            if (it != merged.end()) {
                auto& existing = out.components[it->second];
                existing.log_weight = log_add(existing.log_weight, next.log_weight);
                return;
            }
            next.densities.reserve(next.labels.size());
            for (const auto* d : densities) next.densities.push_back(*d);
            merged.emplace(key, out.components.size());
            out.components.push_back(std::move(next));
        };

        // depth-first over birth inclusion; factors only decrease, so the
        // floor prunes whole subtrees, whose residual mass is exactly the
        // current factor (the remaining choices always sum to one).
        std::function<void(std::size_t, double)> expand_birth = [&](std::size_t i,
                                                                    double log_factor) {
            if (log_factor < log_floor) {
                pruned_weight += c.weight() * std::exp(log_factor);
                return;
            }
            if (i == birth.size()) {
                emit(log_factor);
                return;
            }
            born[i] = 0;
            expand_birth(i + 1, log_factor + log_qb[i]);
            born[i] = 1;
            expand_birth(i + 1, log_factor + log_rb[i]);
            born[i] = 0;
        };
        std::function<void(std::size_t, double)> expand_survival = [&](std::size_t i,
                                                                       double log_factor) {
            if (log_factor < log_floor) {
                pruned_weight += c.weight() * std::exp(log_factor);
                return;
            }
            if (i == n) {
                expand_birth(0, log_factor);
                return;
            }
            if (log_qs != kNegInf) {
                survive[i] = 0;
                expand_survival(i + 1, log_factor + log_qs);
            }
            if (log_ps != kNegInf) {
                survive[i] = 1;
                expand_survival(i + 1, log_factor + log_ps);
            }
            survive[i] = 0;
        };
        expand_survival(0, 0.0);
    }

    if (out.components.empty()) {
        throw EmptyDensityError("predict: every expansion fell below the weight floor");
    }
    std::sort(out.components.begin(), out.components.end(), detail::ComponentKeyLess{});

    std::vector<double> lw;
    lw.reserve(out.components.size());
    for (const auto& comp : out.components) lw.push_back(comp.log_weight);
    const double log_mass = log_sum_exp(lw);

    out = normalize(std::move(out));
    TruncationResult trunc = truncate(out, params.max_components, params.min_component_weight);
    if (stats) {
        stats->log_mass = log_mass;
        stats->pruned_weight = pruned_weight;
        stats->truncation_l1 = trunc.l1_error;
    }
    return std::move(trunc.density);
}

namespace detail {

/// Per-(history, label) likelihood table: the misdetection factor, the
/// gated detection factors, and the matching updated mixtures.
struct LikelihoodRow {
    double log_miss = kNegInf;
    std::vector<int> meas_index;
    std::vector<double> log_detect;
    std::vector<GaussianMixture> posterior;
};

template <typename Sensor>
LikelihoodRow build_likelihood_row(const GaussianMixture& gm,
                                   const std::vector<Eigen::VectorXd>& measurements,
                                   const Sensor& sensor, const FilterParams& params) {
    LikelihoodRow row;
    const double p_detect = sensor.detection_probability(gm.mean());
    row.log_miss = p_detect < 1.0 ? std::log1p(-p_detect) : kNegInf;
    if (measurements.empty() || p_detect <= 0.0) return row;

    const double log_pd = std::log(p_detect);
    const std::size_t m = gm.size();
    const int zdim = sensor.measurement_dim();

    // per-mixture-component linearization, shared across measurements
    std::vector<Eigen::VectorXd> zhat(m);
    std::vector<Gaussian> innovation(m, Gaussian(Eigen::VectorXd::Zero(1),
                                                 Eigen::MatrixXd::Identity(1, 1)));
    std::vector<Eigen::MatrixXd> kalman_gain(m);
    std::vector<Eigen::MatrixXd> posterior_cov(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Gaussian& g = gm.component(i);
        const Eigen::MatrixXd H = sensor.jacobian(g.mean());
        const Eigen::MatrixXd R = sensor.noise(g.mean());
        const Eigen::MatrixXd S = H * g.cov() * H.transpose() + R;
        zhat[i] = sensor.measure(g.mean());
        innovation[i] = Gaussian(Eigen::VectorXd::Zero(zdim), S);
        const Eigen::MatrixXd S_inv =
            innovation[i].chol_lower().transpose().triangularView<Eigen::Upper>().solve(
                Eigen::MatrixXd(innovation[i].chol_lower().triangularView<Eigen::Lower>().solve(
                    Eigen::MatrixXd::Identity(zdim, zdim))));
        kalman_gain[i] = g.cov() * H.transpose() * S_inv;
        const Eigen::MatrixXd A =
            Eigen::MatrixXd::Identity(g.dim(), g.dim()) - kalman_gain[i] * H;
        posterior_cov[i] = A * g.cov() * A.transpose() +
                           kalman_gain[i] * R * kalman_gain[i].transpose();
    }

    const double gate_sq = params.gate_sigma * params.gate_sigma;
    for (std::size_t j = 0; j < measurements.size(); ++j) {
        const Eigen::VectorXd& z = measurements[j];
        double best_maha = std::numeric_limits<double>::infinity();
        std::vector<double> log_q(m, kNegInf);
        std::vector<Eigen::VectorXd> nu(m);
        for (std::size_t i = 0; i < m; ++i) {
            nu[i] = sensor.residual(z, zhat[i]);
            const double maha = innovation[i].mahalanobis_sq(nu[i]);
            best_maha = std::min(best_maha, maha);
            log_q[i] = std::log(gm.weight(i)) + innovation[i].log_pdf(nu[i]);
        }
        if (best_maha > gate_sq) continue;

        const double log_lik = log_sum_exp(log_q);
        const double log_psi = log_pd + log_lik - sensor.log_clutter_intensity(z);
        GaussianMixture post;
        for (std::size_t i = 0; i < m; ++i) {
            const double w = std::exp(log_q[i] - log_lik);
            if (!(w > 0.0)) continue;
            post.add(w, Gaussian(gm.component(i).mean() + kalman_gain[i] * nu[i],
                                 posterior_cov[i]));
        }
        row.meas_index.push_back(static_cast<int>(j) + 1);
        row.log_detect.push_back(log_psi);
        row.posterior.push_back(std::move(post));
    }
    return row;
}

}  // namespace detail

/// GLMB measurement update. For each predicted component the association
/// maps over its labels (misdetection or one ungated measurement each,
/// injectively) are enumerated best-first up to the per-component cap;
/// weights are normalized jointly and the result truncated to the caps.
template <typename Sensor>
GlmbDensity update(const GlmbDensity& predicted,
                   const std::vector<Eigen::VectorXd>& measurements, const Sensor& sensor,
                   const FilterParams& params = {}, UpdateStats* stats = nullptr) {
    // likelihood rows are shared by every component with the same history
    std::map<std::pair<std::uint64_t, Label>, detail::LikelihoodRow> rows;
    auto row_for = [&](std::uint64_t history, const Label& l,
                       const GaussianMixture& gm) -> const detail::LikelihoodRow& {
        const auto key = std::make_pair(history, l);
        auto it = rows.find(key);
        if (it == rows.end()) {
            it = rows.emplace(key, detail::build_likelihood_row(gm, measurements, sensor, params))
                     .first;
        }
        return it->second;
    };

    GlmbDensity out;
    out.state_dim = predicted.state_dim;
    out.hypervolume_unit = predicted.hypervolume_unit;
    bool capped = false;

    struct Candidate {
        int meas;        // 0 = miss
        double log_psi;
        int row_slot;    // index into row.posterior, -1 for miss
    };

    for (const auto& c : predicted.components) {
        const std::size_t n = c.labels.size();
        std::vector<const detail::LikelihoodRow*> label_rows(n);
        std::vector<std::vector<Candidate>> cand(n);
        bool dead = false;
        for (std::size_t i = 0; i < n; ++i) {
            label_rows[i] = &row_for(c.history, c.labels[i], c.densities[i]);
            const auto& row = *label_rows[i];
            if (row.log_miss != kNegInf) cand[i].push_back({0, row.log_miss, -1});
            for (std::size_t k = 0; k < row.meas_index.size(); ++k) {
                cand[i].push_back({row.meas_index[k], row.log_detect[k], static_cast<int>(k)});
            }
            std::sort(cand[i].begin(), cand[i].end(),
                      [](const Candidate& a, const Candidate& b) {
                          return a.log_psi > b.log_psi;
                      });
            if (cand[i].empty()) {
                dead = true;  // no admissible hypothesis for this label
                break;
            }
        }
        if (dead) continue;

        // admissible bound: best remaining factor per label, ignoring
        // injectivity
        std::vector<double> suffix_best(n + 1, 0.0);
        for (std::size_t i = n; i-- > 0;) {
            suffix_best[i] = suffix_best[i + 1] + cand[i].front().log_psi;
        }

        struct Found {
            double log_factor;
            std::vector<int> choice;  // candidate index per label
        };
        std::vector<Found> found;
        const std::size_t cap = std::max<std::size_t>(params.max_hypotheses_per_component, 1);
        // min-heap over the factors of kept assignments
        std::priority_queue<std::pair<double, std::size_t>,
                            std::vector<std::pair<double, std::size_t>>, std::greater<>>
            worst;

        std::vector<char> used(measurements.size() + 1, 0);
        std::vector<int> choice(n, -1);
        std::function<void(std::size_t, double)> dfs = [&](std::size_t i, double acc) {
            if (worst.size() >= cap && acc + suffix_best[i] <= worst.top().first) {
                capped = true;
                return;
            }
            if (i == n) {
                if (worst.size() >= cap) {
                    const std::size_t evict = worst.top().second;
                    worst.pop();
                    found[evict].log_factor = kNegInf;  // dropped
                    capped = true;
                }
                found.push_back({acc, choice});
                worst.emplace(acc, found.size() - 1);
                return;
            }
            for (std::size_t k = 0; k < cand[i].size(); ++k) {
                const Candidate& cd = cand[i][k];
                if (cd.log_psi == kNegInf) break;
                if (cd.meas > 0 && used[static_cast<std::size_t>(cd.meas)]) continue;
                if (worst.size() >= cap &&
                    acc + cd.log_psi + suffix_best[i + 1] <= worst.top().first) {
                    capped = true;
                    break;  // candidates sorted: the rest are no better
                }
                if (cd.meas > 0) used[static_cast<std::size_t>(cd.meas)] = 1;
                choice[i] = static_cast<int>(k);
                dfs(i + 1, acc + cd.log_psi);
                if (cd.meas > 0) used[static_cast<std::size_t>(cd.meas)] = 0;
            }
            choice[i] = -1;
        };
        dfs(0, 0.0);

        for (const auto& f : found) {
            if (f.log_factor == kNegInf) continue;
            GlmbComponent next;
            next.labels = c.labels;
            next.log_weight = c.log_weight + f.log_factor;
            next.densities.reserve(n);
            std::vector<int> assignment(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                const Candidate& cd = cand[i][static_cast<std::size_t>(f.choice[i])];
                assignment[i] = cd.meas;
                if (cd.meas == 0) {
                    next.densities.push_back(c.densities[i]);
                } else {
                    next.densities.push_back(
                        label_rows[i]->posterior[static_cast<std::size_t>(cd.row_slot)]);
                }
            }
            next.history = detail::extend_history(c.history, next.labels, assignment);
            out.components.push_back(std::move(next));
        }
    }

    if (out.components.empty()) {
        throw EmptyDensityError("update: no association hypothesis has positive weight");
    }
    std::sort(out.components.begin(), out.components.end(), detail::ComponentKeyLess{});
    out = normalize(std::move(out));
    if (stats) stats->components_before_truncation = out.components.size();
    TruncationResult trunc = truncate(out, params.max_components, params.min_component_weight);
    if (stats) {
        stats->hypotheses_capped = capped;
        stats->truncation_l1 = trunc.l1_error;
    }
    return std::move(trunc.density);
}

/// MAP-cardinality estimate: pick the most probable cardinality n* (ties
/// to the smaller n), then the highest-weight component with |L| = n*,
/// and report each label's highest-weight mixture mean.
inline std::vector<std::pair<Label, Eigen::VectorXd>> estimate_state(
    const GlmbDensity& posterior) {
    const CardinalityDistribution card = cardinality_distribution(posterior);
    const std::size_t n_star = card.argmax();
    const GlmbComponent* best = nullptr;
    for (const auto& c : posterior.components) {
        if (c.labels.size() != n_star) continue;
        if (!best || c.log_weight > best->log_weight) best = &c;
    }
    std::vector<std::pair<Label, Eigen::VectorXd>> out;
    if (!best) return out;
    out.reserve(best->labels.size());
    for (std::size_t i = 0; i < best->labels.size(); ++i) {
        const auto& gm = best->densities[i];
        std::size_t top = 0;
        for (std::size_t k = 1; k < gm.size(); ++k) {
            if (gm.weight(k) > gm.weight(top)) top = k;
        }
        out.emplace_back(best->labels[i], gm.component(top).mean());
    }
    return out;
}

}  // namespace glmb
