#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "glmb/errors.hpp"

namespace glmb {

/// Exact solution of the rectangular assignment problem (rows <= cols)
/// by the potential/augmenting-path method, O(rows^2 * cols).
/// Returns, per row, the assigned column.
inline std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (n > m) throw Error("solve_assignment: requires rows <= cols");
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<int> match(static_cast<std::size_t>(m) + 1, 0);  // column -> row (1-based)
    std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(m) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = match[static_cast<std::size_t>(j0)];
            double delta = inf;
            int j1 = -1;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= m; ++j) {
        if (match[static_cast<std::size_t>(j)] > 0) {
            row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
        }
    }
    return row_to_col;
}

/// OSPA distance with its localization / cardinality decomposition.
struct OspaResult {
    double distance = 0.0;
    double localization = 0.0;
    double cardinality = 0.0;
};

/// Optimal sub-pattern assignment metric between two point sets, with
/// cutoff c and order p. The optimal matching over the smaller set is
/// solved exactly; unassigned points are penalized at the cutoff.
inline OspaResult ospa(const std::vector<Eigen::VectorXd>& a,
                       const std::vector<Eigen::VectorXd>& b, double cutoff, double order) {
    if (!(cutoff > 0.0)) throw Error("ospa: cutoff must be positive");
    if (!(order >= 1.0)) throw Error("ospa: order must be >= 1");
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    OspaResult out;
    if (na == 0 && nb == 0) return out;

    const auto& small = na <= nb ? a : b;
    const auto& large = na <= nb ? b : a;
    const std::size_t n = large.size();

    double loc_sum = 0.0;
    if (!small.empty()) {
        Eigen::MatrixXd cost(static_cast<Eigen::Index>(small.size()),
                             static_cast<Eigen::Index>(large.size()));
        for (std::size_t i = 0; i < small.size(); ++i) {
            for (std::size_t j = 0; j < large.size(); ++j) {
                cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    std::pow(std::min((small[i] - large[j]).norm(), cutoff), order);
            }
        }
        const std::vector<int> assignment = solve_assignment(cost);
        for (std::size_t i = 0; i < small.size(); ++i) {
            loc_sum += cost(static_cast<Eigen::Index>(i), assignment[i]);
        }
    }
    const double card_sum =
        std::pow(cutoff, order) * static_cast<double>(large.size() - small.size());
    const double dn = static_cast<double>(n);
    out.distance = std::pow((loc_sum + card_sum) / dn, 1.0 / order);
    out.localization = std::pow(loc_sum / dn, 1.0 / order);
    out.cardinality = std::pow(card_sum / dn, 1.0 / order);
    out.distance = std::min(out.distance, cutoff);
    return out;
}

}  // namespace glmb
