#pragma once

#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "glmb/errors.hpp"

namespace glmb {

/// S = { x : normal . x <= offset } on the positional coordinates.
struct HalfSpace {
    Eigen::VectorXd normal;
    double offset = 0.0;
};

/// Axis-aligned box, lower < upper per positional dimension.
struct AxisBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

/// Disc of positive radius in a 2-D positional plane.
struct Disc {
    Eigen::Vector2d center;
    double radius = 0.0;
};

/// A subset of state space supporting an exact membership test and
/// integration of Gaussian mixtures. Regions constrain position only;
/// `position_dims` names the state coordinates that are positional.
class Region {
public:
    static Region half_space(Eigen::VectorXd normal, double offset,
                             std::vector<int> position_dims) {
        if (normal.size() != static_cast<Eigen::Index>(position_dims.size())) {
            throw DimensionMismatchError("Region: normal size must match position dims");
        }
        if (normal.norm() == 0.0) throw Error("Region: half-space normal must be nonzero");
        return Region(HalfSpace{std::move(normal), offset}, std::move(position_dims));
    }

    static Region axis_box(Eigen::VectorXd lower, Eigen::VectorXd upper,
                           std::vector<int> position_dims) {
        if (lower.size() != upper.size() ||
            lower.size() != static_cast<Eigen::Index>(position_dims.size())) {
            throw DimensionMismatchError("Region: box bounds must match position dims");
        }
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            if (!(lower[i] < upper[i])) throw Error("Region: box requires lower < upper");
        }
        return Region(AxisBox{std::move(lower), std::move(upper)}, std::move(position_dims));
    }

    static Region disc(Eigen::Vector2d center, double radius, std::vector<int> position_dims) {
        if (position_dims.size() != 2) {
            throw DimensionMismatchError("Region: disc requires exactly 2 position dims");
        }
        if (!(radius > 0.0)) throw Error("Region: disc radius must be positive");
        return Region(Disc{std::move(center), radius}, std::move(position_dims));
    }

    const std::vector<int>& position_dims() const { return position_dims_; }
    const std::variant<HalfSpace, AxisBox, Disc>& shape() const { return shape_; }

    Eigen::VectorXd position_of(const Eigen::VectorXd& state) const {
        Eigen::VectorXd p(static_cast<Eigen::Index>(position_dims_.size()));
        for (std::size_t i = 0; i < position_dims_.size(); ++i) {
            p[static_cast<Eigen::Index>(i)] = state[position_dims_[i]];
        }
        return p;
    }

    bool contains(const Eigen::VectorXd& state) const {
        const Eigen::VectorXd p = position_of(state);
        if (const auto* hs = std::get_if<HalfSpace>(&shape_)) {
            return hs->normal.dot(p) <= hs->offset;
        }
        if (const auto* box = std::get_if<AxisBox>(&shape_)) {
            for (Eigen::Index i = 0; i < box->lower.size(); ++i) {
                if (p[i] < box->lower[i] || p[i] > box->upper[i]) return false;
            }
            return true;
        }
        const auto& d = std::get<Disc>(shape_);
        return (p.head<2>() - d.center).norm() <= d.radius;
    }

private:
    Region(std::variant<HalfSpace, AxisBox, Disc> shape, std::vector<int> position_dims)
        : shape_(std::move(shape)), position_dims_(std::move(position_dims)) {}

    std::variant<HalfSpace, AxisBox, Disc> shape_;
    std::vector<int> position_dims_;
};

}  // namespace glmb
