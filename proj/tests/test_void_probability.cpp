#include <gtest/gtest.h>

#include <cmath>

#include "glmb/oracle/generators.hpp"
#include "glmb/oracle/suites.hpp"
#include "glmb/void_probability.hpp"

using namespace glmb;

namespace {

GaussianMixture standard_2d() {
    return single_gaussian(Eigen::Vector2d(0.0, 0.0), Eigen::Matrix2d::Identity());
}

const std::vector<int> kDims2{0, 1};

}  // namespace

TEST(Escape, DegenerateZeroVolumeBoxIsOne) {
    const Region tiny = Region::axis_box(Eigen::Vector2d(0.0, 0.0).eval(),
                                         Eigen::Vector2d(1e-15, 1e-15).eval(), kDims2);
    EXPECT_NEAR(escape_probability(standard_2d(), tiny), 1.0, 1e-9);
}

TEST(Escape, HalfSpaceSymmetry) {
    const GaussianMixture gm =
        single_gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    const Region hs = Region::half_space(Eigen::VectorXd::Ones(1), 0.0, {0});
    EXPECT_NEAR(escape_probability(gm, hs), 0.5, 1e-12);
}

TEST(Escape, UnitDiscOfStandardNormal) {
    // radius^2 of a standard 2-D normal is chi-squared(2): the Rayleigh
    // oracle gives P(inside unit disc) = 1 - exp(-1/2)
    const Region disc = Region::disc(Eigen::Vector2d(0.0, 0.0), 1.0, kDims2);
    EXPECT_NEAR(escape_probability(standard_2d(), disc), std::exp(-0.5), 1e-6);
}

TEST(Escape, DiscFarFromMassIsOne) {
    const Region disc = Region::disc(Eigen::Vector2d(500.0, 0.0), 1.0, kDims2);
    EXPECT_NEAR(escape_probability(standard_2d(), disc), 1.0, 1e-9);
}

TEST(Escape, PointMassInsideDiscIsZero) {
    const GaussianMixture gm =
        single_gaussian(Eigen::Vector2d(0.0, 0.0), Eigen::Matrix2d::Identity() * 1e-12);
    const Region disc = Region::disc(Eigen::Vector2d(0.0, 0.0), 1000.0, kDims2);
    EXPECT_NEAR(escape_probability(gm, disc), 0.0, 1e-9);
}

TEST(Escape, NarrowFarDiscAgainstRayleigh) {
    // disc subtends a small angle; the radial closed form plus packed
    // angular panels must still see it
    const GaussianMixture gm =
        single_gaussian(Eigen::Vector2d(0.0, 0.0), Eigen::Matrix2d::Identity() * 25.0);
    const Region disc = Region::disc(Eigen::Vector2d(20.0, 0.0), 1.0, kDims2);
    // Monte Carlo reference
    RandomStream rng(99);
    const int n = 4000000;
    int inside = 0;
    for (int i = 0; i < n; ++i) {
        if (disc.contains(gm.sample(rng))) ++inside;
    }
    const double mc = static_cast<double>(inside) / n;
    const double closed = 1.0 - escape_probability(gm, disc);
    EXPECT_NEAR(closed, mc, 3.0 * std::sqrt(mc * (1.0 - mc) / n) + 1e-7);
}

TEST(Escape, CorrelatedBoxMatchesMonteCarlo) {
    Eigen::Matrix2d cov;
    cov << 2.0, 1.2, 1.2, 1.5;
    const GaussianMixture gm = single_gaussian(Eigen::Vector2d(0.4, -0.3), cov);
    const Region box = Region::axis_box(Eigen::Vector2d(-1.0, -1.5).eval(),
                                        Eigen::Vector2d(1.5, 0.8).eval(), kDims2);
    RandomStream rng(31);
    const int n = 2000000;
    int inside = 0;
    for (int i = 0; i < n; ++i) {
        if (box.contains(gm.sample(rng))) ++inside;
    }
    const double mc = static_cast<double>(inside) / n;
    const double closed = 1.0 - escape_probability(gm, box);
    EXPECT_NEAR(closed, mc, 3.0 * std::sqrt(mc * (1.0 - mc) / n) + 1e-6);
}

TEST(Escape, BudgetExhaustionThrows) {
    QuadratureOptions opts;
    opts.max_evals = 8;
    const Region disc = Region::disc(Eigen::Vector2d(0.5, 0.5), 1.0, kDims2);
    EXPECT_THROW(escape_probability(standard_2d(), disc, opts), IntegrationFailureError);
}

TEST(GlmbVoid, CertainEmptyIsOneEverywhere) {
    const GlmbDensity d = GlmbDensity::certain_empty(2);
    EXPECT_DOUBLE_EQ(glmb_void_probability(d, Region::disc({0, 0}, 3.0, kDims2)), 1.0);
    EXPECT_DOUBLE_EQ(glmb_void_probability(d, Region::half_space(Eigen::VectorXd::Ones(2),
                                                                 0.0, kDims2)),
                     1.0);
}

TEST(GlmbVoid, SingleComponentReducesToEscape) {
    GlmbDensity d;
    d.state_dim = 2;
    GlmbComponent c;
    c.history = 1;
    c.labels = {Label{0, 0}};
    c.densities.push_back(standard_2d());
    d.components.push_back(std::move(c));
    d = normalize(std::move(d));
    const Region disc = Region::disc(Eigen::Vector2d(0.0, 0.0), 1.0, kDims2);
    EXPECT_NEAR(glmb_void_probability(d, disc),
                escape_probability(standard_2d(), disc), 1e-12);
}

TEST(GlmbVoid, MatchesMonteCarloOnMultiLabelDensity) {
    oracle::DensityGeneratorOptions opt;
    opt.state_dim = 2;
    opt.max_labels = 3;
    opt.max_components = 4;
    RandomStream rng(41);
    const GlmbDensity d = oracle::random_density(opt, rng);
    const Region disc = Region::disc(Eigen::Vector2d(0.5, -0.5), 1.5, kDims2);

    const double q = glmb_void_probability(d, disc);
    const int n = 1000000;
    int empty = 0;
    for (int i = 0; i < n; ++i) {
        bool any = false;
        for (const auto& [label, x] : sample_realization(d, rng)) {
            if (disc.contains(x)) {
                any = true;
                break;
            }
        }
        empty += any ? 0 : 1;
    }
    const double mc = static_cast<double>(empty) / n;
    EXPECT_NEAR(q, mc, 3.0 * std::sqrt(std::max(q * (1.0 - q), 1e-12) / n));
}

TEST(GlmbVoid, MonotoneInNestedRegions) {
    oracle::DensityGeneratorOptions opt;
    opt.state_dim = 2;
    opt.max_labels = 3;
    opt.max_components = 4;
    RandomStream rng(43);
    const GlmbDensity d = oracle::random_density(opt, rng);
    double prev = 1.0;
    for (double r = 0.5; r <= 4.0; r += 0.5) {
        const double q =
            glmb_void_probability(d, Region::disc(Eigen::Vector2d(0.3, 0.3), r, kDims2));
        EXPECT_LE(q, prev + 1e-12);
        EXPECT_GE(q, 0.0);
        EXPECT_LE(q, 1.0);
        prev = q;
    }
}

TEST(GlmbVoid, IndependentUnionProductRule) {
    const auto res = oracle::run_union_product_suite(5, 3, 2024);
    EXPECT_TRUE(res.ok()) << oracle::to_string(res);
}

TEST(GlmbVoid, ClosedFormAgreesWithMonteCarloProperty) {
    const auto res = oracle::run_void_probability_suite(20, 20000, 77);
    EXPECT_TRUE(res.ok()) << oracle::to_string(res);
}

TEST(Region, ConstructionValidation) {
    EXPECT_THROW(Region::disc({0, 0}, 0.0, kDims2), Error);
    EXPECT_THROW(Region::disc({0, 0}, 1.0, {0}), DimensionMismatchError);
    EXPECT_THROW(Region::axis_box(Eigen::Vector2d(1, 1).eval(),
                                  Eigen::Vector2d(0, 0).eval(), kDims2),
                 Error);
    EXPECT_THROW(Region::half_space(Eigen::VectorXd::Zero(2), 0.0, kDims2), Error);
}

TEST(Region, MembershipUsesPositionDimsOnly) {
    // state [px, vx, py, vy]: the velocity must not affect membership
    const Region disc = Region::disc(Eigen::Vector2d(0.0, 0.0), 1.0, {0, 2});
    Eigen::VectorXd x(4);
    x << 0.1, 999.0, -0.2, -999.0;
    EXPECT_TRUE(disc.contains(x));
    x[0] = 5.0;
    EXPECT_FALSE(disc.contains(x));
}
