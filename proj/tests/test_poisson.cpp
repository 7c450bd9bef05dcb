#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "glmb/oracle/generators.hpp"
#include "glmb/oracle/suites.hpp"
#include "glmb/poisson.hpp"

using namespace glmb;

TEST(PoissonVoid, NegligibleRegionIsOne) {
    PoissonProcess proc{single_gaussian(Eigen::VectorXd::Zero(1),
                                        Eigen::MatrixXd::Identity(1, 1))
                            .scaled(2.0)};
    const Region tiny = Region::axis_box(Eigen::VectorXd::Constant(1, 0.0).eval(),
                                         Eigen::VectorXd::Constant(1, 1e-15).eval(), {0});
    EXPECT_NEAR(poisson_void_probability(proc, tiny), 1.0, 1e-9);
}

TEST(PoissonVoid, HalfSpaceOfSymmetricIntensity) {
    // intensity 2 N(0,1), S = (-inf, 0]: <1_S, v> = 1, Q = e^{-1}
    PoissonProcess proc{single_gaussian(Eigen::VectorXd::Zero(1),
                                        Eigen::MatrixXd::Identity(1, 1))
                            .scaled(2.0)};
    const Region hs = Region::half_space(Eigen::VectorXd::Ones(1), 0.0, {0});
    EXPECT_NEAR(poisson_void_probability(proc, hs), std::exp(-1.0), 1e-12);
}

TEST(PoissonVoid, DiscMatchesDirectPoissonSampling) {
    oracle::DensityGeneratorOptions opt;
    opt.state_dim = 2;
    opt.max_gaussians = 3;
    RandomStream rng(29);
    const GaussianMixture shape = oracle::random_mixture(opt, rng);
    PoissonProcess proc{shape.scaled(2.5)};
    const Region disc = Region::disc(Eigen::Vector2d(0.5, -0.5), 1.5, {0, 1});

    const double q = poisson_void_probability(proc, disc);
    const int n = 1000000;
    int empty = 0;
    for (int i = 0; i < n; ++i) {
        const int count = rng.poisson(proc.mean_count());
        bool any = false;
        for (int c = 0; c < count && !any; ++c) any = disc.contains(shape.sample(rng));
        empty += any ? 0 : 1;
    }
    const double mc = static_cast<double>(empty) / n;
    EXPECT_NEAR(q, mc, 3.0 * std::sqrt(q * (1.0 - q) / n));
}

TEST(PoissonVoid, SuperpositionProductRule) {
    oracle::DensityGeneratorOptions opt;
    opt.state_dim = 2;
    RandomStream rng(37);
    for (int rep = 0; rep < 10; ++rep) {
        PoissonProcess a{oracle::random_mixture(opt, rng).scaled(rng.uniform(0.5, 2.0))};
        PoissonProcess b{oracle::random_mixture(opt, rng).scaled(rng.uniform(0.5, 2.0))};
        GaussianMixture sum = a.intensity;
        for (std::size_t i = 0; i < b.intensity.size(); ++i) {
            sum.add(b.intensity.weight(i), b.intensity.component(i));
        }
        PoissonProcess both{sum};
        const Region region = oracle::detail::random_region_2d(rng);
        EXPECT_NEAR(poisson_void_probability(both, region),
                    poisson_void_probability(a, region) * poisson_void_probability(b, region),
                    1e-10);
    }
}

TEST(PoissonCsd, IdenticalIntensitiesGiveZero) {
    PoissonProcess a{single_gaussian(Eigen::VectorXd::Zero(1),
                                     Eigen::MatrixXd::Identity(1, 1))
                         .scaled(2.0)};
    EXPECT_NEAR(poisson_cs_divergence(a, a, 1.0), 0.0, 1e-15);
}

TEST(PoissonCsd, MassScalingCase) {
    // u = 2 N(0,1), v = 1 N(0,1): ||u - v||^2 = ||N(0,1)||^2 = 1/(2 sqrt(pi))
    const GaussianMixture shape =
        single_gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    PoissonProcess u{shape.scaled(2.0)};
    PoissonProcess v{shape};
    const double expected = 0.5 / (2.0 * std::sqrt(std::numbers::pi));
    EXPECT_NEAR(poisson_cs_divergence(u, v, 1.0), expected, 1e-14);
    EXPECT_NEAR(poisson_cs_divergence(u, v, 7.0), 7.0 * expected, 1e-13);
}

TEST(PoissonCsd, SymmetricAndZeroOnlyOnEquality) {
    oracle::DensityGeneratorOptions opt;
    RandomStream rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        PoissonProcess a{oracle::random_mixture(opt, rng).scaled(rng.uniform(0.5, 2.0))};
        PoissonProcess b{oracle::random_mixture(opt, rng).scaled(rng.uniform(0.5, 2.0))};
        EXPECT_NEAR(poisson_cs_divergence(a, b, 1.0), poisson_cs_divergence(b, a, 1.0),
                    1e-12);
        EXPECT_GT(poisson_cs_divergence(a, b, 1.0), 1e-8);  // distinct random draws
    }
}

TEST(PoissonCsd, MatchesQuadrature) {
    const auto res = oracle::run_poisson_suite(10, 107);
    EXPECT_TRUE(res.ok()) << oracle::to_string(res);
}
