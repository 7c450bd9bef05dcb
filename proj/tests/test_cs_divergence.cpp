#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "glmb/cs_divergence.hpp"
#include "glmb/oracle/generators.hpp"
#include "glmb/oracle/set_integral.hpp"
#include "glmb/oracle/suites.hpp"
#include "glmb/quadrature.hpp"

using namespace glmb;

namespace {

GlmbDensity one_label_density(const Label& l, double mean, double var,
                              std::uint64_t history = 1) {
    GlmbDensity d;
    d.state_dim = 1;
    GlmbComponent c;
    c.history = history;
    c.labels = {l};
    c.densities.push_back(single_gaussian(Eigen::VectorXd::Constant(1, mean),
                                          Eigen::MatrixXd::Constant(1, 1, var)));
    d.components.push_back(std::move(c));
    return normalize(std::move(d));
}

}  // namespace

TEST(MixtureInnerProduct, GaussianProductAtZeroSeparation) {
    const GaussianMixture g =
        single_gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    // K <N(0,1), N(0,1)> = 1 / (2 sqrt(pi)) for K = 1
    EXPECT_NEAR(gaussian_mixture_inner_product(g, g, 1.0),
                1.0 / (2.0 * std::sqrt(std::numbers::pi)), 1e-15);
    EXPECT_NEAR(gaussian_mixture_inner_product(g, g, 10.0),
                10.0 / (2.0 * std::sqrt(std::numbers::pi)), 1e-14);
}

TEST(MixtureInnerProduct, WidelySeparatedMeansStayRepresentableInLogDomain) {
    const GaussianMixture a =
        single_gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    const GaussianMixture b =
        single_gaussian(Eigen::VectorXd::Constant(1, 100.0), Eigen::MatrixXd::Identity(1, 1));
    const double linear = gaussian_mixture_inner_product(a, b, 1.0);
    EXPECT_LT(linear, 1e-300);
    const double log_value = log_gaussian_mixture_inner_product(a, b, 0.0);
    // log N(100; 0, 2) = -log(2 sqrt(pi)) - 100^2 / 4
    EXPECT_NEAR(log_value, -std::log(2.0 * std::sqrt(std::numbers::pi)) - 2500.0, 1e-9);
}

TEST(MixtureInnerProduct, MatchesTensorGridQuadrature) {
    oracle::DensityGeneratorOptions opt;
    opt.state_dim = 2;
    opt.max_gaussians = 3;
    RandomStream rng(51);
    for (int rep = 0; rep < 10; ++rep) {
        const GaussianMixture a = oracle::random_mixture(opt, rng);
        const GaussianMixture b = oracle::random_mixture(opt, rng);
        const QuadratureGrid grid = composite_gauss_legendre(-20.0, 20.0, 160);
        double integral = 0.0;
        Eigen::VectorXd x(2);
        for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
            x[0] = grid.nodes[i];
            double inner = 0.0;
            for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
                x[1] = grid.nodes[j];
                inner += grid.weights[j] * a.pdf(x) * b.pdf(x);
            }
            integral += grid.weights[i] * inner;
        }
        const double closed = gaussian_mixture_inner_product(a, b, 1.0);
        EXPECT_NEAR(closed, integral, 1e-9 * std::max(closed, 1e-6));
    }
}

TEST(GlmbInnerProduct, OrthogonalLabelSupports) {
    const GlmbDensity phi = one_label_density(Label{0, 1}, 0.0, 1.0);
    const GlmbDensity psi = one_label_density(Label{0, 2}, 0.0, 1.0);
    const GlmbInnerProduct ip = glmb_inner_product(phi, psi);
    EXPECT_TRUE(ip.is_zero);
    EXPECT_EQ(cs_divergence(phi, psi), kInf);
}

TEST(GlmbInnerProduct, CertainEmptyPairIsOne) {
    const GlmbDensity phi = GlmbDensity::certain_empty(1);
    const GlmbDensity psi = GlmbDensity::certain_empty(1);
    const GlmbInnerProduct ip = glmb_inner_product(phi, psi);
    EXPECT_FALSE(ip.is_zero);
    EXPECT_NEAR(ip.log_value, 0.0, 1e-15);
}

TEST(GlmbInnerProduct, UnitMismatchThrows) {
    GlmbDensity phi = GlmbDensity::certain_empty(1, 1.0);
    GlmbDensity psi = GlmbDensity::certain_empty(1, 2.0);
    EXPECT_THROW(glmb_inner_product(phi, psi), UnitMismatchError);
}

TEST(GlmbInnerProduct, MatchesSetIntegralOnSingleLabel) {
    const GlmbDensity phi = one_label_density(Label{0, 1}, 0.3, 0.8);
    const GlmbDensity psi = one_label_density(Label{0, 1}, -0.5, 1.2, 2);
    const double closed = std::exp(glmb_inner_product(phi, psi).log_value);
    const double quad = oracle::set_integral_inner_product(phi, psi);
    EXPECT_NEAR(closed, quad, 1e-8 * std::max(closed, 1.0));
    // one-term sum: also equals the plain mixture inner product
    EXPECT_NEAR(closed,
                gaussian_mixture_inner_product(phi.components[0].densities[0],
                                               psi.components[0].densities[0], 1.0),
                1e-12);
}

TEST(CsDivergence, SelfDivergenceIsExactlyZero) {
    oracle::DensityGeneratorOptions opt;
    RandomStream rng(61);
    for (int rep = 0; rep < 10; ++rep) {
        const GlmbDensity d = oracle::random_density(opt, rng);
        EXPECT_EQ(cs_divergence(d, d), 0.0);
    }
}

TEST(CsDivergence, SymmetricToMachinePrecision) {
    oracle::DensityGeneratorOptions opt;
    RandomStream rng(67);
    for (int rep = 0; rep < 10; ++rep) {
        const GlmbDensity a = oracle::random_density(opt, rng);
        GlmbDensity b = oracle::random_density(opt, rng);
        const double ab = cs_divergence(a, b);
        const double ba = cs_divergence(b, a);
        if (std::isinf(ab)) {
            EXPECT_TRUE(std::isinf(ba));
        } else {
            EXPECT_NEAR(ab, ba, 1e-12 * std::max(1.0, std::abs(ab)));
        }
    }
}

TEST(CsDivergence, CauchySchwarzBoundHolds) {
    oracle::DensityGeneratorOptions opt;
    RandomStream rng(71);
    for (int rep = 0; rep < 50; ++rep) {
        const GlmbDensity a = oracle::random_density(opt, rng);
        const GlmbDensity b = oracle::random_density(opt, rng);
        const GlmbInnerProduct cross = glmb_inner_product(a, b);
        if (cross.is_zero) continue;
        const double bound = 0.5 * glmb_inner_product(a, a).log_value +
                             0.5 * glmb_inner_product(b, b).log_value;
        EXPECT_LE(cross.log_value, bound + 1e-9);
    }
}

TEST(CsDivergence, MatchesSetIntegralOracleOnTwoLabelPairs) {
    const auto res = oracle::run_cs_divergence_suite(25, 101);
    EXPECT_TRUE(res.ok()) << oracle::to_string(res);
}

TEST(CsDivergence, KInvariance) {
    const auto res = oracle::run_k_invariance_suite(10, 103);
    EXPECT_TRUE(res.ok()) << oracle::to_string(res);
}

TEST(SetIntegralOracle, CertainEmptyPairIsOne) {
    EXPECT_NEAR(oracle::set_integral_inner_product(GlmbDensity::certain_empty(1),
                                                   GlmbDensity::certain_empty(1)),
                1.0, 1e-15);
}

TEST(SetIntegralOracle, RejectsOversizedProblems) {
    oracle::DensityGeneratorOptions opt;
    opt.max_labels = 4;
    opt.max_components = 6;
    RandomStream rng(73);
    GlmbDensity d = oracle::random_density(opt, rng);
    while (all_labels(d).size() < 4) d = oracle::random_density(opt, rng);
    EXPECT_THROW(oracle::set_integral_inner_product(d, d), TooLargeError);
}

TEST(SetIntegralOracle, ThreeLabelCoarseGridAgreesWithClosedForm) {
    oracle::DensityGeneratorOptions opt;
    opt.max_labels = 3;
    opt.max_components = 4;
    RandomStream rng(79);
    GlmbDensity phi = oracle::random_density(opt, rng);
    GlmbDensity psi = oracle::random_density(opt, rng);
    while (glmb_inner_product(phi, psi).is_zero) psi = oracle::random_density(opt, rng);

    oracle::SetIntegralOptions so;
    so.panel_scale = 2.0;
    so.panel_order = 10;
    so.tail_sigmas = 8.0;
    const double quad = oracle::set_integral_inner_product(phi, psi, so);
    const double closed = std::exp(glmb_inner_product(phi, psi).log_value);
    EXPECT_NEAR(quad, closed, 1e-5 * std::max(closed, 1e-3));
}

TEST(SetIntegralOracle, ImportanceSamplingCrossCheck) {
    oracle::DensityGeneratorOptions opt;
    opt.max_labels = 2;
    opt.max_components = 3;
    RandomStream rng(83);
    GlmbDensity phi = oracle::random_density(opt, rng);
    GlmbDensity psi = oracle::random_density(opt, rng);
    while (glmb_inner_product(phi, psi).is_zero) psi = oracle::random_density(opt, rng);

    const double quad = oracle::set_integral_inner_product(phi, psi);
    RandomStream is_rng(85);
    const auto [mean, se] = oracle::importance_sampled_inner_product(phi, psi, 2000000, is_rng);
    EXPECT_NEAR(mean, quad, 3.0 * se + 1e-12);
}
