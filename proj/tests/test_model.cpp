#include <gtest/gtest.h>

#include <random>

#include "crane/discretize.hpp"
#include "crane/model.hpp"

using namespace crane;

TEST(Coefficient, PhysicalEvaluation)
{
    const auto a = CableCoefficient::physical(1.0, 10.0);
    EXPECT_DOUBLE_EQ(a(0.0), 20.0);
    EXPECT_DOUBLE_EQ(a(1.0), 10.0);
    EXPECT_DOUBLE_EQ(a.lower_bound(), 10.0);
    EXPECT_FALSE(a.satisfies_133());

    const auto b = CableCoefficient::physical(0.5, 9.81);
    EXPECT_NEAR(b(1.0), 4.905, 1e-14);
    EXPECT_FALSE(b.satisfies_133());
    EXPECT_NEAR(b.min_slope(), -9.81, 1e-9);
}

TEST(Coefficient, AffineEvaluation)
{
    const auto a = CableCoefficient::affine(1.0, 1.0);
    EXPECT_DOUBLE_EQ(a(0.0), 1.0);
    EXPECT_DOUBLE_EQ(a(1.0), 2.0);
    EXPECT_TRUE(a.satisfies_133());
    EXPECT_DOUBLE_EQ(CableCoefficient::affine(2.0, 0.5)(0.5), 2.25);
    EXPECT_THROW(CableCoefficient::affine(1.0, 0.0), ModelError);
    EXPECT_THROW(CableCoefficient::affine(0.0, 1.0), ModelError);
}

TEST(Coefficient, Tabulated)
{
    const auto a = CableCoefficient::tabulated({{0.0, 1.0}, {0.5, 2.0}, {1.0, 2.5}}, true);
    EXPECT_DOUBLE_EQ(a(0.25), 1.5);
    EXPECT_DOUBLE_EQ(a(0.75), 2.25);
    EXPECT_DOUBLE_EQ(a.min_slope(), 1.0);
    EXPECT_TRUE(a.satisfies_133());
    EXPECT_THROW(CableCoefficient::tabulated({{0.0, 2.0}, {1.0, 1.0}}, true), ModelError);
    EXPECT_NO_THROW(CableCoefficient::tabulated({{0.0, 2.0}, {1.0, 1.0}}, false));
    EXPECT_THROW(CableCoefficient::tabulated({{0.0, 2.0}, {0.8, 1.0}}, false), ModelError);
    EXPECT_THROW(CableCoefficient::tabulated({{0.0, 0.0}, {1.0, 1.0}}, false), ModelError);
}

TEST(Validate, ReferenceGainsPass)
{
    const auto r = validate_model(CraneModel::reference());
    EXPECT_TRUE(r.passes_strict());
    EXPECT_TRUE(r.supports_decay());
    EXPECT_DOUBLE_EQ(r.find("energy_weight_lower").margin, 1.0);
    EXPECT_DOUBLE_EQ(r.find("energy_weight_upper").margin, 1.0);
    EXPECT_DOUBLE_EQ(r.find("delay_gain_bound").margin, 1.0);
}

TEST(Validate, AlphaAboveBetaFails)
{
    const auto m = CraneModel::make({}, {2.0, 1.0, 0.5, 2.0}, CableCoefficient::affine(1, 1));
    const auto r = validate_model(m);
    EXPECT_FALSE(r.passes_strict());
    EXPECT_FALSE(r.find("delay_gain_bound").passed);
    EXPECT_THROW(require_strict(m), ModelError);
    EXPECT_THROW(DiscreteOperator(m, Grid(20, 10)), ModelError);
}

TEST(Validate, AlphaEqualBetaFails)
{
    const auto m = CraneModel::make({}, {1.0, 1.0, 0.5, 1.0}, CableCoefficient::affine(1, 1));
    const auto r = validate_model(m);
    EXPECT_FALSE(r.find("delay_gain_bound").passed);
    EXPECT_DOUBLE_EQ(r.find("delay_gain_bound").margin, 0.0);
}

TEST(Validate, ZeroAlpha)
{
    const auto m = CraneModel::make({}, {0.0, 1.0, 0.5, 1.0}, CableCoefficient::affine(1, 1));
    EXPECT_DOUBLE_EQ(m.mu(), 1.0);
    const auto r = validate_model(m);
    EXPECT_TRUE(r.passes_strict());
    // K delta / (tau alpha^2) is dropped: the bound is min(eps a0/(mu(mu-kappa)), delta, ...)
    const double delta = 0.5 / (4.0 * 0.5);
    EXPECT_DOUBLE_EQ(InnerProductWeights::varpi_supremum(m.physical, m.gains, 1.0, 0.5, 0.5), delta);
}

TEST(Validate, NonStrictBoundaryReported)
{
    // K = |alpha|: non-strict form holds, strict form does not
    const auto m = CraneModel::make({}, {1.0, 2.0, 0.5, 1.0}, CableCoefficient::affine(1, 1));
    const auto r = validate_model(m);
    EXPECT_TRUE(r.find("energy_weight_lower_nonstrict").passed);
    EXPECT_FALSE(r.find("energy_weight_lower").passed);
    EXPECT_FALSE(r.passes_strict());
}

TEST(Validate, PhysicalCoefficientAssemblesButNoDecaySupport)
{
    const auto m = CraneModel::make({}, {}, CableCoefficient::physical(1.0, 9.81));
    const auto r = validate_model(m);
    EXPECT_TRUE(r.passes_strict());
    EXPECT_FALSE(r.supports_decay());
    EXPECT_NO_THROW(DiscreteOperator(m, Grid(20, 10)));
}

TEST(Weights, DefaultChoice)
{
    const auto m = CraneModel::reference();
    const auto& w = m.weights;
    EXPECT_DOUBLE_EQ(w.kappa, 0.5);
    EXPECT_DOUBLE_EQ(w.epsilon, 0.5);
    EXPECT_DOUBLE_EQ(w.delta, 0.25);
    // min{0.5/(1*0.5), 0.25, 0.25, 0.25, 2*0.25/0.5} = 0.25, halved
    EXPECT_DOUBLE_EQ(w.varpi, 0.125);
}

TEST(Weights, OversizedVarpiRejected)
{
    auto m = CraneModel::reference();
    m.weights.varpi = 0.3;
    EXPECT_FALSE(validate_model(m).find("varpi_bound").passed);
    EXPECT_THROW(require_strict(m), ModelError);
}

TEST(FixedConstants, Formulas)
{
    const PhysicalParams p{1.5, 0.7, 9.81, 1.0};
    const ControlGains k{0.3, 1.1, 0.25, 1.0};
    const auto c = FixedConstants::from(p, k);
    EXPECT_DOUBLE_EQ(c.c1, 1.5);
    EXPECT_DOUBLE_EQ(c.c2, 0.7);
    EXPECT_DOUBLE_EQ(c.c3, 0.25 * 0.3);
    EXPECT_DOUBLE_EQ(c.c4, 1.1 - 0.3);
    EXPECT_DOUBLE_EQ(c.c, 1.0);
    const auto again = FixedConstants::from(p, k);
    EXPECT_EQ(c.c3, again.c3);
    EXPECT_EQ(c.c4, again.c4);
}

TEST(Validate, RandomGainsAgreeWithArithmetic)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        const ControlGains k{U(rng), std::abs(U(rng)) + 1e-3, 0.5, std::abs(U(rng))};
        const auto m = CraneModel::make({}, k, CableCoefficient::affine(1, 1));
        const bool expected = std::abs(k.alpha) < k.beta && std::abs(k.alpha) < k.K &&
                              k.K < 2 * k.beta - std::abs(k.alpha);
        EXPECT_EQ(validate_model(m).passes_strict(), expected) << k.alpha << " " << k.beta << " " << k.K;
        if (!expected)
            EXPECT_THROW(DiscreteOperator(m, Grid(8, 4)), ModelError);
    }
}
