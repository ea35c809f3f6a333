#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

#include "crane/discretize.hpp"
#include "test_util.hpp"

using namespace crane;
using crane::testing::random_state;

namespace {

const CraneModel kRef = CraneModel::reference();

}  // namespace

TEST(Grid, Layout)
{
    const Grid g(4, 3);
    EXPECT_EQ(g.full_size(), 2 * 5 + 4 + 2);
    EXPECT_EQ(g.reduced_size(), 2 * 4 + 3 + 2);
    EXPECT_EQ(g.rz(0), g.rxi());
    EXPECT_EQ(g.ru(0), g.rxi());
    EXPECT_EQ(g.rz(4), g.reta());
    EXPECT_THROW(Grid(1, 3), std::invalid_argument);
    EXPECT_THROW(Grid(4, 0), std::invalid_argument);
    EXPECT_THROW(Grid(4, 2, Grid::Spacing::uniform, -1.0), std::invalid_argument);
}

TEST(Mesh, TravelTimeNodesEquidistantInTravelTime)
{
    const auto a = CableCoefficient::affine(1.0, 1.0);
    const auto m = CableMesh::travel_time(a, 40);
    const auto tt = [](double x) { return 2.0 * (std::sqrt(1.0 + x) - 1.0); };
    for (int j = 0; j < 40; ++j)
        EXPECT_NEAR(tt(m.x(j + 1)) - tt(m.x(j)), tt(1.0) / 40, 1e-13);
    // the numeric inversion path on the same coefficient, as a table
    std::vector<std::pair<double, double>> nodes;
    for (int i = 0; i <= 400; ++i)
        nodes.push_back({i / 400.0, a(i / 400.0)});
    const auto mt = CableMesh::travel_time(CableCoefficient::tabulated(nodes, true), 40);
    EXPECT_LT((mt.x - m.x).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_NEAR(m.weight.sum(), 1.0, 1e-14);
}

TEST(Assemble, ConstantStateIsAnnihilated)
{
    for (auto sp : {Grid::Spacing::uniform, Grid::Spacing::travel_time}) {
        const DiscreteOperator op(kRef, Grid(30, 12, sp));
        const auto c = op.constant(3.7);
        EXPECT_LT(op.apply(c.stacked()).cwiseAbs().maxCoeff(), 1e-14 * 3.7 * op.A().cwiseAbs().maxCoeff());
    }
}

TEST(Assemble, VelocityFeedsDisplacementRows)
{
    const DiscreteOperator op(kRef, Grid(30, 12));
    auto s = op.zeros();
    s.z.setOnes();
    s.u.setOnes();
    s.xi = s.eta = 1.0;
    ASSERT_TRUE(s.in_domain());
    const auto as = CraneState::from_stacked(op.mesh(), 12, op.apply(s.stacked()));
    EXPECT_LT((as.y.array() - 1.0).abs().maxCoeff(), 1e-13);
}

TEST(Assemble, FunctionalAnnihilatesGenerator)
{
    for (int N : {4, 30, 120}) {
        const DiscreteOperator op(kRef, Grid(N, N / 2 + 1));
        EXPECT_LE(op.ell_A_residual(), 1e-12);
        const Eigen::RowVectorXd lA = op.ell() * op.A();
        EXPECT_LT(lA.cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Assemble, GramSymmetricPositive)
{
    const DiscreteOperator op(kRef, Grid(40, 20, Grid::Spacing::travel_time));
    const auto& G = op.G();
    EXPECT_LT((G - G.transpose()).cwiseAbs().maxCoeff(), 1e-14 * G.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(InnerProduct, QuadratureMatchesGram)
{
    const DiscreteOperator op(kRef, Grid(25, 10));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const auto a = random_state(op, rng, false);
        const auto b = random_state(op, rng, false);
        const double q = op.inner_product(a, b);
        const double g = a.stacked().dot(op.G() * b.stacked());
        EXPECT_NEAR(q, g, 1e-12 * (1.0 + std::abs(g)));
        EXPECT_NEAR(q, op.inner_product(b, a), 1e-13 * (1.0 + std::abs(q)));
    }
}

TEST(InnerProduct, ZeroState)
{
    const DiscreteOperator op(kRef, Grid(25, 10));
    std::mt19937_64 rng(4);
    EXPECT_EQ(inner_product(op.zeros(), random_state(op, rng, false), op), 0.0);
}

TEST(InnerProduct, ConstantVelocityWithoutFunctionalWeight)
{
    auto m = kRef;
    m.weights.varpi = 0.0;
    const DiscreteOperator op(m, Grid(25, 10), false);
    auto s = op.zeros();
    s.z.setOnes();
    EXPECT_NEAR(op.inner_product(s, s), 1.0, 1e-14);
}

TEST(InnerProduct, IndependentQuadrature)
{
    // terms written out from the definition of the weighted product
    const auto& k = kRef.gains;
    const auto& p = kRef.physical;
    const DiscreteOperator op(kRef, Grid(64, 32));
    auto s = op.zeros();
    const auto& x = op.mesh()->x;
    for (int j = 0; j <= 64; ++j) {
        s.y(j) = x(j) * x(j);
        s.z(j) = std::cos(x(j));
    }
    for (int i = 0; i <= 32; ++i)
        s.u(i) = 1.0 + 0.5 * i / 32.0;
    s.xi = 1.0;
    s.eta = std::cos(1.0);
    const double ay = 7.0 / 3.0;                                  // int (1+x)(2x)^2
    const double zz = 0.5 + std::sin(2.0) / 4.0;                  // int cos^2
    const double uu = 1.0 + 0.5 + 0.25 / 3.0;                     // int (1+s/2)^2
    const double ell = std::sin(1.0) + k.alpha * k.tau * 1.25 + p.m * 1.0 + p.M * std::cos(1.0);
    const double expect = ay + zz + k.K * k.tau * uu + p.m + p.M * std::cos(1.0) * std::cos(1.0) +
                          kRef.weights.varpi * ell * ell;
    EXPECT_NEAR(op.inner_product(s, s), expect, 5e-3);
    EXPECT_NEAR(conserved_functional(s, kRef), ell, 1e-3);
}

TEST(Project, DotSpace)
{
    const DiscreteOperator op(kRef, Grid(25, 10));
    auto s = op.zeros();
    s.z.setOnes();
    const auto p = project_to_dot_space(s, op);
    EXPECT_NEAR(p.y(0), -1.0 / kRef.mu(), 1e-14);
    EXPECT_LT((p.y.array() - p.y(0)).abs().maxCoeff(), 1e-15);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const auto r = random_state(op, rng, false);
        const auto q = project_to_dot_space(r, op);
        EXPECT_LT(std::abs(conserved_functional(q, kRef)), 1e-12);
        const auto qq = project_to_dot_space(q, op);
        EXPECT_LT((qq.y - q.y).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Project, MatrixIsIdempotent)
{
    const DiscreteOperator op(kRef, Grid(20, 8));
    const auto& P = op.P();
    EXPECT_LT((P * P - P).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((op.ell() * P).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NormEquivalence, Bounds)
{
    const DiscreteOperator op(kRef, Grid(40, 20));
    const auto ne = norm_equivalence_bounds(op);
    EXPECT_GT(ne.A1, 0.0);
    EXPECT_LE(ne.A1, ne.A2);
    auto m = kRef;
    m.weights.varpi = 0.0;
    const DiscreteOperator op0(m, Grid(40, 20), false);
    const auto ne0 = norm_equivalence_bounds(op0);
    EXPECT_TRUE(ne0.on_dot_space);
    EXPECT_GT(ne0.A1, 0.0);
    EXPECT_LE(ne0.A1, ne0.A2);
}

TEST(Generator, ConsistencyOrder)
{
    // smooth compatible data with u_s(0) = -tau xi', so the transport rows see no boundary layer
    const auto& k = kRef.gains;
    const auto& p = kRef.physical;
    const auto a = [](double x) { return 1.0 + x; };
    const auto y = [](double x) { return std::cos(x) + x * x * x / 3.0; };
    const auto yx = [](double x) { return -std::sin(x) + x * x; };
    const auto yxx = [](double x) { return -std::cos(x) + 2.0 * x; };
    const auto z = [](double x) { return std::sin(2.0 * x) + 1.0; };
    const double xi = z(0.0), eta = z(1.0);
    const double F0 = a(0.0) * yx(0.0);
    const double c1 = -k.tau / p.m * (F0 - k.beta * xi + k.alpha * (xi + 1.0)) / (1.0 + k.tau * k.alpha / p.m);
    const auto u = [&](double s) { return xi + c1 * s + s * s; };
    const auto us = [&](double s) { return c1 + 2.0 * s; };
    const double xidot = (F0 - k.beta * xi + k.alpha * u(1.0)) / p.m;
    ASSERT_NEAR(-us(0.0) / k.tau, xidot, 1e-14);
    const double etadot = -a(1.0) * yx(1.0) / p.M;

    for (auto sp : {Grid::Spacing::uniform, Grid::Spacing::travel_time}) {
        std::vector<double> hs, errs;
        for (int N : {20, 40, 80, 160}) {
            const Grid g(N, N / 2, sp);
            const DiscreteOperator op(kRef, g);
            auto s = op.zeros();
            const auto& x = op.mesh()->x;
            for (int j = 0; j <= N; ++j) {
                s.y(j) = y(x(j));
                s.z(j) = z(x(j));
            }
            for (int i = 0; i <= g.Nd; ++i)
                s.u(i) = u(g.s(i));
            s.xi = xi;
            s.eta = eta;
            const auto as = CraneState::from_stacked(op.mesh(), g.Nd, op.apply(s.stacked()));
            double err = 0.0;
            for (int j = 0; j <= N; ++j)
                err = std::max(err, std::abs(as.y(j) - z(x(j))));
            for (int j = 1; j < N; ++j)
                err = std::max(err, std::abs(as.z(j) - (1.0 * yx(x(j)) + a(x(j)) * yxx(x(j)))));
            for (int i = 1; i <= g.Nd; ++i)
                err = std::max(err, std::abs(as.u(i) + us(g.s(i)) / k.tau));
            err = std::max({err, std::abs(as.xi - xidot), std::abs(as.z(0) - xidot), std::abs(as.u(0) - xidot),
                            std::abs(as.eta - etadot), std::abs(as.z(N) - etadot)});
            hs.push_back(1.0 / N);
            errs.push_back(err);
        }
        const double slope = crane::testing::loglog_slope(hs, errs);
        EXPECT_GE(slope, 0.9) << to_string(sp) << " errors " << errs.front() << " .. " << errs.back();
    }
}

TEST(Generator, DissipativityOnRandomCompatibleStates)
{
    const DiscreteOperator op(kRef, Grid(40, 20));
    const auto& k = kRef.gains;
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const auto s = random_state(op, rng, true);
        const Eigen::VectorXd v = s.stacked();
        const double lhs = v.dot(op.G() * op.apply(v));
        const double u1 = s.u(s.u.size() - 1);
        const double bound = (-k.beta + 0.5 * (k.K + std::abs(k.alpha))) * s.xi * s.xi +
                             0.5 * (std::abs(k.alpha) - k.K) * u1 * u1;
        EXPECT_LE(lhs - bound, 1e-8 * v.dot(op.G() * v));
    }
}

TEST(Export, MatrixText)
{
    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 0.1, -5e-300, 7;
    std::ostringstream os;
    write_matrix(os, m);
    std::istringstream is(os.str());
    std::string hash;
    int r, c;
    is >> hash >> r >> c;
    EXPECT_EQ(r, 2);
    EXPECT_EQ(c, 3);
    Eigen::MatrixXd back(2, 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            is >> back(i, j);
    EXPECT_EQ((back - m).cwiseAbs().maxCoeff(), 0.0);
}
