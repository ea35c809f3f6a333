#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

#include "crane/evolve.hpp"
#include "test_util.hpp"

using namespace crane;
using crane::testing::random_state;

namespace {

const CraneModel kRef = CraneModel::reference();

InitialData smooth_data(double A = 0.1)
{
    const double tau = kRef.gains.tau;
    InitialData d;
    d.y0 = [A](double x) { return A * std::cos(M_PI * x); };
    d.y1 = [A](double x) { return A * std::sin(0.5 * M_PI * x); };
    d.f = [A, tau](double th) { return A * std::sin(-M_PI * th / tau); };
    d.xi0 = 0.0;
    d.eta0 = A;
    return d;
}

}  // namespace

TEST(MakeInitial, ConstantDisplacement)
{
    const Grid g(10, 5);
    const auto s = make_initial(kRef, g, [](double) { return 1.0; }, [](double) { return 0.0; },
                                [](double) { return 0.0; }, 0.0, 0.0);
    EXPECT_TRUE((s.y.array() == 1.0).all());
    EXPECT_TRUE(s.z.isZero(0));
    EXPECT_TRUE(s.u.isZero(0));
    EXPECT_EQ(s.xi, 0.0);
    EXPECT_EQ(s.eta, 0.0);
}

TEST(MakeInitial, HistorySampling)
{
    const Grid g(10, 8);
    const auto s = make_initial(kRef, g, [](double) { return 0.0; }, [](double) { return 0.0; },
                                [](double) { return 2.5; }, 0.0, 0.0);
    EXPECT_TRUE((s.u.array() == 2.5).all());
    const auto r = make_initial(kRef, g, [](double) { return 0.0; }, [](double) { return 0.0; },
                                [](double th) { return th; }, 0.0, 0.0);
    for (int k = 0; k <= 8; ++k)
        EXPECT_DOUBLE_EQ(r.u(k), -kRef.gains.tau * k / 8.0);
}

TEST(MakeInitial, CompatibilityFlag)
{
    InitialData d;
    d.y1 = [](double) { return 0.3; };
    d.f = [](double) { return 0.3; };
    d.xi0 = d.eta0 = 0.3;
    EXPECT_TRUE(d.compatible());
    d.xi0 = 0.0;
    EXPECT_FALSE(d.compatible());
    EXPECT_TRUE(smooth_data().compatible());
}

TEST(Step, RequiresMatchedStep)
{
    const DiscreteOperator op(kRef, Grid(10, 5));
    EXPECT_THROW(CayleyStepper(op, 0.5 * op.matched_dt()), std::invalid_argument);
    EXPECT_NO_THROW(CayleyStepper(op, op.matched_dt()));
}

TEST(Step, KernelAndZero)
{
    const DiscreteOperator op(kRef, Grid(20, 10));
    const double dt = op.matched_dt();
    const auto c = step(op.constant(0.7), op, dt);
    EXPECT_LT((c.y.array() - 0.7).abs().maxCoeff(), 1e-14);
    EXPECT_LT(c.z.cwiseAbs().maxCoeff() + c.u.cwiseAbs().maxCoeff() + std::abs(c.xi) + std::abs(c.eta), 1e-14);
    const auto z = step(op.zeros(), op, dt);
    EXPECT_TRUE(z.stacked().isZero(0));
}

TEST(Step, GramNormContracts)
{
    const DiscreteOperator op(kRef, Grid(30, 12));
    const CayleyStepper st(op, op.matched_dt());
    std::mt19937_64 rng(21);
    for (int i = 0; i < 100; ++i) {
        const auto s = random_state(op, rng, true);
        const double before = op.gram_norm(s);
        EXPECT_LE(op.gram_norm(st.step(s)), before * (1.0 + 1e-12));
    }
}

TEST(Step, MatchesDenseCayleyOfFullGenerator)
{
    const DiscreteOperator op(kRef, Grid(16, 6));
    const double dt = op.matched_dt();
    const int n = op.size();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd C = (I - 0.5 * dt * op.A()).partialPivLu().solve(I + 0.5 * dt * op.A());
    const CayleyStepper st(op, dt);
    std::mt19937_64 rng(22);
    for (bool compatible : {true, false}) {
        for (int i = 0; i < 10; ++i) {
            const auto s = random_state(op, rng, compatible);
            const Eigen::VectorXd dense = C * s.stacked();
            const Eigen::VectorXd sparse = st.step(s).stacked();
            EXPECT_LT((dense - sparse).cwiseAbs().maxCoeff(), 1e-11 * (1.0 + dense.cwiseAbs().maxCoeff()));
        }
    }
}

TEST(Step, ExactEnergyIdentity)
{
    // E0(n+1) - E0(n) = dt [ -beta xi^2 + alpha xi u(1) + K/2 (xi^2 - u(1)^2) - nu sum c_j (dz_j)^2 ] at the midpoint
    const DiscreteOperator op(kRef, Grid(40, 20));
    const auto& k = kRef.gains;
    const double dt = op.matched_dt();
    const CayleyStepper st(op, dt);
    const EnergyEvaluator E(kRef, op.mesh());
    const auto& mesh = *op.mesh();
    const Eigen::VectorXd abar = mesh.cell_coefficients(kRef.coefficient);
    auto s = make_initial(op, smooth_data());
    for (int n = 0; n < 200; ++n) {
        const auto next = st.step(s);
        const Eigen::VectorXd zm = 0.5 * (s.z + next.z);
        const double xi = 0.5 * (s.xi + next.xi);
        const double u1 = 0.5 * (s.u(s.u.size() - 1) + next.u(next.u.size() - 1));
        double visc = 0.0;
        for (int j = 0; j < mesh.N(); ++j)
            visc += abar(j) / mesh.cell(j) * std::pow(zm(j + 1) - zm(j), 2);
        const double rate = -k.beta * xi * xi + k.alpha * xi * u1 + 0.5 * k.K * (xi * xi - u1 * u1) -
                            op.viscosity() * visc;
        const double e_before = E.e0(s), e_after = E.e0(next);
        EXPECT_NEAR(e_after - e_before, dt * rate, 1e-13 * e_before);
        s = next;
    }
}

TEST(Step, DelayIsExactShift)
{
    const DiscreteOperator op(kRef, Grid(30, 10));
    const auto tr = run(make_initial(op, smooth_data()), op, 3.0, op.matched_dt(), 1);
    ASSERT_EQ(tr.snapshots.size(), tr.size());
    const int Nd = 10;
    for (std::size_t n = Nd; n < tr.size(); ++n)
        for (int kk = 0; kk <= Nd; ++kk) {
            const double u = tr.snapshots[n].state.u(kk);
            const double xi = tr.xi[n - kk];
            EXPECT_NEAR(u, xi, 1e-14 * (1.0 + std::abs(xi))) << "n=" << n << " k=" << kk;
        }
}

TEST(Run, ZeroHorizon)
{
    const DiscreteOperator op(kRef, Grid(20, 10));
    const auto s0 = make_initial(op, smooth_data());
    const auto tr = run(s0, op, 0.0, op.matched_dt());
    EXPECT_EQ(tr.size(), 1u);
    ASSERT_EQ(tr.snapshots.size(), 1u);
    EXPECT_TRUE((tr.final_state().stacked() - s0.stacked()).isZero(0));
}

TEST(Run, EquilibriumIsStationary)
{
    const DiscreteOperator op(kRef, Grid(20, 10));
    const auto tr = run(op.constant(0.4), op, 5.0, op.matched_dt());
    EXPECT_NEAR(tr.omega, 0.4, 1e-14);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        EXPECT_LT(tr.dev_norm[i], 1e-13);
        EXPECT_NEAR(tr.Etot[i], tr.Etot[0], 1e-12);
        EXPECT_NEAR(tr.rho[i], tr.rho[0], 1e-12);
    }
}

TEST(Run, EnergyMonotoneAndFunctionalConserved)
{
    const DiscreteOperator op(kRef, Grid(60, 30));
    const auto tr = run(make_initial(op, smooth_data()), op, 20.0, op.matched_dt(), 100);
    EXPECT_TRUE(tr.compatible);
    EXPECT_EQ(tr.size(), 20.0 / op.matched_dt() + 1);
    for (std::size_t i = 1; i < tr.size(); ++i) {
        EXPECT_GT(tr.times[i], tr.times[i - 1]);
        EXPECT_LE(tr.Etot[i], tr.Etot[i - 1] + 1e-12 * tr.Etot[0]);
        EXPECT_LE(std::abs(tr.rho[i] - tr.rho[0]), 1e-10 * (1.0 + std::abs(tr.rho[0])));
    }
    EXPECT_LT(tr.Etot.back(), tr.Etot.front());
}

TEST(Run, IncompatibleDataFlagged)
{
    const DiscreteOperator op(kRef, Grid(20, 10));
    auto d = smooth_data();
    d.xi0 = 0.3;
    EXPECT_FALSE(d.compatible());
    const auto tr = run(make_initial(op, d), op, 1.0, op.matched_dt());
    EXPECT_FALSE(tr.compatible);
    // the mismatch is absorbed within one step
    EXPECT_TRUE(tr.final_state().in_domain(1e-10));
}

TEST(Run, ConvergenceUnderRefinement)
{
    // successive differences of the terminal state under N -> 2N, dt -> dt/2; the bump
    // is flat to third order at both ends so no compatibility layer is excited
    const double T = 2.0;
    InitialData d;
    d.y0 = [](double x) { return 25.6 * std::pow(x * (1.0 - x), 4); };
    std::vector<CraneState> finals;
    std::vector<int> Ns{25, 50, 100, 200};
    for (int N : Ns) {
        const DiscreteOperator op(kRef, Grid(N, N / 5 * 2));
        finals.push_back(run(make_initial(op, d), op, T, op.matched_dt(), 1000000).final_state());
    }
    std::vector<double> hs, diffs;
    for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
        const auto& c = finals[i];
        const auto& f = finals[i + 1];
        double d = std::abs(c.xi - f.xi) + std::abs(c.eta - f.eta);
        for (int j = 0; j <= Ns[i]; ++j)
            d = std::max({d, std::abs(c.y(j) - f.y(2 * j)), std::abs(c.z(j) - f.z(2 * j))});
        hs.push_back(1.0 / Ns[i]);
        diffs.push_back(d);
    }
    EXPECT_GE(crane::testing::loglog_slope(hs, diffs), 0.9) << diffs[0] << " " << diffs[1] << " " << diffs[2];
}

TEST(Export, ScalarCsvColumns)
{
    const DiscreteOperator op(kRef, Grid(10, 5));
    const auto tr = run(make_initial(op, smooth_data()), op, 0.5, op.matched_dt());
    std::ostringstream os;
    write_scalars_csv(os, tr, "# config_hash=abc");
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "# config_hash=abc");
    std::getline(is, line);
    EXPECT_EQ(line, "t,E0,E1,Etot,rho,ell,dev_norm,xi,u_at_1");
    int rows = 0;
    while (std::getline(is, line))
        ++rows;
    EXPECT_EQ(rows, static_cast<int>(tr.size()));

    std::ostringstream sn, dl;
    write_snapshot_csv(sn, tr.final_state());
    write_delay_csv(dl, tr.final_state());
    EXPECT_EQ(sn.str().substr(0, 6), "x,y,z\n");
    EXPECT_EQ(dl.str().substr(0, 4), "s,u\n");
}
