#ifndef CRANE_EVOLVE_HPP
#define CRANE_EVOLVE_HPP

// Time integration by the Cayley (implicit midpoint) map at the matched step
// dt = tau / Nd, under which the delay block is an exact shift.

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "crane/discretize.hpp"
#include "crane/functionals.hpp"

namespace crane {

using Profile = std::function<double(double)>;

struct InitialData {
    Profile y0 = [](double) { return 0.0; };
    Profile y1 = [](double) { return 0.0; };
    /// history on [-tau, 0]
    Profile f = [](double) { return 0.0; };
    double xi0 = 0.0;
    double eta0 = 0.0;

    /// xi0 = f(0) = y1(0) and eta0 = y1(1)
    bool compatible(double tol = 1e-12) const
    {
        const double s = 1.0 + std::abs(xi0) + std::abs(eta0);
        return std::abs(xi0 - f(0.0)) <= tol * s && std::abs(xi0 - y1(0.0)) <= tol * s &&
               std::abs(eta0 - y1(1.0)) <= tol * s;
    }
};

inline CraneState sample_initial(std::shared_ptr<const CableMesh> mesh, int Nd, double tau, const InitialData& d)
{
    auto s = CraneState::zeros(std::move(mesh), Nd);
    const auto& x = s.mesh->x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        s.y(j) = d.y0(x(j));
        s.z(j) = d.y1(x(j));
    }
    for (int k = 0; k <= Nd; ++k)
        s.u(k) = d.f(-tau * k / Nd);
    s.xi = d.xi0;
    s.eta = d.eta0;
    return s;
}

inline CraneState make_initial(const CraneModel& model, const Grid& grid, const Profile& y0, const Profile& y1,
                               const Profile& f, double xi0, double eta0)
{
    grid.check();
    auto mesh = std::make_shared<const CableMesh>(CableMesh::make(model.coefficient, grid));
    return sample_initial(std::move(mesh), grid.Nd, model.gains.tau, InitialData{y0, y1, f, xi0, eta0});
}

inline CraneState make_initial(const DiscreteOperator& op, const InitialData& d)
{
    return sample_initial(op.mesh(), op.grid().Nd, op.model().gains.tau, d);
}

/// Cayley map on the reduced pencil, (M - dt K/2) r+ = (M + dt K/2) r, factored once.
/// Incompatible components of a stacked state relax at rate 2 Nd / tau, which the
/// matched step maps to zero, so a full-space step is E * step(R s).
class CayleyStepper {
public:
    CayleyStepper(const DiscreteOperator& op, double dt) : op_(&op), dt_(dt)
    {
        const double matched = op.matched_dt();
        if (!(std::abs(dt - matched) <= 1e-12 * matched))
            throw std::invalid_argument("time step must equal tau / Nd = " + std::to_string(matched));
        const Eigen::SparseMatrix<double> lhs = op.mass() - 0.5 * dt * op.stiffness();
        rhs_ = op.mass() + 0.5 * dt * op.stiffness();
        lu_.analyzePattern(lhs);
        lu_.factorize(lhs);
        if (lu_.info() != Eigen::Success)
            throw std::runtime_error("Cayley step: factorization failed");
    }

    double dt() const { return dt_; }

    Eigen::VectorXd step_reduced(const Eigen::Ref<const Eigen::VectorXd>& r) const
    {
        Eigen::VectorXd out = lu_.solve(rhs_ * r);
        if (lu_.info() != Eigen::Success)
            throw std::runtime_error("Cayley step: solve failed");
        return out;
    }

    CraneState step(const CraneState& s) const
    {
        if (!s.same_grid(op_->grid()))
            throw std::invalid_argument("step: state does not match operator grid");
        return op_->state_from_reduced(step_reduced(op_->reduce(s.stacked())));
    }

private:
    const DiscreteOperator* op_;
    double dt_;
    Eigen::SparseMatrix<double> rhs_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

inline CraneState step(const CraneState& s, const DiscreteOperator& op, double dt)
{
    return CayleyStepper(op, dt).step(s);
}

struct Snapshot {
    double t = 0.0;
    CraneState state;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> E0, E1, Etot, rho, ell, dev_norm, xi, u_at_1;
    std::vector<Snapshot> snapshots;
    double omega = 0.0;
    double dt = 0.0;
    int snapshot_stride = 50;
    bool compatible = true;

    std::size_t size() const { return times.size(); }
    const CraneState& initial() const { return snapshots.front().state; }
    const CraneState& final_state() const { return snapshots.back().state; }
};

/// Records the scalar diagnostics of one state.
class TrajectoryRecorder {
public:
    TrajectoryRecorder(const DiscreteOperator& op, double omega)
        : op_(&op), energy_(op.model(), op.mesh()), omega_(omega)
    {
    }

    void record(Trajectory& tr, double t, const CraneState& s) const
    {
        const auto& model = op_->model();
        const double e0 = energy_.e0(s);
        const double r = energy_.rho(s);
        const double l = r - model.mu() * omega_;
        const double gap = s.u(0) - s.xi;
        const double dev2 = 2.0 * e0 + op_->penalty_weight() * gap * gap + model.weights.varpi * l * l;
        tr.times.push_back(t);
        tr.E0.push_back(e0);
        tr.E1.push_back(0.5 * r * r);
        tr.Etot.push_back(e0 + 0.5 * r * r);
        tr.rho.push_back(r);
        tr.ell.push_back(l);
        tr.dev_norm.push_back(std::sqrt(std::max(0.0, dev2)));
        tr.xi.push_back(s.xi);
        tr.u_at_1.push_back(s.u(s.u.size() - 1));
    }

private:
    const DiscreteOperator* op_;
    EnergyEvaluator energy_;
    double omega_;
};

/// Integrates over [0, T] with scalars every step and states every `stride` steps
/// (plus the initial and final state).
inline Trajectory run(const CraneState& initial, const DiscreteOperator& op, double T, double dt, int stride = 50)
{
    if (!(T >= 0.0) || !std::isfinite(T))
        throw std::invalid_argument("run: T must be finite and >= 0");
    if (stride < 1)
        throw std::invalid_argument("run: snapshot stride must be >= 1");
    if (!initial.same_grid(op.grid()))
        throw std::invalid_argument("run: initial state does not match operator grid");
    const CayleyStepper stepper(op, dt);
    const double ratio = T / dt;
    const long steps = std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio)
                           ? std::lround(ratio)
                           : static_cast<long>(std::ceil(ratio));

    Trajectory tr;
    tr.dt = dt;
    tr.snapshot_stride = stride;
    tr.compatible = initial.in_domain();
    tr.omega = conserved_functional(initial, op.model()) / op.model().mu();
    const TrajectoryRecorder rec(op, tr.omega);
    for (auto* v : {&tr.times, &tr.E0, &tr.E1, &tr.Etot, &tr.rho, &tr.ell, &tr.dev_norm, &tr.xi, &tr.u_at_1})
        v->reserve(steps + 1);

    rec.record(tr, 0.0, initial);
    tr.snapshots.push_back({0.0, initial});
    if (steps == 0)
        return tr;

    Eigen::VectorXd r = op.reduce(initial.stacked());
    for (long n = 1; n <= steps; ++n) {
        r = stepper.step_reduced(r);
        const double t = n * dt;
        const CraneState s = op.state_from_reduced(r);
        rec.record(tr, t, s);
        if (n % stride == 0 || n == steps)
            tr.snapshots.push_back({t, s});
    }
    return tr;
}

inline void write_scalars_csv(std::ostream& os, const Trajectory& tr, const std::string& preamble = {})
{
    const auto old = os.precision(17);
    if (!preamble.empty())
        os << preamble << '\n';
    os << "t,E0,E1,Etot,rho,ell,dev_norm,xi,u_at_1\n";
    for (std::size_t i = 0; i < tr.size(); ++i)
        os << tr.times[i] << ',' << tr.E0[i] << ',' << tr.E1[i] << ',' << tr.Etot[i] << ',' << tr.rho[i] << ','
           << tr.ell[i] << ',' << tr.dev_norm[i] << ',' << tr.xi[i] << ',' << tr.u_at_1[i] << '\n';
    os.precision(old);
}

/// Cable part of a snapshot: x,y,z.
inline void write_snapshot_csv(std::ostream& os, const CraneState& s, const std::string& preamble = {})
{
    const auto old = os.precision(17);
    if (!preamble.empty())
        os << preamble << '\n';
    os << "x,y,z\n";
    const auto& x = mesh_of(s).x;
    for (Eigen::Index j = 0; j < x.size(); ++j)
        os << x(j) << ',' << s.y(j) << ',' << s.z(j) << '\n';
    os.precision(old);
}

/// Delay part of a snapshot: s,u.
inline void write_delay_csv(std::ostream& os, const CraneState& s, const std::string& preamble = {})
{
    const auto old = os.precision(17);
    if (!preamble.empty())
        os << preamble << '\n';
    os << "s,u\n";
    const auto Nd = s.u.size() - 1;
    for (Eigen::Index k = 0; k <= Nd; ++k)
        os << static_cast<double>(k) / static_cast<double>(Nd) << ',' << s.u(k) << '\n';
    os.precision(old);
}

}  // namespace crane

#endif
