#ifndef CRANE_FUNCTIONALS_HPP
#define CRANE_FUNCTIONALS_HPP

// Pointwise energy functionals of a state.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "crane/discretize.hpp"
#include "crane/model.hpp"

namespace crane {

/// Caches the cell coefficients of one mesh so per-step evaluation stays O(N).
class EnergyEvaluator {
public:
    EnergyEvaluator(const CraneModel& model, std::shared_ptr<const CableMesh> mesh)
        : model_(model), mesh_(std::move(mesh))
    {
        if (!mesh_)
            throw std::invalid_argument("energy evaluator needs a cable mesh");
        abar_ = mesh_->cell_coefficients(model_.coefficient);
    }

    /// 1/2 [ int (z^2 + a y_x^2) + m xi^2 + M eta^2 + K tau int u^2 ]
    double e0(const CraneState& s) const
    {
        check(s);
        const auto& k = model_.gains;
        const auto& p = model_.physical;
        const double v = mesh_->stiffness_product(abar_, s.y, s.y) + mesh_->trapz_product(s.z, s.z) +
                         p.m * s.xi * s.xi + p.M * s.eta * s.eta + k.K * k.tau * quad::cell_product(s.u, s.u);
        return 0.5 * v;
    }

    double rho(const CraneState& s) const
    {
        check(s);
        return conserved_functional(s, model_);
    }

    double e1(const CraneState& s) const
    {
        const double r = rho(s);
        return 0.5 * r * r;
    }

    const CraneModel& model() const { return model_; }

private:
    void check(const CraneState& s) const
    {
        if (s.y.size() != mesh_->x.size() || s.z.size() != mesh_->x.size())
            throw std::invalid_argument("state does not match the energy mesh");
    }

    CraneModel model_;
    std::shared_ptr<const CableMesh> mesh_;
    Eigen::VectorXd abar_;
};

inline double energy_e0(const CraneState& s, const CraneModel& model)
{
    return EnergyEvaluator(model, s.mesh).e0(s);
}

inline double rho(const CraneState& s, const CraneModel& model) { return conserved_functional(s, model); }

inline double energy_e1(const CraneState& s, const CraneModel& model)
{
    const double r = rho(s, model);
    return 0.5 * r * r;
}

inline double total_energy(const CraneState& s, const CraneModel& model)
{
    return energy_e0(s, model) + energy_e1(s, model);
}

}  // namespace crane

#endif
