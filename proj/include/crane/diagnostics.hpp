#ifndef CRANE_DIAGNOSTICS_HPP
#define CRANE_DIAGNOSTICS_HPP

// Energies along trajectories, the equilibrium constant and decay-rate fits.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "crane/discretize.hpp"
#include "crane/evolve.hpp"
#include "crane/functionals.hpp"

namespace crane {

struct EnergyReport {
    double E0 = 0.0;
    double E1 = 0.0;
    double Etot = 0.0;
    double rho = 0.0;
    /// bound minus observed energy rate; absent for a lone state
    std::optional<double> decay_residual;
};

inline EnergyReport energy_report(const CraneState& s, const CraneModel& model)
{
    EnergyReport r;
    r.E0 = energy_e0(s, model);
    r.rho = rho(s, model);
    r.E1 = 0.5 * r.rho * r.rho;
    r.Etot = r.E0 + r.E1;
    return r;
}

/// Omega = rho(initial data) / (beta - alpha), with the quadrature of the given grid.
inline double equilibrium_omega(const InitialData& d, const CraneModel& model, const Grid& grid)
{
    const auto s = make_initial(model, grid, d.y0, d.y1, d.f, d.xi0, d.eta0);
    return conserved_functional(s, model) / model.mu();
}

/// Per step: dE/dt - 1/2 [ (-2 beta + |alpha| + K) xi^2 + (|alpha| - K) u(1)^2 ], with the
/// difference quotient over each step and xi, u(1) averaged over the step (the
/// values at which the midpoint rule evaluates the flux). Length size() - 1.
inline std::vector<double> decay_inequality_residual(const Trajectory& tr, const CraneModel& model)
{
    const auto& k = model.gains;
    const double a = std::abs(k.alpha);
    std::vector<double> out;
    if (tr.size() < 2)
        return out;
    out.reserve(tr.size() - 1);
    for (std::size_t i = 1; i < tr.size(); ++i) {
        const double dt = tr.times[i] - tr.times[i - 1];
        const double xi = 0.5 * (tr.xi[i] + tr.xi[i - 1]);
        const double u1 = 0.5 * (tr.u_at_1[i] + tr.u_at_1[i - 1]);
        const double bound = 0.5 * ((-2.0 * k.beta + a + k.K) * xi * xi + (a - k.K) * u1 * u1);
        out.push_back((tr.Etot[i] - tr.Etot[i - 1]) / dt - bound);
    }
    return out;
}

inline EnergyReport energy_report(const Trajectory& tr, const CraneModel& model, std::size_t index)
{
    if (index >= tr.size())
        throw std::out_of_range("energy report: index past trajectory end");
    EnergyReport r;
    r.E0 = tr.E0[index];
    r.E1 = tr.E1[index];
    r.Etot = tr.Etot[index];
    r.rho = tr.rho[index];
    if (index > 0) {
        const auto& k = model.gains;
        const double a = std::abs(k.alpha);
        const double dt = tr.times[index] - tr.times[index - 1];
        const double xi = 0.5 * (tr.xi[index] + tr.xi[index - 1]);
        const double u1 = 0.5 * (tr.u_at_1[index] + tr.u_at_1[index - 1]);
        const double bound = 0.5 * ((-2.0 * k.beta + a + k.K) * xi * xi + (a - k.K) * u1 * u1);
        r.decay_residual = bound - (tr.Etot[index] - tr.Etot[index - 1]) / dt;
    }
    return r;
}

class DecayFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DecayFitOptions {
    /// window as fractions of the final time
    double lo_fraction = 0.25;
    double hi_fraction = 1.0;
    int samples = 64;
};

struct DecayFit {
    double t_lo = 0.0;
    double t_hi = 0.0;
    int samples = 0;
    /// least-squares slope of log |Psi| against log t
    double slope = 0.0;
    double intercept = 0.0;
    /// sup over the window of sqrt(t) |Psi(t)| / |Psi(0)|_graph
    double C_hat = 0.0;
    double graph_norm0 = 0.0;
    double t_mid = 0.0;
    /// decay rates -d log|Psi| / dt fitted on [t_lo, t_mid] and [t_mid, t_hi]
    double rate_early = 0.0;
    double rate_late = 0.0;

    double rate_ratio() const { return rate_late / rate_early; }
    bool looks_exponential(double tol = 0.1) const { return std::abs(rate_ratio() - 1.0) <= tol; }
    bool rate_decreasing(double tol = 0.1) const { return rate_ratio() < 1.0 - tol; }
};

namespace detail {

inline double interp(const std::vector<double>& t, const std::vector<double>& v, double x)
{
    auto it = std::lower_bound(t.begin(), t.end(), x);
    if (it == t.begin())
        return v.front();
    if (it == t.end())
        return v.back();
    const auto i = static_cast<std::size_t>(it - t.begin());
    const double w = (x - t[i - 1]) / (t[i] - t[i - 1]);
    return (1.0 - w) * v[i - 1] + w * v[i];
}

/// slope and intercept of the least-squares line through (x_i, y_i)
inline std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

}  // namespace detail

/// Fits a deviation series |Psi(t)| given at increasing times.
inline DecayFit fit_decay_series(const std::vector<double>& times, const std::vector<double>& dev,
                                 double graph_norm0, double t_lo, double t_hi, int samples = 64)
{
    if (times.size() != dev.size() || times.size() < 2)
        throw std::invalid_argument("decay fit: series lengths differ or too short");
    if (samples < 20)
        throw std::invalid_argument("decay fit: need at least 20 samples");
    if (!(t_lo > 0.0) || !(t_hi >= 4.0 * t_lo * (1.0 - 1e-12)))
        throw std::invalid_argument("decay fit: window must satisfy 0 < t_lo and t_hi >= 4 t_lo");
    if (t_hi > times.back() * (1.0 + 1e-12) || t_lo < times.front())
        throw std::invalid_argument("decay fit: window outside the series");
    if (!(graph_norm0 > 0.0))
        throw std::invalid_argument("decay fit: initial graph norm must be positive");

    const double floor = 1e2 * std::numeric_limits<double>::epsilon() * std::max(dev.front(), graph_norm0);
    DecayFit fit;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.samples = samples;
    fit.graph_norm0 = graph_norm0;

    std::vector<double> lt(samples), ld(samples), tt(samples);
    const double r = std::log(t_hi / t_lo);
    for (int i = 0; i < samples; ++i) {
        tt[i] = t_lo * std::exp(r * i / (samples - 1));
        const double v = detail::interp(times, dev, tt[i]);
        if (!(v > floor))
            throw DecayFitError("decay fit refused: deviation at noise floor");
        lt[i] = std::log(tt[i]);
        ld[i] = std::log(v);
    }
    std::tie(fit.slope, fit.intercept) = detail::line_fit(lt, ld);

    double sup = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] >= t_lo * (1.0 - 1e-12) && times[i] <= t_hi * (1.0 + 1e-12))
            sup = std::max(sup, std::sqrt(times[i]) * dev[i]);
    fit.C_hat = sup / graph_norm0;

    fit.t_mid = std::sqrt(t_lo * t_hi);
    std::vector<double> xe, ye, xl, yl;
    for (int i = 0; i < samples; ++i) {
        if (tt[i] <= fit.t_mid * (1.0 + 1e-12)) {
            xe.push_back(tt[i]);
            ye.push_back(ld[i]);
        }
        if (tt[i] >= fit.t_mid * (1.0 - 1e-12)) {
            xl.push_back(tt[i]);
            yl.push_back(ld[i]);
        }
    }
    fit.rate_early = -detail::line_fit(xe, ye).first;
    fit.rate_late = -detail::line_fit(xl, yl).first;
    return fit;
}

/// |Psi0|_G + |A Psi0|_G for Psi0 = Phi(0) - (Omega, 0, 0, 0, 0).
inline double graph_norm(const CraneState& psi, const DiscreteOperator& op)
{
    const CraneState apsi = CraneState::from_stacked(op.mesh(), op.grid().Nd, op.apply(psi.stacked()));
    return op.gram_norm(psi) + op.gram_norm(apsi);
}

/// Deviation Psi(t) = Phi(t) - (omega, 0, 0, 0, 0) measured in the Gram norm.
inline DecayFit fit_decay(const Trajectory& tr, const DiscreteOperator& op, double omega,
                          const DecayFitOptions& opt = {})
{
    if (tr.size() < 2 || tr.snapshots.empty())
        throw std::invalid_argument("decay fit: empty trajectory");
    const auto& model = op.model();
    std::vector<double> dev = tr.dev_norm;
    if (omega != tr.omega) {
        const double w = model.weights.varpi;
        for (std::size_t i = 0; i < dev.size(); ++i) {
            const double l = tr.rho[i] - model.mu() * omega;
            dev[i] = std::sqrt(std::max(0.0, dev[i] * dev[i] - w * tr.ell[i] * tr.ell[i] + w * l * l));
        }
    }
    CraneState psi0 = tr.initial();
    psi0.y.array() -= omega;
    const double T = tr.times.back();
    return fit_decay_series(tr.times, dev, graph_norm(psi0, op), opt.lo_fraction * T, opt.hi_fraction * T,
                            opt.samples);
}

inline nlohmann::json to_json(const EnergyReport& r)
{
    nlohmann::json j{{"E0", r.E0}, {"E1", r.E1}, {"Etot", r.Etot}, {"rho", r.rho}};
    j["decay_residual"] = r.decay_residual ? nlohmann::json(*r.decay_residual) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const DecayFit& f)
{
    return {{"window", {f.t_lo, f.t_hi}},
            {"samples", f.samples},
            {"slope", f.slope},
            {"C_hat", f.C_hat},
            {"graph_norm0", f.graph_norm0},
            {"exponential_test",
             {{"t_mid", f.t_mid},
              {"rate_early", f.rate_early},
              {"rate_late", f.rate_late},
              {"rate_ratio", f.rate_ratio()},
              {"looks_exponential", f.looks_exponential()},
              {"rate_decreasing", f.rate_decreasing()}}}};
}

}  // namespace crane

#endif
