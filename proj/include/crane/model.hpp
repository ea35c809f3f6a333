#ifndef CRANE_MODEL_HPP
#define CRANE_MODEL_HPP

// Physical and control parameterization of the delayed overhead crane:
//
//   y_tt - (a y_x)_x = 0                                  0 < x < 1
//   m y_tt(0) - (a y_x)(0) = -beta y_t(0,t) + alpha y_t(0,t-tau)
//   M y_tt(1) + (a y_x)(1) = 0
//
// together with the weights of the energy inner product.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crane {

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cable tension coefficient a(x) on [0,1].
class CableCoefficient {
public:
    enum class Kind { physical, affine, tabulated };

    static constexpr int kSampleCount = 2001;

    /// a(x) = (M + 1 - x) g. Bounded below, but decreasing.
    static CableCoefficient physical(double load_mass, double gravity)
    {
        if (!(load_mass > 0.0) || !(gravity > 0.0))
            throw ModelError("physical coefficient needs M > 0 and g > 0");
        CableCoefficient c(Kind::physical, {load_mass, gravity});
        c.finalize();
        return c;
    }

    /// a(x) = a0 + a1 x with a0, a1 > 0.
    static CableCoefficient affine(double a0, double a1)
    {
        if (!(a0 > 0.0))
            throw ModelError("affine coefficient needs a0 > 0");
        if (!(a1 > 0.0))
            throw ModelError("affine coefficient needs a1 > 0 (strictly increasing cable tension)");
        CableCoefficient c(Kind::affine, {a0, a1});
        c.finalize();
        return c;
    }

    /// Piecewise-linear interpolant through (node, value) pairs covering [0,1].
    /// With `monotone`, the slopes between nodes must be positive.
    static CableCoefficient tabulated(std::vector<std::pair<double, double>> samples, bool monotone)
    {
        if (samples.size() < 2)
            throw ModelError("tabulated coefficient needs at least two nodes");
        std::sort(samples.begin(), samples.end());
        if (std::abs(samples.front().first) > 1e-14 || std::abs(samples.back().first - 1.0) > 1e-14)
            throw ModelError("tabulated coefficient nodes must span [0,1]");
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (!(samples[i].first > samples[i - 1].first))
                throw ModelError("tabulated coefficient nodes must be distinct");
        for (const auto& s : samples)
            if (!(s.second > 0.0))
                throw ModelError("tabulated coefficient values must be positive");
        CableCoefficient c(Kind::tabulated, {});
        c.samples_ = std::move(samples);
        c.monotone_ = monotone;
        c.finalize();
        if (monotone && !(c.a1_ > 0.0))
            throw ModelError("tabulated coefficient flagged monotone but slopes are not positive");
        return c;
    }

    double operator()(double x) const
    {
        switch (kind_) {
        case Kind::physical:
            return (params_[0] + 1.0 - x) * params_[1];
        case Kind::affine:
            return params_[0] + params_[1] * x;
        case Kind::tabulated: {
            if (x <= samples_.front().first)
                return samples_.front().second;
            if (x >= samples_.back().first)
                return samples_.back().second;
            auto it = std::upper_bound(samples_.begin(), samples_.end(), x,
                                       [](double v, const auto& s) { return v < s.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double w = (x - lo.first) / (hi.first - lo.first);
            return (1.0 - w) * lo.second + w * hi.second;
        }
        }
        return 0.0;
    }

    Kind kind() const { return kind_; }
    const std::vector<double>& params() const { return params_; }
    const std::vector<std::pair<double, double>>& samples() const { return samples_; }
    bool monotone() const { return monotone_; }

    /// min a over the dense sample grid
    double lower_bound() const { return a0_; }
    /// min a' (finite differences on the sample grid, or on the nodes for tabulated data)
    double min_slope() const { return a1_; }
    double sup() const { return amax_; }

    /// Whether the increasing-tension hypothesis of the polynomial decay result holds.
    bool satisfies_133() const { return a0_ > 0.0 && a1_ > 0.0; }

    std::string describe() const
    {
        std::ostringstream os;
        os.precision(17);
        switch (kind_) {
        case Kind::physical:
            os << "physical(M=" << params_[0] << ",g=" << params_[1] << ")";
            break;
        case Kind::affine:
            os << "affine(a0=" << params_[0] << ",a1=" << params_[1] << ")";
            break;
        case Kind::tabulated:
            os << "tabulated(" << samples_.size() << " nodes" << (monotone_ ? ",monotone" : "") << ")";
            break;
        }
        return os.str();
    }

private:
    CableCoefficient(Kind k, std::vector<double> p) : kind_(k), params_(std::move(p)) {}

    void finalize()
    {
        a0_ = std::numeric_limits<double>::infinity();
        amax_ = -a0_;
        const int n = kSampleCount - 1;
        for (int i = 0; i <= n; ++i) {
            const double v = (*this)(static_cast<double>(i) / n);
            a0_ = std::min(a0_, v);
            amax_ = std::max(amax_, v);
        }
        if (kind_ == Kind::tabulated) {
            a1_ = std::numeric_limits<double>::infinity();
            for (std::size_t i = 1; i < samples_.size(); ++i)
                a1_ = std::min(a1_, (samples_[i].second - samples_[i - 1].second) /
                                        (samples_[i].first - samples_[i - 1].first));
        } else {
            a1_ = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                const double x0 = static_cast<double>(i) / n;
                const double x1 = static_cast<double>(i + 1) / n;
                a1_ = std::min(a1_, ((*this)(x1) - (*this)(x0)) * n);
            }
        }
    }

    Kind kind_;
    std::vector<double> params_;
    std::vector<std::pair<double, double>> samples_;
    bool monotone_ = false;
    double a0_ = 0.0;
    double a1_ = 0.0;
    double amax_ = 0.0;
};

struct PhysicalParams {
    double m = 1.0;   // platform mass
    double M = 1.0;   // load mass
    double g = 9.81;  // gravity
    double length = 1.0;
};

struct ControlGains {
    double alpha = 1.0;  // delayed velocity gain
    double beta = 2.0;   // instantaneous damping gain
    double tau = 0.5;    // input delay
    double K = 2.0;      // weight of the delay energy

    double mu() const { return beta - alpha; }
};

/// Constants of the conserved functional rho. Pure functions of (m, M, tau, alpha, beta).
struct FixedConstants {
    double c1, c2, c3, c4, c;

    static FixedConstants from(const PhysicalParams& p, const ControlGains& k)
    {
        return {p.m, p.M, k.tau * k.alpha, k.beta - k.alpha, 1.0};
    }
};

/// Weights entering the energy inner product. delta and the varpi bound follow from kappa, epsilon.
struct InnerProductWeights {
    double kappa = 0.0;
    double epsilon = 0.0;
    double delta = 0.0;
    double varpi = 0.0;

    /// Supremum of admissible varpi for the given kappa, epsilon.
    static double varpi_supremum(const PhysicalParams& p, const ControlGains& k, double a0,
                                 double kappa, double epsilon)
    {
        const double mu = k.mu();
        const double delta = kappa / (4.0 * (mu - kappa));
        double bound = std::min({epsilon * a0 / (mu * (mu - kappa)), delta, delta / p.m, delta / p.M});
        if (k.alpha != 0.0)
            bound = std::min(bound, k.K * delta / (k.tau * k.alpha * k.alpha));
        return bound;
    }

    /// kappa = mu/2, epsilon = 1/2, varpi = half the admissible supremum.
    static InnerProductWeights defaults(const PhysicalParams& p, const ControlGains& k, double a0)
    {
        InnerProductWeights w;
        w.kappa = 0.5 * k.mu();
        w.epsilon = 0.5;
        w.delta = w.kappa / (4.0 * (k.mu() - w.kappa));
        w.varpi = 0.5 * varpi_supremum(p, k, a0, w.kappa, w.epsilon);
        return w;
    }
};

struct CraneModel {
    PhysicalParams physical;
    ControlGains gains;
    CableCoefficient coefficient = CableCoefficient::affine(1.0, 1.0);
    InnerProductWeights weights;

    double mu() const { return gains.mu(); }
    FixedConstants constants() const { return FixedConstants::from(physical, gains); }

    /// Builds a model with the default inner-product weights.
    static CraneModel make(PhysicalParams p, ControlGains k, CableCoefficient a)
    {
        CraneModel model{p, k, std::move(a), {}};
        if (k.mu() > 0.0)
            model.weights = InnerProductWeights::defaults(p, k, model.coefficient.lower_bound());
        return model;
    }

    /// Reference configuration: alpha=1, beta=2, K=2, tau=0.5, m=M=1, a(x)=1+x.
    static CraneModel reference()
    {
        return make(PhysicalParams{}, ControlGains{}, CableCoefficient::affine(1.0, 1.0));
    }
};

struct Constraint {
    std::string name;
    std::string expression;
    bool passed;
    double margin;  // positive when satisfied
    bool strict;    // part of the strict admissibility set
};

struct ValidationReport {
    std::vector<Constraint> constraints;

    /// All strict constraints hold: the model can be assembled in strict mode.
    bool passes_strict() const
    {
        return std::all_of(constraints.begin(), constraints.end(),
                           [](const Constraint& c) { return !c.strict || c.passed; });
    }

    /// Strict constraints plus increasing tension: polynomial decay experiments are meaningful.
    bool supports_decay() const { return passes_strict() && find("increasing_tension").passed; }

    const Constraint& find(const std::string& name) const
    {
        for (const auto& c : constraints)
            if (c.name == name)
                return c;
        throw std::out_of_range("no constraint named " + name);
    }

    std::vector<std::string> failures(bool strict_only = true) const
    {
        std::vector<std::string> out;
        for (const auto& c : constraints)
            if (!c.passed && (c.strict || !strict_only))
                out.push_back(c.name);
        return out;
    }
};

inline ValidationReport validate_model(const CraneModel& model)
{
    const auto& p = model.physical;
    const auto& k = model.gains;
    const auto& w = model.weights;
    const double abs_alpha = std::abs(k.alpha);
    const double mu = k.mu();
    ValidationReport r;
    auto add = [&r](std::string name, std::string expr, double margin, bool strict, bool allow_zero = false) {
        const bool ok = allow_zero ? margin >= 0.0 : margin > 0.0;
        r.constraints.push_back({std::move(name), std::move(expr), ok, margin, strict});
    };

    add("platform_mass", "m > 0", p.m, true);
    add("load_mass", "M > 0", p.M, true);
    add("gravity", "g > 0", p.g, true);
    add("cable_length", "length == 1", 0.0 - std::abs(p.length - 1.0), true, true);
    add("delay", "tau > 0", k.tau, true);
    add("damping_gain", "beta > 0", k.beta, true);
    add("tension_lower_bound", "a(x) >= a0 > 0", model.coefficient.lower_bound(), true);
    add("delay_gain_bound", "|alpha| < beta", k.beta - abs_alpha, true);
    add("energy_weight_lower", "|alpha| < K", k.K - abs_alpha, true);
    add("energy_weight_upper", "K < 2 beta - |alpha|", 2.0 * k.beta - abs_alpha - k.K, true);
    add("energy_weight_lower_nonstrict", "|alpha| <= K", k.K - abs_alpha, false, true);
    add("energy_weight_upper_nonstrict", "K <= 2 beta - |alpha|", 2.0 * k.beta - abs_alpha - k.K, false, true);
    add("increasing_tension", "a'(x) >= a1 > 0", model.coefficient.min_slope(), false);

    add("kappa_range", "0 < kappa < mu", std::min(w.kappa, mu - w.kappa), true);
    add("epsilon_range", "0 < epsilon < 1", std::min(w.epsilon, 1.0 - w.epsilon), true);
    double sup = 0.0;
    if (mu > 0.0 && w.kappa > 0.0 && w.kappa < mu && w.epsilon > 0.0)
        sup = InnerProductWeights::varpi_supremum(p, k, model.coefficient.lower_bound(), w.kappa, w.epsilon);
    add("varpi_positive", "varpi > 0", w.varpi, true);
    add("varpi_bound", "varpi < min{eps a0/(mu(mu-kappa)), delta, delta/m, delta/M, K delta/(tau alpha^2)}",
        sup - w.varpi, true);
    return r;
}

/// Throws ModelError listing the violated strict constraints.
inline void require_strict(const CraneModel& model)
{
    const auto report = validate_model(model);
    if (report.passes_strict())
        return;
    std::string msg = "model rejected:";
    for (const auto& c : report.constraints)
        if (c.strict && !c.passed)
            msg += " " + c.name + " (" + c.expression + ")";
    throw ModelError(msg);
}

}  // namespace crane

#endif
