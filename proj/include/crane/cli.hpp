#ifndef CRANE_CLI_HPP
#define CRANE_CLI_HPP

// Scenario commands behind the crane_lab tool. Each returns the process exit
// code: 0 success, 1 failed check or rejected model, 2 unusable input.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "crane/config.hpp"
#include "crane/diagnostics.hpp"
#include "crane/discretize.hpp"
#include "crane/evolve.hpp"
#include "crane/model.hpp"
#include "crane/spectral.hpp"

namespace crane::cli {

namespace fs = std::filesystem;

struct RunContext {
    ScenarioConfig config;
    fs::path out;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::ostream* log = &std::cout;

    std::string preamble() const { return "# config_hash=" + config.hash_hex() + " seed=" + std::to_string(seed); }

    nlohmann::json provenance() const
    {
        auto j = to_json(config);
        j["seed"] = seed;
        return j;
    }
};

namespace detail {

inline std::ofstream open_out(const fs::path& p)
{
    fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os)
        throw std::runtime_error("cannot write " + p.string());
    return os;
}

inline void write_json(const fs::path& p, const nlohmann::json& j)
{
    auto os = open_out(p);
    os << std::setw(2) << j << '\n';
}

inline std::string fmt(double v, int prec = 6)
{
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

}  // namespace detail

inline nlohmann::json to_json(const ValidationReport& r)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : r.constraints)
        arr.push_back({{"name", c.name},
                       {"expression", c.expression},
                       {"passed", c.passed},
                       {"margin", c.margin},
                       {"strict", c.strict}});
    return {{"constraints", arr}, {"passes_strict", r.passes_strict()}, {"supports_decay", r.supports_decay()}};
}

inline int cmd_validate(const RunContext& ctx)
{
    auto& log = *ctx.log;
    const auto rep = validate_model(ctx.config.model);
    for (const auto& c : rep.constraints)
        log << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(32) << c.name << std::setw(34) << c.expression
            << " margin=" << detail::fmt(c.margin) << (c.strict ? "" : "  (report only)") << '\n';
    for (const auto& name : rep.failures())
        log << name << " (" << rep.find(name).expression << ") violated\n";
    if (rep.passes_strict() && !rep.find("increasing_tension").passed)
        log << "note: a'(x) >= a1 > 0 fails; the polynomial decay estimate does not cover this coefficient\n";
    if (!ctx.out.empty()) {
        auto j = to_json(rep);
        j["provenance"] = ctx.provenance();
        detail::write_json(ctx.out / "validation.json", j);
    }
    log << (rep.passes_strict() ? "valid" : "invalid") << '\n';
    return rep.passes_strict() ? 0 : 1;
}

struct SimulationSummary {
    Trajectory trajectory;
    double omega_predicted = 0.0;
    double initial_dev = 0.0;
    double terminal_dev = 0.0;
    double max_abs_y_minus_omega = 0.0;
    double rho_drift = 0.0;
    double max_energy_increase = 0.0;
    double max_decay_residual = 0.0;
};

inline SimulationSummary simulate(const ScenarioConfig& cfg, const DiscreteOperator& op, double T)
{
    SimulationSummary s;
    const InitialData data = cfg.initial_data();
    const CraneState s0 = make_initial(op, data);
    s.omega_predicted = equilibrium_omega(data, cfg.model, cfg.grid);
    s.trajectory = run(s0, op, T, op.matched_dt(), cfg.snapshot_stride);
    const auto& tr = s.trajectory;
    s.initial_dev = tr.dev_norm.front();
    s.terminal_dev = tr.dev_norm.back();
    const auto& fin = tr.final_state();
    s.max_abs_y_minus_omega = (fin.y.array() - s.omega_predicted).abs().maxCoeff();
    for (std::size_t i = 1; i < tr.size(); ++i) {
        s.rho_drift = std::max(s.rho_drift, std::abs(tr.rho[i] - tr.rho[0]));
        s.max_energy_increase = std::max(s.max_energy_increase, (tr.Etot[i] - tr.Etot[i - 1]) / tr.Etot[0]);
    }
    const auto res = decay_inequality_residual(tr, cfg.model);
    s.max_decay_residual = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
    return s;
}

inline nlohmann::json to_json(const SimulationSummary& s, const CraneModel& model)
{
    const auto& tr = s.trajectory;
    return {{"T", tr.times.back()},
            {"dt", tr.dt},
            {"steps", tr.size() - 1},
            {"compatible_initial_data", tr.compatible},
            {"omega_predicted", s.omega_predicted},
            {"omega_trajectory", tr.omega},
            {"initial_deviation", s.initial_dev},
            {"terminal_deviation", s.terminal_dev},
            {"terminal_ratio", s.initial_dev > 0 ? s.terminal_dev / s.initial_dev : 0.0},
            {"max_abs_y_minus_omega", s.max_abs_y_minus_omega},
            {"rho_drift", s.rho_drift},
            {"max_relative_energy_increase", s.max_energy_increase},
            {"max_decay_inequality_residual", s.max_decay_residual},
            {"energy_initial", to_json(energy_report(tr, model, 0))},
            {"energy_final", to_json(energy_report(tr, model, tr.size() - 1))}};
}

inline void write_trajectory(const RunContext& ctx, const Trajectory& tr)
{
    {
        auto os = detail::open_out(ctx.out / "trajectory.csv");
        write_scalars_csv(os, tr, ctx.preamble());
    }
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        const auto& snap = tr.snapshots[i];
        std::ostringstream name;
        name << std::setw(6) << std::setfill('0') << i;
        const std::string pre = ctx.preamble() + " t=" + detail::fmt(snap.t, 17) +
                                " xi=" + detail::fmt(snap.state.xi, 17) + " eta=" + detail::fmt(snap.state.eta, 17);
        auto cable = detail::open_out(ctx.out / "snapshots" / ("cable_" + name.str() + ".csv"));
        write_snapshot_csv(cable, snap.state, pre);
        auto delay = detail::open_out(ctx.out / "snapshots" / ("delay_" + name.str() + ".csv"));
        write_delay_csv(delay, snap.state, pre);
    }
}

inline int cmd_simulate(const RunContext& ctx)
{
    const auto& cfg = ctx.config;
    auto& log = *ctx.log;
    const DiscreteOperator op(cfg.model, cfg.grid);
    const auto sum = simulate(cfg, op, cfg.T);
    if (!sum.trajectory.compatible)
        log << "warning: initial data incompatible (xi0, f(0), y1(0) or eta0, y1(1) disagree); mild solution only\n";
    write_trajectory(ctx, sum.trajectory);
    auto j = to_json(sum, cfg.model);
    j["provenance"] = ctx.provenance();
    detail::write_json(ctx.out / "summary.json", j);
    log << "omega " << detail::fmt(sum.omega_predicted, 10) << "\n"
        << "terminal deviation " << detail::fmt(sum.terminal_dev) << " (" << detail::fmt(100.0 * j["terminal_ratio"].get<double>(), 4)
        << "% of initial)\n"
        << "max |y(T) - omega| " << detail::fmt(sum.max_abs_y_minus_omega) << "\n"
        << "rho drift " << detail::fmt(sum.rho_drift) << "\n"
        << "max relative energy increase " << detail::fmt(sum.max_energy_increase) << "\n";
    return 0;
}

inline int cmd_spectrum(const RunContext& ctx)
{
    const auto& cfg = ctx.config;
    auto& log = *ctx.log;
    const DiscreteOperator op(cfg.model, cfg.grid);
    const auto full = eigenvalues(op, false);
    const auto dot = eigenvalues(op, true);
    const double cutoff = resolution_cutoff(cfg.model, cfg.grid);
    const auto dis = dissipativity_check(op, cfg.analysis.dissipativity_samples, ctx.seed);
    {
        auto os = detail::open_out(ctx.out / "spectrum_full.csv");
        write_spectrum_csv(os, full, ctx.preamble());
    }
    {
        auto os = detail::open_out(ctx.out / "spectrum_dot.csv");
        write_spectrum_csv(os, dot, ctx.preamble());
    }
    nlohmann::json j{{"full", to_json(full)},
                     {"restricted", to_json(dot)},
                     {"resolved_band", cutoff},
                     {"restricted_band_gap", dot.band_gap(cutoff)},
                     {"dissipativity", to_json(dis)},
                     {"provenance", ctx.provenance()}};
    detail::write_json(ctx.out / "spectrum.json", j);
    log << "zero eigenvalues (|lambda| <= " << full.zero_tol << "): " << full.zero_count << "\n"
        << "zero mode residual " << detail::fmt(full.zero_mode_error) << ", eigenvector error "
        << detail::fmt(full.zero_vector_error) << "\n"
        << "max Re over nonzero eigenvalues " << detail::fmt(full.max_re_nonzero) << "\n"
        << "restricted: min |Re| " << detail::fmt(dot.imaginary_axis_gap) << ", over |Im| <= "
        << detail::fmt(cutoff) << ": " << detail::fmt(dot.band_gap(cutoff)) << "\n"
        << "dissipativity: max relative residual " << detail::fmt(dis.max_relative_residual) << " over "
        << dis.samples << " samples, " << (dis.passed ? "pass" : "FAIL") << "\n";
    const bool ok = full.zero_count == 1 && full.max_re_nonzero < 0.0 && dot.imaginary_axis_gap > 0.0 &&
                    (dis.samples == 0 || dis.passed);
    return ok ? 0 : 1;
}

inline int cmd_resolvent(const RunContext& ctx)
{
    const auto& cfg = ctx.config;
    auto& log = *ctx.log;
    const DiscreteOperator op(cfg.model, cfg.grid);
    const double cutoff = resolution_cutoff(cfg.model, cfg.grid);
    const double hi = cfg.analysis.gamma_max.value_or(cutoff);
    const auto sw = resolvent_sweep(op, log_gammas(cfg.analysis.gamma_min, hi, cfg.analysis.sweep_points), ctx.jobs);
    for (const auto& w : sw.warnings)
        log << "warning: " << w << "\n";
    {
        auto os = detail::open_out(ctx.out / "resolvent.csv");
        write_resolvent_csv(os, sw, ctx.preamble());
    }
    auto j = to_json(sw);
    j["provenance"] = ctx.provenance();
    detail::write_json(ctx.out / "resolvent.json", j);
    log << "sup |(i gamma - A)^-1| / gamma^2 = " << detail::fmt(sw.sup_scaled) << " at gamma = "
        << detail::fmt(sw.gamma_at_sup) << " (" << sw.gammas.size() << " points, cutoff " << detail::fmt(cutoff)
        << ")\n";
    return std::isfinite(sw.sup_scaled) ? 0 : 1;
}

inline int cmd_decay(const RunContext& ctx)
{
    const auto& cfg = ctx.config;
    auto& log = *ctx.log;
    const DiscreteOperator op(cfg.model, cfg.grid);
    const auto sum = simulate(cfg, op, cfg.T);
    if (!validate_model(cfg.model).supports_decay())
        log << "note: a'(x) >= a1 > 0 fails; the fitted rate is not covered by the decay estimate\n";
    DecayFitOptions opt;
    opt.lo_fraction = cfg.analysis.fit_lo;
    opt.hi_fraction = cfg.analysis.fit_hi;
    opt.samples = cfg.analysis.fit_samples;
    const auto fit = fit_decay(sum.trajectory, op, sum.trajectory.omega, opt);
    {
        auto os = detail::open_out(ctx.out / "trajectory.csv");
        write_scalars_csv(os, sum.trajectory, ctx.preamble());
    }
    nlohmann::json j{{"fit", to_json(fit)}, {"simulation", to_json(sum, cfg.model)}, {"provenance", ctx.provenance()}};
    detail::write_json(ctx.out / "decay.json", j);
    log << "slope " << detail::fmt(fit.slope) << " over [" << detail::fmt(fit.t_lo) << ", " << detail::fmt(fit.t_hi)
        << "]\n"
        << "C_hat " << detail::fmt(fit.C_hat) << "\n"
        << "local rates " << detail::fmt(fit.rate_early) << " -> " << detail::fmt(fit.rate_late)
        << (fit.rate_decreasing() ? " (decreasing)" : fit.looks_exponential() ? " (constant)" : "") << "\n";
    return fit.slope <= -0.4 ? 0 : 1;
}

struct SweepPoint {
    ControlGains gains;
    bool strict = false;
    std::vector<std::string> failures;
    double gap = std::numeric_limits<double>::quiet_NaN();
    double band_gap = std::numeric_limits<double>::quiet_NaN();
    double max_re = std::numeric_limits<double>::quiet_NaN();
    double dissipativity = std::numeric_limits<double>::quiet_NaN();
    double terminal_ratio = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

inline int cmd_sweep(const RunContext& ctx)
{
    const auto& cfg = ctx.config;
    auto& log = *ctx.log;
    const auto& base = cfg.model.gains;
    auto axis = [](const std::vector<double>& v, double b) { return v.empty() ? std::vector<double>{b} : v; };
    std::vector<ControlGains> points;
    for (double a : axis(cfg.sweep.alpha, base.alpha))
        for (double b : axis(cfg.sweep.beta, base.beta))
            for (double K : axis(cfg.sweep.K, base.K))
                for (double t : axis(cfg.sweep.tau, base.tau))
                    points.push_back({a, b, t, K});

    std::vector<SweepPoint> results(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            SweepPoint& r = results[i];
            r.gains = points[i];
            try {
                ScenarioConfig pc = cfg;
                pc.model = CraneModel::make(cfg.model.physical, points[i], cfg.model.coefficient);
                const auto rep = validate_model(pc.model);
                r.strict = rep.passes_strict();
                r.failures = rep.failures();
                if (r.strict) {
                    const DiscreteOperator op(pc.model, pc.grid);
                    const auto dot = eigenvalues(op, true);
                    const auto full = eigenvalues(op, false);
                    r.gap = dot.imaginary_axis_gap;
                    r.band_gap = dot.band_gap(resolution_cutoff(pc.model, pc.grid));
                    r.max_re = full.max_re_nonzero;
                    r.dissipativity =
                        dissipativity_check(op, std::min(cfg.analysis.dissipativity_samples, 200), ctx.seed + i)
                            .max_relative_residual;
                    if (cfg.sweep.T > 0.0) {
                        const auto sum = simulate(pc, op, cfg.sweep.T);
                        r.terminal_ratio = sum.terminal_dev / sum.initial_dev;
                    }
                }
            } catch (const std::exception& e) {
                r.error = e.what();
            }
            std::ostringstream name;
            name << "point_" << std::setw(4) << std::setfill('0') << i;
            nlohmann::json j{{"alpha", r.gains.alpha},
                             {"beta", r.gains.beta},
                             {"K", r.gains.K},
                             {"tau", r.gains.tau},
                             {"passes_strict", r.strict},
                             {"failures", r.failures},
                             {"imaginary_axis_gap", crane::detail::finite_or_null(r.gap)},
                             {"band_gap", crane::detail::finite_or_null(r.band_gap)},
                             {"max_re_nonzero", crane::detail::finite_or_null(r.max_re)},
                             {"dissipativity_residual", crane::detail::finite_or_null(r.dissipativity)},
                             {"terminal_ratio", crane::detail::finite_or_null(r.terminal_ratio)},
                             {"error", r.error},
                             {"provenance", ctx.provenance()}};
            detail::write_json(ctx.out / name.str() / "summary.json", j);
        }
    };
    const int n = std::max(1, std::min<int>(ctx.jobs, static_cast<int>(points.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();

    auto os = detail::open_out(ctx.out / "sweep.csv");
    os << ctx.preamble() << '\n' << std::setprecision(17);
    os << "alpha,beta,K,tau,passes_strict,imaginary_axis_gap,band_gap,max_re_nonzero,dissipativity_residual,"
          "terminal_ratio\n";
    int failed = 0;
    for (const auto& r : results) {
        os << r.gains.alpha << ',' << r.gains.beta << ',' << r.gains.K << ',' << r.gains.tau << ',' << r.strict << ','
           << r.gap << ',' << r.band_gap << ',' << r.max_re << ',' << r.dissipativity << ',' << r.terminal_ratio
           << '\n';
        if (!r.error.empty()) {
            ++failed;
            log << "error at alpha=" << r.gains.alpha << " beta=" << r.gains.beta << ": " << r.error << "\n";
        }
    }
    log << points.size() << " points, "
        << std::count_if(results.begin(), results.end(), [](const SweepPoint& r) { return r.strict; })
        << " admissible\n";
    return failed == 0 ? 0 : 1;
}

}  // namespace crane::cli

#endif
