#ifndef CRANE_CONFIG_HPP
#define CRANE_CONFIG_HPP

// Scenario files: INI sections [physical] [gains] [coefficient] [weights] [grid]
// [simulation] [initial] [analysis] [sweep] [output]. See configs/ for examples.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "crane/discretize.hpp"
#include "crane/evolve.hpp"
#include "crane/model.hpp"

namespace crane {

/// Malformed or unreadable scenario file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Profile on [0,1]: "poly c0 c1 ..." (sum c_k x^k), "trig a0 a1 b1 a2 b2 ..."
/// (a0 + sum a_k cos(k pi x) + b_k sin(k pi x)) or a bare constant.
struct ProfileSpec {
    enum class Kind { poly, trig };
    Kind kind = Kind::poly;
    std::vector<double> coeffs;

    double operator()(double x) const
    {
        double v = 0.0;
        if (kind == Kind::poly) {
            for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
                v = v * x + *it;
            return v;
        }
        if (!coeffs.empty())
            v = coeffs[0];
        for (std::size_t i = 1; i < coeffs.size(); ++i) {
            const double k = static_cast<double>((i + 1) / 2);
            v += coeffs[i] * (i % 2 == 1 ? std::cos(k * M_PI * x) : std::sin(k * M_PI * x));
        }
        return v;
    }

    std::string describe() const
    {
        std::ostringstream os;
        os << (kind == Kind::poly ? "poly" : "trig");
        for (double c : coeffs)
            os << ' ' << c;
        return os.str();
    }

    static ProfileSpec parse(const std::string& text)
    {
        std::istringstream is(text);
        std::string head;
        ProfileSpec p;
        if (!(is >> head))
            throw ConfigError("empty profile");
        if (head == "poly" || head == "trig") {
            p.kind = head == "poly" ? Kind::poly : Kind::trig;
        } else {
            is.clear();
            is.str(text);
        }
        std::string tok;
        while (is >> tok)
            p.coeffs.push_back(parse_number(tok, "profile coefficient"));
        if (p.coeffs.empty())
            throw ConfigError("profile '" + text + "' has no coefficients");
        return p;
    }

    static double parse_number(const std::string& s, const std::string& what)
    {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse " + what + " '" + s + "'");
        }
        if (pos != s.size() || !std::isfinite(v))
            throw ConfigError("cannot parse " + what + " '" + s + "'");
        return v;
    }
};

struct InitialSpec {
    std::string preset = "smooth";
    double amplitude = 0.1;
    double level = 0.5;
    ProfileSpec y0{ProfileSpec::Kind::poly, {0.0}};
    ProfileSpec y1{ProfileSpec::Kind::poly, {0.0}};
    /// history as a function of s = -theta / tau in [0, 1]
    ProfileSpec f{ProfileSpec::Kind::poly, {0.0}};
    std::optional<double> xi0, eta0;

    static const std::set<std::string>& presets()
    {
        static const std::set<std::string> p{"equilibrium", "pluck", "smooth", "transit", "custom"};
        return p;
    }

    InitialData build(double tau) const
    {
        InitialData d;
        const double A = amplitude;
        if (preset == "equilibrium") {
            const double c = level;
            d.y0 = [c](double) { return c; };
        } else if (preset == "pluck") {
            d.y0 = [A](double x) { return A * std::cos(M_PI * x); };
        } else if (preset == "smooth") {
            d.y0 = [A](double x) { return A * std::cos(M_PI * x); };
            d.y1 = [A](double x) { return A * std::sin(0.5 * M_PI * x); };
            d.f = [A, tau](double th) { return A * std::sin(M_PI * (-th / tau)); };
            d.xi0 = 0.0;
            d.eta0 = A;
        } else if (preset == "transit") {
            d.y1 = [A](double) { return A; };
            d.f = [A](double) { return A; };
            d.xi0 = A;
            d.eta0 = A;
        } else if (preset == "custom") {
            d.y0 = y0;
            d.y1 = y1;
            const ProfileSpec h = f;
            d.f = [h, tau](double th) { return h(-th / tau); };
            d.xi0 = xi0 ? *xi0 : y1(0.0);
            d.eta0 = eta0 ? *eta0 : y1(1.0);
        } else {
            throw ConfigError("unknown initial preset '" + preset + "'");
        }
        return d;
    }
};

struct AnalysisSpec {
    double fit_lo = 0.25;
    double fit_hi = 1.0;
    int fit_samples = 64;
    int sweep_points = 100;
    double gamma_min = 0.1;
    std::optional<double> gamma_max;
    int dissipativity_samples = 1000;
};

struct SweepSpec {
    std::vector<double> alpha, beta, K, tau;
    /// simulated horizon per point; 0 skips simulation
    double T = 0.0;
};

struct ScenarioConfig {
    CraneModel model = CraneModel::reference();
    Grid grid{200, 100};
    double T = 200.0;
    int snapshot_stride = 50;
    InitialSpec initial;
    AnalysisSpec analysis;
    SweepSpec sweep;
    std::string output_dir = "out";
    /// FNV-1a over the canonical key listing
    std::uint64_t hash = 0;
    std::string source;

    std::string hash_hex() const
    {
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << hash;
        return os.str();
    }

    InitialData initial_data() const { return initial.build(model.gains.tau); }
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_list(const std::string& s, const std::string& what)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(ProfileSpec::parse_number(item, what));
    }
    return out;
}

class Section {
public:
    Section(const boost::property_tree::ptree* t, std::string name) : t_(t), name_(std::move(name)) {}

    std::optional<std::string> text(const std::string& key) const
    {
        if (!t_)
            return std::nullopt;
        auto v = t_->get_optional<std::string>(key);
        if (!v)
            return std::nullopt;
        return trim(*v);
    }

    double number(const std::string& key, double fallback) const
    {
        auto v = text(key);
        return v ? ProfileSpec::parse_number(*v, name_ + "." + key) : fallback;
    }

    std::optional<double> maybe_number(const std::string& key) const
    {
        auto v = text(key);
        if (!v)
            return std::nullopt;
        return ProfileSpec::parse_number(*v, name_ + "." + key);
    }

    int integer(const std::string& key, int fallback) const
    {
        auto v = text(key);
        if (!v)
            return fallback;
        const double d = ProfileSpec::parse_number(*v, name_ + "." + key);
        if (d != std::floor(d) || std::abs(d) > 1e9)
            throw ConfigError(name_ + "." + key + " must be an integer");
        return static_cast<int>(d);
    }

    bool boolean(const std::string& key, bool fallback) const
    {
        auto v = text(key);
        if (!v)
            return fallback;
        if (*v == "true" || *v == "1" || *v == "yes")
            return true;
        if (*v == "false" || *v == "0" || *v == "no")
            return false;
        throw ConfigError(name_ + "." + key + " must be true or false");
    }

private:
    const boost::property_tree::ptree* t_;
    std::string name_;
};

}  // namespace detail

/// Parses a scenario. Syntax errors and unknown sections or keys raise ConfigError;
/// values the model rejects raise ModelError.
inline ScenarioConfig parse_config(const std::string& text, const std::string& source = "<string>")
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream is(text);
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    static const std::map<std::string, std::set<std::string>> schema{
        {"physical", {"m", "M", "g"}},
        {"gains", {"alpha", "beta", "K", "tau"}},
        {"coefficient", {"kind", "a0", "a1", "nodes", "values", "monotone"}},
        {"weights", {"kappa", "epsilon", "varpi"}},
        {"grid", {"N", "Nd", "spacing", "theta"}},
        {"simulation", {"T", "snapshot_stride"}},
        {"initial", {"preset", "amplitude", "level", "y0", "y1", "f", "xi0", "eta0"}},
        {"analysis",
         {"fit_lo", "fit_hi", "fit_samples", "sweep_points", "gamma_min", "gamma_max", "dissipativity_samples"}},
        {"sweep", {"alpha", "beta", "K", "tau", "T"}},
        {"output", {"dir"}},
    };
    std::string canonical;
    for (const auto& [sec, body] : tree) {
        auto it = schema.find(sec);
        if (it == schema.end() || !body.data().empty())
            throw ConfigError(source + ": unknown section or top-level key '" + sec + "'");
        for (const auto& [key, val] : body) {
            if (!it->second.count(key))
                throw ConfigError(source + ": unknown key '" + key + "' in [" + sec + "]");
            canonical += sec + "." + key + "=" + detail::trim(val.data()) + "\n";
        }
    }
    auto section = [&](const std::string& name) {
        auto child = tree.get_child_optional(name);
        return detail::Section(child ? &*child : nullptr, name);
    };

    ScenarioConfig cfg;
    cfg.source = source;
    cfg.hash = detail::fnv1a(canonical);

    const auto phys = section("physical");
    PhysicalParams p;
    p.m = phys.number("m", p.m);
    p.M = phys.number("M", p.M);
    p.g = phys.number("g", p.g);

    const auto gains = section("gains");
    ControlGains k;
    k.alpha = gains.number("alpha", k.alpha);
    k.beta = gains.number("beta", k.beta);
    k.K = gains.number("K", k.K);
    k.tau = gains.number("tau", k.tau);

    const auto coef = section("coefficient");
    const std::string kind = coef.text("kind").value_or("affine");
    CableCoefficient a = CableCoefficient::affine(1.0, 1.0);
    if (kind == "affine") {
        a = CableCoefficient::affine(coef.number("a0", 1.0), coef.number("a1", 1.0));
    } else if (kind == "physical") {
        a = CableCoefficient::physical(p.M, p.g);
    } else if (kind == "tabulated") {
        auto nodes = detail::parse_list(coef.text("nodes").value_or(""), "coefficient.nodes");
        auto values = detail::parse_list(coef.text("values").value_or(""), "coefficient.values");
        if (nodes.size() != values.size() || nodes.size() < 2)
            throw ConfigError(source + ": coefficient.nodes and coefficient.values need equal length >= 2");
        std::vector<std::pair<double, double>> samples;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            samples.emplace_back(nodes[i], values[i]);
        a = CableCoefficient::tabulated(std::move(samples), coef.boolean("monotone", false));
    } else {
        throw ConfigError(source + ": unknown coefficient kind '" + kind + "'");
    }

    cfg.model = CraneModel::make(p, k, a);
    const auto w = section("weights");
    if (w.text("kappa") || w.text("epsilon") || w.text("varpi")) {
        auto& iw = cfg.model.weights;
        iw.kappa = w.number("kappa", 0.5 * k.mu());
        iw.epsilon = w.number("epsilon", 0.5);
        iw.delta = iw.kappa / (4.0 * (k.mu() - iw.kappa));
        const double sup = InnerProductWeights::varpi_supremum(p, k, a.lower_bound(), iw.kappa, iw.epsilon);
        iw.varpi = w.number("varpi", 0.5 * sup);
    }

    const auto grid = section("grid");
    cfg.grid.N = grid.integer("N", cfg.grid.N);
    cfg.grid.Nd = grid.integer("Nd", cfg.grid.Nd);
    cfg.grid.theta = grid.number("theta", cfg.grid.theta);
    const std::string spacing = grid.text("spacing").value_or("uniform");
    if (spacing == "uniform")
        cfg.grid.spacing = Grid::Spacing::uniform;
    else if (spacing == "travel_time")
        cfg.grid.spacing = Grid::Spacing::travel_time;
    else
        throw ConfigError(source + ": unknown grid spacing '" + spacing + "'");
    try {
        cfg.grid.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source + ": " + e.what());
    }

    const auto sim = section("simulation");
    cfg.T = sim.number("T", cfg.T);
    cfg.snapshot_stride = sim.integer("snapshot_stride", cfg.snapshot_stride);
    if (!(cfg.T >= 0.0) || cfg.snapshot_stride < 1)
        throw ConfigError(source + ": need simulation.T >= 0 and snapshot_stride >= 1");

    const auto ini = section("initial");
    auto& is = cfg.initial;
    is.preset = ini.text("preset").value_or(is.preset);
    if (!InitialSpec::presets().count(is.preset))
        throw ConfigError(source + ": unknown initial preset '" + is.preset + "'");
    is.amplitude = ini.number("amplitude", is.amplitude);
    is.level = ini.number("level", is.level);
    if (auto v = ini.text("y0"))
        is.y0 = ProfileSpec::parse(*v);
    if (auto v = ini.text("y1"))
        is.y1 = ProfileSpec::parse(*v);
    if (auto v = ini.text("f"))
        is.f = ProfileSpec::parse(*v);
    is.xi0 = ini.maybe_number("xi0");
    is.eta0 = ini.maybe_number("eta0");

    const auto an = section("analysis");
    auto& as = cfg.analysis;
    as.fit_lo = an.number("fit_lo", as.fit_lo);
    as.fit_hi = an.number("fit_hi", as.fit_hi);
    as.fit_samples = an.integer("fit_samples", as.fit_samples);
    as.sweep_points = an.integer("sweep_points", as.sweep_points);
    as.gamma_min = an.number("gamma_min", as.gamma_min);
    as.gamma_max = an.maybe_number("gamma_max");
    as.dissipativity_samples = an.integer("dissipativity_samples", as.dissipativity_samples);
    if (!(as.fit_lo > 0.0 && as.fit_hi <= 1.0 && as.fit_hi >= 4.0 * as.fit_lo) || as.fit_samples < 20)
        throw ConfigError(source + ": need 0 < fit_lo, 4 fit_lo <= fit_hi <= 1, fit_samples >= 20");
    if (as.sweep_points < 1 || !(as.gamma_min > 0.0) || as.dissipativity_samples < 0)
        throw ConfigError(source + ": need sweep_points >= 1, gamma_min > 0, dissipativity_samples >= 0");

    const auto sw = section("sweep");
    cfg.sweep.alpha = detail::parse_list(sw.text("alpha").value_or(""), "sweep.alpha");
    cfg.sweep.beta = detail::parse_list(sw.text("beta").value_or(""), "sweep.beta");
    cfg.sweep.K = detail::parse_list(sw.text("K").value_or(""), "sweep.K");
    cfg.sweep.tau = detail::parse_list(sw.text("tau").value_or(""), "sweep.tau");
    cfg.sweep.T = sw.number("T", 0.0);

    cfg.output_dir = section("output").text("dir").value_or(cfg.output_dir);
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

inline nlohmann::json to_json(const CraneModel& m)
{
    const auto& w = m.weights;
    return {{"physical", {{"m", m.physical.m}, {"M", m.physical.M}, {"g", m.physical.g}}},
            {"gains", {{"alpha", m.gains.alpha}, {"beta", m.gains.beta}, {"K", m.gains.K}, {"tau", m.gains.tau}}},
            {"coefficient", m.coefficient.describe()},
            {"weights", {{"kappa", w.kappa}, {"epsilon", w.epsilon}, {"delta", w.delta}, {"varpi", w.varpi}}}};
}

inline nlohmann::json to_json(const Grid& g)
{
    return {{"N", g.N}, {"Nd", g.Nd}, {"spacing", to_string(g.spacing)}, {"theta", g.theta}};
}

inline nlohmann::json to_json(const ScenarioConfig& c)
{
    nlohmann::json init{{"preset", c.initial.preset}, {"amplitude", c.initial.amplitude}};
    if (c.initial.preset == "equilibrium")
        init["level"] = c.initial.level;
    if (c.initial.preset == "custom") {
        init["y0"] = c.initial.y0.describe();
        init["y1"] = c.initial.y1.describe();
        init["f"] = c.initial.f.describe();
    }
    return {{"source", c.source},
            {"config_hash", c.hash_hex()},
            {"model", to_json(c.model)},
            {"grid", to_json(c.grid)},
            {"simulation", {{"T", c.T}, {"snapshot_stride", c.snapshot_stride}}},
            {"initial", init}};
}

}  // namespace crane

#endif
