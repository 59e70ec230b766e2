#pragma once

// Run configuration: a JSON document parsed strictly (unknown keys are
// errors), converted to the library types, and echoed back losslessly.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "noisyqd/core.hpp"
#include "noisyqd/ensemble.hpp"
#include "noisyqd/master.hpp"
#include "noisyqd/oscillator.hpp"
#include "noisyqd/propagation.hpp"

namespace noisyqd {

using json = nlohmann::json;

enum class Mode { analytic, effective, stochastic, ensemble, master, verify };

inline constexpr std::string_view mode_name(Mode m) {
    switch (m) {
        case Mode::analytic: return "analytic";
        case Mode::effective: return "effective";
        case Mode::stochastic: return "stochastic";
        case Mode::ensemble: return "ensemble";
        case Mode::master: return "master";
        case Mode::verify: return "verify";
    }
    return "";
}

struct GridConfig {
    double x_min = -8.0;
    double x_max = 8.0;
    std::size_t n_points = 256;
    SpatialGrid grid() const { return SpatialGrid(x_min, x_max, n_points); }
    bool operator==(const GridConfig&) const = default;
};

struct PotentialConfig {
    std::string kind = "harmonic";  // harmonic | soft_coulomb | tabulated
    double omega = 1.0;
    double a = 1.0;
    std::vector<double> values;
    bool operator==(const PotentialConfig&) const = default;
};

// F(t) = amplitude * cos(omega t + phase)
struct DriveConfig {
    std::string kind = "none";  // none | cosine
    double amplitude = 0.0;
    double omega = 0.0;
    double phase = 0.0;
    bool operator==(const DriveConfig&) const = default;
};

struct CouplingConfig {
    std::string kind = "dipole";  // dipole | tabulated
    std::vector<double> values;
    bool operator==(const CouplingConfig&) const = default;
};

struct SystemConfig {
    double mass = 1.0;
    PotentialConfig potential;
    DriveConfig drive;
    CouplingConfig coupling;
    double coupling_lambda = 1.0;
    Schedule sigma2 = Schedule::constant(0.0);
    bool operator==(const SystemConfig&) const = default;

    SystemSpec spec() const {
        SystemSpec s;
        s.mass = mass;
        if (potential.kind == "harmonic")
            s.potential = HarmonicPotential{potential.omega};
        else if (potential.kind == "soft_coulomb")
            s.potential = SoftCoulombPotential{potential.a};
        else
            s.potential = TabulatedPotential{potential.values};
        if (drive.kind == "cosine") {
            const DriveConfig d = drive;
            s.drive = [d](double t) { return d.amplitude * std::cos(d.omega * t + d.phase); };
        }
        if (coupling.kind == "tabulated") s.coupling = TabulatedCoupling{coupling.values};
        s.coupling_lambda = coupling_lambda;
        s.sigma2 = sigma2;
        return s;
    }

    // Omega when the system is a noisy harmonic oscillator with dipole coupling and constant sigma^2.
    std::optional<ComplexFrequency> oscillator_frequency() const {
        if (potential.kind != "harmonic" || coupling.kind != "dipole" || !sigma2.is_constant() || mass <= 0.0)
            return std::nullopt;
        return complex_frequency(potential.omega, coupling_lambda * coupling_lambda * sigma2.values().front());
    }
};

struct InitialConfig {
    std::string kind = "ground_state";  // ground_state | gaussian
    std::optional<double> omega;        // ground_state: defaults to the harmonic potential's omega
    double x0 = 0.0;
    double width = 1.0;
    double k0 = 0.0;
    bool operator==(const InitialConfig&) const = default;
};

struct EvolutionSection {
    EvolutionConfig config;
    std::vector<double> probes;
    bool operator==(const EvolutionSection&) const = default;
};

struct EnsembleSection {
    EnsembleConfig config;
    std::string average = "amplitude";  // amplitude | density
    bool operator==(const EnsembleSection&) const = default;
};

// Heatmap of the point-source state on the grid for t in (0, t_max].
struct AnalyticConfig {
    double t_max = 6.0;
    std::size_t n_times = 60;
    std::optional<double> omega1;  // both or neither: overrides the system's Omega
    std::optional<double> omega2;
    bool operator==(const AnalyticConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    std::string format = "csv";  // csv | json
    bool operator==(const OutputConfig&) const = default;
};

struct VerifyConfig {
    std::vector<std::string> criteria;         // empty: the cross-module set
    std::optional<std::size_t> realizations;  // overrides ensemble sizes
    bool operator==(const VerifyConfig&) const = default;
};

struct RunConfig {
    Mode mode = Mode::effective;
    GridConfig grid;
    SystemConfig system;
    InitialConfig initial;
    EvolutionSection evolution;
    EnsembleSection ensemble;
    MasterConfig master;
    AnalyticConfig analytic;
    OutputConfig outputs;
    VerifyConfig verify;
    bool operator==(const RunConfig&) const = default;

    WaveFunction initial_state() const {
        const SpatialGrid g = grid.grid();
        if (initial.kind == "gaussian") return gaussian_packet(g, initial.x0, initial.width, initial.k0);
        double omega = 0.0;
        if (initial.omega)
            omega = *initial.omega;
        else if (system.potential.kind == "harmonic")
            omega = system.potential.omega;
        if (!(omega > 0.0)) throw ConfigError("initial.omega must be > 0 for a ground_state initial condition");
        return harmonic_ground_state(g, system.mass, omega);
    }

    ComplexFrequency analytic_frequency() const {
        if (analytic.omega1 && analytic.omega2) return {*analytic.omega1, *analytic.omega2};
        if (auto f = system.oscillator_frequency()) return *f;
        throw ConfigError("analytic: system is not a noisy harmonic oscillator; give analytic.omega1/omega2");
    }
};

// ---------------------------------------------------------------------------
// Key tables shared by the strict parser and print-spec.

namespace keys {
inline const std::vector<std::string> top = {"mode", "grid", "system", "initial", "evolution", "ensemble",
                                             "master", "analytic", "outputs", "verify"};
inline const std::vector<std::string> grid = {"x_min", "x_max", "n_points"};
inline const std::vector<std::string> system = {"mass", "potential", "drive", "coupling", "coupling_lambda", "sigma2"};
inline const std::vector<std::string> potential = {"kind", "omega", "a", "values"};
inline const std::vector<std::string> drive = {"kind", "amplitude", "omega", "phase"};
inline const std::vector<std::string> coupling = {"kind", "values"};
inline const std::vector<std::string> schedule = {"knots", "values"};
inline const std::vector<std::string> initial = {"kind", "omega", "x0", "width", "k0"};
inline const std::vector<std::string> evolution = {"dt", "n_steps", "snapshot_stride", "boundary", "probes"};
inline const std::vector<std::string> boundary = {"kind", "width", "strength"};
inline const std::vector<std::string> ensemble = {"n_realizations", "master_seed", "max_concurrency", "average"};
inline const std::vector<std::string> master = {"include_gain", "dt", "n_steps", "snapshot_stride", "freeze_kinetic"};
inline const std::vector<std::string> analytic = {"t_max", "n_times", "omega1", "omega2"};
inline const std::vector<std::string> outputs = {"directory", "format"};
inline const std::vector<std::string> verify = {"criteria", "realizations"};
}  // namespace keys

namespace detail {

inline void check_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const auto& a : allowed) ok = ok || a == k;
        if (!ok) throw ConfigError("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
    }
}

inline double get_number(const json& j, const std::string& key, const std::string& where, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + "." + key + ": must be finite");
    return d;
}

inline std::size_t get_count(const json& j, const std::string& key, const std::string& where, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(where + "." + key + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

inline bool get_bool(const json& j, const std::string& key, const std::string& where, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
    return j.at(key).get<bool>();
}

inline std::string get_choice(const json& j, const std::string& key, const std::string& where, std::string fallback,
                              std::initializer_list<std::string_view> choices) {
    std::string s = std::move(fallback);
    if (j.contains(key)) {
        if (!j.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
        s = j.at(key).get<std::string>();
    }
    for (auto c : choices)
        if (c == s) return s;
    std::string list;
    for (auto c : choices) list += (list.empty() ? "" : ", ") + std::string(c);
    throw ConfigError(where + "." + key + ": '" + s + "' is not one of {" + list + "}");
}

inline std::vector<double> get_numbers(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) return {};
    const auto& v = j.at(key);
    if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

inline const json& section(const json& root, const std::string& key) {
    static const json empty = json::object();
    return root.contains(key) ? root.at(key) : empty;
}

}  // namespace detail

inline RunConfig parse_config(const json& root) {
    using namespace detail;
    detail::check_keys(root, keys::top, "");
    RunConfig c;

    if (!root.contains("mode")) throw ConfigError("missing required key 'mode'");
    const std::string mode = get_choice(root, "mode", "config", "", {"analytic", "effective", "stochastic", "ensemble", "master", "verify"});
    for (Mode m : {Mode::analytic, Mode::effective, Mode::stochastic, Mode::ensemble, Mode::master, Mode::verify})
        if (mode_name(m) == mode) c.mode = m;

    auto require = [&](const char* key) {
        if (!root.contains(key)) throw ConfigError("mode '" + mode + "' requires section '" + key + "'");
    };
    switch (c.mode) {
        case Mode::analytic: require("grid"); require("analytic"); break;
        case Mode::effective:
        case Mode::stochastic: require("grid"); require("system"); require("evolution"); break;
        case Mode::ensemble: require("grid"); require("system"); require("evolution"); require("ensemble"); break;
        case Mode::master: require("grid"); require("system"); require("master"); break;
        case Mode::verify: break;
    }

    {
        const json& g = section(root, "grid");
        check_keys(g, keys::grid, "grid");
        c.grid.x_min = get_number(g, "x_min", "grid", c.grid.x_min);
        c.grid.x_max = get_number(g, "x_max", "grid", c.grid.x_max);
        c.grid.n_points = get_count(g, "n_points", "grid", c.grid.n_points);
        (void)c.grid.grid();  // validates
    }
    {
        const json& s = section(root, "system");
        check_keys(s, keys::system, "system");
        c.system.mass = get_number(s, "mass", "system", 1.0);
        if (!(c.system.mass > 0.0)) throw ConfigError("system.mass must be > 0");
        c.system.coupling_lambda = get_number(s, "coupling_lambda", "system", 1.0);

        const json& p = section(s, "potential");
        check_keys(p, keys::potential, "system.potential");
        auto& pc = c.system.potential;
        pc.kind = get_choice(p, "kind", "system.potential", "harmonic", {"harmonic", "soft_coulomb", "tabulated"});
        pc.omega = get_number(p, "omega", "system.potential", 1.0);
        pc.a = get_number(p, "a", "system.potential", 1.0);
        pc.values = get_numbers(p, "values", "system.potential");
        if (pc.kind == "tabulated" && pc.values.size() != c.grid.n_points)
            throw ConfigError("system.potential.values must have grid.n_points entries");
        if (pc.kind == "soft_coulomb" && !(pc.a > 0.0)) throw ConfigError("system.potential.a must be > 0");

        const json& d = section(s, "drive");
        check_keys(d, keys::drive, "system.drive");
        auto& dc = c.system.drive;
        dc.kind = get_choice(d, "kind", "system.drive", "none", {"none", "cosine"});
        dc.amplitude = get_number(d, "amplitude", "system.drive", 0.0);
        dc.omega = get_number(d, "omega", "system.drive", 0.0);
        dc.phase = get_number(d, "phase", "system.drive", 0.0);

        const json& cp = section(s, "coupling");
        check_keys(cp, keys::coupling, "system.coupling");
        c.system.coupling.kind = get_choice(cp, "kind", "system.coupling", "dipole", {"dipole", "tabulated"});
        c.system.coupling.values = get_numbers(cp, "values", "system.coupling");
        if (c.system.coupling.kind == "tabulated" && c.system.coupling.values.size() != c.grid.n_points)
            throw ConfigError("system.coupling.values must have grid.n_points entries");

        if (s.contains("sigma2")) {
            const json& v = s.at("sigma2");
            if (v.is_number()) {
                c.system.sigma2 = Schedule::constant(v.get<double>());
            } else {
                check_keys(v, keys::schedule, "system.sigma2");
                c.system.sigma2 = Schedule::piecewise(get_numbers(v, "knots", "system.sigma2"),
                                                      get_numbers(v, "values", "system.sigma2"));
            }
        }
    }
    {
        const json& i = section(root, "initial");
        check_keys(i, keys::initial, "initial");
        c.initial.kind = get_choice(i, "kind", "initial", "ground_state", {"ground_state", "gaussian"});
        if (i.contains("omega")) c.initial.omega = get_number(i, "omega", "initial", 1.0);
        c.initial.x0 = get_number(i, "x0", "initial", 0.0);
        c.initial.width = get_number(i, "width", "initial", 1.0);
        c.initial.k0 = get_number(i, "k0", "initial", 0.0);
        if (!(c.initial.width > 0.0)) throw ConfigError("initial.width must be > 0");
    }
    {
        const json& e = section(root, "evolution");
        check_keys(e, keys::evolution, "evolution");
        auto& ec = c.evolution.config;
        ec.dt = get_number(e, "dt", "evolution", ec.dt);
        ec.n_steps = get_count(e, "n_steps", "evolution", ec.n_steps);
        ec.snapshot_stride = get_count(e, "snapshot_stride", "evolution", ec.snapshot_stride);
        const json& b = section(e, "boundary");
        check_keys(b, keys::boundary, "evolution.boundary");
        const std::string kind = get_choice(b, "kind", "evolution.boundary", "periodic", {"periodic", "absorbing_mask"});
        ec.boundary.kind = kind == "periodic" ? Boundary::Kind::periodic : Boundary::Kind::absorbing_mask;
        ec.boundary.width = get_number(b, "width", "evolution.boundary", 0.0);
        ec.boundary.strength = get_number(b, "strength", "evolution.boundary", 0.0);
        c.evolution.probes = get_numbers(e, "probes", "evolution");
        ec.validate();
    }
    {
        const json& e = section(root, "ensemble");
        check_keys(e, keys::ensemble, "ensemble");
        auto& ec = c.ensemble.config;
        ec.n_realizations = get_count(e, "n_realizations", "ensemble", ec.n_realizations);
        ec.master_seed = get_count(e, "master_seed", "ensemble", ec.master_seed);
        ec.max_concurrency = static_cast<unsigned>(get_count(e, "max_concurrency", "ensemble", 0));
        c.ensemble.average = get_choice(e, "average", "ensemble", "amplitude", {"amplitude", "density"});
        ec.validate();
    }
    {
        const json& m = section(root, "master");
        check_keys(m, keys::master, "master");
        c.master.include_gain = get_bool(m, "include_gain", "master", true);
        c.master.dt = get_number(m, "dt", "master", c.master.dt);
        c.master.n_steps = get_count(m, "n_steps", "master", c.master.n_steps);
        c.master.snapshot_stride = get_count(m, "snapshot_stride", "master", c.master.snapshot_stride);
        c.master.freeze_kinetic = get_bool(m, "freeze_kinetic", "master", false);
        c.master.validate();
    }
    {
        const json& a = section(root, "analytic");
        check_keys(a, keys::analytic, "analytic");
        c.analytic.t_max = get_number(a, "t_max", "analytic", c.analytic.t_max);
        c.analytic.n_times = get_count(a, "n_times", "analytic", c.analytic.n_times);
        if (a.contains("omega1")) c.analytic.omega1 = get_number(a, "omega1", "analytic", 0.0);
        if (a.contains("omega2")) c.analytic.omega2 = get_number(a, "omega2", "analytic", 0.0);
        if (c.analytic.omega1.has_value() != c.analytic.omega2.has_value())
            throw ConfigError("analytic: give both omega1 and omega2 or neither");
        if (!(c.analytic.t_max > 0.0) || c.analytic.n_times < 1) throw ConfigError("analytic: need t_max > 0 and n_times >= 1");
    }
    {
        const json& o = section(root, "outputs");
        check_keys(o, keys::outputs, "outputs");
        if (o.contains("directory")) {
            if (!o.at("directory").is_string()) throw ConfigError("outputs.directory: expected a string");
            c.outputs.directory = o.at("directory").get<std::string>();
        }
        c.outputs.format = get_choice(o, "format", "outputs", "csv", {"csv", "json"});
    }
    {
        const json& v = section(root, "verify");
        check_keys(v, keys::verify, "verify");
        if (v.contains("criteria")) {
            if (!v.at("criteria").is_array()) throw ConfigError("verify.criteria: expected an array of names");
            for (const auto& n : v.at("criteria")) {
                if (!n.is_string()) throw ConfigError("verify.criteria: expected an array of names");
                c.verify.criteria.push_back(n.get<std::string>());
            }
        }
        if (v.contains("realizations")) c.verify.realizations = get_count(v, "realizations", "verify", 0);
        if (c.verify.realizations && *c.verify.realizations < 2) throw ConfigError("verify.realizations must be >= 2");
    }
    return c;
}

inline RunConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(root);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// Fully resolved echo; parse_config(to_json(c)) == c.
inline json to_json(const RunConfig& c) {
    json j;
    j["mode"] = std::string(mode_name(c.mode));
    j["grid"] = {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"n_points", c.grid.n_points}};

    const auto& s = c.system;
    json pot = {{"kind", s.potential.kind}, {"omega", s.potential.omega}, {"a", s.potential.a}};
    if (!s.potential.values.empty()) pot["values"] = s.potential.values;
    json cpl = {{"kind", s.coupling.kind}};
    if (!s.coupling.values.empty()) cpl["values"] = s.coupling.values;
    json sig = s.sigma2.is_constant() && s.sigma2.knots().back() == kInfinity
                   ? json(s.sigma2.values().front())
                   : json{{"knots", s.sigma2.knots()}, {"values", s.sigma2.values()}};
    j["system"] = {{"mass", s.mass},
                   {"potential", pot},
                   {"drive", {{"kind", s.drive.kind}, {"amplitude", s.drive.amplitude}, {"omega", s.drive.omega}, {"phase", s.drive.phase}}},
                   {"coupling", cpl},
                   {"coupling_lambda", s.coupling_lambda},
                   {"sigma2", sig}};

    json init = {{"kind", c.initial.kind}, {"x0", c.initial.x0}, {"width", c.initial.width}, {"k0", c.initial.k0}};
    if (c.initial.omega) init["omega"] = *c.initial.omega;
    j["initial"] = init;

    const auto& e = c.evolution.config;
    j["evolution"] = {{"dt", e.dt},
                      {"n_steps", e.n_steps},
                      {"snapshot_stride", e.snapshot_stride},
                      {"boundary",
                       {{"kind", e.boundary.kind == Boundary::Kind::periodic ? "periodic" : "absorbing_mask"},
                        {"width", e.boundary.width},
                        {"strength", e.boundary.strength}}},
                      {"probes", c.evolution.probes}};
    j["ensemble"] = {{"n_realizations", c.ensemble.config.n_realizations},
                     {"master_seed", c.ensemble.config.master_seed},
                     {"max_concurrency", c.ensemble.config.max_concurrency},
                     {"average", c.ensemble.average}};
    j["master"] = {{"include_gain", c.master.include_gain},
                   {"dt", c.master.dt},
                   {"n_steps", c.master.n_steps},
                   {"snapshot_stride", c.master.snapshot_stride},
                   {"freeze_kinetic", c.master.freeze_kinetic}};
    json an = {{"t_max", c.analytic.t_max}, {"n_times", c.analytic.n_times}};
    if (c.analytic.omega1) an["omega1"] = *c.analytic.omega1;
    if (c.analytic.omega2) an["omega2"] = *c.analytic.omega2;
    j["analytic"] = an;
    j["outputs"] = {{"directory", c.outputs.directory}, {"format", c.outputs.format}};
    json ver = {{"criteria", c.verify.criteria}};
    if (c.verify.realizations) ver["realizations"] = *c.verify.realizations;
    j["verify"] = ver;
    return j;
}

// Resolved schema: every accepted key with its type and default.
inline json config_schema() {
    const RunConfig d;
    const json defaults = to_json(d);
    auto describe = [](const std::vector<std::string>& ks, const json& dflt, json types) {
        json out = json::object();
        for (const auto& k : ks) {
            json entry = {{"type", types.value(k, "object")}};
            if (dflt.is_object() && dflt.contains(k)) entry["default"] = dflt.at(k);
            out[k] = entry;
        }
        return out;
    };
    json s;
    s["mode"] = {{"type", "string"}, {"required", true},
                 {"values", {"analytic", "effective", "stochastic", "ensemble", "master", "verify"}}};
    s["grid"] = describe(keys::grid, defaults["grid"], {{"x_min", "number"}, {"x_max", "number"}, {"n_points", "integer >= 8"}});
    s["system"] = describe(keys::system, defaults["system"],
                           {{"mass", "number > 0"}, {"coupling_lambda", "number"},
                            {"sigma2", "number >= 0 | {knots: [t0 < t1 < ...], values: [per interval]}"}});
    s["system.potential"] = describe(keys::potential, defaults["system"]["potential"],
                                     {{"kind", "harmonic | soft_coulomb | tabulated"}, {"omega", "number"},
                                      {"a", "number > 0"}, {"values", "array[n_points]"}});
    s["system.drive"] = describe(keys::drive, defaults["system"]["drive"],
                                 {{"kind", "none | cosine  (F(t) = amplitude cos(omega t + phase))"},
                                  {"amplitude", "number"}, {"omega", "number"}, {"phase", "number"}});
    s["system.coupling"] = describe(keys::coupling, defaults["system"]["coupling"],
                                    {{"kind", "dipole | tabulated"}, {"values", "array[n_points]"}});
    s["system.sigma2 (piecewise)"] = describe(keys::schedule, json::object(), {{"knots", "array"}, {"values", "array"}});
    s["initial"] = describe(keys::initial, defaults["initial"],
                            {{"kind", "ground_state | gaussian"}, {"omega", "number (default: potential omega)"},
                             {"x0", "number"}, {"width", "number > 0 (std. dev. of |psi|^2)"}, {"k0", "number"}});
    s["evolution"] = describe(keys::evolution, defaults["evolution"],
                              {{"dt", "number > 0"}, {"n_steps", "integer"}, {"snapshot_stride", "integer >= 1"},
                               {"probes", "array of x"}});
    s["evolution.boundary"] = describe(keys::boundary, defaults["evolution"]["boundary"],
                                       {{"kind", "periodic | absorbing_mask"}, {"width", "number"}, {"strength", "number"}});
    s["ensemble"] = describe(keys::ensemble, defaults["ensemble"],
                             {{"n_realizations", "integer >= 1"}, {"master_seed", "unsigned 64-bit integer"},
                              {"max_concurrency", "integer (0: all cores)"}, {"average", "amplitude | density"}});
    s["master"] = describe(keys::master, defaults["master"],
                           {{"include_gain", "boolean"}, {"dt", "number > 0"}, {"n_steps", "integer"},
                            {"snapshot_stride", "integer >= 1"}, {"freeze_kinetic", "boolean"}});
    s["analytic"] = describe(keys::analytic, defaults["analytic"],
                             {{"t_max", "number > 0"}, {"n_times", "integer >= 1"},
                              {"omega1", "number (with omega2; default from system)"}, {"omega2", "number"}});
    s["outputs"] = describe(keys::outputs, defaults["outputs"], {{"directory", "path"}, {"format", "csv | json"}});
    s["verify"] = describe(keys::verify, defaults["verify"],
                           {{"criteria", "array of criterion names (empty: cross-module set)"},
                            {"realizations", "integer >= 2 (overrides ensemble sizes)"}});
    return s;
}

}  // namespace noisyqd
