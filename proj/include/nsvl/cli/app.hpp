#pragma once

// Command-line front end: configuration parsing (flags over key=value file)
// and dispatch of each subcommand to the owning module.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsvl/catalog.hpp"
#include "nsvl/fixtures.hpp"
#include "nsvl/io/export.hpp"
#include "nsvl/kinematics.hpp"
#include "nsvl/surfaces.hpp"
#include "nsvl/symmetry.hpp"
#include "nsvl/verify.hpp"

namespace nsvl::cli {

enum class Command { List, Eval, Verify, Align, Transform, Brackets, Surfaces, Audit };

inline const std::vector<std::pair<Command, std::string>>& command_names() {
    static const std::vector<std::pair<Command, std::string>> names = {
        {Command::List, "list"},           {Command::Eval, "eval"},         {Command::Verify, "verify"},
        {Command::Align, "align"},         {Command::Transform, "transform"}, {Command::Brackets, "brackets"},
        {Command::Surfaces, "surfaces"},   {Command::Audit, "audit"}};
    return names;
}

inline std::string to_string(Command c) {
    for (const auto& [id, name] : command_names())
        if (id == c) return name;
    return "?";
}

inline std::string describe(Command c) {
    switch (c) {
    case Command::List: return "list the solution families";
    case Command::Eval: return "evaluate one family at a point";
    case Command::Verify: return "Navier-Stokes residual and reduced ODE check on a grid";
    case Command::Align: return "vorticity/stretching alignment sweep (CSV + VTK)";
    case Command::Transform: return "push a family forward under a symmetry generator";
    case Command::Brackets: return "check the commutator table on random points";
    case Command::Surfaces: return "invariant surfaces of the characteristic flow";
    case Command::Audit: return "vorticity formula and surface calibration audit";
    }
    return "";
}

inline constexpr std::uint64_t kDefaultSeed = 20240531;

enum ExitCode : int { kOk = 0, kUsage = 2, kTolerance = 3, kDomain = 4, kIo = 5 };

struct RunConfig {
    Command command = Command::List;
    std::optional<FamilyId> family;
    ParamSet params;
    std::optional<double> nu;
    std::optional<GridSpec> grid;  // unset: the family's standard grid
    DiffMode mode = DiffMode::Analytic;
    std::optional<Point4> point;

    symmetry::GeneratorSpec generator;
    double epsilon = 0.1;

    surfaces::CharConstants constants;
    std::string case_hint;
    bool velocity_space = false;
    int which = 0;  // 0: no mesh
    double level = 1.0;
    int lattice = 65;
    double extent = 2.0;
    double mesh_time = 0.0;
    int trajectories = 20;
    double tau_span = 5.0;

    std::size_t samples = 100;
    symmetry::BracketMode bracket_mode = symmetry::BracketMode::Analytic;
    std::optional<double> tol;
    double corrupt_u3 = 1.0;

    std::string out_dir = "nsvl_out";
    std::uint64_t seed = kDefaultSeed;

    std::map<std::string, std::string> resolved;  // effective key=value set, echoed in reports
    std::vector<std::string> warnings;
    std::vector<std::string> notes;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string trim(std::string s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const std::string s = trim(v);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(out))
        throw UsageError("invalid number '" + v + "' for " + key);
    return out;
}

inline long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const std::string s = trim(v);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw UsageError("invalid integer '" + v + "' for " + key);
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw UsageError("invalid boolean '" + v + "' for " + key);
}

inline Axis to_axis(const std::string& key, const std::string& v) {
    const auto parts = split(v, ':');
    if (parts.size() != 3) throw UsageError("axis " + key + " must be min:max:count, got '" + v + "'");
    const long long n = to_int(key, parts[2]);
    if (n < 1 || n > 100000) throw UsageError("axis " + key + ": count out of range");
    return {to_double(key, parts[0]), to_double(key, parts[1]), static_cast<int>(n)};
}

inline symmetry::FuncPreset to_preset(const std::string& key, const std::string& v) {
    const auto colon = v.find(':');
    if (colon == std::string::npos) throw UsageError(key + " must be kind:c0,c1,... (poly, exp or trig), got '" + v + "'");
    const std::string kind = trim(v.substr(0, colon));
    std::vector<double> c;
    for (const auto& p : split(v.substr(colon + 1), ',')) c.push_back(to_double(key, p));
    if (kind == "poly" && !c.empty()) return symmetry::FuncPreset::poly(c);
    if (kind == "exp" && c.size() == 2) return symmetry::FuncPreset::exp(c[0], c[1]);
    if (kind == "trig" && c.size() == 3) return symmetry::FuncPreset::trig(c[0], c[1], c[2]);
    throw UsageError("invalid payload '" + v + "' for " + key);
}

// Keys accepted in a config file and their command-line spelling.
struct KeySpec {
    std::string key;
    std::string flag;
    std::string help;
    bool is_flag = false;  // boolean switch without a value
};

inline const std::vector<KeySpec>& common_keys() {
    static const std::vector<KeySpec> keys = {
        {"run.seed", "--seed", "random seed (NSVL_SEED overrides)"},
        {"run.out", "--out", "output directory"},
        {"run.tol", "--tol", "tolerance override"},
    };
    return keys;
}

inline const std::vector<KeySpec>& family_keys() {
    static const std::vector<KeySpec> keys = {
        {"family.name", "--family", "solution family key"},
        {"family.nu", "--nu", "kinematic viscosity"},
        {"grid.x", "--x", "x (or r) axis min:max:count"},
        {"grid.y", "--y", "y (or theta) axis min:max:count"},
        {"grid.z", "--z", "z axis min:max:count"},
        {"grid.times", "--times", "comma-separated time slices"},
        {"grid.cylindrical", "--cylindrical", "read x, y axes as r, theta", true},
        {"run.mode", "--mode", "Analytic or FiniteDiff"},
    };
    return keys;
}

inline const std::vector<KeySpec>& command_keys(Command c) {
    static const std::vector<KeySpec> none;
    static const std::vector<KeySpec> eval = {{"eval.point", "--point", "x,y,z,t"}};
    static const std::vector<KeySpec> verify = {{"verify.corrupt_u3", "--corrupt-u3", "scale u3 by this factor"}};
    static const std::vector<KeySpec> transform = {
        {"transform.generator", "--generator", "V1..V9"},
        {"transform.payload", "--payload", "poly:c0,c1,..|exp:A,l|trig:A,B,w"},
        {"transform.constant", "--constant", "constant of V5..V9"},
        {"transform.epsilon", "--epsilon", "group parameter"},
    };
    static const std::vector<KeySpec> brackets = {
        {"brackets.samples", "--samples", "random points per relation"},
        {"brackets.mode", "--bracket-mode", "Analytic or FiniteDiff"},
        {"brackets.box", "--box", "half-width of the sampling box"},
    };
    static const std::vector<KeySpec> surf = {
        {"surfaces.a", "--a", "constant a"},   {"surfaces.b", "--b", "constant b"},   {"surfaces.c", "--c", "constant c"},
        {"surfaces.d", "--d", "constant d"},   {"surfaces.e", "--e", "constant e"},   {"surfaces.g0", "--g0", "constant g0"},
        {"surfaces.h0", "--h0", "constant h0"}, {"surfaces.r0", "--r0", "constant r0"}, {"surfaces.k0", "--k0", "constant k0"},
        {"surfaces.case", "--case", "case hint: I, II or an exact case id"},
        {"surfaces.velocity", "--velocity", "use the velocity-space invariants", true},
        {"surfaces.which", "--which", "invariant to mesh (1..3)"},
        {"surfaces.level", "--level", "mesh level"},
        {"surfaces.lattice", "--lattice", "mesh lattice nodes per axis"},
        {"surfaces.extent", "--extent", "mesh half-width"},
        {"surfaces.time", "--time", "time of the mesh slice"},
        {"surfaces.trajectories", "--trajectories", "trajectories for the drift check"},
        {"surfaces.tau", "--tau", "flow parameter span"},
    };
    switch (c) {
    case Command::Eval: return eval;
    case Command::Verify: return verify;
    case Command::Transform: return transform;
    case Command::Brackets: return brackets;
    case Command::Surfaces: return surf;
    default: return none;
    }
}

inline bool uses_family(Command c) {
    return c == Command::Eval || c == Command::Verify || c == Command::Align || c == Command::Transform ||
           c == Command::Audit;
}

inline std::set<std::string> all_param_names() {
    std::set<std::string> names;
    for (const auto& f : list_families())
        for (const auto& p : f.params) names.insert(p.name);
    return names;
}

inline bool known_key(const std::string& key) {
    const auto in = [&](const std::vector<KeySpec>& v) {
        return std::any_of(v.begin(), v.end(), [&](const KeySpec& k) { return k.key == key; });
    };
    if (in(common_keys()) || in(family_keys())) return true;
    for (const auto& [c, name] : command_names())
        if (in(command_keys(c))) return true;
    if (key.rfind("family.", 0) == 0) return all_param_names().count(key.substr(7)) != 0;
    return false;
}

} // namespace detail

// key=value lines; '#' starts a comment; keys carry a section prefix.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key=value: " + line);
        const std::string key = detail::trim(line.substr(0, eq));
        if (!detail::known_key(key)) throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        out[key] = detail::trim(line.substr(eq + 1));
    }
    return out;
}

struct ParseEnv {
    std::optional<std::string> seed;  // NSVL_SEED

    static ParseEnv from_process() {
        ParseEnv e;
        if (const char* s = std::getenv("NSVL_SEED")) e.seed = s;
        return e;
    }
};

// Thrown for --help; carries the text to print.
struct HelpRequested {
    std::string text;
};

namespace detail {

inline RunConfig resolve(Command cmd, const std::map<std::string, std::string>& kv) {
    RunConfig cfg;
    cfg.command = cmd;
    cfg.resolved = kv;
    const auto get = [&](const std::string& k) -> std::optional<std::string> {
        if (auto it = kv.find(k); it != kv.end()) return it->second;
        return std::nullopt;
    };
    const auto dbl = [&](const std::string& k, double& target) {
        if (auto v = get(k)) target = to_double(k, *v);
    };
    const auto positive_int = [&](const std::string& k, auto& target) {
        if (auto v = get(k)) {
            const long long n = to_int(k, *v);
            if (n < 1) throw UsageError(k + " must be >= 1");
            target = static_cast<std::remove_reference_t<decltype(target)>>(n);
        }
    };

    if (auto v = get("run.seed")) {
        const long long s = to_int("run.seed", *v);
        if (s < 0) throw UsageError("run.seed must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = get("run.out")) cfg.out_dir = *v;
    if (auto v = get("run.tol")) {
        cfg.tol = to_double("run.tol", *v);
        if (!(*cfg.tol > 0.0)) throw UsageError("run.tol must be > 0");
    }
    if (auto v = get("run.mode")) {
        if (*v == "Analytic" || *v == "analytic") cfg.mode = DiffMode::Analytic;
        else if (*v == "FiniteDiff" || *v == "finitediff" || *v == "fd") cfg.mode = DiffMode::FiniteDiff;
        else throw UsageError("run.mode must be Analytic or FiniteDiff, got '" + *v + "'");
    }

    if (auto v = get("family.name")) {
        cfg.family = family_from_key(*v);
        if (!cfg.family) throw UsageError("unknown family '" + *v + "' (see `list`)");
    }
    if (auto v = get("family.nu")) {
        cfg.nu = to_double("family.nu", *v);
        if (!(*cfg.nu > 0.0)) throw UsageError("family.nu must be > 0");
    }
    for (const auto& [k, v] : kv) {
        if (k.rfind("family.", 0) != 0 || k == "family.name" || k == "family.nu") continue;
        const std::string name = k.substr(7);
        if (cfg.family) {
            const auto names = family_info(*cfg.family).param_names();
            if (std::find(names.begin(), names.end(), name) == names.end())
                throw UsageError("parameter '" + name + "' does not belong to family " + family_info(*cfg.family).key);
        }
        cfg.params.set(name, to_double(k, v));
    }
    if (uses_family(cmd) && cmd != Command::Audit && !cfg.family) throw UsageError(to_string(cmd) + " requires --family");

    if (get("grid.x") || get("grid.y") || get("grid.z") || get("grid.times") || get("grid.cylindrical")) {
        GridSpec g = cfg.family ? family_info(*cfg.family).standard_grid : GridSpec{};
        if (auto v = get("grid.x")) g.x = to_axis("grid.x", *v);
        if (auto v = get("grid.y")) g.y = to_axis("grid.y", *v);
        if (auto v = get("grid.z")) g.z = to_axis("grid.z", *v);
        if (auto v = get("grid.times")) {
            g.times.clear();
            for (const auto& p : split(*v, ',')) g.times.push_back(to_double("grid.times", p));
        }
        if (auto v = get("grid.cylindrical")) g.cylindrical = to_bool("grid.cylindrical", *v);
        g.validate();
        cfg.grid = g;
    }

    if (auto v = get("eval.point")) {
        const auto p = split(*v, ',');
        if (p.size() != 4) throw UsageError("eval.point must be x,y,z,t");
        cfg.point = Point4{to_double("eval.point", p[0]), to_double("eval.point", p[1]), to_double("eval.point", p[2]),
                           to_double("eval.point", p[3])};
    }
    if (cmd == Command::Eval && !cfg.point) throw UsageError("eval requires --point x,y,z,t");
    dbl("verify.corrupt_u3", cfg.corrupt_u3);

    if (auto v = get("transform.generator")) {
        std::string s = *v;
        if (!s.empty() && (s[0] == 'V' || s[0] == 'v')) s = s.substr(1);
        const long long n = to_int("transform.generator", s);
        if (n < 1 || n > 9) throw UsageError("transform.generator must be V1..V9, got '" + *v + "'");
        cfg.generator.id = static_cast<symmetry::GenId>(n);
    } else if (cmd == Command::Transform) {
        throw UsageError("transform requires --generator");
    }
    if (auto v = get("transform.payload")) {
        if (!symmetry::has_payload(cfg.generator.id)) throw UsageError("--payload applies to V1..V4 only");
        cfg.generator.payload = to_preset("transform.payload", *v);
    }
    if (auto v = get("transform.constant")) {
        if (symmetry::has_payload(cfg.generator.id)) throw UsageError("--constant applies to V5..V9 only");
        cfg.generator.constant = to_double("transform.constant", *v);
    }
    dbl("transform.epsilon", cfg.epsilon);

    positive_int("brackets.samples", cfg.samples);
    if (auto v = get("brackets.mode")) {
        if (*v == "Analytic" || *v == "analytic") cfg.bracket_mode = symmetry::BracketMode::Analytic;
        else if (*v == "FiniteDiff" || *v == "finitediff" || *v == "fd") cfg.bracket_mode = symmetry::BracketMode::FiniteDiff;
        else throw UsageError("brackets.mode must be Analytic or FiniteDiff, got '" + *v + "'");
    }

    auto& k = cfg.constants;
    dbl("surfaces.a", k.a);
    dbl("surfaces.b", k.b);
    dbl("surfaces.c", k.c);
    dbl("surfaces.d", k.d);
    dbl("surfaces.e", k.e);
    dbl("surfaces.g0", k.g0);
    dbl("surfaces.h0", k.h0);
    dbl("surfaces.r0", k.r0);
    dbl("surfaces.k0", k.k0);
    if (auto v = get("surfaces.case")) cfg.case_hint = *v;
    if (auto v = get("surfaces.velocity")) cfg.velocity_space = to_bool("surfaces.velocity", *v);
    if (auto v = get("surfaces.which")) {
        const long long w = to_int("surfaces.which", *v);
        if (w < 1 || w > 3) throw UsageError("surfaces.which must be 1, 2 or 3");
        cfg.which = static_cast<int>(w);
    }
    dbl("surfaces.level", cfg.level);
    positive_int("surfaces.lattice", cfg.lattice);
    if (cfg.lattice < 2) throw UsageError("surfaces.lattice must be >= 2");
    dbl("surfaces.extent", cfg.extent);
    if (!(cfg.extent > 0.0)) throw UsageError("surfaces.extent must be > 0");
    dbl("surfaces.time", cfg.mesh_time);
    positive_int("surfaces.trajectories", cfg.trajectories);
    dbl("surfaces.tau", cfg.tau_span);
    if (!(cfg.tau_span > 0.0)) throw UsageError("surfaces.tau must be > 0");
    return cfg;
}

} // namespace detail

// Flags override config-file values (with a warning when they differ); an
// explicit --config FILE in args is read before the flags are applied.
inline RunConfig parse_config(const std::vector<std::string>& args, const std::optional<std::string>& config_text = {},
                              const ParseEnv& env = ParseEnv::from_process()) {
    CLI::App app{"nsvl: exact Navier-Stokes solutions, symmetries and invariant surfaces"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "show help for every subcommand");
    std::string config_path;
    std::map<std::string, std::string> flag_values;
    std::map<Command, std::map<std::string, CLI::Option*>> flag_options;
    std::map<std::string, bool> switches;
    std::vector<std::string> generic_params;
    std::map<Command, CLI::App*> subs;

    const auto add_keys = [&](Command cmd, CLI::App* sub, const std::vector<detail::KeySpec>& keys) {
        for (const auto& k : keys) {
            if (k.is_flag) {
                flag_options[cmd][k.key] = sub->add_flag(k.flag, switches[k.key], k.help);
            } else {
                flag_options[cmd][k.key] = sub->add_option(k.flag, flag_values[k.key], k.help);
            }
        }
    };
    for (const auto& [cmd, name] : command_names()) {
        CLI::App* sub = app.add_subcommand(name, describe(cmd));
        subs[cmd] = sub;
        sub->add_option("--config", config_path, "key=value configuration file");
        add_keys(cmd, sub, detail::common_keys());
        if (detail::uses_family(cmd)) {
            add_keys(cmd, sub, detail::family_keys());
            sub->add_option("--param", generic_params, "family parameter name=value (repeatable)");
            for (const auto& p : detail::all_param_names()) {
                const std::string key = "family." + p;
                flag_options[cmd][key] = sub->add_option("--" + p, flag_values[key], "family parameter");
            }
        }
        add_keys(cmd, sub, detail::command_keys(cmd));
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(std::move(rev));
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        throw UsageError(msg.empty() ? "invalid command line" : msg);
    }

    Command cmd = Command::List;
    for (const auto& [c, sub] : subs)
        if (sub->parsed()) cmd = c;

    std::map<std::string, std::string> kv;
    if (config_text) kv = parse_config_text(*config_text);
    if (!config_path.empty()) {
        const auto file = parse_config_text(io::read_text(config_path));
        for (const auto& [k, v] : file) kv[k] = v;
    }
    std::vector<std::string> warnings;
    const auto apply_flag = [&](const std::string& key, const std::string& value, const std::string& spelling) {
        if (auto it = kv.find(key); it != kv.end() && it->second != value)
            warnings.push_back("flag " + spelling + " overrides config value " + key + "=" + it->second);
        kv[key] = value;
    };
    for (const auto& [key, opt] : flag_options[cmd]) {
        if (opt->count() == 0) continue;
        const auto sw = switches.find(key);
        apply_flag(key, sw != switches.end() ? (sw->second ? "true" : "false") : flag_values[key], opt->get_name());
    }
    for (const auto& p : generic_params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw UsageError("--param expects name=value, got '" + p + "'");
        const std::string name = detail::trim(p.substr(0, eq));
        if (!detail::all_param_names().count(name)) throw UsageError("unknown family parameter '" + name + "'");
        apply_flag("family." + name, detail::trim(p.substr(eq + 1)), "--param " + name);
    }
    if (env.seed) {
        if (auto it = kv.find("run.seed"); it != kv.end() && it->second != *env.seed)
            warnings.push_back("NSVL_SEED overrides seed " + it->second);
        kv["run.seed"] = *env.seed;
    }
    RunConfig cfg = detail::resolve(cmd, kv);
    cfg.warnings = std::move(warnings);
    return cfg;
}

// ---------------------------------------------------------------------------
// Dispatch

struct RunResult {
    int exit_code = kOk;
    io::OutputManifest manifest;
    std::string message;
};

namespace detail {

inline io::json config_echo(const RunConfig& cfg) {
    io::json c = io::json::object();
    c["command"] = to_string(cfg.command);
    for (const auto& [k, v] : cfg.resolved)
        if (k != "run.out" && k != "run.seed") c[k] = v;
    return c;
}

inline FlowField build_field(const RunConfig& cfg) {
    const FamilyId id = *cfg.family;
    return make_field(id, cfg.params, cfg.nu.value_or(family_info(id).default_nu));
}

inline GridSpec grid_for(const RunConfig& cfg) { return cfg.grid.value_or(family_info(*cfg.family).standard_grid); }

// Residual budget of the reduced profile equations per family.
inline double ode_tolerance(FamilyId id) {
    switch (id) {
    case FamilyId::BurgersVortex: return 1e-8;
    case FamilyId::BurgersLundgren:
    case FamilyId::SechVortex: return 1e-6;
    default: return 1e-7;
    }
}

inline surfaces::CharConstants apply_case_hint(const RunConfig& cfg, std::vector<std::string>& notes) {
    surfaces::CharConstants k = cfg.constants;
    const std::string& h = cfg.case_hint;
    if (h.empty()) return k;
    if (h == "I" || h == "II") {
        if (h == "II" && k.a != 0.0) throw UsageError("case hint II requires a = 0");
        if (h == "I" && k.d == 0.0 && k.a == 0.0) throw UsageError("case hint I requires a != 0 or d != 0");
        if (h == "II" && k.d == 0.0 && k.b != 0.0 && k.c == 0.0 && k.e == 0.0 && k.r0 == 0.0) {
            k.r0 = 1.0;
            notes.push_back("case hint II: r0 set to 1 to select the screw-flow subcase");
        }
        if (h == "I" && k.a == 0.0 && k.b == 0.0 && k.e == 0.0 && k.g0 == 0.0) {
            k.g0 = 1.0;
            notes.push_back("case hint I: g0 set to 1 to select the translation subcase");
        }
        const std::string got = surfaces::to_string(surfaces::select_case(k));
        const bool family_ok = h == "I" ? (got.rfind("GeneralI", 0) == 0 || (got.size() == 2 && got[0] == 'I'))
                                        : (got.rfind("CaseII", 0) == 0 || got.rfind("II", 0) == 0);
        if (!family_ok) throw CaseError("constants select " + got + ", not a Case " + h + " set");
        return k;
    }
    const std::string got = surfaces::to_string(surfaces::select_case(k));
    if (got != h) throw CaseError("constants select " + got + ", case hint asks for " + h);
    return k;
}

inline io::json constants_json(const surfaces::CharConstants& k) {
    return {{"a", k.a}, {"b", k.b}, {"c", k.c}, {"d", k.d}, {"e", k.e}, {"g0", k.g0}, {"h0", k.h0}, {"r0", k.r0}, {"k0", k.k0}};
}

inline int run_list(const RunConfig& cfg, io::OutputSink& sink, std::ostream& out) {
    io::json fams = io::json::array();
    for (const auto& f : list_families()) {
        io::json params = io::json::array();
        std::string names;
        for (const auto& p : f.params) {
            params.push_back({{"name", p.name}, {"default", p.default_value}, {"description", p.description}});
            names += (names.empty() ? "" : ",") + p.name;
        }
        fams.push_back({{"key", f.key}, {"name", f.name}, {"default_nu", f.default_nu}, {"params", params},
                        {"formula", f.formula}, {"domain", f.domain}});
        out << f.key << "  [" << names << "]  " << f.domain << "\n";
    }
    sink.write("families.json", "json", io::wrap_report(config_echo(cfg), cfg.seed, fams).dump(2) + "\n");
    return kOk;
}

inline int run_eval(const RunConfig& cfg, io::OutputSink& sink, std::ostream& out) {
    const FlowField field = build_field(cfg);
    const Point4 p = *cfg.point;
    if (auto why = field.reject(p)) throw DomainError("point rejected: " + *why);
    const FlowJet j = eval_jet(field, p, cfg.mode);
    const AlignmentSample s = classify_alignment(j, AlignmentFloors::for_rate(field.rate()));
    const PointResidual r = point_residual(j, field.nu());
    io::json rep = {{"point", {p.x, p.y, p.z, p.t}},
                    {"u", io::vec(j.state.u)},
                    {"p", io::num(j.state.p)},
                    {"vorticity", io::vec(s.omega)},
                    {"alpha", io::num(s.alpha)},
                    {"chi", io::num(s.chi_norm)},
                    {"phi", io::num(s.phi)},
                    {"flag", to_string(s.flag)},
                    {"momentum_residual", io::vec(r.momentum)},
                    {"divergence", io::num(r.divergence)}};
    const std::string text = io::wrap_report(config_echo(cfg), cfg.seed, rep).dump(2) + "\n";
    sink.write("eval.json", "json", text);
    out << rep.dump(2) << "\n";
    return kOk;
}

inline int run_verify(const RunConfig& cfg, io::OutputSink& sink, std::ostream& out) {
    const FlowField field = build_field(cfg);
    const GridSpec grid = grid_for(cfg);
    ResidualReport rep;
    if (cfg.corrupt_u3 != 1.0) {
        const fixtures::ScaledComponent<FlowField> bad{field, 2, cfg.corrupt_u3};
        rep = ns_residual(bad, grid, cfg.mode);
    } else {
        rep = ns_residual(field, grid, cfg.mode);
    }
    const double tol = cfg.tol.value_or(residual_tolerance(field.rate(), cfg.mode));
    bool ok = rep.within(tol);
    io::json body = {{"residual", io::residual_json(rep)}, {"tolerance", tol}, {"pass", ok}};
    try {
        const OdeCheckReport ode = reduced_ode_check(field);
        const double otol = ode_tolerance(field.family());
        const bool ode_ok = ode.max_residual() <= otol;
        body["ode"] = io::ode_json(ode);
        body["ode"]["tolerance"] = otol;
        body["ode"]["pass"] = ode_ok;
        ok = ok && (cfg.corrupt_u3 != 1.0 || ode_ok);
    } catch (const UnsupportedFamily&) {
    }
    body["pass"] = ok;
    sink.write("residual.json", "json", io::wrap_report(config_echo(cfg), cfg.seed, io::residual_json(rep)).dump(2) + "\n");
    sink.write("verify.json", "json", io::wrap_report(config_echo(cfg), cfg.seed, body).dump(2) + "\n");
    out << "max_mom=" << io::fmt17(rep.max_momentum()) << " max_div=" << io::fmt17(rep.max_div) << " tol=" << io::fmt17(tol)
        << " points=" << rep.n_points << " rejected=" << rep.n_rejected << (ok ? " PASS" : " FAIL") << "\n";
    return ok ? kOk : kTolerance;
}

inline int run_align(const RunConfig& cfg, io::OutputSink& sink, std::ostream& out) {
    const FlowField field = build_field(cfg);
    const GridSpec grid = grid_for(cfg);
    const SweepTable table = alignment_sweep(field, grid, cfg.mode);
    sink.write("alignment.csv", "csv", io::alignment_csv(table, cfg.seed));
    const auto slices = io::sweep_vtk(grid, table, cfg.seed);
    for (std::size_t i = 0; i < slices.size(); ++i) sink.write("alignment_t" + std::to_string(i) + ".vtk", "vtk", slices[i]);
    std::size_t ok = 0, dv = 0, ds = 0;
    double phi_max = 0.0;
    for (const auto& r : table.rows) {
        switch (r.sample.flag) {
        case AlignmentFlag::Ok:
            ++ok;
            phi_max = std::max(phi_max, r.sample.phi);
            break;
        case AlignmentFlag::DegenerateVorticity: ++dv; break;
        case AlignmentFlag::DegenerateStretch: ++ds; break;
        }
    }
    io::json body = {{"rows", table.rows.size()}, {"rejected", table.rejected.size()}, {"ok", ok},
                     {"degenerate_vorticity", dv},  {"degenerate_stretch", ds},        {"max_phi", phi_max}};
    sink.write("alignment.json", "json", io::wrap_report(config_echo(cfg), cfg.seed, body).dump(2) + "\n");
    out << "rows=" << table.rows.size() << " ok=" << ok << " degenerate_vorticity=" << dv << " degenerate_stretch=" << ds
        << " max_phi=" << io::fmt17(phi_max) << "\n";
    return kOk;
}

inline int run_transform(const RunConfig& cfg, io::OutputSink& sink, std::ostream& out) {
    const FlowField field = build_field(cfg);
    const GridSpec grid = grid_for(cfg);
    const symmetry::GroupElement g{cfg.generator, cfg.epsilon};
    const auto base_pts = grid.points();
    const ResidualReport base = ns_residual_points(field, base_pts, cfg.mode);
    const auto pushed = symmetry::pushforward_field(field, g);
    const ResidualReport moved = ns_residual_points(pushed, symmetry::map_points(g, base_pts), cfg.mode);
    const double floor = 1e-12 * (1.0 + field.rate() * field.rate());
    const double factor = cfg.tol.value_or(10.0);
    const double bound_mom = factor * std::max(base.max_momentum(), floor);
    const double bound_div = factor * std::max(base.max_div, floor);
    const bool ok = moved.max_momentum() <= bound_mom && moved.max_div <= bound_div;
    io::json body = {{"generator", cfg.generator.describe()},
                     {"epsilon", cfg.epsilon},
                     {"base", io::residual_json(base)},
                     {"pushforward", io::residual_json(moved)},
                     {"bound_momentum", bound_mom},
                     {"bound_divergence", bound_div},
                     {"pass", ok}};
    sink.write("transform.json", "json", io::wrap_report(config_echo(cfg), cfg.seed, body).dump(2) + "\n");
    out << cfg.generator.describe() << " eps=" << io::fmt17(cfg.epsilon) << " base=" << io::fmt17(base.max_momentum())
        << " pushed=" << io::fmt17(moved.max_momentum()) << (ok ? " PASS" : " FAIL") << "\n";
    return ok ? kOk : kTolerance;
}

inline int run_brackets(const RunConfig& cfg, io::OutputSink& sink, std::ostream& out) {
    symmetry::SampleSpace space;
    space.seed = cfg.seed;
    if (auto it = cfg.resolved.find("brackets.box"); it != cfg.resolved.end()) {
        space.box = to_double("brackets.box", it->second);
        if (!(space.box > 0.0)) throw UsageError("brackets.box must be > 0");
    }
    const auto table = symmetry::verify_bracket_table(cfg.samples, cfg.tol.value_or(1e-6), space, cfg.bracket_mode);
    sink.write("brackets.json", "json", io::wrap_report(config_echo(cfg), cfg.seed, io::bracket_json(table)).dump(2) + "\n");
    for (const auto& r : table.relations)
        out << r.id << ' ' << (r.pass ? "pass" : "FAIL") << " max_dev=" << io::fmt17(r.max_deviation()) << "\n";
    out << "closure " << (table.closure.pass ? "pass" : "FAIL") << " max_residual=" << io::fmt17(table.closure.max_residual)
        << "\n";
    return table.all_pass() ? kOk : kTolerance;
}

inline int run_surfaces(RunConfig cfg, io::OutputSink& sink, std::ostream& out) {
    const surfaces::CharConstants k = apply_case_hint(cfg, cfg.notes);
    surfaces::InvariantSet inv = surfaces::make_invariants(k);
    if (cfg.velocity_space) inv = surfaces::velocity_space_invariants(inv);
    surfaces::DriftOptions opt;
    opt.n_traj = cfg.trajectories;
    opt.tau_span = cfg.tau_span;
    opt.seed = cfg.seed;
    const auto drift = surfaces::verify_invariance(inv, opt);
    const double tol = cfg.tol.value_or(1e-7);
    const bool ok = drift.max_drift() <= tol;

    io::json members = io::json::array();
    for (const auto& m : inv.members)
        members.push_back({{"name", m.name}, {"formula_id", m.formula_id}, {"formula", m.formula}, {"period", m.period}});
    io::json body = {{"case", surfaces::to_string(inv.case_id)},
                     {"base_case", surfaces::to_string(inv.base_case)},
                     {"constants", constants_json(k)},
                     {"members", members},
                     {"invariance", io::invariance_json(drift)},
                     {"tolerance", tol},
                     {"pass", ok},
                     {"notes", cfg.notes}};
    if (inv.cylinder)
        body["cylinder"] = {{"point", io::vec(inv.cylinder->point)}, {"direction", io::vec(inv.cylinder->direction)}};
    if (cfg.which > 0) {
        const surfaces::Mesh mesh =
            surfaces::surface_mesh(inv, cfg.which, cfg.level, surfaces::mesh_grid(cfg.extent, cfg.lattice, cfg.mesh_time));
        const auto& f = inv.member(cfg.which);
        double worst = 0.0;
        for (const auto& v : mesh.vertices)
            worst = std::max(worst, std::abs(f.value({v[0], v[1], v[2], cfg.mesh_time}) - cfg.level));
        const std::string name = "surface_" + std::to_string(cfg.which) + ".vtk";
        sink.write(name, "vtk",
                   io::mesh_vtk(mesh, "invariant " + f.name + " = " + io::fmt17(cfg.level) + " case " +
                                          surfaces::to_string(inv.case_id) + " seed=" + std::to_string(cfg.seed)));
        body["mesh"] = {{"file", name},       {"which", cfg.which},       {"level", cfg.level},
                        {"vertices", mesh.vertices.size()}, {"triangles", mesh.triangles.size()},
                        {"cell", mesh.cell},  {"max_level_residual", worst}};
    }
    sink.write("surfaces.json", "json", io::wrap_report(config_echo(cfg), cfg.seed, body).dump(2) + "\n");
    out << surfaces::to_string(inv.case_id);
    for (const auto& m : drift.members) out << ' ' << m.name << "=" << io::fmt17(m.max_drift);
    out << (ok ? " PASS" : " FAIL") << "\n";
    return ok ? kOk : kTolerance;
}

inline int run_audit(const RunConfig& cfg, io::OutputSink& sink, std::ostream& out) {
    io::json vort = io::json::array();
    const auto audit_one = [&](FamilyId id) {
        const AuditReport rep = cfg.family ? vorticity_formula_audit(build_field(cfg)) : vorticity_formula_audit(id);
        for (const auto& e : rep.entries)
            out << e.formula_id << ' ' << e.verdict << " factor=" << io::fmt17(e.correction_factor) << "\n";
        vort.push_back(io::audit_json(rep));
    };
    if (cfg.family) {
        audit_one(*cfg.family);
    } else {
        for (FamilyId id : kAllFamilies) {
            try {
                audit_one(id);
            } catch (const UnsupportedFamily&) {
            }
        }
    }
    surfaces::DriftOptions opt;
    opt.seed = cfg.seed;
    const auto cal = surfaces::calibration_audit(opt);
    for (const auto& e : cal) out << e.formula_id << ": " << e.finding << "\n";
    sink.write("vorticity_audit.json", "json", io::wrap_report(config_echo(cfg), cfg.seed, vort).dump(2) + "\n");
    sink.write("surfaces_audit.json", "json", io::wrap_report(config_echo(cfg), cfg.seed, io::calibration_json(cal)).dump(2) + "\n");
    return kOk;
}

} // namespace detail

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e)) return kIo;
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ParamError*>(&e) ||
        dynamic_cast<const UnsupportedFamily*>(&e) || dynamic_cast<const NotImplementedError*>(&e))
        return kUsage;
    if (dynamic_cast<const Error*>(&e)) return kDomain;
    if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kIo;
    return kDomain;
}

inline RunResult run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    RunResult res;
    for (const auto& w : cfg.warnings) err << "warning: " << w << "\n";
    io::OutputSink sink(cfg.out_dir, to_string(cfg.command), cfg.seed);
    try {
        switch (cfg.command) {
        case Command::List: res.exit_code = detail::run_list(cfg, sink, out); break;
        case Command::Eval: res.exit_code = detail::run_eval(cfg, sink, out); break;
        case Command::Verify: res.exit_code = detail::run_verify(cfg, sink, out); break;
        case Command::Align: res.exit_code = detail::run_align(cfg, sink, out); break;
        case Command::Transform: res.exit_code = detail::run_transform(cfg, sink, out); break;
        case Command::Brackets: res.exit_code = detail::run_brackets(cfg, sink, out); break;
        case Command::Surfaces: res.exit_code = detail::run_surfaces(cfg, sink, out); break;
        case Command::Audit: res.exit_code = detail::run_audit(cfg, sink, out); break;
        }
    } catch (const std::exception& e) {
        res.exit_code = exit_code_for(e);
        res.message = e.what();
        err << "error: " << e.what() << "\n";
    }
    try {
        sink.finish();
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        if (res.exit_code == kOk) res.exit_code = kIo;
    }
    res.manifest = sink.manifest();
    return res;
}

// Entry point shared by the executable and the tests.
inline int main_with_args(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                          const ParseEnv& env = ParseEnv::from_process()) {
    RunConfig cfg;
    try {
        cfg = parse_config(args, std::nullopt, env);
    } catch (const HelpRequested& h) {
        out << h.text;
        return kOk;
    } catch (const std::exception& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return run(cfg, out, err).exit_code;
}

} // namespace nsvl::cli
