#include "elastica/config.hpp"

#include "elastica/error.hpp"
#include "elastica/initdata.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace elastica {

namespace {

const std::set<std::string, std::less<>> kKnownKeys = {
    "L",           "nu",           "mu",          "c0",             "omega",           "beta.family",
    "beta.params", "N",            "tau0",        "tau_min",        "tau_max",         "grow_factor",
    "grow_threshold", "shrink_threshold", "newton_tol_abs", "newton_tol_rel", "newton_max_iter", "t_final",
    "stationarity_eps", "symmetry_k", "symmetry_mode", "snapshot_every", "initial.kind", "initial.params",
    "initial.file", "out_dir",     "seed"};

const char* const kRequired[] = {"L", "nu", "mu", "c0", "omega", "beta.family", "N", "initial.kind"};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::string unquote(std::string_view v)
{
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
        return std::string(v.substr(1, v.size() - 2));
    return std::string(v);
}

double to_double(const std::string& key, std::string_view v)
{
    v = trim(v);
    if (v == "pi")
        return std::numbers::pi;
    if (v == "2pi")
        return 2.0 * std::numbers::pi;
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        fail(ErrorCode::ConfigError, "key '" + key + "': '" + std::string(v) + "' is not a number");
    return out;
}

long long to_integer(const std::string& key, std::string_view v)
{
    v = trim(v);
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        fail(ErrorCode::ConfigError, "key '" + key + "': '" + std::string(v) + "' is not an integer");
    return out;
}

std::vector<double> to_list(const std::string& key, std::string_view v)
{
    v = trim(v);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']')
            fail(ErrorCode::ConfigError, "key '" + key + "': unterminated list");
        v = trim(v.substr(1, v.size() - 2));
    }
    std::vector<double> out;
    if (v.empty())
        return out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = v.find(',', start);
        out.push_back(to_double(key, v.substr(start, pos == std::string_view::npos ? v.npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string list(const std::vector<double>& v)
{
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? ", " : "") + num(v[i]);
    return out + "]";
}

std::vector<Mode> mode_triples(const std::vector<double>& p, std::size_t offset, const char* what)
{
    if ((p.size() - offset) % 3 != 0)
        fail(ErrorCode::ConfigError, std::string(what) + ": initial.params must hold (l, a, b) triples");
    std::vector<Mode> modes;
    for (std::size_t i = offset; i < p.size(); i += 3)
        modes.push_back({static_cast<int>(p[i]), p[i + 1], p[i + 2]});
    return modes;
}

} // namespace

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir)
{
    std::map<std::string, std::string, std::less<>> kv;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        // '#' starts a comment unless inside quotes
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"')
                quoted = !quoted;
            else if (line[i] == '#' && !quoted) {
                line = line.substr(0, i);
                break;
            }
        }
        line = trim(line);
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (!kKnownKeys.contains(key))
            fail(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!kv.emplace(key, value).second)
            fail(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    for (const char* key : kRequired)
        if (!kv.contains(key))
            fail(ErrorCode::ConfigError, std::string("missing required key '") + key + "'");

    auto get = [&](const char* key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    RunConfig cfg;
    cfg.base_dir = base_dir;
    cfg.model.L = to_double("L", *get("L"));
    cfg.model.nu = to_double("nu", *get("nu"));
    cfg.model.mu = to_double("mu", *get("mu"));
    cfg.model.c0 = to_double("c0", *get("c0"));
    cfg.model.omega = static_cast<int>(to_integer("omega", *get("omega")));
    const std::vector<double> beta_params = get("beta.params") ? to_list("beta.params", *get("beta.params"))
                                                               : std::vector<double>{};
    try {
        cfg.model.beta = Stiffness::from_name(*get("beta.family"), beta_params);
        cfg.model.validate();
    } catch (const Error& e) {
        fail(ErrorCode::ConfigError, e.what());
    }
    cfg.n = static_cast<int>(to_integer("N", *get("N")));
    if (cfg.n < 8)
        fail(ErrorCode::ConfigError, "N must be at least 8");

    FlowConfig& f = cfg.flow;
    if (auto v = get("tau0")) f.tau0 = to_double("tau0", *v);
    if (auto v = get("tau_min")) f.tau_min = to_double("tau_min", *v);
    if (auto v = get("tau_max")) f.tau_max = to_double("tau_max", *v);
    if (auto v = get("grow_factor")) f.grow_factor = to_double("grow_factor", *v);
    if (auto v = get("grow_threshold")) f.grow_threshold = to_double("grow_threshold", *v);
    if (auto v = get("shrink_threshold")) f.shrink_threshold = to_double("shrink_threshold", *v);
    if (auto v = get("newton_tol_abs")) f.newton_tol_abs = to_double("newton_tol_abs", *v);
    if (auto v = get("newton_tol_rel")) f.newton_tol_rel = to_double("newton_tol_rel", *v);
    if (auto v = get("newton_max_iter")) f.newton_max_iter = static_cast<int>(to_integer("newton_max_iter", *v));
    if (auto v = get("t_final")) f.t_final = to_double("t_final", *v);
    if (auto v = get("stationarity_eps")) f.stationarity_eps = to_double("stationarity_eps", *v);
    if (auto v = get("symmetry_k")) f.symmetry_k = static_cast<int>(to_integer("symmetry_k", *v));
    if (auto v = get("symmetry_mode")) {
        if (*v == "increment")
            f.symmetry_mode = SymmetryMode::Increment;
        else if (*v == "verbatim")
            f.symmetry_mode = SymmetryMode::Verbatim;
        else
            fail(ErrorCode::ConfigError, "symmetry_mode must be 'increment' or 'verbatim'");
    }
    if (auto v = get("snapshot_every")) f.snapshot_every = static_cast<int>(to_integer("snapshot_every", *v));
    try {
        f.validate();
    } catch (const Error& e) {
        fail(ErrorCode::ConfigError, e.what());
    }
    if (f.symmetry_k && cfg.n % *f.symmetry_k != 0)
        fail(ErrorCode::ConfigError, "symmetry_k = " + std::to_string(*f.symmetry_k) + " does not divide N = "
                                         + std::to_string(cfg.n));

    cfg.initial_kind = *get("initial.kind");
    if (auto v = get("initial.params")) cfg.initial_params = to_list("initial.params", *v);
    if (auto v = get("initial.file")) cfg.initial_file = *v;
    if (auto v = get("out_dir")) cfg.out_dir = *v;
    if (auto v = get("seed")) {
        const long long s = to_integer("seed", *v);
        if (s < 0)
            fail(ErrorCode::ConfigError, "seed must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::ConfigError, "cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::map<std::string, std::string> RunConfig::resolved() const
{
    std::map<std::string, std::string> r;
    r["L"] = num(model.L);
    r["nu"] = num(model.nu);
    r["mu"] = num(model.mu);
    r["c0"] = num(model.c0);
    r["omega"] = std::to_string(model.omega);
    r["beta.family"] = model.beta.name();
    r["beta.params"] = list(model.beta.params());
    r["N"] = std::to_string(n);
    r["tau0"] = num(flow.tau0);
    r["tau_min"] = num(flow.tau_min);
    r["tau_max"] = num(flow.tau_max);
    r["grow_factor"] = num(flow.grow_factor);
    r["grow_threshold"] = num(flow.grow_threshold);
    r["shrink_threshold"] = num(flow.shrink_threshold);
    r["newton_tol_abs"] = num(flow.tol_abs(n));
    r["newton_tol_rel"] = num(flow.newton_tol_rel);
    r["newton_max_iter"] = std::to_string(flow.newton_max_iter);
    r["t_final"] = num(flow.t_final);
    r["stationarity_eps"] = num(flow.stationarity_eps);
    r["symmetry_k"] = flow.symmetry_k ? std::to_string(*flow.symmetry_k) : "none";
    r["symmetry_mode"] = flow.symmetry_mode == SymmetryMode::Increment ? "increment" : "verbatim";
    r["snapshot_every"] = std::to_string(flow.snapshot_every);
    r["initial.kind"] = initial_kind;
    r["initial.params"] = list(initial_params);
    r["initial.file"] = initial_file;
    r["out_dir"] = out_dir;
    r["seed"] = std::to_string(seed);
    return r;
}

State build_initial(const RunConfig& cfg, const Grid& grid)
{
    const ModelParams& m = cfg.model;
    const std::vector<double>& p = cfg.initial_params;
    const std::string& kind = cfg.initial_kind;
    auto file = [&]() {
        if (cfg.initial_file.empty())
            fail(ErrorCode::ConfigError, "initial.kind '" + kind + "' needs initial.file");
        const std::filesystem::path path(cfg.initial_file);
        return path.is_absolute() ? path : cfg.base_dir / path;
    };

    if (kind == "circle") {
        if (p.empty())
            return make_circle(m, grid);
        return make_circle(m, grid, evaluate_modes(mode_triples(p, 0, "circle"), grid));
    }
    if (kind == "perturbed_circle") {
        // (field, l, a, b) quadruples, field 0 = theta, 1 = rho
        if (p.size() % 4 != 0)
            fail(ErrorCode::ConfigError, "perturbed_circle: initial.params must hold (field, l, a, b) quadruples");
        std::vector<Mode> th, rh;
        for (std::size_t i = 0; i < p.size(); i += 4)
            (p[i] == 0.0 ? th : rh).push_back({static_cast<int>(p[i + 1]), p[i + 2], p[i + 3]});
        return make_perturbed_circle(m, grid, th, rh);
    }
    if (kind == "random_circle") {
        // (k, modes, theta_amp, rho_amp): random coefficients on multiples of k, seeded
        if (p.size() != 4)
            fail(ErrorCode::ConfigError, "random_circle: initial.params = (k, modes, theta_amp, rho_amp)");
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<Mode> th, rh;
        const int k = static_cast<int>(p[0]);
        for (int j = 1; j <= static_cast<int>(p[1]); ++j) {
            th.push_back({j * k, p[2] * u(rng) / j, p[2] * u(rng) / j});
            rh.push_back({j * k, p[3] * u(rng) / j, p[3] * u(rng) / j});
        }
        return make_perturbed_circle(m, grid, th, rh);
    }
    if (kind == "stadium") {
        // (aspect, smoothing[, rho_amp, rho_mode])
        if (p.size() != 2 && p.size() != 4)
            fail(ErrorCode::ConfigError, "stadium: initial.params = (aspect, smoothing[, rho_amp, rho_mode])");
        if (p.size() == 4)
            return make_stadium(m, grid, p[0], p[1],
                                evaluate_modes({{static_cast<int>(p[3]), p[2], 0.0}}, grid));
        return make_stadium(m, grid, p[0], p[1]);
    }
    if (kind == "neck") {
        NeckShape s;
        double* fields[] = {&s.half_gap, &s.neck, &s.corner, &s.descent, &s.transition, &s.rho_width, &s.rho_floor};
        if (p.size() > std::size(fields))
            fail(ErrorCode::ConfigError, "neck: too many initial.params");
        for (std::size_t i = 0; i < p.size(); ++i)
            *fields[i] = p[i];
        return make_neck(m, grid, s);
    }
    if (kind == "lemniscate")
        return make_lemniscate(m, grid, mode_triples(p, 0, "lemniscate"));
    if (kind == "file")
        return load_state(file(), grid, m.omega, &m);
    if (kind == "double_covering") {
        if (p.size() != 1)
            fail(ErrorCode::ConfigError, "double_covering: initial.params = (rotation)");
        if (grid.n % 2 != 0)
            fail(ErrorCode::ConfigError, "double_covering needs even N");
        const Grid half(grid.n / 2, grid.length / 2);
        const State single = load_state(file(), half, 0);
        return make_double_covering(single, p[0], m, grid);
    }
    fail(ErrorCode::ConfigError, "unknown initial.kind '" + kind + "'");
}

} // namespace elastica
