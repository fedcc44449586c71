#include "elastica/cli.hpp"

#include "elastica/error.hpp"
#include "elastica/geometry.hpp"
#include "elastica/initdata.hpp"
#include "elastica/stationary.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <thread>

namespace elastica {

using json = nlohmann::ordered_json;

const char* const kTraceHeader = "step,t,tau,newton_iters,E,E_theta,E_rho,G_mass,G_sin,G_cos,lambda_mass,lambda_sin,"
                                 "lambda_cos,lth1,lth2,lrho,min_kappa,max_kappa,sign_changes,zeros,rho_min,rho_max,"
                                 "rho_var,rot_residual,axial_residual,embedded";

namespace {

std::mutex g_stderr;

void report(const std::string& where, const Error& e)
{
    std::lock_guard lock(g_stderr);
    std::cerr << "elastica: error " << to_string(e.code()) << ": " << where << ": " << e.what() << "\n";
}

std::string timestamp()
{
    const auto now = std::chrono::system_clock::now();
    return fmt::format("{}", std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

json config_json(const RunConfig& cfg)
{
    json j = json::object();
    for (const auto& [k, v] : cfg.resolved())
        j[k] = v;
    return j;
}

void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorCode::IoError, "cannot write " + path.string());
    out << j.dump(2) << "\n";
}

json number(double v)
{
    if (!std::isfinite(v))
        return nullptr;
    return v;
}

} // namespace

std::string format_trace_row(const TraceRow& r)
{
    return fmt::format("{},{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
                       "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{:.17g},{:.17g},{:.17g},{:.17g},"
                       "{:.17g},{}",
                       r.step, r.t, r.tau, r.newton_iters, r.energy, r.energy_theta, r.energy_rho, r.constraints[0],
                       r.constraints[1], r.constraints[2], r.lambda.mass, r.lambda.sin_closure, r.lambda.cos_closure,
                       r.lth1, r.lth2, r.lrho, r.min_kappa, r.max_kappa, r.sign_changes, r.zeros, r.rho_min,
                       r.rho_max, r.rho_var, r.rot_residual, r.axial_residual, r.embedded ? 1 : 0);
}

RunWriter::RunWriter(const std::filesystem::path& dir, const ModelParams& params, const Grid& grid)
    : dir_(dir), params_(params), grid_(grid)
{
    std::filesystem::create_directories(dir_);
    trace_.open(dir_ / "trace.csv", std::ios::binary);
    if (!trace_)
        fail(ErrorCode::IoError, "cannot write " + (dir_ / "trace.csv").string());
    trace_ << kTraceHeader << "\n";
}

void RunWriter::on_trace(const TraceRow& row)
{
    trace_ << format_trace_row(row) << "\n";
    trace_.flush();
}

void RunWriter::on_snapshot(const Snapshot& snap)
{
    write_snapshot(snap.state, grid_, dir_ / fmt::format("snapshot_{:06d}.csv", snap.step));
}

void write_snapshot(const State& state, const Grid& grid, const std::filesystem::path& path)
{
    const Eigen::VectorXd kappa = curvature(state, grid);
    const Curve curve = reconstruct_curve(state, grid);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorCode::IoError, "cannot write " + path.string());
    out << "i,s,theta,rho,kappa,x,y\n";
    for (int i = 0; i < grid.n; ++i)
        out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", i, grid.node(i), state.theta[i],
                           state.rho[i], kappa[i], curve.points(0, i), curve.points(1, i));
}

std::filesystem::path resolve_out_dir(const RunConfig& cfg)
{
    if (const char* env = std::getenv("ELASTICA_OUT"); env && *env)
        return env;
    if (cfg.out_dir.empty())
        fail(ErrorCode::ConfigError, "missing required key 'out_dir' (or set ELASTICA_OUT)");
    const std::filesystem::path p(cfg.out_dir);
    return p.is_absolute() ? p : cfg.base_dir / p;
}

namespace {

int run_flow_config(const std::filesystem::path& config_path, const std::filesystem::path* out_override)
{
    RunConfig cfg;
    std::filesystem::path dir;
    try {
        cfg = load_config(config_path);
        dir = out_override ? *out_override : resolve_out_dir(cfg);
    } catch (const Error& e) {
        report(config_path.string(), e);
        return exit_code::config_error;
    }

    json meta;
    meta["config"] = config_json(cfg);
    meta["config_file"] = config_path.string();
    int code = exit_code::ok;
    try {
        const Grid grid(cfg.n, cfg.model.L);
        State initial;
        try {
            initial = build_initial(cfg, grid);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::IncompatibleGrid)
                fail(ErrorCode::ConfigError, e.what());
            throw;
        }
        RunWriter writer(dir, cfg.model, grid);
        try {
            const Trajectory traj = run_flow(initial, cfg.model, grid, cfg.flow, &writer);
            save_state(traj.final_state, grid, dir / "final_state.csv");
            meta["termination"] = traj.termination == Termination::Stationary ? "stationary" : "final_time";
            meta["t"] = traj.t;
            meta["accepted_steps"] = traj.accepted_steps;
            meta["rejected_steps"] = traj.rejected_steps;
            // soft diagnostic, not asserted
            const double sum0 = grid.ds * initial.theta.sum(), sum1 = grid.ds * traj.final_state.theta.sum();
            meta["theta_integral"] = {{"initial", sum0}, {"final", sum1}, {"drift", sum1 - sum0}};
        } catch (const Error& e) {
            if (e.code() != ErrorCode::StepStalled)
                throw;
            report(config_path.string(), e);
            meta["termination"] = "stalled";
            meta["error"] = e.what();
            code = exit_code::stalled;
        }
    } catch (const Error& e) {
        report(config_path.string(), e);
        meta["termination"] = "error";
        meta["error"] = e.what();
        code = e.code() == ErrorCode::ConfigError ? exit_code::config_error : exit_code::failure;
    }
    meta["exit_code"] = code;
    meta["timestamp"] = timestamp();
    try {
        std::filesystem::create_directories(dir);
        write_json(dir / "meta.json", meta);
    } catch (const std::exception& e) {
        std::lock_guard lock(g_stderr);
        std::cerr << "elastica: error IoError: " << e.what() << "\n";
        if (code == exit_code::ok)
            code = exit_code::failure;
    }
    return code;
}

} // namespace

int cmd_flow(const std::filesystem::path& config_path) { return run_flow_config(config_path, nullptr); }

int cmd_flow(const std::vector<std::filesystem::path>& config_paths, int jobs)
{
    if (config_paths.size() == 1)
        return cmd_flow(config_paths.front());
    // with several configs, ELASTICA_OUT is a parent directory holding one subdirectory per config
    std::vector<std::optional<std::filesystem::path>> overrides(config_paths.size());
    if (const char* env = std::getenv("ELASTICA_OUT"); env && *env)
        for (std::size_t i = 0; i < config_paths.size(); ++i)
            overrides[i] = std::filesystem::path(env) / config_paths[i].stem();

    std::vector<int> codes(config_paths.size(), exit_code::ok);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < config_paths.size(); i = next++)
            codes[i] = run_flow_config(config_paths[i], overrides[i] ? &*overrides[i] : nullptr);
    };
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(config_paths.size())));
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w)
        pool.emplace_back(worker);
    worker();
    pool.clear();
    return *std::max_element(codes.begin(), codes.end());
}

int cmd_minimize(const std::filesystem::path& config_path)
{
    RunConfig cfg;
    std::filesystem::path dir;
    try {
        cfg = load_config(config_path);
        dir = resolve_out_dir(cfg);
    } catch (const Error& e) {
        report(config_path.string(), e);
        return exit_code::config_error;
    }
    try {
        const Grid grid(cfg.n, cfg.model.L);
        const State guess = build_initial(cfg, grid);
        const CriticalPoint cp = solve_stationary(guess, cfg.model, grid, cfg.flow.tol_abs(grid.n),
                                                  cfg.flow.newton_max_iter);
        std::filesystem::create_directories(dir);
        save_state(cp.state, grid, dir / "critical_point.csv");
        const StationaryResidual res = stationary_residual(cp.state, cfg.model, grid);
        json out;
        out["classification"] = std::string(to_string(cp.classification));
        out["residual_norm"] = cp.residual_norm;
        out["newton_iters"] = cp.newton_iters;
        out["stationary_residual"] = res.gradient;
        out["energy"] = discrete_energy(cp.state, cfg.model, grid).total;
        out["multipliers"] = {{"mass", cp.multipliers.mass},
                              {"sin", cp.multipliers.sin_closure},
                              {"cos", cp.multipliers.cos_closure}};
        out["config"] = config_json(cfg);
        out["timestamp"] = timestamp();
        write_json(dir / "result.json", out);
        std::cout << to_string(cp.classification) << " residual=" << fmt::format("{:.3e}", cp.residual_norm)
                  << " iters=" << cp.newton_iters << "\n";
        return exit_code::ok;
    } catch (const Error& e) {
        report(config_path.string(), e);
        switch (e.code()) {
        case ErrorCode::NewtonDivergence:
        case ErrorCode::SingularKKT:
        case ErrorCode::LinearSolveFailure: return exit_code::stalled;
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidArgument: return exit_code::config_error;
        default: return exit_code::failure;
        }
    }
}

int cmd_check(const std::filesystem::path& state_path, const std::filesystem::path& config_path)
{
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const Error& e) {
        report(config_path.string(), e);
        return exit_code::config_error;
    }
    try {
        const Grid grid(cfg.n, cfg.model.L);
        const State st = load_state(state_path, grid, cfg.model.omega);
        const ModelParams& m = cfg.model;
        const EnergySplit e = discrete_energy(st, m, grid);
        const Eigen::Vector3d g = discrete_constraints(st, m, grid);
        const Eigen::VectorXd kappa = curvature(st, grid);
        const StationaryResidual res = stationary_residual(st, m, grid);
        const Curve curve = reconstruct_curve(st, grid);
        const int k = cfg.flow.symmetry_k.value_or(1);
        const SymmetryReport sym = symmetry_residuals(st, m, grid, k);

        json out;
        out["energy"] = e.total;
        out["energy_theta"] = e.bending;
        out["energy_rho"] = e.diffusion;
        out["constraints"] = {{"mass", g[0]}, {"sin", g[1]}, {"cos", g[2]}};
        try {
            const ContinuousMultipliers cm = continuous_multipliers(st, m, grid);
            out["lambda_theta"] = {cm.lambda_theta1, cm.lambda_theta2};
            out["lambda_rho"] = cm.lambda_rho;
        } catch (const Error& err) {
            if (err.code() != ErrorCode::SingularPi)
                throw;
            out["lambda_theta"] = nullptr;
            out["lambda_rho"] = nullptr;
        }
        out["discrete_multipliers"] = {{"mass", res.lambda.mass},
                                       {"sin", res.lambda.sin_closure},
                                       {"cos", res.lambda.cos_closure}};
        out["stationary_residual"] = res.gradient;
        out["kappa"] = {{"min", kappa.minCoeff()},
                        {"max", kappa.maxCoeff()},
                        {"zeros", count_zeros(kappa)},
                        {"sign_changes", count_sign_changes(kappa)}};
        out["rho"] = {{"min", st.rho.minCoeff()}, {"max", st.rho.maxCoeff()}};
        out["symmetry"] = {{"k", k},
                           {"rot_residual", sym.rot_residual},
                           {"axial_residual", sym.axial_residual}};
        out["closure_defect"] = curve.closure_defect;
        bool embedded = false;
        try {
            embedded = is_embedded(curve);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::DegenerateEdge)
                throw;
        }
        out["embedded"] = embedded;
        out["embeddedness_threshold"] = number(embeddedness_threshold(m, st.rho.minCoeff(), st.rho.maxCoeff()));
        std::cout << out.dump(2) << "\n";
        return exit_code::ok;
    } catch (const Error& e) {
        report(state_path.string(), e);
        return e.code() == ErrorCode::ConfigError ? exit_code::config_error : exit_code::failure;
    }
}

int cmd_init(const std::filesystem::path& config_path, const std::filesystem::path& state_path)
{
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const Error& e) {
        report(config_path.string(), e);
        return exit_code::config_error;
    }
    try {
        const Grid grid(cfg.n, cfg.model.L);
        const State st = build_initial(cfg, grid);
        if (state_path.has_parent_path())
            std::filesystem::create_directories(state_path.parent_path());
        save_state(st, grid, state_path);
        return exit_code::ok;
    } catch (const Error& e) {
        report(config_path.string(), e);
        return e.code() == ErrorCode::ConfigError ? exit_code::config_error : exit_code::failure;
    }
}

int cli_main(int argc, char** argv)
{
    CLI::App app{"Constrained gradient flow of heterogeneous elastic curves"};
    app.require_subcommand(1);

    std::vector<std::string> flow_configs;
    int jobs = 1;
    auto* flow = app.add_subcommand("flow", "run the gradient flow for one or more configs");
    flow->add_option("config", flow_configs, "run configuration file(s)")->required();
    flow->add_option("-j,--jobs", jobs, "worker threads for several configs")->check(CLI::PositiveNumber);

    std::string min_config;
    auto* minimize = app.add_subcommand("minimize", "solve for a constrained critical point");
    minimize->add_option("config", min_config, "run configuration file")->required();

    std::string check_state, check_config;
    auto* check = app.add_subcommand("check", "print diagnostics of a state as JSON");
    check->add_option("state", check_state, "state file")->required();
    check->add_option("config", check_config, "run configuration file")->required();

    std::string init_config, init_state;
    auto* init = app.add_subcommand("init", "write the initial state of a config to a state file");
    init->add_option("config", init_config, "run configuration file")->required();
    init->add_option("state", init_state, "output state file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_code::ok : exit_code::config_error;
    }

    if (*flow) {
        std::vector<std::filesystem::path> paths(flow_configs.begin(), flow_configs.end());
        return cmd_flow(paths, jobs);
    }
    if (*minimize)
        return cmd_minimize(min_config);
    if (*init)
        return cmd_init(init_config, init_state);
    return cmd_check(check_state, check_config);
}

} // namespace elastica
