#include "elastica/cli.hpp"
#include "elastica/config.hpp"
#include "elastica/error.hpp"
#include "elastica/initdata.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace elastica;
using elastica::test::pi;
namespace fs = std::filesystem;

namespace {

const char* const kBase = R"(# small flow
L = 2pi
nu = 0
mu = 0.3
c0 = 0
omega = 1
beta.family = "exponential"
beta.params = 1
N = 48
initial.kind = "perturbed_circle"
initial.params = 0, 2, 0.2, 0.1, 1, 2, 0.1, 0
t_final = 0.05
snapshot_every = 5
)";

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "elastica_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text, const std::string& name = "run.conf")
{
    const fs::path p = dir / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string drop_key(std::string text, const std::string& key)
{
    const auto pos = text.find("\n" + key + " =");
    REQUIRE(pos != std::string::npos);
    const auto end = text.find('\n', pos + 1);
    return text.erase(pos, end - pos);
}

// captures std::cout and std::cerr for the lifetime of the object
struct Capture {
    std::stringstream out, err;
    std::streambuf* old_out;
    std::streambuf* old_err;
    Capture() : old_out(std::cout.rdbuf(out.rdbuf())), old_err(std::cerr.rdbuf(err.rdbuf())) {}
    ~Capture()
    {
        std::cout.rdbuf(old_out);
        std::cerr.rdbuf(old_err);
    }
};

struct OutEnv {
    explicit OutEnv(const fs::path& p) { ::setenv("ELASTICA_OUT", p.c_str(), 1); }
    ~OutEnv() { ::unsetenv("ELASTICA_OUT"); }
};

} // namespace

TEST_CASE("config parsing")
{
    const RunConfig c = parse_config(std::string(kBase) + "out_dir = \"runs/a\"  # trailing comment\n", "/base");
    CHECK(c.model.L == doctest::Approx(2 * pi).epsilon(1e-15));
    CHECK(c.model.mu == 0.3);
    CHECK(c.n == 48);
    CHECK(c.model.beta.name() == "exponential");
    CHECK(c.initial_kind == "perturbed_circle");
    CHECK(c.initial_params.size() == 8);
    CHECK(c.out_dir == "runs/a");
    CHECK(c.flow.t_final == 0.05);
    CHECK(c.flow.snapshot_every == 5);

    const auto resolved = c.resolved();
    for (const char* key : {"L", "nu", "mu", "c0", "omega", "beta.family", "beta.params", "N", "tau0", "tau_min",
                            "tau_max", "grow_factor", "grow_threshold", "shrink_threshold", "newton_tol_abs",
                            "newton_tol_rel", "newton_max_iter", "t_final", "stationarity_eps", "symmetry_mode",
                            "snapshot_every", "initial.kind", "initial.params", "out_dir", "seed"})
        CHECK_MESSAGE(resolved.count(key) == 1, key);

    auto code = [](const std::string& text) {
        try {
            (void)parse_config(text);
        } catch (const Error& e) {
            return std::pair{e.code(), std::string(e.what())};
        }
        return std::pair{ErrorCode::InvalidArgument, std::string("no error")};
    };
    const auto missing = code(drop_key(kBase, "mu"));
    CHECK(missing.first == ErrorCode::ConfigError);
    CHECK(missing.second.find("mu") != std::string::npos);
    CHECK(code(std::string(kBase) + "bogus = 1\n").first == ErrorCode::ConfigError);
    CHECK(code(std::string(kBase) + "mu = 2\n").first == ErrorCode::ConfigError);
    CHECK(code(std::string(kBase) + "symmetry_k = 5\n").first == ErrorCode::ConfigError);
    CHECK(code(std::string(kBase) + "symmetry_mode = \"sideways\"\n").first == ErrorCode::ConfigError);
    CHECK(code(std::string(kBase) + "tau0 = abc\n").first == ErrorCode::ConfigError);
    CHECK(code(std::string(kBase) + "grow_factor = 0.5\n").first == ErrorCode::ConfigError);
    CHECK(parse_config(std::string(kBase) + "symmetry_k = 4\nsymmetry_mode = \"verbatim\"\n").flow.symmetry_mode
          == SymmetryMode::Verbatim);
}

TEST_CASE("flow command writes reproducible outputs")
{
    const fs::path dir = scratch("flow");
    const fs::path conf = write_config(dir, kBase);
    std::string first_trace;
    for (int run = 0; run < 2; ++run) {
        const fs::path out = dir / ("out" + std::to_string(run));
        OutEnv env(out);
        REQUIRE(cmd_flow(conf) == exit_code::ok);
        const std::string trace = read_text(out / "trace.csv");
        CHECK(trace.rfind(std::string(kTraceHeader) + "\n", 0) == 0);
        CHECK(trace.find('\r') == std::string::npos);
        if (run == 0)
            first_trace = trace;
        else
            CHECK(trace == first_trace);
        CHECK(fs::exists(out / "final_state.csv"));
        CHECK(fs::exists(out / "snapshot_000000.csv"));
        CHECK(fs::exists(out / "snapshot_000005.csv"));

        const auto meta = nlohmann::json::parse(read_text(out / "meta.json"));
        CHECK(meta["exit_code"] == 0);
        CHECK(meta["termination"] == "final_time");
        CHECK(meta["config"].contains("newton_tol_abs"));
        CHECK(meta["config"].contains("grow_factor"));
        CHECK(meta.contains("timestamp"));
        CHECK(meta["theta_integral"]["drift"].get<double>() ==
              doctest::Approx(meta["theta_integral"]["final"].get<double>() -
                              meta["theta_integral"]["initial"].get<double>()));

        const Grid g(48, 2 * pi);
        const State fin = load_state(out / "final_state.csv", g, 1);
        const State snap = load_state(out / "snapshot_000000.csv", g, 1);
        CHECK(fin.size() == 48);
        CHECK(snap.size() == 48);
        const std::string snap_text = read_text(out / "snapshot_000000.csv");
        CHECK(snap_text.rfind("i,s,theta,rho,kappa,x,y\n", 0) == 0);
    }
}

TEST_CASE("flow command exit codes")
{
    const fs::path dir = scratch("codes");
    OutEnv env(dir / "out");
    {
        Capture cap;
        CHECK(cmd_flow(write_config(dir, drop_key(kBase, "beta.family"), "a.conf")) == exit_code::config_error);
        CHECK(cap.err.str().find("beta.family") != std::string::npos);
        CHECK(cap.err.str().find("ConfigError") != std::string::npos);
    }
    {
        Capture cap;
        CHECK(cmd_flow(write_config(dir, std::string(kBase) + "symmetry_k = 5\n", "b.conf"))
              == exit_code::config_error);
    }
    {
        Capture cap;
        CHECK(cmd_flow(dir / "does_not_exist.conf") == exit_code::config_error);
    }
    {
        // a fixed, far too large step that never converges stalls the run
        Capture cap;
        const std::string stall = std::string(kBase) + "tau0 = 1e6\ntau_min = 1e6\ntau_max = 1e6\n"
                                  "newton_max_iter = 1\n";
        CHECK(cmd_flow(write_config(dir, stall, "c.conf")) == exit_code::stalled);
        const auto meta = nlohmann::json::parse(read_text(dir / "out" / "meta.json"));
        CHECK(meta["termination"] == "stalled");
    }
}

TEST_CASE("several configs run in parallel into separate directories")
{
    const fs::path dir = scratch("multi");
    const fs::path a = write_config(dir, kBase, "first.conf");
    const fs::path b = write_config(dir, drop_key(kBase, "c0") + "\nc0 = 0.5\n", "second.conf");
    const fs::path c = write_config(dir, drop_key(kBase, "N"), "third.conf");
    OutEnv env(dir / "out");
    Capture cap;
    CHECK(cmd_flow({a, b, c}, 2) == exit_code::config_error);
    CHECK(fs::exists(dir / "out" / "first" / "trace.csv"));
    CHECK(fs::exists(dir / "out" / "second" / "trace.csv"));
    CHECK(read_text(dir / "out" / "first" / "trace.csv") != read_text(dir / "out" / "second" / "trace.csv"));
}

TEST_CASE("check command")
{
    const fs::path dir = scratch("check");
    const std::string circle_conf = R"(L = 2pi
nu = 0
mu = 1
c0 = 0
omega = 1
beta.family = "double_well"
beta.params = 1
N = 720
initial.kind = "circle"
)";
    const fs::path conf = write_config(dir, circle_conf);
    const Grid g(720, 2 * pi);
    ModelParams p;
    p.L = 2 * pi;
    p.beta = Stiffness::double_well(1.0);
    save_state(make_circle(p, g), g, dir / "circle.csv");
    Capture cap;
    REQUIRE(cmd_check(dir / "circle.csv", conf) == exit_code::ok);
    const auto j = nlohmann::json::parse(cap.out.str());
    CHECK(j["energy"].get<double>() == doctest::Approx(2 * pi).epsilon(1e-12));
    CHECK(std::abs(j["lambda_theta"][0].get<double>()) <= 1e-12);
    CHECK(std::abs(j["lambda_theta"][1].get<double>()) <= 1e-12);
    CHECK(j["embedded"] == true);
    CHECK(j.contains("embeddedness_threshold"));
    CHECK(j.contains("stationary_residual"));
    CHECK(j.contains("symmetry"));

    ModelParams q = p;
    q.omega = 0;
    q.beta = Stiffness::quadratic(0.1, 1.0);
    save_state(make_lemniscate(q, g), g, dir / "eight.csv");
    const fs::path conf8 = write_config(
        dir, R"(L = 2pi
nu = 0
mu = 0.1
c0 = 0
omega = 0
beta.family = "quadratic"
beta.params = 0.1, 1
N = 720
initial.kind = "lemniscate"
)",
        "eight.conf");
    Capture cap8;
    REQUIRE(cmd_check(dir / "eight.csv", conf8) == exit_code::ok);
    CHECK(nlohmann::json::parse(cap8.out.str())["embedded"] == false);
}

TEST_CASE("minimize command")
{
    const fs::path dir = scratch("minimize");
    const std::string conf = R"(L = 2pi
nu = 0.2
mu = 0.5
c0 = 0.3
omega = 1
beta.family = "shifted_quartic"
beta.params = 0.1, 0.2
N = 60
initial.kind = "circle"
)";
    OutEnv env(dir / "out");
    {
        Capture cap;
        REQUIRE(cmd_minimize(write_config(dir, conf)) == exit_code::ok);
    }
    const auto j = nlohmann::json::parse(read_text(dir / "out" / "result.json"));
    CHECK(j["classification"] == "HomogeneousCircle");
    CHECK(j["residual_norm"].get<double>() <= 1e-10);
    CHECK(fs::exists(dir / "out" / "critical_point.csv"));

    // a wild guess with a single Newton iteration allowed cannot converge
    const std::string bad = R"(L = 2pi
nu = 0
mu = 0.5
c0 = 0
omega = 1
beta.family = "exponential"
beta.params = 1
N = 60
newton_max_iter = 1
initial.kind = "perturbed_circle"
initial.params = 0, 2, 0.6, 0.1, 1, 3, 0.5, 0
)";
    Capture cap;
    CHECK(cmd_minimize(write_config(dir, bad, "bad.conf")) == exit_code::stalled);
}

TEST_CASE("command line front end")
{
    const fs::path dir = scratch("main");
    const fs::path conf = write_config(dir, kBase);
    const std::string bin = ELASTICA_BIN;
    const std::string quiet = " > " + (dir / "log.txt").string() + " 2>&1";
    auto run = [&](const std::string& args) {
        const int status = std::system((bin + " " + args + quiet).c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    // neither out_dir nor ELASTICA_OUT is set
    CHECK(run("flow " + conf.string()) == exit_code::config_error);
    CHECK(read_text(dir / "log.txt").find("out_dir") != std::string::npos);
    CHECK(run("ELASTICA_IGNORED") == 1);
    const std::string with_env = "env ELASTICA_OUT=" + (dir / "o").string() + " ";
    const int status = std::system((with_env + bin + " flow " + conf.string() + quiet).c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(dir / "o" / "trace.csv"));
}
