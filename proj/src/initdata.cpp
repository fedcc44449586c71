#include "elastica/initdata.hpp"

#include "elastica/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace elastica {

namespace {

constexpr double pi = std::numbers::pi;

Eigen::VectorXd ramp(const ModelParams& params, const Grid& grid)
{
    Eigen::VectorXd r(grid.n);
    for (int i = 0; i < grid.n; ++i)
        r[i] = 2.0 * pi * params.omega * grid.node(i) / grid.length;
    return r;
}

// C-infinity step: 0 for x <= 0, 1 for x >= 1, S(x) + S(1-x) = 1
double smooth_step(double x)
{
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    const double f0 = std::exp(-1.0 / x);
    const double f1 = std::exp(-1.0 / (1.0 - x));
    return f0 / (f0 + f1);
}

// indicator of [a, b] with edges smoothed over `width` (centred on the edges)
double smooth_indicator(double s, double a, double b, double width)
{
    if (width <= 0.0)
        return (s >= a && s <= b) ? 1.0 : 0.0;
    return smooth_step((s - a) / width + 0.5) * smooth_step((b - s) / width + 0.5);
}

// periodic distance-aware evaluation on [0, period)
double periodic_indicator(double s, double a, double b, double width, double period)
{
    double acc = 0.0;
    for (int m = -1; m <= 1; ++m)
        acc += smooth_indicator(s + m * period, a, b, width);
    return acc;
}

void check_modes(const std::vector<Mode>& modes, const Grid& grid)
{
    for (const Mode& m : modes)
        if (m.l < 0 || m.l > grid.n / 2)
            fail(ErrorCode::InvalidArgument, "mode index " + std::to_string(m.l) + " outside [0, N/2]");
}

Eigen::VectorXd shifted_to_mean(const Eigen::VectorXd& profile, double mean, const Grid& grid)
{
    if (profile.size() != grid.n)
        fail(ErrorCode::DimensionMismatch, "density profile has wrong length");
    return profile.array() - profile.mean() + mean;
}

double parse_double(std::string_view tok, int line)
{
    double v = 0.0;
    while (!tok.empty() && tok.front() == ' ')
        tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\r'))
        tok.remove_suffix(1);
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        fail(ErrorCode::FormatError, "line " + std::to_string(line) + ": cannot parse '" + std::string(tok) + "'");
    return v;
}

std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

} // namespace

Eigen::VectorXd evaluate_modes(const std::vector<Mode>& modes, const Grid& grid)
{
    check_modes(modes, grid);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.n);
    for (const Mode& m : modes)
        for (int i = 0; i < grid.n; ++i) {
            const double arg = 2.0 * pi * m.l * grid.node(i) / grid.length;
            v[i] += m.a * std::cos(arg) + m.b * std::sin(arg);
        }
    return v;
}

State project_to_constraints(const State& state, const ModelParams& params, const Grid& grid, double tol)
{
    validate(state, grid, params);
    if (discrete_constraints(state, params, grid).cwiseAbs().maxCoeff() <= tol)
        return state;
    const Eigen::VectorXd input = state.stacked();
    State x = state;
    for (int it = 0; it < 100; ++it) {
        const Eigen::MatrixXd j = constraint_jacobian(x, grid);
        const Eigen::Vector3d g = discrete_constraints(x, params, grid);
        const Eigen::Matrix3d m = j * j.transpose();
        const Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
        if (lu.rank() < 3 || lu.rcond() < 1e-12)
            fail(ErrorCode::ProjectionFailure, "constraint Jacobian is rank deficient");
        const Eigen::Vector3d rhs = g + j * (input - x.stacked());
        const Eigen::VectorXd next = input - j.transpose() * lu.solve(rhs);
        if (!next.allFinite())
            fail(ErrorCode::ProjectionFailure, "projection produced non-finite values");
        x = State::from_stacked(next, state.omega);
        if (discrete_constraints(x, params, grid).cwiseAbs().maxCoeff() <= tol)
            return x;
    }
    fail(ErrorCode::ProjectionFailure, "no convergence after 100 Gauss-Newton iterations");
}

State make_circle(const ModelParams& params, const Grid& grid, const std::optional<Eigen::VectorXd>& rho_profile)
{
    State s;
    s.omega = params.omega;
    s.theta = ramp(params, grid);
    s.rho = rho_profile ? shifted_to_mean(*rho_profile, params.nu, grid) : Eigen::VectorXd::Constant(grid.n, params.nu);
    return s;
}

State make_perturbed_circle(const ModelParams& params, const Grid& grid, const std::vector<Mode>& theta_modes,
                            const std::vector<Mode>& rho_modes)
{
    State s = make_circle(params, grid);
    s.theta += evaluate_modes(theta_modes, grid);
    s.rho += evaluate_modes(rho_modes, grid);
    return project_to_constraints(s, params, grid);
}

State make_stadium(const ModelParams& params, const Grid& grid, double aspect, double smoothing,
                   const std::optional<Eigen::VectorXd>& rho_profile)
{
    if (!(aspect >= 1.0))
        fail(ErrorCode::InvalidArgument, "stadium aspect must be >= 1");
    if (!(smoothing >= 0.0))
        fail(ErrorCode::InvalidArgument, "smoothing must be nonnegative");
    const double len = grid.length;
    const double radius = len / (4.0 * (aspect - 1.0) + 2.0 * pi);
    const double cap = pi * radius;
    const double width = smoothing * len;
    const double centres[2] = {3.0 * len / 8.0, 7.0 * len / 8.0};

    // curvature sampled at half nodes, each cap normalised to turn by pi*omega
    const int n = grid.n;
    Eigen::MatrixXd bumps(n, 2);
    for (int i = 0; i < n; ++i) {
        const double s = (i + 0.5) * grid.ds;
        for (int c = 0; c < 2; ++c)
            bumps(i, c) = periodic_indicator(s, centres[c] - cap / 2, centres[c] + cap / 2, width, len);
    }
    Eigen::VectorXd turn = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < 2; ++c)
        turn += bumps.col(c) * (pi * params.omega / bumps.col(c).sum());

    State st;
    st.omega = params.omega;
    st.theta.resize(n);
    st.theta[0] = 0.0;
    for (int i = 1; i < n; ++i)
        st.theta[i] = st.theta[i - 1] + turn[i - 1];
    const int flat = static_cast<int>(std::lround(n / 8.0));
    st.theta.array() -= st.theta[flat];
    st.rho = rho_profile ? shifted_to_mean(*rho_profile, params.nu, grid) : Eigen::VectorXd::Constant(n, params.nu);
    return project_to_constraints(st, params, grid);
}

State make_neck(const ModelParams& params, const Grid& grid, const NeckShape& shape)
{
    const int n = grid.n;
    if (n % 4 != 0)
        fail(ErrorCode::IncompatibleGrid, "neck curve needs N divisible by 4");
    if (params.omega != 1)
        fail(ErrorCode::InvalidArgument, "neck curve has rotation index 1");
    const int q = n / 4;
    const double quarter = grid.length / 4.0;
    const double a = shape.neck * quarter;
    const double c = shape.corner * quarter;
    const double d = shape.descent * quarter;
    const double w = shape.transition * quarter;
    if (!(a > 0.0 && c > 0.0 && d >= 0.0 && a + c + d < quarter))
        fail(ErrorCode::InvalidArgument, "neck segment lengths exceed a quarter of the curve");

    // unit-mass bump shapes for the concave corner and the convex lobe arc on the quarter
    Eigen::VectorXd corner(q), lobe(q);
    for (int i = 0; i < q; ++i) {
        const double s = (i + 0.5) * grid.ds;
        corner[i] = smooth_indicator(s, a + w / 2, a + c - w / 2, w);
        lobe[i] = smooth_indicator(s, a + c + d + w / 2, quarter + w, w);
    }
    corner /= corner.sum();
    lobe /= lobe.sum();

    auto build = [&](double alpha) {
        Eigen::VectorXd inc(n);
        const Eigen::VectorXd quarter_inc = -alpha * corner + (alpha + pi / 2) * lobe;
        for (int i = 0; i < q; ++i) {
            inc[i] = quarter_inc[i];
            inc[2 * q - 1 - i] = quarter_inc[i];
        }
        inc.tail(2 * q) = inc.head(2 * q);
        State st;
        st.omega = 1;
        st.theta.resize(n);
        st.theta[0] = 0.0;
        for (int i = 1; i < n; ++i)
            st.theta[i] = st.theta[i - 1] + inc[i - 1];
        return st;
    };
    // rise from the lower neck centre to the lobe tip (trapezoidal, as in reconstruct_curve)
    auto rise = [&](const State& st) {
        double y = 0.0;
        for (int i = 0; i < q; ++i)
            y += 0.5 * grid.ds * (std::sin(st.theta[i]) + std::sin(st.theta[i + 1]));
        return y;
    };
    double lo = 0.0, hi = pi / 2;
    if (!(rise(build(lo)) > shape.half_gap && rise(build(hi)) < shape.half_gap))
        fail(ErrorCode::InvalidArgument, "neck half-gap not attainable for this shape");
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (rise(build(mid)) > shape.half_gap ? lo : hi) = mid;
    }
    State st = build(0.5 * (lo + hi));

    // density bumps centred on the four concave corners
    const double rw = shape.rho_width * quarter;
    const double centre = a + c / 2;
    const double corners[4] = {centre, grid.length / 2 - centre, grid.length / 2 + centre, grid.length - centre};
    Eigen::VectorXd bump = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        for (double cc : corners)
            bump[i] += periodic_indicator(grid.node(i), cc - rw / 2 + rw / 4, cc + rw / 2 - rw / 4, rw / 2,
                                          grid.length);
    const double target = params.nu * grid.length - shape.rho_floor * grid.length;
    if (!(target > 0.0))
        fail(ErrorCode::InvalidArgument, "rho floor leaves no mass for the bumps");
    st.rho = Eigen::VectorXd::Constant(n, shape.rho_floor) + bump * (target / (grid.ds * bump.sum()));
    return project_to_constraints(st, params, grid);
}

State make_lemniscate(const ModelParams& params, const Grid& grid, const std::vector<Mode>& rho_modes)
{
    if (params.omega != 0)
        fail(ErrorCode::InvalidArgument, "the lemniscate has rotation index 0");
    const int n = grid.n;
    const int dense = 400 * n;
    auto point = [](double t) {
        const double d = 1.0 + std::sin(t) * std::sin(t);
        return Eigen::Vector2d(std::cos(t) / d, std::sin(t) * std::cos(t) / d);
    };
    auto tangent = [](double t) {
        const double st = std::sin(t), ct = std::cos(t);
        const double d = 1.0 + st * st;
        const double dd = 2.0 * st * ct;
        const double x = (-st * d - ct * dd) / (d * d);
        const double y = ((ct * ct - st * st) * d - st * ct * dd) / (d * d);
        return Eigen::Vector2d(x, y);
    };
    std::vector<double> arc(static_cast<std::size_t>(dense) + 1, 0.0);
    Eigen::Vector2d prev = point(0.0);
    for (int k = 1; k <= dense; ++k) {
        const Eigen::Vector2d cur = point(2.0 * pi * k / dense);
        arc[k] = arc[k - 1] + (cur - prev).norm();
        prev = cur;
    }
    const double total = arc.back();

    State st;
    st.omega = 0;
    st.theta.resize(n);
    for (int i = 0; i < n; ++i) {
        const double target = total * grid.node(i) / grid.length;
        const auto it = std::upper_bound(arc.begin(), arc.end(), target);
        const std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - arc.begin(), 1), dense) - 1;
        const double frac = (target - arc[k]) / (arc[k + 1] - arc[k]);
        const double t = 2.0 * pi * (static_cast<double>(k) + frac) / dense;
        const Eigen::Vector2d tg = tangent(t);
        const double angle = std::atan2(tg.y(), tg.x());
        if (i == 0)
            st.theta[i] = angle;
        else
            st.theta[i] = st.theta[i - 1] + std::remainder(angle - st.theta[i - 1], 2.0 * pi);
    }
    st.rho = Eigen::VectorXd::Constant(n, params.nu) + evaluate_modes(rho_modes, grid);
    return project_to_constraints(st, params, grid);
}

State make_double_covering(const State& single, double rotation, const ModelParams& params, const Grid& grid)
{
    if (single.omega != 0)
        fail(ErrorCode::InvalidArgument, "double covering needs a rotation index 0 state");
    if (2 * single.size() != grid.n)
        fail(ErrorCode::DimensionMismatch, "doubled grid must have twice the nodes");
    State st;
    st.omega = 0;
    st.theta.resize(grid.n);
    st.rho.resize(grid.n);
    st.theta << single.theta, single.theta.array() + rotation;
    st.rho << single.rho, single.rho;
    return project_to_constraints(st, params, grid);
}

void save_state(const State& state, const Grid& grid, const std::filesystem::path& path)
{
    if (state.size() != grid.n)
        fail(ErrorCode::DimensionMismatch, "state/grid size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(ErrorCode::IoError, "cannot write " + path.string());
    out << "i,s,theta,rho\n";
    for (int i = 0; i < grid.n; ++i)
        out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", i, grid.node(i), state.theta[i], state.rho[i]);
    if (!out)
        fail(ErrorCode::IoError, "write failed for " + path.string());
}

State load_state(const std::filesystem::path& path, const Grid& grid, int omega, const ModelParams* project)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorCode::IoError, "cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line))
        fail(ErrorCode::FormatError, "empty state file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const auto header = split_commas(line);
    if (header.size() < 4 || header[0] != "i" || header[1] != "s" || header[2] != "theta" || header[3] != "rho")
        fail(ErrorCode::FormatError, "header must start with i,s,theta,rho");

    std::vector<double> theta, rho;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto cols = split_commas(line);
        if (cols.size() != header.size())
            fail(ErrorCode::FormatError, "line " + std::to_string(lineno) + " has " + std::to_string(cols.size())
                                             + " columns, expected " + std::to_string(header.size()));
        const double idx = parse_double(cols[0], lineno);
        if (idx != static_cast<double>(theta.size()))
            fail(ErrorCode::FormatError, "line " + std::to_string(lineno) + ": node index out of sequence");
        const double s = parse_double(cols[1], lineno);
        if (static_cast<int>(theta.size()) < grid.n
            && std::abs(s - grid.node(static_cast<int>(theta.size()))) > 1e-9 * grid.length)
            fail(ErrorCode::DimensionMismatch, "line " + std::to_string(lineno) + ": arclength does not match grid");
        theta.push_back(parse_double(cols[2], lineno));
        rho.push_back(parse_double(cols[3], lineno));
        if (!std::isfinite(theta.back()) || !std::isfinite(rho.back()))
            fail(ErrorCode::FormatError, "line " + std::to_string(lineno) + ": non-finite value");
    }
    if (static_cast<int>(theta.size()) != grid.n)
        fail(ErrorCode::DimensionMismatch,
             "state file has " + std::to_string(theta.size()) + " nodes, expected " + std::to_string(grid.n));
    State st;
    st.omega = omega;
    st.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), grid.n);
    st.rho = Eigen::Map<const Eigen::VectorXd>(rho.data(), grid.n);
    if (project)
        return project_to_constraints(st, *project, grid);
    return st;
}

} // namespace elastica
