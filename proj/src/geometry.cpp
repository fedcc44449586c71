#include "elastica/geometry.hpp"

#include "elastica/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace elastica {

namespace {

long wrap(long i, long n) { return ((i % n) + n) % n; }

// --- exact orientation via floating-point expansions ------------------------

void two_sum(double a, double b, double& s, double& e)
{
    s = a + b;
    const double bv = s - a;
    const double av = s - bv;
    e = (a - av) + (b - bv);
}

void two_product(double a, double b, double& p, double& e)
{
    p = a * b;
    e = std::fma(a, b, -p);
}

// adds b to the nonoverlapping expansion in place
void grow(std::vector<double>& expansion, double b)
{
    double q = b;
    std::size_t out = 0;
    for (double ei : expansion) {
        double s, h;
        two_sum(q, ei, s, h);
        q = s;
        if (h != 0.0)
            expansion[out++] = h;
    }
    expansion.resize(out);
    if (q != 0.0)
        expansion.push_back(q);
}

int orient_exact(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
{
    const double terms[6][2] = {{b.x(), c.y()}, {-b.x(), a.y()}, {-a.x(), c.y()},
                                {-b.y(), c.x()}, {b.y(), a.x()},  {a.y(), c.x()}};
    std::vector<double> e;
    e.reserve(24);
    for (const auto& t : terms) {
        double p, err;
        two_product(t[0], t[1], p, err);
        grow(e, err);
        grow(e, p);
    }
    for (auto it = e.rbegin(); it != e.rend(); ++it)
        if (*it != 0.0)
            return *it > 0.0 ? 1 : -1;
    return 0;
}

bool strictly_inside_collinear(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
{
    if (a.x() != b.x())
        return std::min(a.x(), b.x()) < c.x() && c.x() < std::max(a.x(), b.x());
    return std::min(a.y(), b.y()) < c.y() && c.y() < std::max(a.y(), b.y());
}

bool segments_touch(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                    const Eigen::Vector2d& d)
{
    if (a == c || a == d || b == c || b == d)
        return true;
    const int o1 = orient2d(a, b, c);
    const int o2 = orient2d(a, b, d);
    const int o3 = orient2d(c, d, a);
    const int o4 = orient2d(c, d, b);
    if (o1 * o2 < 0 && o3 * o4 < 0)
        return true;
    if (o1 == 0 && strictly_inside_collinear(a, b, c))
        return true;
    if (o2 == 0 && strictly_inside_collinear(a, b, d))
        return true;
    if (o3 == 0 && strictly_inside_collinear(c, d, a))
        return true;
    if (o4 == 0 && strictly_inside_collinear(c, d, b))
        return true;
    return false;
}

} // namespace

Eigen::VectorXd curvature(const State& state, const Grid& grid, Stencil stencil)
{
    if (state.size() != grid.n)
        fail(ErrorCode::DimensionMismatch, "state/grid size mismatch");
    switch (stencil) {
    case Stencil::Forward: return diff_forward(state, Field::Theta) / grid.ds;
    case Stencil::Backward: return diff_backward(state, Field::Theta) / grid.ds;
    case Stencil::Centered: break;
    }
    return diff_centered(state, Field::Theta) / grid.ds;
}

Curve reconstruct_curve(const State& state, const Grid& grid, Centering centering)
{
    const int n = grid.n;
    if (state.size() != n)
        fail(ErrorCode::DimensionMismatch, "state/grid size mismatch");
    Curve c;
    c.points.resize(2, n + 1);
    c.points.col(0).setZero();
    for (int i = 0; i < n; ++i) {
        const double t0 = state.theta_at(i);
        const double t1 = state.theta_at(i + 1);
        c.points(0, i + 1) = c.points(0, i) + 0.5 * grid.ds * (std::cos(t0) + std::cos(t1));
        c.points(1, i + 1) = c.points(1, i) + 0.5 * grid.ds * (std::sin(t0) + std::sin(t1));
    }
    c.closure_defect = (c.points.col(n) - c.points.col(0)).norm();
    if (centering == Centering::FromIntegral) {
        const Eigen::Vector2d centre = c.points.leftCols(n).rowwise().mean();
        c.points.colwise() -= centre;
    }
    return c;
}

ContinuousMultipliers continuous_multipliers(const State& state, const ModelParams& params, const Grid& grid)
{
    validate(state, grid, params);
    const Eigen::VectorXd kappa = curvature(state, grid);
    const Eigen::ArrayXd s = state.theta.array().sin();
    const Eigen::ArrayXd c = state.theta.array().cos();
    const double ds = grid.ds;

    ContinuousMultipliers m;
    const double ss = ds * (s * s).sum();
    const double cc = ds * (c * c).sum();
    const double sc = ds * (s * c).sum();
    m.pi << ss, -sc, -sc, cc;

    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    double react = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double d = kappa[i] - params.c0;
        const double w = kappa[i] * params.beta.value(state.rho[i]) * d;
        rhs += Eigen::Vector2d(c[i], s[i]) * w;
        react += params.beta.d1(state.rho[i]) * d * d;
    }
    rhs *= ds;

    const double det = m.pi.determinant();
    const double half_trace = 0.5 * m.pi.trace();
    if (!(std::abs(det) >= 1e-12 * half_trace * half_trace))
        fail(ErrorCode::SingularPi, "closure matrix is singular (det = " + std::to_string(det) + ")");
    const Eigen::Vector2d lt = m.pi.inverse() * rhs;
    m.lambda_theta1 = lt[0];
    m.lambda_theta2 = lt[1];
    m.lambda_rho = -ds * react / (2.0 * params.L);
    return m;
}

double default_zero_tolerance(const Eigen::VectorXd& kappa)
{
    return kappa.size() == 0 ? 0.0 : 1e-7 * kappa.cwiseAbs().maxCoeff();
}

namespace {

// +1, -1, or 0 (within tolerance), with consecutive repeats collapsed cyclically
std::vector<int> sign_runs(const Eigen::VectorXd& kappa, double tol, bool drop_zero)
{
    std::vector<int> raw;
    raw.reserve(static_cast<std::size_t>(kappa.size()));
    for (double k : kappa) {
        const int sg = k > tol ? 1 : (k < -tol ? -1 : 0);
        if (drop_zero && sg == 0)
            continue;
        if (raw.empty() || raw.back() != sg)
            raw.push_back(sg);
    }
    while (raw.size() > 1 && raw.front() == raw.back())
        raw.pop_back();
    return raw;
}

} // namespace

int count_zeros(const Eigen::VectorXd& kappa, double tol)
{
    const std::vector<int> runs = sign_runs(kappa, tol, false);
    if (runs.size() == 1)
        return runs[0] == 0 ? 1 : 0;
    int zeros = 0;
    const std::size_t m = runs.size();
    for (std::size_t i = 0; i < m; ++i) {
        if (runs[i] == 0)
            ++zeros;
        else if (runs[(i + 1) % m] == -runs[i])
            ++zeros;
    }
    return zeros;
}

int count_zeros(const Eigen::VectorXd& kappa) { return count_zeros(kappa, default_zero_tolerance(kappa)); }

int count_sign_changes(const Eigen::VectorXd& kappa, double tol)
{
    const std::vector<int> runs = sign_runs(kappa, tol, true);
    return runs.size() > 1 ? static_cast<int>(runs.size()) : 0;
}

int count_sign_changes(const Eigen::VectorXd& kappa)
{
    return count_sign_changes(kappa, default_zero_tolerance(kappa));
}

int orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c)
{
    const double l = (b.x() - a.x()) * (c.y() - a.y());
    const double r = (b.y() - a.y()) * (c.x() - a.x());
    const double det = l - r;
    const double bound = (3.0 + 16.0 * std::numeric_limits<double>::epsilon() / 2)
                         * (std::numeric_limits<double>::epsilon() / 2) * (std::abs(l) + std::abs(r));
    if (det > bound)
        return 1;
    if (-det > bound)
        return -1;
    return orient_exact(a, b, c);
}

bool is_embedded(const Curve& curve)
{
    const int n = curve.size();
    if (n < 3)
        fail(ErrorCode::InvalidArgument, "polygon needs at least 3 vertices");
    auto p = [&](int i) -> Eigen::Vector2d { return curve.points.col(wrap(i, n)); };

    double total = 0.0;
    for (int i = 0; i < n; ++i)
        total += (p(i + 1) - p(i)).norm();
    for (int i = 0; i < n; ++i)
        if ((p(i + 1) - p(i)).norm() < 1e-14 * total)
            fail(ErrorCode::DegenerateEdge, "edge " + std::to_string(i) + " has (near) zero length");

    // adjacent edges: only a fold back can make them meet outside the shared vertex
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d a = p(i), b = p(i + 1), c = p(i + 2);
        if (a == c)
            return false;
        if (orient2d(a, b, c) == 0 && (strictly_inside_collinear(a, b, c) || strictly_inside_collinear(b, c, a)))
            return false;
    }

    struct Box {
        double xmin, xmax, ymin, ymax;
        int edge;
    };
    std::vector<Box> boxes(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d a = p(i), b = p(i + 1);
        boxes[i] = {std::min(a.x(), b.x()), std::max(a.x(), b.x()), std::min(a.y(), b.y()), std::max(a.y(), b.y()), i};
    }
    std::sort(boxes.begin(), boxes.end(), [](const Box& u, const Box& v) {
        return u.xmin < v.xmin || (u.xmin == v.xmin && u.edge < v.edge);
    });
    for (std::size_t u = 0; u < boxes.size(); ++u) {
        for (std::size_t v = u + 1; v < boxes.size() && boxes[v].xmin <= boxes[u].xmax; ++v) {
            if (boxes[v].ymin > boxes[u].ymax || boxes[u].ymin > boxes[v].ymax)
                continue;
            const int i = boxes[u].edge, j = boxes[v].edge;
            const int gap = std::abs(i - j);
            if (gap == 1 || gap == n - 1)
                continue;
            if (segments_touch(p(i), p(i + 1), p(j), p(j + 1)))
                return false;
        }
    }
    return true;
}

double embeddedness_threshold(double inf_beta, const ModelParams& params)
{
    return 0.5 * inf_beta
           * (kEmbeddednessConstant / params.L - 4.0 * std::numbers::pi * params.c0 + params.L * params.c0 * params.c0);
}

double embeddedness_threshold(const ModelParams& params, double rho_lo, double rho_hi)
{
    return embeddedness_threshold(params.beta.inf_over(rho_lo, rho_hi), params);
}

Eigen::VectorXd unwrapped_angle(const State& state, const Grid& grid)
{
    Eigen::VectorXd u = state.theta;
    for (int i = 0; i < grid.n; ++i)
        u[i] -= 2.0 * std::numbers::pi * state.omega * grid.node(i) / grid.length;
    return u;
}

SymmetryReport symmetry_residuals(const State& state, const ModelParams& params, const Grid& grid, int k)
{
    validate(state, grid, params);
    const int n = grid.n;
    if (k < 1 || n % k != 0)
        fail(ErrorCode::IncompatibleGrid, "symmetry order " + std::to_string(k) + " does not divide N = "
                                              + std::to_string(n));
    SymmetryReport r;
    const Eigen::VectorXd u = unwrapped_angle(state, grid);
    const int shift = n / k;
    for (int m = 1; m < k; ++m) {
        for (int i = 0; i < n; ++i) {
            const int j = static_cast<int>(wrap(i + m * shift, n));
            r.rot_residual = std::max({r.rot_residual, std::abs(u[j] - u[i]), std::abs(state.rho[j] - state.rho[i])});
        }
    }

    const Eigen::VectorXd kappa = curvature(state, grid);
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
        double worst = 0.0;
        for (int i = 0; i < n && worst < best; ++i) {
            const int j = static_cast<int>(wrap(a - i, n));
            worst = std::max({worst, std::abs(kappa[i] - kappa[j]), std::abs(state.rho[i] - state.rho[j])});
        }
        best = std::min(best, worst);
    }
    r.axial_residual = best;

    try {
        const ContinuousMultipliers m = continuous_multipliers(state, params, grid);
        r.lambda_theta = {m.lambda_theta1, m.lambda_theta2};
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularPi)
            throw;
        r.lambda_theta.setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    return r;
}

DecayFit density_decay_fit(const std::vector<std::pair<double, double>>& trace)
{
    if (trace.size() < 10)
        fail(ErrorCode::InsufficientData, "decay fit needs at least 10 samples");
    const std::size_t start = trace.size() / 2;
    const std::size_t m = trace.size() - start;
    Eigen::VectorXd t(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& [ti, vi] = trace[start + i];
        if (!(vi > 0.0) || !std::isfinite(vi) || !std::isfinite(ti))
            fail(ErrorCode::InsufficientData, "decay fit needs positive finite values");
        t[i] = ti;
        y[i] = std::log(vi);
    }
    const double tm = t.mean(), ym = y.mean();
    const double stt = (t.array() - tm).square().sum();
    const double syy = (y.array() - ym).square().sum();
    const double sty = ((t.array() - tm) * (y.array() - ym)).sum();
    if (!(stt > 0.0))
        fail(ErrorCode::InsufficientData, "decay fit needs distinct sample times");
    DecayFit f;
    const double slope = sty / stt;
    f.rate = -slope;
    f.intercept = ym - slope * tm;
    f.correlation = syy > 0.0 ? sty / std::sqrt(stt * syy) : 0.0;
    return f;
}

} // namespace elastica
