#include "elastica/model.hpp"

#include "elastica/error.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace elastica {

namespace {

long wrap(long i, long n) { return ((i % n) + n) % n; }

Eigen::VectorXd centered_curvature(const State& s, const Grid& g)
{
    const int n = s.size();
    Eigen::VectorXd k(n);
    for (int i = 0; i < n; ++i)
        k[i] = (s.theta_at(i + 1) - s.theta_at(i - 1)) / (2.0 * g.ds);
    return k;
}

void check_beta(const ModelParams& p, const State& s)
{
    for (int i = 0; i < s.size(); ++i)
        if (!(p.beta.value(s.rho[i]) > 0.0))
            fail(ErrorCode::NonpositiveStiffness,
                 "beta(rho) <= 0 at node " + std::to_string(i) + " (rho = " + std::to_string(s.rho[i]) + ")");
}

} // namespace

void ModelParams::validate() const
{
    if (!(L > 0.0) || !std::isfinite(L))
        fail(ErrorCode::InvalidArgument, "L must be positive");
    if (!std::isfinite(nu))
        fail(ErrorCode::InvalidArgument, "nu must be finite");
    if (!(mu > 0.0) || !std::isfinite(mu))
        fail(ErrorCode::InvalidArgument, "mu must be positive");
    if (!std::isfinite(c0))
        fail(ErrorCode::InvalidArgument, "c0 must be finite");
}

Grid::Grid(int n_, double length_) : n(n_), length(length_)
{
    if (n < 8)
        fail(ErrorCode::InvalidArgument, "grid needs N >= 8");
    if (!(length > 0.0))
        fail(ErrorCode::InvalidArgument, "grid length must be positive");
    ds = length / n;
}

Eigen::VectorXd Grid::nodes() const
{
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i)
        s[i] = node(i);
    return s;
}

double State::theta_at(long i) const
{
    const long n = theta.size();
    const long j = wrap(i, n);
    const long turns = (i - j) / n;
    return theta[j] + 2.0 * std::numbers::pi * omega * static_cast<double>(turns);
}

double State::rho_at(long i) const { return rho[wrap(i, rho.size())]; }

Eigen::VectorXd State::stacked() const
{
    Eigen::VectorXd eta(theta.size() + rho.size());
    eta << theta, rho;
    return eta;
}

State State::from_stacked(const Eigen::VectorXd& eta, int omega)
{
    if (eta.size() % 2 != 0)
        fail(ErrorCode::DimensionMismatch, "stacked state must have even length");
    const long n = eta.size() / 2;
    return {eta.head(n), eta.tail(n), omega};
}

void validate(const State& state, const Grid& grid, const ModelParams& params)
{
    if (state.theta.size() != grid.n || state.rho.size() != grid.n)
        fail(ErrorCode::DimensionMismatch,
             "state has " + std::to_string(state.theta.size()) + "/" + std::to_string(state.rho.size())
                 + " nodes, grid has " + std::to_string(grid.n));
    if (state.omega != params.omega)
        fail(ErrorCode::DimensionMismatch, "state and model disagree on the rotation index");
    if (std::abs(grid.length - params.L) > 1e-12 * params.L)
        fail(ErrorCode::DimensionMismatch, "grid length differs from L");
    if (!state.theta.allFinite() || !state.rho.allFinite())
        fail(ErrorCode::InvalidArgument, "state contains non-finite values");
}

Eigen::VectorXd diff_forward(const State& state, Field field)
{
    const int n = state.size();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i)
        d[i] = field == Field::Theta ? state.theta_at(i + 1) - state.theta[i] : state.rho_at(i + 1) - state.rho[i];
    return d;
}

Eigen::VectorXd diff_backward(const State& state, Field field)
{
    const int n = state.size();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i)
        d[i] = field == Field::Theta ? state.theta[i] - state.theta_at(i - 1) : state.rho[i] - state.rho_at(i - 1);
    return d;
}

Eigen::VectorXd diff_centered(const State& state, Field field)
{
    return 0.5 * (diff_forward(state, field) + diff_backward(state, field));
}

EnergySplit discrete_energy(const State& state, const ModelParams& params, const Grid& grid)
{
    validate(state, grid, params);
    check_beta(params, state);
    const Eigen::VectorXd kappa = centered_curvature(state, grid);
    const Eigen::VectorXd drho = diff_forward(state, Field::Rho);
    EnergySplit e;
    for (int i = 0; i < grid.n; ++i) {
        const double d = kappa[i] - params.c0;
        e.bending += params.beta.value(state.rho[i]) * d * d;
        e.diffusion += drho[i] * drho[i];
    }
    e.bending *= 0.5 * grid.ds;
    e.diffusion *= 0.5 * params.mu / grid.ds;
    e.total = e.bending + e.diffusion;
    return e;
}

Eigen::VectorXd discrete_gradient(const State& state, const ModelParams& params, const Grid& grid)
{
    validate(state, grid, params);
    check_beta(params, state);
    const int n = grid.n;
    const double ds = grid.ds;
    const Eigen::VectorXd kappa = centered_curvature(state, grid);
    Eigen::VectorXd flux(n); // beta_i (kappa_i - c0)
    for (int i = 0; i < n; ++i)
        flux[i] = params.beta.value(state.rho[i]) * (kappa[i] - params.c0);

    Eigen::VectorXd g(2 * n);
    for (int j = 0; j < n; ++j) {
        g[j] = 0.5 * (flux[wrap(j - 1, n)] - flux[wrap(j + 1, n)]);
        const double d = kappa[j] - params.c0;
        const double lap = state.rho_at(j - 1) - 2.0 * state.rho[j] + state.rho_at(j + 1);
        g[n + j] = 0.5 * ds * params.beta.d1(state.rho[j]) * d * d - params.mu * lap / ds;
    }
    return g;
}

Eigen::SparseMatrix<double> energy_hessian(const State& state, const ModelParams& params, const Grid& grid)
{
    validate(state, grid, params);
    check_beta(params, state);
    const int n = grid.n;
    const double ds = grid.ds;
    const Eigen::VectorXd kappa = centered_curvature(state, grid);

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(16 * n));
    for (int i = 0; i < n; ++i) {
        const int ip = static_cast<int>(wrap(i + 1, n));
        const int im = static_cast<int>(wrap(i - 1, n));
        const double rho = state.rho[i];
        const double d = kappa[i] - params.c0;
        const double b = params.beta.value(rho);
        const double b1 = params.beta.d1(rho);
        const double b2 = params.beta.d2(rho);

        // kappa_i depends on theta_{i+1} (+1/2ds) and theta_{i-1} (-1/2ds)
        const double w = b / (4.0 * ds);
        t.emplace_back(ip, ip, w);
        t.emplace_back(im, im, w);
        t.emplace_back(ip, im, -w);
        t.emplace_back(im, ip, -w);

        const double c = 0.5 * b1 * d;
        t.emplace_back(ip, n + i, c);
        t.emplace_back(n + i, ip, c);
        t.emplace_back(im, n + i, -c);
        t.emplace_back(n + i, im, -c);

        const double m = params.mu / ds;
        t.emplace_back(n + i, n + i, 0.5 * ds * b2 * d * d + 2.0 * m);
        t.emplace_back(n + i, n + ip, -m);
        t.emplace_back(n + ip, n + i, -m);
    }
    Eigen::SparseMatrix<double> h(2 * n, 2 * n);
    h.setFromTriplets(t.begin(), t.end());
    return h;
}

Eigen::Vector3d discrete_constraints(const State& state, const ModelParams& params, const Grid& grid)
{
    validate(state, grid, params);
    const double ds = grid.ds;
    return {ds * state.rho.sum() - params.nu * params.L, ds * state.theta.array().sin().sum(),
            ds * state.theta.array().cos().sum()};
}

Eigen::MatrixXd constraint_jacobian(const State& state, const Grid& grid)
{
    const int n = grid.n;
    if (state.size() != n)
        fail(ErrorCode::DimensionMismatch, "state/grid size mismatch");
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(3, 2 * n);
    j.block(0, n, 1, n).setConstant(grid.ds);
    j.block(1, 0, 1, n) = grid.ds * state.theta.array().cos().transpose();
    j.block(2, 0, 1, n) = -grid.ds * state.theta.array().sin().transpose();
    return j;
}

Eigen::VectorXd constraint_hessian_diagonal(const State& state, const Multipliers& lambda, const Grid& grid)
{
    const int n = grid.n;
    if (state.size() != n)
        fail(ErrorCode::DimensionMismatch, "state/grid size mismatch");
    Eigen::VectorXd d = Eigen::VectorXd::Zero(2 * n);
    d.head(n) = -grid.ds
                * (lambda.sin_closure * state.theta.array().sin() + lambda.cos_closure * state.theta.array().cos());
    return d;
}

} // namespace elastica
