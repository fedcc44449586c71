#pragma once

#include "elastica/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace elastica::test {

inline constexpr double pi = std::numbers::pi;

inline std::vector<Stiffness> positive_families()
{
    return {Stiffness::exponential(1.0), Stiffness::exponential(-0.7), Stiffness::quadratic(0.1, 1.0),
            Stiffness::double_well(1.0), Stiffness::shifted_quartic(0.1, 0.3),
            Stiffness::polynomial({1.0, 0.2, 0.5})};
}

inline Eigen::VectorXd ramp(const Grid& g, int omega)
{
    Eigen::VectorXd r(g.n);
    for (int i = 0; i < g.n; ++i)
        r[i] = 2.0 * pi * omega * g.node(i) / g.length;
    return r;
}

/// Ramp plus a few random low modes, density around nu with random modes and noise.
inline State random_state(std::mt19937_64& rng, const Grid& g, int omega, double nu, double amp = 0.3)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    State s;
    s.omega = omega;
    s.theta = ramp(g, omega);
    s.rho = Eigen::VectorXd::Constant(g.n, nu);
    for (int l = 1; l <= 4; ++l) {
        const double a = amp * u(rng) / l, b = amp * u(rng) / l, c = amp * u(rng) / l, d = amp * u(rng) / l;
        for (int i = 0; i < g.n; ++i) {
            const double x = 2.0 * pi * l * g.node(i) / g.length;
            s.theta[i] += a * std::cos(x) + b * std::sin(x);
            s.rho[i] += c * std::cos(x) + d * std::sin(x);
        }
    }
    for (int i = 0; i < g.n; ++i) {
        s.theta[i] += 0.05 * amp * u(rng);
        s.rho[i] += 0.05 * amp * u(rng);
    }
    s.theta.array() += u(rng);
    return s;
}

/// Central finite differences of a scalar function of the stacked state.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x)
{
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

/// Central finite differences of a vector function (columns are directional derivatives).
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x)
{
    const Eigen::VectorXd f0 = f(x);
    Eigen::MatrixXd j(f0.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        j.col(i) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return j;
}

} // namespace elastica::test
