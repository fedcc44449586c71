#include "elastica/stationary.hpp"

#include "elastica/error.hpp"
#include "elastica/flow.hpp"
#include "elastica/geometry.hpp"
#include "kkt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace elastica {

std::string_view to_string(Classification c)
{
    switch (c) {
    case Classification::HomogeneousCircle: return "HomogeneousCircle";
    case Classification::FigureEightLike: return "FigureEightLike";
    case Classification::NontrivialDensity: return "NontrivialDensity";
    case Classification::Unclassified: return "Unclassified";
    }
    return "Unclassified";
}

StationaryResidual stationary_residual(const State& state, const ModelParams& params, const Grid& grid)
{
    const Eigen::VectorXd g = discrete_gradient(state, params, grid) / grid.ds;
    const Eigen::MatrixXd jt = constraint_jacobian(state, grid).transpose() / grid.ds;
    const Eigen::Vector3d lam = jt.colPivHouseholderQr().solve(-g);
    StationaryResidual r;
    r.lambda = Multipliers::from_vector(lam);
    r.gradient = (g + jt * lam).cwiseAbs().maxCoeff();
    r.constraint = discrete_constraints(state, params, grid).cwiseAbs().maxCoeff();
    return r;
}

namespace {

double kkt_residual(const State& x, const Multipliers& lambda, const ModelParams& params, const Grid& grid)
{
    const Eigen::VectorXd g = detail::lagrangian_gradient(x, lambda, params, grid) / grid.ds;
    const Eigen::Vector3d c = discrete_constraints(x, params, grid);
    return std::max(g.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff());
}

} // namespace

CriticalPoint solve_stationary(const State& guess, const ModelParams& params, const Grid& grid, double tol,
                               int max_iter)
{
    params.validate();
    validate(guess, grid, params);
    if (!(tol > 0.0))
        fail(ErrorCode::InvalidArgument, "tolerance must be positive");
    const int n = grid.n;

    CriticalPoint cp;
    State x = guess;
    Multipliers lambda = stationary_residual(x, params, grid).lambda;
    KktSolver solver;
    double r = kkt_residual(x, lambda, params, grid);
    const double r0 = r;
    int iters = 0;
    try {
        while (r > tol) {
            if (iters >= max_iter)
                fail(ErrorCode::NewtonDivergence, "no convergence after " + std::to_string(max_iter)
                                                      + " iterations (residual " + std::to_string(r) + ")");
            if (!std::isfinite(r) || r > 1e3 * std::max(r0, tol))
                fail(ErrorCode::NewtonDivergence, "residual grew by more than 1e3");
            const double scale = 1.0 / grid.ds;
            Eigen::SparseMatrix<double> a = detail::kkt_matrix(x, lambda, params, grid, 0.0, scale);
            double diag = 0.0;
            for (int i = 0; i < 2 * n; ++i)
                diag = std::max(diag, std::abs(a.coeff(i, i)));
            const double shift = 1e-10 * std::max(diag, 1.0);
            for (int i = 0; i < 2 * n; ++i)
                a.coeffRef(i, i) += shift;

            Eigen::VectorXd rhs(2 * n + 3);
            rhs.head(2 * n) = -scale * detail::lagrangian_gradient(x, lambda, params, grid);
            rhs.tail(3) = -scale * discrete_constraints(x, params, grid);
            Eigen::VectorXd delta;
            try {
                delta = solver.solve(a, rhs);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::LinearSolveFailure)
                    fail(ErrorCode::SingularKKT, e.what());
                throw;
            }
            x.theta += delta.head(n);
            x.rho += delta.segment(n, n);
            lambda = Multipliers::from_vector(lambda.vector() + delta.tail(3));
            ++iters;
            r = kkt_residual(x, lambda, params, grid);
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NonpositiveStiffness)
            fail(ErrorCode::NewtonDivergence, std::string("iterate left the admissible range: ") + e.what());
        throw;
    }
    cp.state = std::move(x);
    cp.multipliers = lambda;
    cp.residual_norm = r;
    cp.newton_iters = iters;
    cp.classification = classify_limit(cp, params, grid);
    return cp;
}

double elastica_residual(const State& state, const Grid& grid)
{
    const Eigen::VectorXd k = curvature(state, grid);
    const int n = grid.n;
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) {
        const double kpp = (k[(i + 1) % n] - 2.0 * k[i] + k[(i + n - 1) % n]) / (grid.ds * grid.ds);
        a[i] = kpp + 0.5 * k[i] * k[i] * k[i];
    }
    const double kk = k.squaredNorm();
    const double lambda = kk > 0.0 ? a.dot(k) / kk : 0.0;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - lambda * k).cwiseAbs().maxCoeff() / scale;
}

Classification classify_limit(const CriticalPoint& cp, const ModelParams& params, const Grid& grid, double tol)
{
    const State& s = cp.state;
    const double rho_dev = (s.rho.array() - params.nu).abs().maxCoeff();
    if (rho_dev > tol)
        return Classification::NontrivialDensity;
    if (s.omega != 0) {
        const double target = 2.0 * std::numbers::pi * s.omega / grid.length;
        const double kdev = (curvature(s, grid).array() - target).abs().maxCoeff();
        return kdev <= tol ? Classification::HomogeneousCircle : Classification::Unclassified;
    }
    return elastica_residual(s, grid) <= tol ? Classification::FigureEightLike : Classification::Unclassified;
}

} // namespace elastica
