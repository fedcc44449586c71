#include "elastica/flow.hpp"

#include "elastica/error.hpp"
#include "elastica/geometry.hpp"
#include "kkt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace elastica {

void FlowConfig::validate() const
{
    if (!(tau_min > 0.0 && tau_min <= tau0 && tau0 <= tau_max))
        fail(ErrorCode::InvalidArgument, "need 0 < tau_min <= tau0 <= tau_max");
    if (!(grow_factor > 1.0))
        fail(ErrorCode::InvalidArgument, "grow_factor must exceed 1");
    if (!(shrink_threshold > grow_threshold && grow_threshold > 0.0))
        fail(ErrorCode::InvalidArgument, "need shrink_threshold > grow_threshold > 0");
    if (newton_tol_abs && !(*newton_tol_abs > 0.0))
        fail(ErrorCode::InvalidArgument, "newton_tol_abs must be positive");
    if (!(newton_tol_rel >= 0.0))
        fail(ErrorCode::InvalidArgument, "newton_tol_rel must be nonnegative");
    if (newton_max_iter < 1)
        fail(ErrorCode::InvalidArgument, "newton_max_iter must be at least 1");
    if (!(t_final > 0.0))
        fail(ErrorCode::InvalidArgument, "t_final must be positive");
    if (!(stationarity_eps >= 0.0))
        fail(ErrorCode::InvalidArgument, "stationarity_eps must be nonnegative");
    if (symmetry_k && *symmetry_k < 1)
        fail(ErrorCode::InvalidArgument, "symmetry_k must be positive");
    if (snapshot_every < 0)
        fail(ErrorCode::InvalidArgument, "snapshot_every must be nonnegative");
    if (max_rejections < 1)
        fail(ErrorCode::InvalidArgument, "max_rejections must be positive");
}

double FlowConfig::tol_abs(int n) const
{
    return newton_tol_abs ? *newton_tol_abs : 1e-10 * std::sqrt(2.0 * n);
}

KktSystem assemble_kkt(const State& state_j, const Multipliers& lambda_j, const State& state_n, double tau,
                       const ModelParams& params, const Grid& grid)
{
    if (!(tau > 0.0))
        fail(ErrorCode::InvalidArgument, "tau must be positive");
    validate(state_n, grid, params);
    const int n = grid.n;
    const double scale = tau / grid.ds;
    KktSystem sys;
    sys.matrix = detail::kkt_matrix(state_j, lambda_j, params, grid, 1.0, scale);
    sys.rhs.resize(2 * n + 3);
    sys.rhs.head(2 * n) = -(state_j.stacked() - state_n.stacked())
                          - scale * detail::lagrangian_gradient(state_j, lambda_j, params, grid);
    sys.rhs.tail(3) = -scale * discrete_constraints(state_j, params, grid);
    return sys;
}

Eigen::VectorXd KktSolver::solve(const Eigen::SparseMatrix<double>& matrix, const Eigen::VectorXd& rhs)
{
    const Eigen::Index m = matrix.rows() - 3;
    if (m < 1 || matrix.cols() != matrix.rows() || rhs.size() != matrix.rows())
        fail(ErrorCode::DimensionMismatch, "bordered system has inconsistent sizes");
    const Eigen::SparseMatrix<double> k = matrix.topLeftCorner(m, m);
    if (k.rows() != rows_ || k.nonZeros() != nnz_) {
        lu_.analyzePattern(k);
        rows_ = k.rows();
        nnz_ = k.nonZeros();
    }
    lu_.factorize(k);
    if (lu_.info() != Eigen::Success)
        fail(ErrorCode::LinearSolveFailure, "factorization failed: " + lu_.lastErrorMessage());
    const Eigen::MatrixXd b = Eigen::MatrixXd(matrix.topRightCorner(m, 3));
    c_ = Eigen::MatrixXd(matrix.bottomLeftCorner(3, m));
    const Eigen::Matrix3d d = Eigen::MatrixXd(matrix.bottomRightCorner(3, 3));
    kinv_b_ = lu_.solve(b);
    if (lu_.info() != Eigen::Success || !kinv_b_.allFinite())
        fail(ErrorCode::LinearSolveFailure, "solve failed");
    const Eigen::Matrix3d schur = d - c_ * kinv_b_;
    schur_.compute(schur);
    // rows can differ in magnitude by many orders when K is nearly singular, so judge the equilibrated matrix
    const Eigen::Vector3d rows = schur.cwiseAbs().rowwise().maxCoeff();
    if (!(rows.minCoeff() > 0.0) || !schur.allFinite())
        fail(ErrorCode::LinearSolveFailure, "singular border (Schur complement)");
    const Eigen::Matrix3d equilibrated = rows.cwiseInverse().asDiagonal() * schur;
    if (!(Eigen::PartialPivLU<Eigen::Matrix3d>(equilibrated).rcond() >= 1e-14))
        fail(ErrorCode::LinearSolveFailure, "singular border (Schur complement)");

    Eigen::VectorXd x = solve_once(rhs);
    x += solve_once(rhs - matrix * x);
    if (!x.allFinite())
        fail(ErrorCode::LinearSolveFailure, "solve produced non-finite values");
    return x;
}

Eigen::VectorXd KktSolver::solve_once(const Eigen::VectorXd& rhs) const
{
    const Eigen::Index m = rows_;
    const Eigen::VectorXd y = lu_.solve(rhs.head(m));
    const Eigen::Vector3d z = schur_.solve(rhs.tail(3) - c_ * y);
    Eigen::VectorXd x(m + 3);
    x.head(m) = y - kinv_b_ * z;
    x.tail(3) = z;
    return x;
}

namespace {

struct NewtonResidual {
    Eigen::VectorXd vector;
    double constraint_inf = 0.0;
};

NewtonResidual mm_residual(const State& x, const Multipliers& lambda, const State& xn, double tau,
                           const ModelParams& params, const Grid& grid)
{
    const int n = grid.n;
    NewtonResidual r;
    r.vector.resize(2 * n + 3);
    r.vector.head(2 * n) =
        (x.stacked() - xn.stacked()) + (tau / grid.ds) * detail::lagrangian_gradient(x, lambda, params, grid);
    const Eigen::Vector3d g = discrete_constraints(x, params, grid);
    r.vector.tail(3) = g;
    r.constraint_inf = g.cwiseAbs().maxCoeff();
    return r;
}

// shift average over k copies, then the mean removed
Eigen::VectorXd project_modes(const Eigen::VectorXd& v, int k)
{
    const long n = v.size();
    const long shift = n / k;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long m = 0; m < k; ++m)
            acc += v[(i + m * shift) % n];
        p[i] = acc / k;
    }
    p.array() -= p.mean();
    return p;
}

} // namespace

StepResult mm_step(const State& state_n, const Multipliers& lambda_warm, double tau, const FlowConfig& cfg,
                   const ModelParams& params, const Grid& grid)
{
    KktSolver solver;
    return mm_step(state_n, lambda_warm, tau, cfg, params, grid, solver);
}

StepResult mm_step(const State& state_n, const Multipliers& lambda_warm, double tau, const FlowConfig& cfg,
                   const ModelParams& params, const Grid& grid, KktSolver& solver)
{
    validate(state_n, grid, params);
    if (!(tau > 0.0))
        fail(ErrorCode::InvalidArgument, "tau must be positive");
    const int n = grid.n;
    const double tol = cfg.tol_abs(n);

    StepResult out;
    out.tau_used = tau;
    State x = state_n;
    Multipliers lambda = lambda_warm;
    NewtonResidual r = mm_residual(x, lambda, state_n, tau, params, grid);
    const double r0 = r.vector.norm();
    double previous = r0;
    bool converged = false;
    int iters = 0;
    try {
        for (;;) {
            const double norm = r.vector.norm();
            out.residual_norm = norm;
            if (!std::isfinite(norm))
                fail(ErrorCode::NewtonDivergence, "non-finite Newton residual");
            if (norm <= tol)
                converged = true;
            else if (iters > 0 && std::abs(norm - previous) <= cfg.newton_tol_rel * previous
                     && r.constraint_inf <= 10.0 * tol)
                converged = true;
            if (converged || iters >= cfg.newton_max_iter)
                break;
            if (norm > 1e3 * std::max(r0, tol))
                fail(ErrorCode::NewtonDivergence, "Newton residual grew by more than 1e3");

            const KktSystem sys = assemble_kkt(x, lambda, state_n, tau, params, grid);
            const Eigen::VectorXd delta = solver.solve(sys.matrix, sys.rhs);
            x.theta += delta.head(n);
            x.rho += delta.segment(n, n);
            lambda = Multipliers::from_vector(lambda.vector() + delta.tail(3));
            ++iters;
            previous = norm;
            r = mm_residual(x, lambda, state_n, tau, params, grid);
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NonpositiveStiffness)
            fail(ErrorCode::NewtonDivergence, std::string("Newton iterate left the admissible range: ") + e.what());
        throw;
    }
    out.state = std::move(x);
    out.multipliers = lambda;
    out.newton_iters = iters;
    out.accepted = converged;
    out.energy = discrete_energy(out.state, params, grid).total;
    return out;
}

double adapt_tau(double tau, double increment_inf_norm, const FlowConfig& cfg)
{
    double next = tau;
    if (increment_inf_norm < cfg.grow_threshold)
        next = tau * cfg.grow_factor;
    else if (increment_inf_norm > cfg.shrink_threshold)
        next = tau / cfg.grow_factor;
    return std::clamp(next, cfg.tau_min, cfg.tau_max);
}

State project_symmetry(const State& state_new, const State& state_old, int k, const Grid& grid, SymmetryMode mode)
{
    const int n = grid.n;
    if (k < 1 || n % k != 0)
        fail(ErrorCode::IncompatibleGrid, "symmetry order " + std::to_string(k) + " does not divide N = "
                                              + std::to_string(n));
    if (state_new.size() != n || state_old.size() != n)
        fail(ErrorCode::DimensionMismatch, "state/grid size mismatch");
    State out = state_new;
    if (mode == SymmetryMode::Increment) {
        out.theta = state_old.theta + project_modes(state_new.theta - state_old.theta, k);
        out.rho = state_old.rho + project_modes(state_new.rho - state_old.rho, k);
    } else {
        Eigen::VectorXd ramp(n);
        for (int i = 0; i < n; ++i)
            ramp[i] = 2.0 * std::numbers::pi * state_new.omega * grid.node(i) / grid.length;
        out.theta = ramp + project_modes(state_new.theta - ramp, k);
        out.rho = project_modes(state_new.rho, k);
    }
    return out;
}

Multipliers initial_multipliers(const State& state, const ModelParams& params, const Grid& grid)
{
    try {
        const ContinuousMultipliers m = continuous_multipliers(state, params, grid);
        return {m.lambda_rho, m.lambda_theta2, m.lambda_theta1};
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularPi)
            throw;
        return {};
    }
}

TraceRow diagnose(const State& state, const Multipliers& lambda, const ModelParams& params, const Grid& grid,
                  int symmetry_k, bool geometry)
{
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    TraceRow row;
    const EnergySplit e = discrete_energy(state, params, grid);
    row.energy = e.total;
    row.energy_theta = e.bending;
    row.energy_rho = e.diffusion;
    row.constraints = discrete_constraints(state, params, grid);
    row.lambda = lambda;
    try {
        const ContinuousMultipliers m = continuous_multipliers(state, params, grid);
        row.lth1 = m.lambda_theta1;
        row.lth2 = m.lambda_theta2;
        row.lrho = m.lambda_rho;
    } catch (const Error& err) {
        if (err.code() != ErrorCode::SingularPi)
            throw;
        row.lth1 = row.lth2 = row.lrho = nan;
    }
    const Eigen::VectorXd kappa = curvature(state, grid);
    row.min_kappa = kappa.minCoeff();
    row.max_kappa = kappa.maxCoeff();
    row.sign_changes = count_sign_changes(kappa);
    row.zeros = count_zeros(kappa);
    row.rho_min = state.rho.minCoeff();
    row.rho_max = state.rho.maxCoeff();
    row.rho_var = grid.ds * (state.rho.array() - params.nu).square().sum();
    if (geometry) {
        const SymmetryReport sym = symmetry_residuals(state, params, grid, symmetry_k);
        row.rot_residual = sym.rot_residual;
        row.axial_residual = sym.axial_residual;
        try {
            row.embedded = is_embedded(reconstruct_curve(state, grid));
        } catch (const Error& err) {
            if (err.code() != ErrorCode::DegenerateEdge)
                throw;
            row.embedded = false;
        }
    } else {
        row.rot_residual = symmetry_k > 1 ? symmetry_residuals(state, params, grid, symmetry_k).rot_residual : 0.0;
        row.axial_residual = nan;
    }
    return row;
}

Trajectory run_flow(const State& initial, const ModelParams& params, const Grid& grid, const FlowConfig& cfg,
                    FlowObserver* observer)
{
    params.validate();
    cfg.validate();
    validate(initial, grid, params);
    const Eigen::Vector3d g0 = discrete_constraints(initial, params, grid);
    if (!(g0.cwiseAbs().maxCoeff() <= 1e-8))
        fail(ErrorCode::InfeasibleInitialState,
             "initial constraint residual " + std::to_string(g0.cwiseAbs().maxCoeff()) + " exceeds 1e-8");
    const int k = cfg.symmetry_k.value_or(1);
    if (cfg.symmetry_k) {
        if (grid.n % k != 0)
            fail(ErrorCode::IncompatibleGrid, "symmetry_k does not divide N");
        const SymmetryReport sym = symmetry_residuals(initial, params, grid, k);
        if (!(sym.rot_residual <= 1e-8))
            fail(ErrorCode::InfeasibleInitialState,
                 "initial state is not " + std::to_string(k) + "-fold symmetric (residual "
                     + std::to_string(sym.rot_residual) + ")");
    }

    Trajectory traj;
    State state = initial;
    Multipliers lambda = initial_multipliers(initial, params, grid);
    double t = 0.0;
    int step = 0;

    auto record = [&](const TraceRow& row) {
        traj.trace.push_back(row);
        if (observer)
            observer->on_trace(row);
    };
    auto snapshot = [&]() {
        Snapshot snap{step, t, state};
        if (observer)
            observer->on_snapshot(snap);
        if (cfg.keep_snapshots)
            traj.snapshots.push_back(std::move(snap));
    };

    TraceRow row0 = diagnose(state, lambda, params, grid, k, cfg.geometry_diagnostics);
    row0.tau = cfg.tau0;
    record(row0);
    snapshot();

    KktSolver solver;
    double tau = cfg.tau0;
    double energy = row0.energy;
    int rejections = 0;
    bool last_snapshot_current = true;
    const double t_end = cfg.t_final * (1.0 - 1e-14);

    while (t < t_end) {
        const double tau_step = std::min(tau, cfg.t_final - t);
        StepResult res;
        bool ok = false;
        try {
            res = mm_step(state, lambda, tau_step, cfg, params, grid, solver);
            ok = res.accepted;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NewtonDivergence && e.code() != ErrorCode::LinearSolveFailure)
                throw;
        }
        if (ok && cfg.symmetry_k && k > 1) {
            res.state = project_symmetry(res.state, state, k, grid, cfg.symmetry_mode);
            try {
                res.energy = discrete_energy(res.state, params, grid).total;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::NonpositiveStiffness)
                    throw;
                ok = false;
            }
        }
        if (ok && res.energy > energy + 1e-12 * (1.0 + std::abs(energy)))
            ok = false;
        if (!ok) {
            ++traj.rejected_steps;
            if (++rejections >= cfg.max_rejections)
                fail(ErrorCode::StepStalled, "step rejected " + std::to_string(rejections)
                                                 + " consecutive times at t = " + std::to_string(t));
            tau = std::max(0.5 * tau, cfg.tau_min);
            continue;
        }
        rejections = 0;

        const double increment = (res.state.stacked() - state.stacked()).cwiseAbs().maxCoeff();
        state = std::move(res.state);
        lambda = res.multipliers;
        energy = res.energy;
        t += tau_step;
        ++step;
        ++traj.accepted_steps;

        TraceRow row = diagnose(state, lambda, params, grid, k, cfg.geometry_diagnostics);
        row.step = step;
        row.t = t;
        row.tau = tau_step;
        row.newton_iters = res.newton_iters;
        record(row);
        last_snapshot_current = false;

        const bool stationary = increment / tau_step < cfg.stationarity_eps;
        const bool done = stationary || t >= t_end;
        if ((cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) || done) {
            snapshot();
            last_snapshot_current = true;
        }
        if (stationary) {
            traj.termination = Termination::Stationary;
            break;
        }
        tau = adapt_tau(tau, increment, cfg);
    }
    if (!last_snapshot_current)
        snapshot();
    if (traj.termination != Termination::Stationary)
        traj.termination = Termination::ReachedFinalTime;
    traj.final_state = state;
    traj.final_multipliers = lambda;
    traj.t = t;
    return traj;
}

} // namespace elastica
