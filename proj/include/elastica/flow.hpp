#pragma once

#include "elastica/model.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <optional>
#include <vector>

namespace elastica {

enum class SymmetryMode {
    Increment, ///< project the increment onto the constant-free k-fold space
    Verbatim,  ///< project the state itself (drops the mean of theta - ramp and rho)
};

struct FlowConfig {
    double tau0 = 1e-4;
    double tau_min = 1e-12;
    double tau_max = 1.0;
    double grow_factor = 1.2;
    double grow_threshold = 1e-3;
    double shrink_threshold = 1e-1;
    std::optional<double> newton_tol_abs; ///< default 1e-10 * sqrt(2N)
    double newton_tol_rel = 1e-3;
    int newton_max_iter = 50;
    double t_final = 1.0;
    double stationarity_eps = 1e-8;
    std::optional<int> symmetry_k;
    SymmetryMode symmetry_mode = SymmetryMode::Increment;
    int snapshot_every = 0; ///< 0: only the initial and final states
    int max_rejections = 20;
    bool keep_snapshots = true;    ///< store snapshots in the returned trajectory
    bool geometry_diagnostics = true; ///< axial residual and embeddedness in every trace row

    void validate() const;
    double tol_abs(int n) const;
};

struct StepResult {
    State state;
    Multipliers multipliers;
    int newton_iters = 0;
    double residual_norm = 0.0;
    double tau_used = 0.0;
    double energy = 0.0;
    bool accepted = false;
};

struct KktSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
};

/// Newton system of one minimizing-movement step, divided through by ds.
/// Unknowns are (delta eta, delta Lambda).
KktSystem assemble_kkt(const State& state_j, const Multipliers& lambda_j, const State& state_n, double tau,
                       const ModelParams& params, const Grid& grid);

/// Solver for bordered systems [[K, B], [C, D]] with a 3-wide border: sparse LU
/// of K (symbolic analysis reused while the pattern is unchanged), a dense Schur
/// complement for the border, and one step of iterative refinement.
class KktSolver {
public:
    Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& matrix, const Eigen::VectorXd& rhs);

private:
    Eigen::VectorXd solve_once(const Eigen::VectorXd& rhs) const;

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    Eigen::Index rows_ = -1;
    Eigen::Index nnz_ = -1;
    Eigen::MatrixXd kinv_b_;
    Eigen::MatrixXd c_;
    Eigen::PartialPivLU<Eigen::Matrix3d> schur_;
};

StepResult mm_step(const State& state_n, const Multipliers& lambda_warm, double tau, const FlowConfig& cfg,
                   const ModelParams& params, const Grid& grid);
StepResult mm_step(const State& state_n, const Multipliers& lambda_warm, double tau, const FlowConfig& cfg,
                   const ModelParams& params, const Grid& grid, KktSolver& solver);

double adapt_tau(double tau, double increment_inf_norm, const FlowConfig& cfg);

State project_symmetry(const State& state_new, const State& state_old, int k, const Grid& grid,
                       SymmetryMode mode = SymmetryMode::Increment);

/// Discrete multipliers seeded from the continuous formulas (zero if Pi is singular).
Multipliers initial_multipliers(const State& state, const ModelParams& params, const Grid& grid);

struct TraceRow {
    int step = 0;
    double t = 0.0;
    double tau = 0.0;
    int newton_iters = 0;
    double energy = 0.0;
    double energy_theta = 0.0;
    double energy_rho = 0.0;
    Eigen::Vector3d constraints = Eigen::Vector3d::Zero();
    Multipliers lambda;
    double lth1 = 0.0;
    double lth2 = 0.0;
    double lrho = 0.0;
    double min_kappa = 0.0;
    double max_kappa = 0.0;
    int sign_changes = 0;
    int zeros = 0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    double rho_var = 0.0; ///< ds * sum (rho - nu)^2
    double rot_residual = 0.0;
    double axial_residual = 0.0;
    bool embedded = false;
};

TraceRow diagnose(const State& state, const Multipliers& lambda, const ModelParams& params, const Grid& grid,
                  int symmetry_k, bool geometry);

struct Snapshot {
    int step = 0;
    double t = 0.0;
    State state;
};

class FlowObserver {
public:
    virtual ~FlowObserver() = default;
    virtual void on_trace(const TraceRow&) {}
    virtual void on_snapshot(const Snapshot&) {}
};

enum class Termination { ReachedFinalTime, Stationary };

struct Trajectory {
    std::vector<TraceRow> trace;
    std::vector<Snapshot> snapshots;
    State final_state;
    Multipliers final_multipliers;
    double t = 0.0;
    int accepted_steps = 0;
    int rejected_steps = 0;
    Termination termination = Termination::ReachedFinalTime;
};

Trajectory run_flow(const State& initial, const ModelParams& params, const Grid& grid, const FlowConfig& cfg,
                    FlowObserver* observer = nullptr);

} // namespace elastica
