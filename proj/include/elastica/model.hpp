#pragma once

#include "elastica/stiffness.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace elastica {

/// Physical parameters of the heterogeneous elastic curve.
struct ModelParams {
    double L = 2.0 * 3.14159265358979323846; ///< curve length
    double nu = 0.0;                          ///< prescribed mean density
    double mu = 1.0;                          ///< density diffusion weight
    double c0 = 0.0;                          ///< spontaneous curvature
    int omega = 1;                            ///< rotation index
    Stiffness beta = Stiffness::exponential();

    void validate() const;
};

/// Uniform periodic grid s_i = i * ds, i = 0..N-1.
struct Grid {
    int n = 0;
    double length = 0.0;
    double ds = 0.0;

    Grid() = default;
    Grid(int n, double length);

    double node(int i) const { return i * ds; }
    Eigen::VectorXd nodes() const;
};

/// Discrete pair (theta, rho). theta_N = theta_0 + 2*pi*omega.
struct State {
    Eigen::VectorXd theta;
    Eigen::VectorXd rho;
    int omega = 1;

    int size() const { return static_cast<int>(theta.size()); }
    double theta_at(long i) const; ///< theta with the 2*pi*omega jump applied for any integer index
    double rho_at(long i) const;

    Eigen::VectorXd stacked() const; ///< [theta; rho]
    static State from_stacked(const Eigen::VectorXd& eta, int omega);
};

/// Discrete Lagrange multipliers paired with (G_mass, G_sin, G_cos).
struct Multipliers {
    double mass = 0.0;
    double sin_closure = 0.0;
    double cos_closure = 0.0;

    Eigen::Vector3d vector() const { return {mass, sin_closure, cos_closure}; }
    static Multipliers from_vector(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

enum class Field { Theta, Rho };

struct EnergySplit {
    double total = 0.0;
    double bending = 0.0;   ///< beta term
    double diffusion = 0.0; ///< mu term
};

/// Throws on size/omega/finiteness problems.
void validate(const State& state, const Grid& grid, const ModelParams& params);

/// Undivided differences with the periodic convention.
Eigen::VectorXd diff_forward(const State& state, Field field);
Eigen::VectorXd diff_backward(const State& state, Field field);
Eigen::VectorXd diff_centered(const State& state, Field field);

EnergySplit discrete_energy(const State& state, const ModelParams& params, const Grid& grid);

/// Exact gradient of the discrete energy, laid out as [theta block; rho block].
Eigen::VectorXd discrete_gradient(const State& state, const ModelParams& params, const Grid& grid);

/// Exact Hessian of the discrete energy (2N x 2N, symmetric).
Eigen::SparseMatrix<double> energy_hessian(const State& state, const ModelParams& params, const Grid& grid);

/// (G_mass, G_sin, G_cos).
Eigen::Vector3d discrete_constraints(const State& state, const ModelParams& params, const Grid& grid);

/// 3 x 2N Jacobian of the constraints.
Eigen::MatrixXd constraint_jacobian(const State& state, const Grid& grid);

/// Diagonal of sum_k lambda_k * Hess(G_k); only the theta block is nonzero.
Eigen::VectorXd constraint_hessian_diagonal(const State& state, const Multipliers& lambda, const Grid& grid);

} // namespace elastica
