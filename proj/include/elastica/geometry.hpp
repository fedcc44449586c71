#pragma once

#include "elastica/model.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace elastica {

/// Constant appearing in the embeddedness threshold.
inline constexpr double kEmbeddednessConstant = 146.628;

enum class Stencil { Forward, Backward, Centered };

/// Discrete curvature (theta differences divided by ds).
Eigen::VectorXd curvature(const State& state, const Grid& grid, Stencil stencil = Stencil::Centered);

enum class Centering {
    FromIntegral, ///< discrete mean of the nodes is the origin
    AtOrigin,     ///< node 0 at the origin
};

/// Reconstructed polygon. points has N+1 columns; the last one is the endpoint
/// reached after a full turn, which equals the first up to closure_defect.
struct Curve {
    Eigen::Matrix2Xd points;
    double closure_defect = 0.0;

    int size() const { return static_cast<int>(points.cols()) - 1; }
};

Curve reconstruct_curve(const State& state, const Grid& grid, Centering centering = Centering::FromIntegral);

/// Continuous-in-form multipliers evaluated with rectangle-rule quadrature.
struct ContinuousMultipliers {
    double lambda_theta1 = 0.0;
    double lambda_theta2 = 0.0;
    double lambda_rho = 0.0;
    Eigen::Matrix2d pi = Eigen::Matrix2d::Zero();
};

ContinuousMultipliers continuous_multipliers(const State& state, const ModelParams& params, const Grid& grid);

/// Default threshold used when counting zeros: 1e-7 * max|kappa|.
double default_zero_tolerance(const Eigen::VectorXd& kappa);

/// Number of zeros of a periodic sequence: cyclic runs with |k| <= tol plus
/// direct crossings between strictly positive and strictly negative neighbours.
int count_zeros(const Eigen::VectorXd& kappa, double tol);
int count_zeros(const Eigen::VectorXd& kappa);

/// Number of cyclic sign alternations after discarding entries with |k| <= tol.
int count_sign_changes(const Eigen::VectorXd& kappa, double tol);
int count_sign_changes(const Eigen::VectorXd& kappa);

/// Sign of the orientation determinant of (a, b, c), computed exactly.
int orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c);

/// True iff the closed polygon through points 0..N-1 has no self-intersections.
bool is_embedded(const Curve& curve);

/// inf_beta / 2 * (C / L - 4 pi c0 + L c0^2).
double embeddedness_threshold(double inf_beta, const ModelParams& params);
double embeddedness_threshold(const ModelParams& params, double rho_lo, double rho_hi);

struct SymmetryReport {
    double rot_residual = 0.0;   ///< max over nontrivial shifts by N/k of the sup-difference of (theta - ramp, rho)
    double axial_residual = 0.0; ///< min over reflection anchors of the sup-difference of (kappa, rho)
    Eigen::Vector2d lambda_theta = Eigen::Vector2d::Zero();
};

SymmetryReport symmetry_residuals(const State& state, const ModelParams& params, const Grid& grid, int k);

/// theta - 2*pi*omega*s/L
Eigen::VectorXd unwrapped_angle(const State& state, const Grid& grid);

struct DecayFit {
    double rate = 0.0;        ///< minus the slope of log(value) against t
    double intercept = 0.0;
    double correlation = 0.0; ///< Pearson correlation of (t, log value)
};

/// Least-squares fit of log(value) against t over the last half of the samples.
DecayFit density_decay_fit(const std::vector<std::pair<double, double>>& trace);

} // namespace elastica
