#pragma once

#include "elastica/model.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace elastica {

/// One Fourier term a cos(2 pi l s / L) + b sin(2 pi l s / L).
struct Mode {
    int l = 0;
    double a = 0.0;
    double b = 0.0;
};

Eigen::VectorXd evaluate_modes(const std::vector<Mode>& modes, const Grid& grid);

/// Gauss-Newton projection onto G = 0, minimizing the distance to the input.
State project_to_constraints(const State& state, const ModelParams& params, const Grid& grid, double tol = 1e-12);

/// theta = ramp, rho = nu or the profile shifted to mean nu.
State make_circle(const ModelParams& params, const Grid& grid,
                  const std::optional<Eigen::VectorXd>& rho_profile = std::nullopt);

/// Ramp plus Fourier modes in theta, nu plus modes in rho, then projected.
State make_perturbed_circle(const ModelParams& params, const Grid& grid, const std::vector<Mode>& theta_modes,
                            const std::vector<Mode>& rho_modes);

/// Stadium: two smoothed curvature bumps each turning by pi*omega, zero curvature on
/// the straight sides. The sides are centred at s = L/8 and 5L/8 with theta = 0 and pi.
State make_stadium(const ModelParams& params, const Grid& grid, double aspect, double smoothing,
                   const std::optional<Eigen::VectorXd>& rho_profile = std::nullopt);

/// Two drop-shaped lobes joined by a straight narrow neck, symmetric under both
/// coordinate reflections. Lengths are fractions of L/4 (one quarter of the curve).
struct NeckShape {
    double half_gap = 5e-3;      ///< half distance between the two neck strands
    double neck = 0.35;          ///< straight neck half
    double corner = 0.1;         ///< concave corner where the neck meets a lobe
    double descent = 0.15;       ///< straight lobe side after the corner
    double transition = 0.04;    ///< smoothing width of the curvature bumps
    double rho_width = 1.0;      ///< support of each density bump (fraction of L/4)
    double rho_floor = 0.0;      ///< density baseline outside the bumps
};

State make_neck(const ModelParams& params, const Grid& grid, const NeckShape& shape);

/// Arclength-resampled Bernoulli lemniscate (omega = 0), plus rho = nu + modes.
State make_lemniscate(const ModelParams& params, const Grid& grid, const std::vector<Mode>& rho_modes = {});

/// Two consecutive copies of an omega = 0 state, the second rotated by `rotation`,
/// projected onto the constraints of the doubled grid.
State make_double_covering(const State& single, double rotation, const ModelParams& params, const Grid& grid);

void save_state(const State& state, const Grid& grid, const std::filesystem::path& path);

/// Loads a state file; with `project` set the result is projected onto G = 0.
State load_state(const std::filesystem::path& path, const Grid& grid, int omega,
                 const ModelParams* project = nullptr);

} // namespace elastica
