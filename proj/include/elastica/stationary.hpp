#pragma once

#include "elastica/model.hpp"

#include <string_view>

namespace elastica {

enum class Classification { HomogeneousCircle, FigureEightLike, NontrivialDensity, Unclassified };

std::string_view to_string(Classification c);

struct CriticalPoint {
    State state;
    Multipliers multipliers;
    double residual_norm = 0.0;
    int newton_iters = 0;
    Classification classification = Classification::Unclassified;
};

struct StationaryResidual {
    double gradient = 0.0;   ///< min over Lambda of |(grad E + J^T Lambda) / ds|_inf (Lambda by least squares)
    double constraint = 0.0; ///< |G|_inf
    Multipliers lambda;
};

StationaryResidual stationary_residual(const State& state, const ModelParams& params, const Grid& grid);

/// Newton on the first-order conditions. The KKT matrix carries a tiny proximal
/// shift so that rotations of theta (an exact symmetry) do not make it singular.
CriticalPoint solve_stationary(const State& guess, const ModelParams& params, const Grid& grid, double tol = 1e-10,
                               int max_iter = 50);

/// Residual of kappa'' + kappa^3/2 - lambda kappa with lambda fitted by least
/// squares, in the sup norm relative to max(1, |kappa'' + kappa^3/2|_inf).
double elastica_residual(const State& state, const Grid& grid);

Classification classify_limit(const CriticalPoint& cp, const ModelParams& params, const Grid& grid,
                              double tol = 1e-4);

} // namespace elastica
