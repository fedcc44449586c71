#pragma once

#include "elastica/model.hpp"

#include <Eigen/Sparse>

namespace elastica::detail {

// [[w I + s (H + C), s J^T], [s J, 0]] with a pattern that only depends on N.
Eigen::SparseMatrix<double> kkt_matrix(const State& state, const Multipliers& lambda, const ModelParams& params,
                                       const Grid& grid, double identity_weight, double scale);

// g + J^T Lambda
Eigen::VectorXd lagrangian_gradient(const State& state, const Multipliers& lambda, const ModelParams& params,
                                    const Grid& grid);

} // namespace elastica::detail
