#include "kkt.hpp"

#include <vector>

namespace elastica::detail {

Eigen::SparseMatrix<double> kkt_matrix(const State& state, const Multipliers& lambda, const ModelParams& params,
                                       const Grid& grid, double identity_weight, double scale)
{
    const int n = grid.n;
    const Eigen::SparseMatrix<double> h = energy_hessian(state, params, grid);
    const Eigen::VectorXd c = constraint_hessian_diagonal(state, lambda, grid);
    const Eigen::MatrixXd j = constraint_jacobian(state, grid);

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(h.nonZeros() + 2 * n + 6 * n + 6));
    for (int k = 0; k < h.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(h, k); it; ++it)
            t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), scale * it.value());
    for (int i = 0; i < 2 * n; ++i)
        t.emplace_back(i, i, identity_weight + scale * c[i]);
    // mass row touches the rho block, closure rows the theta block
    for (int i = 0; i < n; ++i) {
        t.emplace_back(2 * n, n + i, scale * j(0, n + i));
        t.emplace_back(n + i, 2 * n, scale * j(0, n + i));
        for (int r = 1; r < 3; ++r) {
            t.emplace_back(2 * n + r, i, scale * j(r, i));
            t.emplace_back(i, 2 * n + r, scale * j(r, i));
        }
    }
    for (int r = 0; r < 3; ++r)
        t.emplace_back(2 * n + r, 2 * n + r, 0.0);

    Eigen::SparseMatrix<double> a(2 * n + 3, 2 * n + 3);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    return a;
}

Eigen::VectorXd lagrangian_gradient(const State& state, const Multipliers& lambda, const ModelParams& params,
                                    const Grid& grid)
{
    return discrete_gradient(state, params, grid) + constraint_jacobian(state, grid).transpose() * lambda.vector();
}

} // namespace elastica::detail
