#include "elastica/error.hpp"
#include "elastica/model.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace elastica;
using elastica::test::pi;

namespace {

// straightforward re-evaluation of the energy, written independently of the library loops
double naive_energy(const State& s, const ModelParams& p, double ds)
{
    const int n = s.size();
    auto th = [&](int i) {
        if (i < 0)
            return s.theta[i + n] - 2 * pi * s.omega;
        if (i >= n)
            return s.theta[i - n] + 2 * pi * s.omega;
        return s.theta[i];
    };
    double e = 0;
    for (int i = 0; i < n; ++i) {
        const double k = (th(i + 1) - th(i - 1)) / (2 * ds);
        const double dr = (s.rho[(i + 1) % n] - s.rho[i]) / ds;
        e += p.beta.value(s.rho[i]) * (k - p.c0) * (k - p.c0) + p.mu * dr * dr;
    }
    return 0.5 * ds * e;
}

ModelParams params_with(const Stiffness& beta, double mu = 0.7, double c0 = 0.4, int omega = 1, double L = 2 * pi)
{
    ModelParams p;
    p.L = L;
    p.mu = mu;
    p.c0 = c0;
    p.omega = omega;
    p.beta = beta;
    return p;
}

} // namespace

TEST_CASE("stiffness derivatives agree with finite differences")
{
    std::vector<Stiffness> all = test::positive_families();
    all.push_back(Stiffness::neg_quadratic());
    all.push_back(Stiffness::polynomial({0.3, -1.0, 0.25, 0.1, -0.02}));
    for (const Stiffness& b : all) {
        CAPTURE(b.name());
        for (double x = -5.0; x <= 5.0; x += 0.25) {
            const double h = 1e-5 * std::max(1.0, std::abs(x));
            const double d1 = (b.value(x + h) - b.value(x - h)) / (2 * h);
            const double d2 = (b.d1(x + h) - b.d1(x - h)) / (2 * h);
            CHECK(std::abs(d1 - b.d1(x)) <= 1e-6 * std::max(1.0, std::abs(b.d1(x))));
            CHECK(std::abs(d2 - b.d2(x)) <= 1e-6 * std::max(1.0, std::abs(b.d2(x))));
        }
    }
}

TEST_CASE("stiffness infimum over an interval")
{
    CHECK(Stiffness::quadratic(0.03, 8).inf_over(-1, 2) == doctest::Approx(0.03));
    CHECK(Stiffness::quadratic(0.03, 8).inf_over(0.5, 2) == doctest::Approx(0.03 + 2));
    CHECK(Stiffness::double_well(0.5).inf_over(-3, 3) == doctest::Approx(0.5));
    CHECK(Stiffness::exponential(1).inf_over(-1, 1) == doctest::Approx(std::exp(-1.0)));
    CHECK(Stiffness::polynomial({2.0, 0.0, -3.0, 0.0, 1.0}).inf_over(-2, 2) == doctest::Approx(2.0 - 9.0 / 4.0));
    CHECK_THROWS_AS(Stiffness::from_name("quadratic", {1.0}), Error);
    CHECK_THROWS_AS(Stiffness::from_name("spline", {}), Error);
}

TEST_CASE("differences of the ramp and of constants")
{
    State s;
    s.omega = 1;
    s.theta = Eigen::Vector4d(0, pi / 2, pi, 3 * pi / 2);
    s.rho = Eigen::Vector4d::Constant(0.3);
    const Eigen::VectorXd d = diff_forward(s, Field::Theta);
    for (int i = 0; i < 4; ++i)
        CHECK(d[i] == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(diff_forward(s, Field::Rho).cwiseAbs().maxCoeff() == 0.0);
    CHECK(diff_backward(s, Field::Rho).cwiseAbs().maxCoeff() == 0.0);

    const Grid g(37, 2 * pi);
    State r{test::ramp(g, 3), Eigen::VectorXd::Zero(37), 3};
    const Eigen::VectorXd fwd = diff_forward(r, Field::Theta);
    const Eigen::VectorXd bwd = diff_backward(r, Field::Theta);
    for (int i = 0; i < g.n; ++i) {
        CHECK(fwd[i] == doctest::Approx(2 * pi * 3 * g.ds / g.length).epsilon(1e-13));
        CHECK(bwd[i] == doctest::Approx(2 * pi * 3 * g.ds / g.length).epsilon(1e-13));
    }
}

TEST_CASE("closed-form energies of the double-well example")
{
    const Grid g(720, 2 * pi);
    ModelParams p = params_with(Stiffness::double_well(1.0), 1.0, 0.0);
    State s{test::ramp(g, 1), Eigen::VectorXd::Zero(720), 1};
    CHECK(discrete_energy(s, p, g).total == doctest::Approx(2 * pi).epsilon(1e-12));

    // integral of (sin^2(ls) - 1)^2 + 1 plus mu * l^2 cos^2 over [0, 2 pi]
    // evaluates to (3/8 + c) pi + mu l^2 pi / 2, so l = 2 gives 2 mu pi
    for (double mu : {1.0, 1.2, 1.3}) {
        p.mu = mu;
        for (int i = 0; i < g.n; ++i)
            s.rho[i] = std::sin(2 * g.node(i));
        CHECK(discrete_energy(s, p, g).total == doctest::Approx((3.0 / 8 + 1 + 2 * mu) * pi).epsilon(1e-3));
        for (int i = 0; i < g.n; ++i)
            s.rho[i] = std::sin(g.node(i));
        CHECK(discrete_energy(s, p, g).total == doctest::Approx((3.0 / 8 + 1 + mu / 2) * pi).epsilon(1e-3));
    }
}

TEST_CASE("energy matches an independent evaluation and its split")
{
    std::mt19937_64 rng(11);
    for (const Stiffness& b : test::positive_families()) {
        const Grid g(53, 3.1);
        const ModelParams p = params_with(b, 0.9, -0.3, 2, 3.1);
        const State s = test::random_state(rng, g, 2, 0.2);
        const EnergySplit e = discrete_energy(s, p, g);
        CHECK(e.total == doctest::Approx(naive_energy(s, p, g.ds)).epsilon(1e-13));
        CHECK(e.total == doctest::Approx(e.bending + e.diffusion).epsilon(1e-15));
        State shifted = s;
        shifted.theta.array() += 1.234;
        CHECK(discrete_energy(shifted, p, g).total == doctest::Approx(e.total).epsilon(1e-14));
    }
}

TEST_CASE("curvature equal to c0 with constant density has zero energy")
{
    const Grid g(64, 2 * pi);
    const ModelParams p = params_with(Stiffness::exponential(1.0), 1.0, 1.0);
    State s{test::ramp(g, 1), Eigen::VectorXd::Constant(64, 0.5), 1};
    CHECK(discrete_energy(s, p, g).total == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("nonpositive stiffness is rejected")
{
    const Grid g(16, 2 * pi);
    const ModelParams p = params_with(Stiffness::neg_quadratic());
    State s{test::ramp(g, 1), Eigen::VectorXd::Constant(16, 2.0), 1};
    try {
        discrete_energy(s, p, g);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonpositiveStiffness);
    }
}

TEST_CASE("gradient agrees with finite differences on random states")
{
    std::mt19937_64 rng(2024);
    int count = 0;
    for (int n : {16, 64}) {
        const Grid g(n, 2 * pi);
        for (int trial = 0; trial < 50; ++trial, ++count) {
            const auto fams = test::positive_families();
            const ModelParams p = params_with(fams[trial % fams.size()], 0.3 + 0.02 * trial, 0.1 * (trial % 7) - 0.3,
                                              1 + trial % 2);
            const State s = test::random_state(rng, g, p.omega, 0.1);
            const Eigen::VectorXd grad = discrete_gradient(s, p, g);
            const Eigen::VectorXd fd = test::fd_gradient(
                [&](const Eigen::VectorXd& x) { return discrete_energy(State::from_stacked(x, p.omega), p, g).total; },
                s.stacked());
            const double err = (fd - grad).cwiseAbs().maxCoeff() / std::max(1.0, grad.cwiseAbs().maxCoeff());
            CAPTURE(n);
            CAPTURE(trial);
            CHECK(err <= 1e-6);
        }
    }
    CHECK(count == 100);
}

TEST_CASE("theta gradient telescopes to zero for c0 = 0")
{
    std::mt19937_64 rng(5);
    const Grid g(40, 2 * pi);
    const ModelParams p = params_with(Stiffness::quadratic(0.1, 1.0), 1.0, 0.0);
    const State s = test::random_state(rng, g, 1, 0.3);
    const Eigen::VectorXd grad = discrete_gradient(s, p, g);
    CHECK(std::abs(g.ds * grad.head(g.n).sum()) <= 1e-13);
}

TEST_CASE("gradient vanishes at a stationary homogeneous circle")
{
    const Grid g(48, 2 * pi);
    for (double c0 : {0.0, 1.0, 3.0}) {
        const ModelParams p = params_with(Stiffness::shifted_quartic(0.2, 0.4), 1.0, c0);
        const State s{test::ramp(g, 1), Eigen::VectorXd::Constant(48, 0.4), 1};
        CHECK(discrete_gradient(s, p, g).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("hessian agrees with finite differences of the gradient")
{
    std::mt19937_64 rng(77);
    for (int n : {16, 64}) {
        const Grid g(n, 2 * pi);
        for (int trial = 0; trial < 50; ++trial) {
            const auto fams = test::positive_families();
            const ModelParams p = params_with(fams[trial % fams.size()], 0.5, 0.2, 1);
            const State s = test::random_state(rng, g, 1, 0.2);
            const Eigen::MatrixXd h = Eigen::MatrixXd(energy_hessian(s, p, g));
            const Eigen::MatrixXd fd = test::fd_jacobian(
                [&](const Eigen::VectorXd& x) { return discrete_gradient(State::from_stacked(x, 1), p, g); },
                s.stacked());
            CAPTURE(trial);
            CHECK((fd - h).cwiseAbs().maxCoeff() / std::max(1.0, h.cwiseAbs().maxCoeff()) <= 1e-5);
            CHECK((h - h.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * h.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("hessian structure")
{
    const Grid g(32, 2 * pi);
    std::mt19937_64 rng(3);
    const ModelParams p = params_with(Stiffness::exponential(0.0), 1.0, 0.3);
    const Eigen::MatrixXd h1 = Eigen::MatrixXd(energy_hessian(test::random_state(rng, g, 1, 0.1), p, g));
    const Eigen::MatrixXd h2 = Eigen::MatrixXd(energy_hessian(test::random_state(rng, g, 1, 0.1), p, g));
    CHECK((h1.topLeftCorner(32, 32) - h2.topLeftCorner(32, 32)).cwiseAbs().maxCoeff() == 0.0);
    // centered stencil: theta block couples only offsets 0 and +-2 (periodically)
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) {
            const int d = std::min((i - j + 32) % 32, (j - i + 32) % 32);
            if (d != 0 && d != 2)
                CHECK(h1(i, j) == 0.0);
        }
}

TEST_CASE("constraints, their jacobian and hessian contraction")
{
    const Grid g(64, 2 * pi);
    ModelParams p = params_with(Stiffness::exponential(1.0));
    p.nu = 0.25;
    State s{test::ramp(g, 1), Eigen::VectorXd::Constant(64, 0.25), 1};
    CHECK(discrete_constraints(s, p, g).cwiseAbs().maxCoeff() <= 1e-14);
    s.rho.array() += 1.0;
    const Eigen::Vector3d c = discrete_constraints(s, p, g);
    CHECK(c[0] == doctest::Approx(g.length).epsilon(1e-14));
    CHECK(std::abs(c[1]) <= 1e-14);
    CHECK(std::abs(c[2]) <= 1e-14);
    State flat{Eigen::VectorXd::Zero(64), Eigen::VectorXd::Constant(64, 0.25), 0};
    p.omega = 0;
    const Eigen::Vector3d cf = discrete_constraints(flat, p, g);
    CHECK(std::abs(cf[0]) <= 1e-14);
    CHECK(std::abs(cf[1]) <= 1e-14);
    CHECK(cf[2] == doctest::Approx(g.length).epsilon(1e-14));

    std::mt19937_64 rng(9);
    p.omega = 1;
    for (int n : {16, 64}) {
        const Grid gn(n, 2 * pi);
        for (int trial = 0; trial < 100; ++trial) {
            const State r = test::random_state(rng, gn, 1, 0.25, 0.5);
            const Eigen::MatrixXd j = constraint_jacobian(r, gn);
            const Eigen::MatrixXd fd = test::fd_jacobian(
                [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                    return discrete_constraints(State::from_stacked(x, 1), p, gn);
                },
                r.stacked());
            CHECK((fd - j).cwiseAbs().maxCoeff() <= 1e-8);

            const Multipliers lam{0.3, -1.1, 0.7};
            const Eigen::VectorXd diag = constraint_hessian_diagonal(r, lam, gn);
            const Eigen::MatrixXd fdh = test::fd_jacobian(
                [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                    return constraint_jacobian(State::from_stacked(x, 1), gn).transpose() * lam.vector();
                },
                r.stacked());
            CHECK((fdh - Eigen::MatrixXd(diag.asDiagonal())).cwiseAbs().maxCoeff() <= 1e-5);
        }
    }
    const State r = test::random_state(rng, g, 1, 0.25);
    CHECK(constraint_hessian_diagonal(r, {}, g).cwiseAbs().maxCoeff() == 0.0);
    CHECK(constraint_hessian_diagonal(r, {2.0, 0.0, 0.0}, g).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constraints are invariant under index rotation")
{
    std::mt19937_64 rng(13);
    const Grid g(60, 2 * pi);
    ModelParams p = params_with(Stiffness::exponential(1.0));
    const State s = test::random_state(rng, g, 1, 0.2);
    const int shift = 17;
    State r = s;
    for (int i = 0; i < g.n; ++i) {
        r.rho[i] = s.rho[(i + shift) % g.n];
        r.theta[i] = s.theta_at(i + shift) - 2 * pi * shift / g.n;
    }
    const Eigen::Vector3d a = discrete_constraints(s, p, g);
    const Eigen::Vector3d b = discrete_constraints(r, p, g);
    CHECK(std::abs(a[0] - b[0]) <= 1e-13);
    // rotating the tangent field by the ramp offset rotates (G_sin, G_cos) accordingly
    const double phi = -2 * pi * shift / g.n;
    CHECK(std::abs(b[1] - (a[1] * std::cos(phi) + a[2] * std::sin(phi))) <= 1e-12);
    CHECK(std::abs(b[2] - (a[2] * std::cos(phi) - a[1] * std::sin(phi))) <= 1e-12);
}
