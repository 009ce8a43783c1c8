#include "hpvm/rng.hpp"
#include "hpvm/subsolver.hpp"

#include <doctest.h>

using namespace hpvm;

namespace {

Matrix random_spd(Index p, std::uint64_t seed, double cond = 10.0) {
    Rng rng(seed);
    Matrix B(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j) B(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(B);
    Matrix Q = qr.householderQ();
    Vector eigs(p);
    for (Index i = 0; i < p; ++i)
        eigs[i] = std::pow(cond, double(i) / double(p - 1));
    Matrix A = Q * eigs.asDiagonal() * Q.transpose();
    return 0.5 * (A + A.transpose());
}

QuadraticModel make_model(const Matrix& H, const Vector& anchor, const Vector& grad,
                          double reg_weight) {
    QuadraticModel m;
    m.H = LocalMetric::dense(H);
    m.anchor = anchor;
    m.grad_anchor = grad;
    m.reg_weight = reg_weight;
    return m;
}

// plain proximal gradient reference, no certificates
Vector long_run_pg(const QuadraticModel& m, const Regularizer& g, long iters) {
    const double step = 1.0 / m.H.lambda_max();
    Vector x = m.anchor;
    for (long k = 0; k < iters; ++k)
        x = g.prox(x - step * m.smooth_gradient(x), step * m.reg_weight);
    return x;
}

} // namespace

TEST_CASE("trivial regularizer reduces to the Newton step") {
    Rng rng(1);
    const Matrix H = random_spd(5, 2);
    const Vector anchor = rng.normal_vector(5);
    const Vector grad = rng.normal_vector(5);
    auto model = make_model(H, anchor, grad, 1.0);
    ZeroRegularizer g;
    auto res = solve_scaled_prox(model, g, 1e-10, 100000);
    const Vector newton = anchor - Eigen::LLT<Matrix>(H).solve(grad);
    CHECK((res.x - newton).norm() < 1e-8);
    CHECK(res.cert.gap_bound <= 0.5e-20 + 1e-12);
}

TEST_CASE("identity metric gives the classical prox identity") {
    Rng rng(2);
    const Vector anchor = rng.normal_vector(6);
    const Vector grad = rng.normal_vector(6);
    QuadraticModel m;
    m.H = LocalMetric::scaled_identity(1.0, 6);
    m.anchor = anchor;
    m.grad_anchor = grad;
    m.reg_weight = 1.0;
    L1Regularizer g(0.5);
    auto res = solve_scaled_prox(m, g, 1e-12);
    CHECK((res.x - g.prox(anchor - grad, 1.0)).norm() < 1e-14);
    CHECK(res.cert.gap_bound == 0.0);
}

TEST_CASE("certified solve matches a long proximal-gradient reference") {
    Rng rng(3);
    const Matrix H = random_spd(5, 7);
    const Vector anchor = rng.normal_vector(5);
    const Vector grad = rng.normal_vector(5);
    auto model = make_model(H, anchor, grad, 1.0);
    L1Regularizer g(0.3);
    const double delta = 1e-8;
    auto res = solve_scaled_prox(model, g, delta, 1000000);
    const Vector ref = long_run_pg(model, g, 1000000);
    // the certified local-norm error bounds the distance to the optimum
    const double hnorm = model.H.norm(res.x - ref);
    CHECK(hnorm <= delta + 1e-9);
    // Consequence of the gap bound: 0.5 ||x - xbar||_H^2 <= gap
    CHECK(0.5 * hnorm * hnorm <= res.cert.gap_bound + 1e-16);
    CHECK(res.cert.delta_achieved <= delta);
}

TEST_CASE("prox gradient mapping properties") {
    Rng rng(4);
    const Matrix H = random_spd(4, 9);
    const Vector anchor = rng.normal_vector(4);
    const Vector grad = rng.normal_vector(4);
    auto model = make_model(H, anchor, grad, 1.0);

    SUBCASE("zero regularizer: mapping equals the smooth gradient") {
        ZeroRegularizer g;
        const Vector x = rng.normal_vector(4);
        const Vector G = prox_grad_mapping(model, g, x, 0.37);
        CHECK((G - model.smooth_gradient(x)).norm() < 1e-12);
    }
    SUBCASE("zero at the minimizer") {
        L1Regularizer g(0.2);
        auto res = solve_scaled_prox(model, g, 1e-12, 1000000);
        const Vector G = prox_grad_mapping(model, g, res.x, 1.0 / model.H.lambda_max());
        CHECK(G.norm() < 1e-7);
    }
    SUBCASE("norm decreases along plain prox-gradient iterations") {
        L1Regularizer g(0.2);
        const double step = 1.0 / model.H.lambda_max();
        Vector x = anchor;
        double prev = prox_grad_mapping(model, g, x, step).norm();
        for (int k = 0; k < 50; ++k) {
            x = g.prox(x - step * model.smooth_gradient(x), step * model.reg_weight);
            const double cur = prox_grad_mapping(model, g, x, step).norm();
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("monotone model decrease and determinism") {
    Rng rng(5);
    const Matrix H = random_spd(6, 11);
    const Vector anchor = rng.normal_vector(6);
    const Vector grad = rng.normal_vector(6);
    auto model = make_model(H, anchor, grad, 1.25);
    L1Regularizer g(0.4);

    auto r1 = solve_scaled_prox(model, g, 1e-6);
    CHECK(model.objective(r1.x, g) <= model.objective(anchor, g) + 1e-12);

    auto r2 = solve_scaled_prox(model, g, 1e-6);
    CHECK(r1.x == r2.x);  // bitwise identical
    CHECK(r1.cert.gap_bound == r2.cert.gap_bound);
}

TEST_CASE("unconverged subproblem carries the best point and bound") {
    Rng rng(6);
    const Matrix H = random_spd(8, 13, 1e4);
    const Vector anchor = rng.normal_vector(8);
    const Vector grad = rng.normal_vector(8) * 10.0;
    auto model = make_model(H, anchor, grad, 1.0);
    L1Regularizer g(0.05);
    try {
        solve_scaled_prox(model, g, 1e-13, 3);
        FAIL("expected UnconvergedSubproblem");
    } catch (const UnconvergedSubproblem& e) {
        CHECK(e.best_point.size() == 8);
        CHECK(e.cert.gap_bound >= 0.0);
    }
}

TEST_CASE("preconditioned path certifies simplex subproblems") {
    // strongly nonuniform diagonal triggers the Jacobi path
    Rng rng(7);
    const Index p = 40;
    Matrix B(p, 3);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < 3; ++j) B(i, j) = rng.normal() * std::pow(10.0, -double(i) / 12.0);
    Matrix H = B * B.transpose();
    H.diagonal().array() += 1e-9;
    const Vector anchor = Vector::Constant(p, 1.0 / double(p));
    const Vector grad = rng.normal_vector(p);
    auto model = make_model(H, anchor, grad, 1.0);
    SimplexIndicator g;
    auto res = solve_scaled_prox(model, g, 1e-7, 200000, &anchor);
    CHECK(res.certified);
    // compare to the unpreconditioned long reference
    const Vector ref = long_run_pg(model, g, 200000);
    CHECK(model.objective(res.x, g) <= model.objective(ref, g) + 1e-10);
}
