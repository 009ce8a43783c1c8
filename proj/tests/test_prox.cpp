#include "hpvm/prox.hpp"
#include "hpvm/regularizer.hpp"
#include "hpvm/rng.hpp"

#include <doctest.h>

using namespace hpvm;

namespace {
Vector vec(std::initializer_list<double> v) {
    Vector x(Index(v.size()));
    Index i = 0;
    for (double a : v) x[i++] = a;
    return x;
}
} // namespace

TEST_CASE("prox_l1 soft threshold") {
    const Vector u = prox_l1(vec({2.0, -0.5, 0.0}), 1.0);
    CHECK(u[0] == doctest::Approx(1.0));
    CHECK(u[1] == 0.0);
    CHECK(u[2] == 0.0);

    // gamma -> 0 limit recovers the identity
    const Vector x = vec({0.3, -1.7, 2.2});
    CHECK((prox_l1(x, 1e-300) - x).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("project_simplex examples") {
    CHECK((project_simplex(vec({0.3, 0.7})) - vec({0.3, 0.7})).norm() < 1e-14);
    CHECK((project_simplex(vec({2.0, 0.0})) - vec({1.0, 0.0})).norm() < 1e-14);
    const Vector u = project_simplex(vec({0.5, 0.5, 0.5}));
    for (int i = 0; i < 3; ++i) CHECK(u[i] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("project_simplex feasibility on random inputs") {
    Rng rng(31);
    for (int t = 0; t < 200; ++t) {
        const Vector x = rng.normal_vector(20) * 3.0;
        const Vector u = project_simplex(x);
        CHECK(u.minCoeff() >= 0.0);
        CHECK(std::abs(u.sum() - 1.0) <= 1e-14);
    }
}

TEST_CASE("weighted simplex projection reduces to the plain one") {
    Rng rng(77);
    for (int t = 0; t < 100; ++t) {
        const Vector x = rng.normal_vector(12) * 2.0;
        const Vector ones = Vector::Ones(12);
        CHECK((project_simplex_weighted(x, ones) - project_simplex(x)).norm() < 1e-10);
        Vector gam = rng.uniform_vector(12, 0.1, 4.0);
        const Vector u = project_simplex_weighted(x, gam);
        CHECK(u.minCoeff() >= 0.0);
        CHECK(std::abs(u.sum() - 1.0) <= 1e-12);
    }
}

TEST_CASE("prox nonexpansiveness in the Euclidean norm") {
    Rng rng(5);
    L1Regularizer l1(0.7);
    SimplexIndicator simplex;
    for (int t = 0; t < 1000; ++t) {
        const Vector x = rng.normal_vector(8);
        const Vector y = rng.normal_vector(8);
        const double g = rng.uniform(0.05, 3.0);
        CHECK((l1.prox(x, g) - l1.prox(y, g)).norm() <= (x - y).norm() + 1e-12);
        CHECK((simplex.prox(x, g) - simplex.prox(y, g)).norm() <= (x - y).norm() + 1e-12);
    }
}

TEST_CASE("prox optimality via the subgradient inequality") {
    Rng rng(9);
    L1Regularizer l1(0.5);
    for (int t = 0; t < 100; ++t) {
        const Vector x = rng.normal_vector(6);
        const double gamma = rng.uniform(0.2, 2.0);
        const Vector u = l1.prox(x, gamma);
        // 0 in dg(u) + (u - x)/gamma  <=>  g(y) >= g(u) + <(x-u)/gamma, y-u>
        for (int s = 0; s < 20; ++s) {
            const Vector y = rng.normal_vector(6);
            const double lhs = l1.value(y);
            const double rhs = l1.value(u) + ((x - u) / gamma).dot(y - u);
            CHECK(lhs >= rhs - 1e-10);
        }
    }
}

TEST_CASE("subgradient selection") {
    L1Regularizer l1(0.5);
    CHECK(l1.subgradient_select(Vector::Zero(3)).norm() == 0.0);
    const Vector xi = l1.subgradient_select(vec({1.0, -2.0}));
    CHECK(xi[0] == doctest::Approx(0.5));
    CHECK(xi[1] == doctest::Approx(-0.5));

    SimplexIndicator simplex;
    const Vector interior = Vector::Constant(4, 0.25);
    CHECK(simplex.subgradient_select(interior).norm() == 0.0);
    // subgradient inequality with xi = 0 over sampled feasible points
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const Vector y = project_simplex(rng.normal_vector(4));
        CHECK(simplex.value(y) >= simplex.value(interior) - 1e-12);
    }
}

TEST_CASE("elastic net prox closed form") {
    ElasticNetRegularizer en(0.4, 1.5);
    Rng rng(13);
    for (int t = 0; t < 50; ++t) {
        const Vector x = rng.normal_vector(5);
        const double gamma = rng.uniform(0.1, 2.0);
        const Vector u = en.prox(x, gamma);
        const Vector expect = prox_l1(x, gamma * 0.4) / (1.0 + gamma * 1.5);
        CHECK((u - expect).norm() < 1e-14);
    }
}

TEST_CASE("regularizer conjugates") {
    L1Regularizer l1(0.8);
    auto box = l1.conjugate();
    CHECK(box->is_indicator());
    CHECK(box->in_domain(vec({0.8, -0.8})));
    CHECK(!box->in_domain(vec({0.9, 0.0})));
    auto l1_back = box->conjugate();
    CHECK(l1_back->value(vec({1.0, 1.0})) == doctest::Approx(1.6));
}
