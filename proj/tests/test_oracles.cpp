#include "hpvm/bench.hpp"
#include "hpvm/oracles.hpp"
#include "hpvm/rng.hpp"
#include "hpvm/verify.hpp"

#include <doctest.h>

using namespace hpvm;

namespace {

std::shared_ptr<Dataset> tiny_dataset(std::initializer_list<std::pair<Vector, double>> rows) {
    auto d = std::make_shared<Dataset>();
    d->n = Index(rows.size());
    d->p = rows.begin()->first.size();
    d->labels.resize(d->n);
    Index i = 0;
    for (const auto& [a, y] : rows) {
        std::vector<Dataset::Entry> r;
        for (Index j = 0; j < a.size(); ++j)
            if (a[j] != 0.0) r.emplace_back(j, a[j]);
        d->rows.push_back(std::move(r));
        d->labels[i++] = y;
    }
    return d;
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

void check_fd_gradient(const SmoothOracle& f, const Vector& x, double rel_tol) {
    const Vector g = f.gradient(x);
    const Vector g_fd =
        verify::fd_gradient([&](const Vector& z) { return f.value(z); }, x);
    CHECK((g - g_fd).norm() <= rel_tol * std::max(1.0, g.norm()));
}

void check_fd_hessian(const SmoothOracle& f, const Vector& x, double rel_tol) {
    const Matrix H = f.hessian(x);
    const Matrix H_fd =
        verify::fd_hessian([&](const Vector& z) { return f.gradient(z); }, x);
    CHECK((H - H_fd).norm() <= rel_tol * std::max(1.0, H.norm()));
}

} // namespace

TEST_CASE("logistic oracle closed-form values") {
    auto data = tiny_dataset({{vec2(1.0, 1.0), 1.0}});
    auto f = logistic_elastic_oracle(data, 1.0);
    CHECK(f->value(Vector::Zero(2)) == doctest::Approx(std::log(2.0)));
    const Vector g = f->gradient(Vector::Zero(2));
    CHECK(g[0] == doctest::Approx(-0.5));
    CHECK(g[1] == doctest::Approx(-0.5));
    // L_f = ||A||^2/(2n) + mu_f = 2/2 + 1
    CHECK(f->lip() == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(f->mu() == 1.0);
}

TEST_CASE("logistic oracle rejects bad labels") {
    auto data = tiny_dataset({{vec2(1.0, 0.0), 2.0}});
    CHECK_THROWS_AS(logistic_elastic_oracle(data, 1.0), InvalidDatasetError);
}

TEST_CASE("logistic gradient and Hessian match finite differences") {
    auto data = std::make_shared<Dataset>(bench::gen_logistic_data(40, 5, 0.4, 21));
    auto f = logistic_elastic_oracle(data, 0.3);
    Rng rng(2);
    for (int t = 0; t < 20; ++t) {
        const Vector x = rng.normal_vector(5);
        check_fd_gradient(*f, x, 1e-6);
        check_fd_hessian(*f, x, 1e-4);
    }
}

TEST_CASE("poisson oracle values and constants") {
    auto data = tiny_dataset({{vec2(2.0, 0.0), 3.0}, {vec2(0.0, 1.0), 1.0}});
    auto f = poisson_oracle(data, 4.0);
    // f(0) = mean(y_i + 1)
    CHECK(f->value(Vector::Zero(2)) == doctest::Approx((4.0 + 2.0) / 2.0));
    // M_f = max ||a_i|| / sqrt(mu_f) = 2/2
    CHECK(f->self_concordance().value() == doctest::Approx(1.0));

    auto bad = tiny_dataset({{vec2(1.0, 0.0), -1.0}});
    CHECK_THROWS_AS(poisson_oracle(bad, 1.0), InvalidDatasetError);
}

TEST_CASE("poisson derivatives match finite differences") {
    auto data = std::make_shared<Dataset>(bench::gen_poisson_data(30, 5, 0.4, 4));
    auto f = poisson_oracle(data, 0.5);
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const Vector x = rng.normal_vector(5) * 0.5;
        check_fd_gradient(*f, x, 1e-5);
        check_fd_hessian(*f, x, 1e-4);
    }
}

TEST_CASE("design oracle closed-form values") {
    {
        std::vector<Vector> vs{Vector::Constant(1, 2.0)};
        auto f = logdet_design_oracle(vs);
        CHECK(f->value(Vector::Ones(1)) == doctest::Approx(-std::log(4.0)));
    }
    {
        // M(w) = I  =>  grad_i = -||v_i||^2
        std::vector<Vector> vs{vec2(1.0, 0.0), vec2(0.0, 1.0)};
        auto f = logdet_design_oracle(vs);
        const Vector g = f->gradient(Vector::Ones(2));
        CHECK(g[0] == doctest::Approx(-1.0));
        CHECK(g[1] == doctest::Approx(-1.0));
        CHECK(f->barrier_parameter().value() == doctest::Approx(2.0));
    }
}

TEST_CASE("design oracle matches a dense logdet reference") {
    const auto vs = bench::gen_design_space(bench::DesignKind::Chi2, 10);
    auto f = logdet_design_oracle(vs);
    const Vector w = Vector::Constant(10, 0.1);
    Matrix M = Matrix::Zero(4, 4);
    for (size_t i = 0; i < vs.size(); ++i) M += w[Index(i)] * vs[i] * vs[i].transpose();
    const double expect = -std::log(M.determinant());
    CHECK(f->value(w) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("design oracle gradient/Hessian and domain boundary") {
    const auto vs = bench::gen_design_space(bench::DesignKind::Chi3, 9);
    auto f = logdet_design_oracle(vs);
    const Vector w = Vector::Constant(9, 1.0 / 9.0);
    check_fd_gradient(*f, w, 1e-6);
    check_fd_hessian(*f, w, 1e-4);

    // operator form agrees with the dense Hessian
    Rng rng(6);
    const Matrix H = f->hessian(w);
    auto op = f->hessian_op(w);
    for (int t = 0; t < 5; ++t) {
        const Vector u = rng.normal_vector(9);
        CHECK((H * u - op(u)).norm() <= 1e-10 * H.norm());
        CHECK(f->hessian_quadform(w, u) == doctest::Approx(u.dot(H * u)).epsilon(1e-10));
    }
    const Matrix Hd = f->hessian_submatrix(w, {0, 3, 5});
    CHECK(Hd(0, 0) == doctest::Approx(H(0, 0)));
    CHECK(Hd(1, 2) == doctest::Approx(H(3, 5)));
    CHECK((f->hessian_diag(w) - H.diagonal()).norm() < 1e-10 * H.norm());

    // boundary: supported on a single vector cannot span R^5
    Vector vertex = Vector::Zero(9);
    vertex[0] = 1.0;
    CHECK(!f->domain_check(vertex));
    CHECK_THROWS_AS(f->value(vertex), DomainError);
}

TEST_CASE("covariance dual oracle") {
    const Matrix sigma = Matrix::Identity(2, 2);
    auto f = covariance_dual_oracle(sigma);
    const Vector y0 = Vector::Zero(4);
    CHECK(f->value(y0) == doctest::Approx(0.0));
    const Vector g = f->gradient(y0);
    CHECK(g[0] == doctest::Approx(-1.0));
    CHECK(g[1] == doctest::Approx(0.0));
    CHECK(g[3] == doctest::Approx(-1.0));

    // Y + Sigma = diag(2, 2)
    Vector y1 = Vector::Zero(4);
    y1[0] = y1[3] = 1.0;
    CHECK(f->value(y1) == doctest::Approx(-2.0 * std::log(2.0)));

    CHECK(f->barrier_parameter().value() == doctest::Approx(2.0));
}

TEST_CASE("covariance dual gradient matches finite differences") {
    Rng rng(15);
    Matrix B(4, 4);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) B(i, j) = rng.normal();
    Matrix sigma = B * B.transpose() + 4.0 * Matrix::Identity(4, 4);
    auto f = covariance_dual_oracle(sigma);
    for (int t = 0; t < 5; ++t) {
        Matrix S(4, 4);
        for (Index i = 0; i < 4; ++i)
            for (Index j = 0; j < 4; ++j) S(i, j) = rng.normal() * 0.2;
        S = 0.5 * (S + S.transpose());
        const Vector y = Eigen::Map<Vector>(S.data(), 16);
        REQUIRE(f->domain_check(y));
        const Vector dir = rng.normal_vector(16);
        const double fd = verify::fd_gradient(
            [&](const Vector& z) { return f->value(z); }, y).dot(dir);
        CHECK(f->gradient(y).dot(dir) == doctest::Approx(fd).epsilon(1e-6));
    }
    // domain violation exactly when min eigenvalue <= 0
    Vector bad = Vector::Zero(16);
    Eigen::Map<Matrix>(bad.data(), 4, 4) = -sigma;
    CHECK(!f->domain_check(bad));
}

TEST_CASE("self-concordance conversion") {
    CHECK(self_concordance_convert(1.7, 3.0, 0.25) == doctest::Approx(1.7));
    CHECK(self_concordance_convert(1.0, 2.0, 4.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(self_concordance_convert(1.0, 2.0, 0.0), PreconditionError);
}

TEST_CASE("rescaled logistic passes the standard self-concordance sample test") {
    auto data = std::make_shared<Dataset>(bench::gen_logistic_data(30, 4, 0.5, 10));
    auto f = logistic_elastic_oracle(data, 0.5);
    const double m_hat = f->self_concordance().value();
    const double c = standardize_scale(m_hat);
    auto borrowed = std::shared_ptr<const SmoothOracle>(std::shared_ptr<void>(), f.get());
    ScaledOracle scaled(borrowed, c);
    CHECK(scaled.self_concordance().value() <= 2.0 + 1e-12);
    Rng rng(9);
    for (int t = 0; t < 30; ++t) {
        const Vector x = rng.normal_vector(4) * 0.3;
        const Vector u = rng.normal_vector(4);
        const double third = verify::fd_third_directional(scaled, x, u);
        const double quad = scaled.hessian_quadform(x, u);
        CHECK(std::abs(third) <= 2.0 * std::pow(quad, 1.5) + 1e-5 * (1.0 + std::abs(third)));
    }
}

TEST_CASE("local-norm subgradient bound for Lipschitz regularizers") {
    // ||xi||*_x <= L_g / sqrt(mu_f) for subgradients of g when f is strongly convex
    auto data = std::make_shared<Dataset>(bench::gen_logistic_data(50, 6, 0.5, 33));
    auto f = logistic_elastic_oracle(data, 0.8);
    L1Regularizer g(0.4);
    const double bound = g.lipschitz(6) / std::sqrt(f->mu());
    Rng rng(12);
    for (int t = 0; t < 40; ++t) {
        const Vector x = rng.normal_vector(6);
        const Vector xi = g.subgradient_select(x);
        const LocalMetric H = LocalMetric::dense(f->hessian(x));
        CHECK(H.dual_norm(xi) <= bound + 1e-8);
    }
}

TEST_CASE("quadratic oracle conjugate") {
    Rng rng(44);
    auto f = bench::gen_quadratic_oracle(5, 0.5, 8.0, 3);
    for (int t = 0; t < 10; ++t) {
        const Vector y = rng.normal_vector(5);
        // grad f(grad f*(y)) = y
        const Vector x = f->conj_gradient(y);
        CHECK((f->gradient(x) - y).norm() < 1e-9);
        // Fenchel equality at the optimum pair
        CHECK(f->conj_value(y) == doctest::Approx(y.dot(x) - f->value(x)).epsilon(1e-9));
    }
}
