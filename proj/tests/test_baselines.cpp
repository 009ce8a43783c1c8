#include "hpvm/baselines.hpp"
#include "hpvm/bench.hpp"
#include "hpvm/rng.hpp"

#include <doctest.h>

using namespace hpvm;

TEST_CASE("proximal gradient on a perfectly conditioned quadratic") {
    // f = 0.5||x - b||^2, L_f = 1: one step lands at the optimum
    const Index p = 4;
    Vector b(4);
    b << 1.0, -1.0, 2.0, 0.0;
    QuadraticOracle f(Matrix::Identity(p, p), -b);
    ZeroRegularizer g;
    BaselineSettings s;
    s.eps = 1e-10;
    SolveReport rep = prox_grad(f, g, s, Vector::Zero(p));
    CHECK(rep.status == ExitStatus::Converged);
    CHECK(rep.iterations <= 2);
    CHECK((rep.x - b).norm() < 1e-9);
}

TEST_CASE("proximal gradient is monotone and achieves the linear rate") {
    auto f = bench::gen_quadratic_oracle(6, 1.0, 20.0, 41);
    L1Regularizer g(0.2);
    BaselineSettings s;
    s.eps = 1e-8;
    SolveReport rep = prox_grad(*f, g, s, Vector::Zero(6));
    REQUIRE(rep.status == ExitStatus::Converged);
    for (size_t i = 1; i < rep.rows.size(); ++i)
        CHECK(rep.rows[i].obj <= rep.rows[i - 1].obj + 1e-12);
    // observed iteration count within a factor 2 of the (1 - mu/L) rate
    const double rate = 1.0 - f->mu() / f->lip();
    const double kkt0 = rep.rows.front().kkt;
    const double predicted = std::log(s.eps / kkt0) / std::log(rate);
    CHECK(double(rep.iterations) <= 2.0 * predicted + 30.0);
}

TEST_CASE("APG beats PG on a matched instance and restarts monotonically") {
    auto data = std::make_shared<Dataset>(bench::gen_logistic_data(200, 40, 0.2, 42));
    auto f = logistic_elastic_oracle(data, 1.0 / 200.0);
    L1Regularizer g(0.002);
    BaselineSettings s;
    s.eps = 1e-6;
    const Vector x0 = Vector::Zero(40);
    SolveReport pg = prox_grad(*f, g, s, x0);
    SolveReport apg = apg_ls_restart(*f, g, s, x0);
    REQUIRE(apg.status == ExitStatus::Converged);
    REQUIRE(pg.status == ExitStatus::Converged);
    CHECK(apg.iterations <= pg.iterations);
    // function-value restart keeps the reported objective nonincreasing
    for (size_t i = 1; i < apg.rows.size(); ++i)
        CHECK(apg.rows[i].obj <= apg.rows[i - 1].obj + 1e-10);
}

TEST_CASE("damped proximal Newton on a smooth quadratic") {
    auto f = bench::gen_quadratic_oracle(5, 1.0, 8.0, 43);
    ZeroRegularizer g;
    BaselineSettings s;
    s.eps = 1e-9;
    Rng rng(2);
    SolveReport rep = damped_pn(*f, g, s, rng.normal_vector(5));
    REQUIRE(rep.status == ExitStatus::Converged);
    const Vector opt = -f->hessian(Vector::Zero(5)).llt().solve(f->gradient(Vector::Zero(5)));
    CHECK((rep.x - opt).norm() < 1e-6);
}

TEST_CASE("damped proximal Newton decrement has a quadratic tail") {
    auto data = std::make_shared<Dataset>(bench::gen_poisson_data(60, 6, 0.4, 44));
    auto f = poisson_oracle(data, 0.5);
    L1Regularizer g(0.02);
    BaselineSettings s;
    s.eps = 1e-11;
    Rng rng(3);
    SolveReport rep = damped_pn(*f, g, s, Vector::Zero(6));
    REQUIRE(rep.status == ExitStatus::Converged);
    for (size_t i = 0; i + 1 < rep.rows.size(); ++i) {
        const double z = rep.rows[i].lambda_est;
        const double zn = rep.rows[i + 1].lambda_est;
        if (z < 0.1 && z > 1e-7) CHECK(zn <= 1.1 * z * z + 1e-12);
    }
}

TEST_CASE("baselines agree with the homotopy solver on the final objective") {
    auto f = bench::gen_quadratic_oracle(8, 1.0, 12.0, 45);
    L1Regularizer g(0.15);
    const Vector x0 = Vector::Zero(8);
    const double eps = 1e-8;

    BaselineSettings bs;
    bs.eps = eps;
    SolveReport pg = prox_grad(*f, g, bs, x0);
    SolveReport apg = apg_ls_restart(*f, g, bs, x0);
    SolveReport dpn = damped_pn(*f, g, bs, x0);

    HomotopySettings hs;
    hs.regime = Regime::Practical;
    hs.eps = eps;
    SolveReport homo = run_homotopy(hs, *f, g, x0);

    REQUIRE(homo.status == ExitStatus::Converged);
    for (const SolveReport* r : {&pg, &apg, &dpn}) {
        REQUIRE(r->status == ExitStatus::Converged);
        CHECK(std::abs(r->final_obj - homo.final_obj) <= 10.0 * eps);
    }
}
