#include "hpvm/bench.hpp"
#include "hpvm/homotopy.hpp"
#include "hpvm/rng.hpp"
#include "hpvm/verify.hpp"

#include <doctest.h>

using namespace hpvm;

TEST_CASE("shifted gradient") {
    auto f = bench::gen_quadratic_oracle(2, 1.0, 4.0, 1);
    Rng rng(2);
    const Vector x = rng.normal_vector(2);
    const Vector grad = f->gradient(x);
    Vector xi(2);
    xi << 1.0, 1.0;

    // tau = 1 recovers the plain gradient
    CHECK((shifted_gradient(*f, x, 1.0, xi) - grad).norm() == 0.0);
    // xi = 0 recovers the plain gradient for every tau
    CHECK((shifted_gradient(*f, x, 0.25, Vector::Zero(2)) - grad).norm() == 0.0);
    // direct formula
    const Vector s = shifted_gradient(*f, x, 0.5, xi);
    CHECK((s - (grad - xi)).norm() < 1e-15);

    CHECK_THROWS_AS(shifted_gradient(*f, x, 0.0, xi), PreconditionError);
}

TEST_CASE("sigma for the strongly convex regime") {
    CHECK(sigma_strongly_convex(0.5, 0.5, 2.0) == doctest::Approx(2.0 / 3.0));
    // Gamma -> 0 pushes sigma -> 1
    CHECK(sigma_strongly_convex(0.5, 0.5, 1e-14) == doctest::Approx(1.0).epsilon(1e-10));
    Rng rng(3);
    for (int t = 0; t < 1000; ++t) {
        const double omega = rng.uniform(1e-3, 0.999);
        const double tau0 = rng.uniform(1e-3, 0.999);
        const double gamma = rng.uniform(1e-3, 100.0);
        const double sigma = sigma_strongly_convex(tau0, omega, gamma);
        CHECK(sigma > omega);
        CHECK(sigma < 1.0);
    }
}

TEST_CASE("tau schedule for the strongly convex regime") {
    CHECK(tau_schedule_strongly_convex(0, 0.37, 0.9) == doctest::Approx(0.37));
    CHECK(tau_schedule_strongly_convex(1, 0.5, 0.9) == doctest::Approx(1.0 - 0.45 / 0.95));
    const double tau0 = 0.3, sigma = 0.85;
    for (long k = 0; k <= 100; ++k) {
        const double tau = tau_schedule_strongly_convex(k, tau0, sigma);
        CHECK(1.0 - tau <= (1.0 - tau0) / tau0 * std::pow(sigma, double(k)) + 1e-15);
        if (k > 0) CHECK(tau > tau_schedule_strongly_convex(k - 1, tau0, sigma));
    }
}

TEST_CASE("delta factor") {
    CHECK(delta_factor(0.5, 0) == doctest::Approx(0.07 - 1.0 / 18.0));
    CHECK(delta_factor(1.0, 0) == doctest::Approx(std::sqrt(0.99) / 10.0 - 1.0 / 18.0));
    CHECK(delta_factor(1.0, 50) == doctest::Approx(0.0439432).epsilon(1e-4));
    CHECK_THROWS_AS(delta_factor(0.3, 0), PreconditionError);
    Rng rng(4);
    for (int t = 0; t < 1000; ++t) {
        const double sigma = rng.uniform(0.32, 1.0);
        const long k = long(rng.below(100));
        const double d = delta_factor(sigma, k);
        CHECK(d > 0.0);
        CHECK(d <= 0.0995);
    }
}

TEST_CASE("tau update for the Lipschitz-regularizer regime") {
    CHECK(tau_next_sc(0.5, 0.0, 1.0) == doctest::Approx(0.5));
    const double tau_next = tau_next_sc(0.5, 0.0144444, 1.0);
    CHECK(tau_next == doctest::Approx(0.5017863).epsilon(1e-5));

    // displayed update solves the proof's target equation exactly:
    // 2 L_g (tau' - tau) / (tau tau') = Delta / (1 + Delta)
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        const double tau = rng.uniform(0.01, 0.95);
        const double dk = rng.uniform(1e-4, 0.0995);
        const double lg = rng.uniform(0.2, 10.0);
        const double tn = tau_next_sc(tau, dk, lg);
        if (tn < 1.0) {
            const double lhs = 2.0 * lg * (tn - tau) / (tau * tn);
            CHECK(lhs == doctest::Approx(dk / (1.0 + dk)).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(tau_next_sc(0.9, 0.05, 1e-9), PreconditionError);
}

TEST_CASE("tau update for the barrier regime") {
    const double t1 = tau_next_barrier(0.5, 0.0144444, 4.0, 0.0);
    CHECK(t1 == doctest::Approx(0.5035599).epsilon(1e-5));
    CHECK(tau_next_barrier(0.5, 0.0, 4.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("feasible sigma selection") {
    // small L_g admits sigma near the lower end of the grid
    const double s_small = sigma_feasible_sc(0.5, 1e-6);
    CHECK(s_small == doctest::Approx(0.3187).epsilon(1e-2));
    // re-check feasibility with slack
    const double rhs = 0.1 * std::sqrt(s_small - 0.01) - 1.0 / 18.0;
    const double a = 2.0 * 1e-6 * 0.5 * (1.0 - std::sqrt(s_small));
    CHECK(a / (0.5 - a) <= rhs + 1e-12);

    // extreme barrier geometry falls back to sigma = 1
    CHECK(sigma_feasible_barrier(1e-6, 100.0, 10.0) == doctest::Approx(1.0));

    // barrier sigma satisfies its inequality with slack
    const double sb = sigma_feasible_barrier(0.5, 5.0, 0.0);
    const double c0 = 0.1 * std::sqrt(sb - 0.01) - 1.0 / 18.0;
    CHECK(c0 > 0.0);
    const double t = 1.0 - 0.5 * c0 / (0.5 * (1.0 + c0) * (std::sqrt(5.0) + 0.0));
    CHECK(sb >= t * t - 1e-12);
}

TEST_CASE("metric selection") {
    auto fq = bench::gen_quadratic_oracle(4, 1.0, 2.0, 6);
    HomotopySettings s;

    SUBCASE("diagonal metric is (L_f^2/mu_f) I") {
        s.metric = MetricKind::Diagonal;
        const LocalMetric H = metric_select(s, *fq, Vector::Zero(4));
        CHECK(H.is_scaled_identity());
        CHECK(H.scalar() == doctest::Approx(fq->lip() * fq->lip() / fq->mu()));
    }
    SUBCASE("Newton metric reproduces a constant Hessian") {
        s.metric = MetricKind::Newton;
        const LocalMetric H = metric_select(s, *fq, Vector::Zero(4));
        Rng rng(7);
        const Vector u = rng.normal_vector(4);
        CHECK((H.apply(u) - fq->hessian(Vector::Zero(4)) * u).norm() < 1e-12);
    }
}

TEST_CASE("damped BFGS reconstructs a quadratic Hessian from conjugate steps") {
    Rng rng(8);
    const Index p = 5;
    auto fq = bench::gen_quadratic_oracle(p, 0.7, 6.0, 9);
    const Matrix Q = fq->hessian(Vector::Zero(p));

    QuasiNewtonState qn;
    qn.B = Matrix::Identity(p, p);
    qn.initialized = true;

    // Gram-Schmidt Q-conjugate directions
    std::vector<Vector> dirs;
    for (Index i = 0; i < p; ++i) {
        Vector d = Vector::Unit(p, i);
        for (const auto& prev : dirs) d -= prev * (prev.dot(Q * d)) / (prev.dot(Q * prev));
        dirs.push_back(d);
    }
    for (const auto& d : dirs) {
        const Vector y = Q * d;  // exact gradient difference on the quadratic
        qn.update(d, y);
        CHECK((qn.B * d - y).norm() < 1e-9 * y.norm());  // secant property
    }
    CHECK((qn.B - Q).norm() < 1e-8 * Q.norm());
}

TEST_CASE("hpvm_step lands exactly on a quadratic optimum") {
    // f = 0.5 ||x - b||^2, g = 0, H = I, tau = 1
    const Index p = 3;
    Vector b(3);
    b << 1.0, -2.0, 0.5;
    QuadraticOracle f(Matrix::Identity(p, p), -b);
    ZeroRegularizer g;
    HomotopyState st;
    st.x = Vector::Zero(p);
    st.tau = 1.0;
    st.xi0 = Vector::Zero(p);
    const LocalMetric H = LocalMetric::dense(Matrix::Identity(p, p));
    auto next = hpvm_step(st, f, g, H, 1e-12, 1.0, 1000);
    CHECK((next.x - b).norm() < 1e-12);
    // at the fixed point the decrement collapses below delta
    auto again = hpvm_step(next, f, g, H, 1e-12, 1.0, 1000);
    CHECK(again.lambda_est <= 1e-10);
}

TEST_CASE("stage-1 helper formulas") {
    CHECK(damped_step_alpha(1.0, 0.1) == doctest::Approx(0.9 / 1.9));
    CHECK(TheoremConstants::omega_of(0.045) == doctest::Approx(0.00098307).epsilon(1e-4));
    CHECK(stage1_t0(30.0, 0.05) == doctest::Approx(1.0 - 0.05 / (1.1 * 30.0)));
    CHECK(stage1_t0(10.0, 0.05) == doctest::Approx(1.0));
}

TEST_CASE("damped-step initialization reaches the beta-ball") {
    auto f = bench::gen_quadratic_oracle(5, 1.0, 5.0, 12);
    L1Regularizer g(0.3);
    const double tau0 = 0.4, beta = 0.05;
    Rng rng(13);
    const Vector x_hat0 = rng.normal_vector(5);
    const Vector xi_hat0 = g.subgradient_select(x_hat0);
    auto s1 = damped_step_init(x_hat0, xi_hat0, tau0, beta, *f, g);
    auto ref = verify::reference_solution(*f, g, xi_hat0, tau0);
    REQUIRE(ref.residual < 1e-10);
    const double lam = verify::local_distance(*f, ref.x, s1.x0, ref.x);
    CHECK(lam <= beta);
}

TEST_CASE("tau0 choice under strongly convex g") {
    auto f = bench::gen_quadratic_oracle(4, 1.0, 3.0, 14);
    ElasticNetRegularizer g(0.2, 1.0);
    Rng rng(15);
    const Vector x0 = rng.normal_vector(4);
    const Vector xi0 = g.subgradient_select(x0);
    const double tau0 = tau0_strongly_convex_g(x0, xi0, 0.05, *f, g);
    CHECK(tau0 > 0.0);
    CHECK(tau0 < 1.0);
    // residual doubling halves tau0 (homogeneity)
    const double resid = (f->gradient(x0) + xi0).norm();
    const double lmax = f->lip();
    const double expect = 0.05 * 1.0 / (1.05 * std::sqrt(lmax) * resid);
    CHECK(tau0 == doctest::Approx(expect).epsilon(1e-3));

    ZeroRegularizer z;
    CHECK_THROWS_AS(tau0_strongly_convex_g(x0, Vector::Zero(4), 0.05, *f, z),
                    PreconditionError);
}

TEST_CASE("auxiliary homotopy initialization terminates within its budget") {
    auto f = bench::gen_quadratic_oracle(5, 1.0, 4.0, 16);
    L1Regularizer g(0.25);
    Rng rng(17);
    const Vector x_hat0 = rng.normal_vector(5) * 2.0;
    auto s1 = auxiliary_homotopy_init(x_hat0, 0.5, 0.05, *f, g);
    CHECK(s1.iterations <= s1.constants.j_max + 1);
    auto ref = verify::reference_solution(*f, g, g.subgradient_select(x_hat0), 0.5);
    const double lam = verify::local_distance(*f, ref.x, s1.x0, ref.x);
    CHECK(lam <= 0.05);
}

TEST_CASE("practical run solves quadratic plus l1 to high accuracy") {
    auto f = bench::gen_quadratic_oracle(5, 1.0, 6.0, 18);
    L1Regularizer g(0.2);
    HomotopySettings s;
    s.regime = Regime::Practical;
    s.metric = MetricKind::Newton;
    s.eps = 1e-8;
    SolveReport rep = run_homotopy(s, *f, g, Vector::Zero(5));
    CHECK(rep.status == ExitStatus::Converged);
    CHECK(kkt_residual(*f, g, rep.x) <= 1e-8);
    auto ref = verify::reference_solution(*f, g, Vector::Zero(5), 1.0);
    CHECK((rep.x - ref.x).norm() <= 1e-6);
    // tau trace is nondecreasing and ends at 1
    double prev = 0.0;
    for (const auto& row : rep.rows) {
        CHECK(row.tau >= prev - 1e-15);
        prev = std::max(prev, row.tau);
    }
    CHECK(rep.rows.back().tau == doctest::Approx(1.0));
}

TEST_CASE("decrement settles monotonically once tau stabilizes") {
    auto data = std::make_shared<Dataset>(bench::gen_logistic_data(60, 5, 0.4, 19));
    auto f = logistic_elastic_oracle(data, 0.2);
    L1Regularizer g(0.05);
    HomotopySettings s;
    s.regime = Regime::Practical;
    s.metric = MetricKind::Newton;
    s.eps = 1e-9;
    SolveReport rep = run_homotopy(s, *f, g, Vector::Zero(5));
    REQUIRE(rep.status == ExitStatus::Converged);
    // within the final fixed-tau phase lambda decreases monotonically
    std::vector<double> lams;
    for (const auto& row : rep.rows)
        if (row.tau == 1.0) lams.push_back(row.lambda_est);
    for (size_t i = 1; i < lams.size(); ++i) CHECK(lams[i] <= lams[i - 1] * 1.001 + 1e-12);
}

TEST_CASE("quasi-Newton practical run converges") {
    auto data = std::make_shared<Dataset>(bench::gen_logistic_data(80, 6, 0.4, 23));
    auto f = logistic_elastic_oracle(data, 0.1);
    L1Regularizer g(0.05);
    HomotopySettings s;
    s.regime = Regime::Practical;
    s.metric = MetricKind::QuasiNewton;
    s.eps = 1e-7;
    SolveReport rep = run_homotopy(s, *f, g, Vector::Zero(6));
    CHECK(rep.status == ExitStatus::Converged);
    CHECK(rep.final_rgap <= 1e-7);
}
