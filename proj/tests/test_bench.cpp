#include "hpvm/bench.hpp"
#include "hpvm/verify.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace hpvm;
using namespace hpvm::bench;

TEST_CASE("libsvm parsing") {
    std::istringstream in("+1 3:1.5 7:-2\n-1\n");
    Dataset d = parse_libsvm_stream(in, "test");
    CHECK(d.n == 2);
    CHECK(d.p == 7);
    CHECK(d.labels[0] == 1.0);
    CHECK(d.labels[1] == -1.0);
    REQUIRE(d.rows[0].size() == 2);
    CHECK(d.rows[0][0].first == 2);
    CHECK(d.rows[0][0].second == 1.5);
    CHECK(d.rows[0][1].first == 6);
    CHECK(d.rows[0][1].second == -2.0);
    CHECK(d.rows[1].empty());  // empty feature list = zero row
}

TEST_CASE("libsvm round trip is exact") {
    Dataset d = gen_poisson_data(12, 6, 0.4, 5);
    std::ostringstream out;
    write_libsvm(d, out);
    std::istringstream in(out.str());
    Dataset d2 = parse_libsvm_stream(in, "rt", d.p);
    REQUIRE(d2.n == d.n);
    CHECK(d2.labels == d.labels);
    for (Index i = 0; i < d.n; ++i) {
        REQUIRE(d2.rows[i].size() == d.rows[i].size());
        for (size_t j = 0; j < d.rows[i].size(); ++j) {
            CHECK(d2.rows[i][j].first == d.rows[i][j].first);
            CHECK(d2.rows[i][j].second == d.rows[i][j].second);
        }
    }
}

TEST_CASE("libsvm parse errors carry line numbers") {
    {
        std::istringstream in("+1 3:1.5\n-1 bad\n");
        CHECK_THROWS_WITH_AS(parse_libsvm_stream(in, "f"), doctest::Contains("f:2"),
                             ParseError);
    }
    {
        std::istringstream in("+1 2:1 2:3\n");
        CHECK_THROWS_WITH_AS(parse_libsvm_stream(in, "f"), doctest::Contains("duplicate"),
                             ParseError);
    }
    {
        std::istringstream in("+1 0:1\n");
        CHECK_THROWS_AS(parse_libsvm_stream(in, "f"), ParseError);
    }
}

TEST_CASE("design space formulas") {
    SUBCASE("chi2 at i = p evaluates at s = 3") {
        auto vs = gen_design_space(DesignKind::Chi2, 7);
        const Vector& last = vs.back();
        CHECK(last[0] == doctest::Approx(1.0));
        CHECK(last[1] == doctest::Approx(3.0));
        CHECK(last[2] == doctest::Approx(9.0));
        CHECK(last[3] == doctest::Approx(27.0));
    }
    SUBCASE("chi1 at i = p") {
        auto vs = gen_design_space(DesignKind::Chi1, 5);
        const Vector& last = vs.back();
        CHECK(last[0] == doctest::Approx(std::exp(-3.0)));
        CHECK(last[1] == doctest::Approx(3.0 * std::exp(-3.0)));
        CHECK(last[2] == doctest::Approx(std::exp(-6.0)));
        CHECK(last[3] == doctest::Approx(3.0 * std::exp(-6.0)));
    }
    SUBCASE("chi3 with p = 9 is a 3x3 grid") {
        auto vs = gen_design_space(DesignKind::Chi3, 9);
        CHECK(vs.size() == 9);
        // vector ((i-1)q + j) with i = j = 2 (1-based): r = 1/3, t = 2/3
        const Vector& v = vs[4];
        CHECK(v[0] == doctest::Approx(1.0));
        CHECK(v[1] == doctest::Approx(2.0 * 2.0 / 3.0 - 1.0));
        CHECK(v[3] == doctest::Approx(2.0 / 3.0));
        CHECK(v[4] == doctest::Approx(v[1] * v[3]));
    }
    SUBCASE("chi4 uses t = i/p") {
        auto vs = gen_design_space(DesignKind::Chi4, 4);
        const Vector& v = vs[0];  // t = 1/4
        CHECK(v[0] == doctest::Approx(0.25));
        CHECK(v[2] == doctest::Approx(std::sin(M_PI / 2.0)));
        CHECK(v[3] == doctest::Approx(std::cos(M_PI / 2.0)));
    }
    CHECK_THROWS_AS(design_kind_from_string("chi9"), ParseError);
}

TEST_CASE("sparse inverse-covariance generator") {
    SUBCASE("vanishing density gives a diagonal pair") {
        auto inst = gen_sparse_invcov(6, 1e-12, 3);
        CHECK((inst.theta_true - Matrix::Identity(6, 6)).norm() < 1e-12);
        CHECK((inst.sigma - Matrix::Identity(6, 6)).norm() < 1e-10);
    }
    SUBCASE("deterministic in the seed") {
        auto a = gen_sparse_invcov(10, 0.2, 7);
        auto b = gen_sparse_invcov(10, 0.2, 7);
        CHECK(a.sigma == b.sigma);
        auto c = gen_sparse_invcov(10, 0.2, 8);
        CHECK(a.sigma != c.sigma);
    }
    SUBCASE("sigma is positive definite") {
        auto inst = gen_sparse_invcov(15, 0.3, 9);
        Eigen::SelfAdjointEigenSolver<Matrix> es(inst.sigma, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("poisson data generator") {
    Dataset d = gen_poisson_data(50, 8, 0.3, 11);
    CHECK(d.n == 50);
    for (Index i = 0; i < d.n; ++i) CHECK(d.labels[i] >= 0.0);
    // feature columns are min-max scaled to [0, 1]
    const Matrix A = d.dense();
    for (Index j = 0; j < d.p; ++j) {
        CHECK(A.col(j).minCoeff() >= 0.0);
        CHECK(A.col(j).maxCoeff() <= 1.0 + 1e-12);
    }
    Dataset d2 = gen_poisson_data(50, 8, 0.3, 11);
    CHECK(d.labels == d2.labels);
}

TEST_CASE("matrix file round trip") {
    Matrix m = gen_sparse_invcov(5, 0.3, 13).sigma;
    const std::string dense_path = "/tmp/hpvm_test_dense.mat";
    const std::string sparse_path = "/tmp/hpvm_test_sparse.mat";
    write_matrix_file(m, dense_path);
    write_matrix_file(m, sparse_path, true);
    CHECK((read_matrix_file(dense_path) - m).norm() == 0.0);
    CHECK((read_matrix_file(sparse_path) - m).norm() == 0.0);
    std::remove(dense_path.c_str());
    std::remove(sparse_path.c_str());
}

TEST_CASE("kkt residual semantics") {
    SUBCASE("zero exactly at a composite optimum") {
        auto f = bench::gen_quadratic_oracle(6, 1.0, 5.0, 14);
        L1Regularizer g(0.2);
        auto ref = verify::reference_solution(*f, g, Vector::Zero(6), 1.0);
        REQUIRE(ref.residual <= 1e-10);
        CHECK(kkt_residual(*f, g, ref.x) <= 1e-10);
    }
    SUBCASE("reduces to a scaled gradient norm for trivial g") {
        auto f = bench::gen_quadratic_oracle(4, 1.0, 5.0, 15);
        ZeroRegularizer g;
        const Vector x = Vector::Ones(4);
        const Vector grad = f->gradient(x);
        const double expect = grad.norm() / std::max(1.0, grad.norm());
        CHECK(kkt_residual(*f, g, x) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("config parsing and flag override") {
    const std::string path = "/tmp/hpvm_test_config.ini";
    {
        std::ofstream out(path);
        out << "# comment\n[model]\nkind = quadratic_l1\np = 12\nseed = 3\n"
            << "[solver]\nkind = PG\neps = 1e-5\n[regularizer]\nrho = 0.3\n";
    }
    auto kv = parse_config_file(path);
    CHECK(kv.at("model.kind") == "quadratic_l1");
    CHECK(kv.at("solver.eps") == "1e-5");
    kv["solver.kind"] = "APG";  // CLI-style override
    ExperimentConfig c = config_from_map(kv);
    CHECK(c.solver == SolverKind::APG);
    CHECK(c.p == 12);
    CHECK(c.rho == doctest::Approx(0.3));
    std::remove(path.c_str());
}

TEST_CASE("experiment runner produces deterministic traces") {
    ExperimentConfig c;
    c.model = ModelKind::QuadraticL1;
    c.solver = SolverKind::PG;
    c.p = 8;
    c.seed = 21;
    c.has_seed = true;
    c.rho = 0.2;
    c.eps = 1e-6;
    auto r1 = run_experiment(c);
    auto r2 = run_experiment(c);
    CHECK(r1.exit_code == 0);
    // identical columns excluding wall-clock
    auto strip = [](const SolveReport& rep) {
        std::ostringstream os;
        os.precision(17);
        for (const auto& r : rep.rows)
            os << r.k << ',' << r.tau << ',' << r.obj << ',' << r.lambda_est << ',' << r.kkt
               << ',' << r.sub_iters << ',' << r.nnz << '\n';
        return os.str();
    };
    CHECK(strip(r1.report) == strip(r2.report));

    const std::string header = trace_csv_string(r1.report);
    CHECK(header.rfind("k,tau,obj,lambda_est,kkt,wall_ms,sub_iters,nnz\n", 0) == 0);
}

TEST_CASE("iteration cap maps to exit code 2") {
    ExperimentConfig c;
    c.model = ModelKind::QuadraticL1;
    c.solver = SolverKind::PG;
    c.p = 10;
    c.seed = 22;
    c.has_seed = true;
    c.rho = 1e-4;
    c.eps = 1e-12;
    c.max_iter = 5;  // unreachable accuracy in five steps
    auto r = run_experiment(c);
    CHECK(r.exit_code == 2);
}
