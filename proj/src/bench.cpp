#include "hpvm/bench.hpp"

#include "hpvm/rng.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

namespace hpvm::bench {

Dataset parse_libsvm_stream(std::istream& in, const std::string& name, Index p_override) {
    Dataset data;
    std::string line;
    long line_no = 0;
    Index max_idx = 0;
    std::vector<double> labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double label;
        if (!(ls >> label))
            throw ParseError(name + ":" + std::to_string(line_no) + ": malformed label");
        std::vector<Dataset::Entry> row;
        std::string tok;
        while (ls >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw ParseError(name + ":" + std::to_string(line_no) + ": malformed token '" +
                                 tok + "'");
            Index idx = 0;
            double val = 0.0;
            try {
                size_t used = 0;
                idx = std::stol(tok.substr(0, colon), &used);
                if (used != colon) throw std::invalid_argument("trailing");
                val = std::stod(tok.substr(colon + 1), &used);
                if (used != tok.size() - colon - 1) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ParseError(name + ":" + std::to_string(line_no) + ": malformed token '" +
                                 tok + "'");
            }
            if (idx < 1)
                throw ParseError(name + ":" + std::to_string(line_no) + ": index must be >= 1");
            for (const auto& [j, v] : row)
                if (j == idx - 1)
                    throw ParseError(name + ":" + std::to_string(line_no) + ": duplicate index " +
                                     std::to_string(idx));
            row.emplace_back(idx - 1, val);
            max_idx = std::max(max_idx, idx);
        }
        data.rows.push_back(std::move(row));
        labels.push_back(label);
    }
    data.n = Index(data.rows.size());
    data.p = p_override > 0 ? p_override : max_idx;
    if (p_override > 0 && max_idx > p_override)
        throw ParseError(name + ": feature index exceeds the override dimension");
    data.labels = Eigen::Map<Vector>(labels.data(), Index(labels.size()));
    return data;
}

Dataset parse_libsvm(const std::string& path, Index p_override) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_libsvm_stream(in, path, p_override);
}

void write_libsvm(const Dataset& data, std::ostream& out) {
    out << std::setprecision(17);
    for (Index i = 0; i < data.n; ++i) {
        out << data.labels[i];
        for (const auto& [j, v] : data.rows[i]) out << ' ' << (j + 1) << ':' << v;
        out << '\n';
    }
}

DesignKind design_kind_from_string(const std::string& s) {
    if (s == "chi1") return DesignKind::Chi1;
    if (s == "chi2") return DesignKind::Chi2;
    if (s == "chi3") return DesignKind::Chi3;
    if (s == "chi4") return DesignKind::Chi4;
    if (s == "chi1_8") return DesignKind::Chi1_8;
    if (s == "chi2_10") return DesignKind::Chi2_10;
    if (s == "chi3_10") return DesignKind::Chi3_10;
    throw ParseError("unknown design space '" + s + "'");
}

std::vector<Vector> gen_design_space(DesignKind kind, Index p) {
    if (p < 1) throw PreconditionError("gen_design_space: p must be >= 1");
    std::vector<Vector> out;

    auto grid_family = [&](int degree_m, auto&& fill) {
        const Index q = Index(std::ceil(std::sqrt(double(p))));
        out.reserve(q * q);
        for (Index i = 1; i <= q; ++i) {
            const double r = 2.0 * double(i) / double(q) - 1.0;
            for (Index j = 1; j <= q; ++j) {
                const double t = double(j) / double(q);
                Vector v(degree_m);
                fill(v, r, t);
                out.push_back(std::move(v));
            }
        }
    };

    switch (kind) {
        case DesignKind::Chi1:
            for (Index i = 1; i <= p; ++i) {
                const double s = 3.0 * double(i) / double(p);
                Vector v(4);
                v << std::exp(-s), s * std::exp(-s), std::exp(-2.0 * s), s * std::exp(-2.0 * s);
                out.push_back(std::move(v));
            }
            break;
        case DesignKind::Chi2:
            for (Index i = 1; i <= p; ++i) {
                const double s = 3.0 * double(i) / double(p);
                Vector v(4);
                v << 1.0, s, s * s, s * s * s;
                out.push_back(std::move(v));
            }
            break;
        case DesignKind::Chi3:
            grid_family(5, [](Vector& v, double r, double t) { v << 1.0, r, r * r, t, r * t; });
            break;
        case DesignKind::Chi4:
            for (Index i = 1; i <= p; ++i) {
                const double t = double(i) / double(p);
                Vector v(4);
                v << t, t * t, std::sin(2.0 * M_PI * t), std::cos(2.0 * M_PI * t);
                out.push_back(std::move(v));
            }
            break;
        case DesignKind::Chi1_8:
            for (Index i = 1; i <= p; ++i) {
                const double s = 3.0 * double(i) / double(p);
                Vector v(8);
                v << std::exp(-s), s * std::exp(-s), std::exp(-2.0 * s), s * std::exp(-2.0 * s),
                    std::exp(-3.0 * s), s * std::exp(-3.0 * s), std::exp(-4.0 * s),
                    s * std::exp(-4.0 * s);
                out.push_back(std::move(v));
            }
            break;
        case DesignKind::Chi2_10:
            for (Index i = 1; i <= p; ++i) {
                const double s = 3.0 * double(i) / double(p);
                Vector v(10);
                double pw = 1.0;
                for (int d = 0; d < 10; ++d) {
                    v[d] = pw;
                    pw *= s;
                }
                out.push_back(std::move(v));
            }
            break;
        case DesignKind::Chi3_10:
            grid_family(10, [](Vector& v, double r, double t) {
                v << 1.0, r, r * r, r * r * r, t, r * t, t * r * r, t * t, t * t * t, r * t * t;
            });
            break;
    }
    return out;
}

InvCovInstance gen_sparse_invcov(Index p, double density, std::uint64_t seed) {
    if (p < 2) throw PreconditionError("gen_sparse_invcov: p must be >= 2");
    if (!(density > 0.0 && density < 1.0))
        throw PreconditionError("gen_sparse_invcov: density must be in (0,1)");
    Rng rng(seed);
    Matrix theta = Matrix::Zero(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = i + 1; j < p; ++j)
            if (rng.uniform() < density) {
                const double v = rng.uniform() < 0.5 ? 0.5 : -0.5;
                theta(i, j) = theta(j, i) = v;
            }
    Eigen::SelfAdjointEigenSolver<Matrix> es(theta, Eigen::EigenvaluesOnly);
    const double shift = std::abs(es.eigenvalues().minCoeff()) + 1.0;
    theta.diagonal().array() += shift;

    Eigen::LLT<Matrix> llt(theta);
    audit::count_inversion();
    Matrix sigma = llt.solve(Matrix::Identity(p, p));
    sigma = 0.5 * (sigma + sigma.transpose());
    return {sigma, theta};
}

Dataset gen_poisson_data(Index n, Index p, double sparsity, std::uint64_t seed) {
    if (n < 1 || p < 1) throw PreconditionError("gen_poisson_data: n, p must be >= 1");
    Rng rng(seed);
    Matrix A(n, p);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < p; ++j) A(i, j) = rng.uniform();
    // min-max scale each feature to [0, 1]
    for (Index j = 0; j < p; ++j) {
        const double lo = A.col(j).minCoeff(), hi = A.col(j).maxCoeff();
        if (hi > lo) A.col(j) = (A.col(j).array() - lo) / (hi - lo);
    }
    Vector x_true = Vector::Zero(p);
    const Index nnz = std::max<Index>(1, Index(std::llround(sparsity * double(p))));
    for (Index k = 0; k < nnz; ++k) {
        const Index j = Index(rng.below(std::uint64_t(p)));
        x_true[j] = (rng.uniform() < 0.5 ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
    }
    Dataset data;
    data.n = n;
    data.p = p;
    data.labels.resize(n);
    data.rows.resize(n);
    for (Index i = 0; i < n; ++i) {
        std::vector<Dataset::Entry> row;
        row.reserve(p);
        for (Index j = 0; j < p; ++j)
            if (A(i, j) != 0.0) row.emplace_back(j, A(i, j));
        data.rows[i] = std::move(row);
        const double mean = std::exp(A.row(i).dot(x_true));
        data.labels[i] = double(rng.poisson(mean));
    }
    return data;
}

Dataset gen_logistic_data(Index n, Index p, double sparsity, std::uint64_t seed) {
    if (n < 1 || p < 1) throw PreconditionError("gen_logistic_data: n, p must be >= 1");
    Rng rng(seed);
    // heterogeneous feature scales give the ill-conditioning of raw data
    Vector feat_scale(p);
    for (Index j = 0; j < p; ++j) feat_scale[j] = std::pow(double(j + 1), -0.45);
    Vector x_true = Vector::Zero(p);
    const Index nnz = std::max<Index>(1, Index(std::llround(sparsity * double(p))));
    for (Index k = 0; k < nnz; ++k) {
        const Index j = Index(rng.below(std::uint64_t(p)));
        x_true[j] = rng.normal() / feat_scale[j];
    }
    Dataset data;
    data.n = n;
    data.p = p;
    data.labels.resize(n);
    data.rows.resize(n);
    for (Index i = 0; i < n; ++i) {
        Vector a = rng.normal_vector(p).cwiseProduct(feat_scale);
        std::vector<Dataset::Entry> row;
        row.reserve(p);
        for (Index j = 0; j < p; ++j) row.emplace_back(j, a[j]);
        data.rows[i] = std::move(row);
        const double score = a.dot(x_true) / std::sqrt(double(p)) + 0.3 * rng.normal();
        data.labels[i] = score >= 0.0 ? 1.0 : -1.0;
    }
    return data;
}

OraclePtr gen_quadratic_oracle(Index p, double mu, double condition, std::uint64_t seed) {
    Rng rng(seed);
    Matrix B(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j) B(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(B);
    Matrix Q = qr.householderQ();
    Vector eigs(p);
    for (Index i = 0; i < p; ++i)
        eigs[i] = mu * std::pow(condition, double(i) / double(std::max<Index>(p - 1, 1)));
    Matrix A = Q * eigs.asDiagonal() * Q.transpose();
    A = 0.5 * (A + A.transpose());
    Vector q = rng.normal_vector(p);
    return std::make_shared<QuadraticOracle>(std::move(A), std::move(q));
}

Matrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    Index p = 0;
    if (!(in >> p) || p < 1) throw ParseError(path + ": bad dimension header");
    std::string marker;
    const auto pos = in.tellg();
    in >> marker;
    Matrix m = Matrix::Zero(p, p);
    if (marker == "sparse") {
        Index i, j;
        double v;
        while (in >> i >> j >> v) {
            if (i < 0 || j < 0 || i >= p || j >= p) throw ParseError(path + ": index out of range");
            m(i, j) = v;
        }
    } else {
        in.seekg(pos);
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j)
                if (!(in >> m(i, j))) throw ParseError(path + ": truncated dense payload");
    }
    return m;
}

void write_matrix_file(const Matrix& m, const std::string& path, bool sparse) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    out << std::setprecision(17);
    out << m.rows();
    if (sparse) {
        out << " sparse\n";
        for (Index i = 0; i < m.rows(); ++i)
            for (Index j = 0; j < m.cols(); ++j)
                if (m(i, j) != 0.0) out << i << ' ' << j << ' ' << m(i, j) << '\n';
    } else {
        out << '\n';
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j);
            out << '\n';
        }
    }
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line, section;
    long line_no = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        kv[section.empty() ? key : section + "." + key] = val;
    }
    return kv;
}

namespace {

ModelKind model_from_string(const std::string& s) {
    if (s == "logistic") return ModelKind::Logistic;
    if (s == "poisson") return ModelKind::Poisson;
    if (s == "doptimal") return ModelKind::DOptimal;
    if (s == "covariance") return ModelKind::Covariance;
    if (s == "quadratic_l1") return ModelKind::QuadraticL1;
    throw ParseError("unknown model '" + s + "'");
}

SolverKind solver_from_string(const std::string& s) {
    if (s == "HomoPN") return SolverKind::HomoPN;
    if (s == "HomoQuasiPN") return SolverKind::HomoQuasiPN;
    if (s == "PG") return SolverKind::PG;
    if (s == "APG") return SolverKind::APG;
    if (s == "DampedPN") return SolverKind::DampedPN;
    if (s == "Alg2") return SolverKind::Alg2;
    throw ParseError("unknown solver '" + s + "'");
}

const char* model_name(ModelKind m) {
    switch (m) {
        case ModelKind::Logistic: return "logistic";
        case ModelKind::Poisson: return "poisson";
        case ModelKind::DOptimal: return "doptimal";
        case ModelKind::Covariance: return "covariance";
        case ModelKind::QuadraticL1: return "quadratic_l1";
    }
    return "?";
}

const char* solver_name(SolverKind s) {
    switch (s) {
        case SolverKind::HomoPN: return "HomoPN";
        case SolverKind::HomoQuasiPN: return "HomoQuasiPN";
        case SolverKind::PG: return "PG";
        case SolverKind::APG: return "APG";
        case SolverKind::DampedPN: return "DampedPN";
        case SolverKind::Alg2: return "Alg2";
    }
    return "?";
}

} // namespace

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv) {
    ExperimentConfig c;
    auto get = [&](const std::string& key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (const auto* v = get("model.kind")) c.model = model_from_string(*v);
    if (const auto* v = get("model.data")) c.data_path = *v;
    if (const auto* v = get("model.design")) c.design = design_kind_from_string(*v);
    if (const auto* v = get("model.n")) c.n = std::stol(*v);
    if (const auto* v = get("model.p")) c.p = std::stol(*v);
    if (const auto* v = get("model.density")) c.density = std::stod(*v);
    if (const auto* v = get("model.sparsity")) c.sparsity = std::stod(*v);
    if (const auto* v = get("model.seed")) {
        c.seed = std::stoull(*v);
        c.has_seed = true;
    }
    if (const auto* v = get("model.mu_f")) c.mu_f = std::stod(*v);
    if (const auto* v = get("regularizer.rho")) c.rho = std::stod(*v);
    if (const auto* v = get("solver.kind")) c.solver = solver_from_string(*v);
    if (const auto* v = get("solver.eps")) c.eps = std::stod(*v);
    if (const auto* v = get("solver.max_iter")) c.max_iter = std::stol(*v);
    if (const auto* v = get("solver.tau0")) c.homotopy.tau0 = std::stod(*v);
    if (const auto* v = get("solver.sigma")) c.homotopy.sigma = std::stod(*v);
    if (const auto* v = get("solver.beta")) c.homotopy.beta = std::stod(*v);
    if (const auto* v = get("solver.accept_lambda")) c.homotopy.accept_lambda = std::stod(*v);
    if (const auto* v = get("solver.max_outer")) c.homotopy.max_outer = std::stol(*v);
    if (const auto* v = get("solver.subsolver_cap")) c.homotopy.subsolver_cap = std::stol(*v);
    if (const auto* v = get("solver.regime")) {
        if (*v == "strongly_convex") c.homotopy.regime = Regime::StronglyConvexSmooth;
        else if (*v == "self_concordant") c.homotopy.regime = Regime::SelfConcordant;
        else if (*v == "barrier") c.homotopy.regime = Regime::Barrier;
        else if (*v == "practical") c.homotopy.regime = Regime::Practical;
        else throw ParseError("unknown regime '" + *v + "'");
    }
    if (const auto* v = get("output.trace")) c.trace_path = *v;
    if (const auto* v = get("output.summary")) c.summary_path = *v;
    return c;
}

namespace {

struct Problem {
    OraclePtr oracle;
    RegularizerPtr reg;
    Vector x0;
};

std::uint64_t require_seed(const ExperimentConfig& c) {
    if (!c.has_seed) throw ParseError("generator models require model.seed");
    return c.seed;
}

// rho giving roughly 10% nonzero coefficients, found by bisection with a
// cheap practical-mode solve at loose accuracy.
double tune_rho(const SmoothOracle& f, const Vector& x0, double target_frac) {
    const Index p = f.dim();
    double lo = 1e-8, hi = (f.gradient(x0)).lpNorm<Eigen::Infinity>() * 1.2 + 1e-8;
    double rho = 0.1 * hi;
    for (int it = 0; it < 12; ++it) {
        rho = std::sqrt(lo * hi);
        L1Regularizer g(rho);
        HomotopySettings s;
        s.regime = Regime::Practical;
        s.metric = MetricKind::Newton;
        s.eps = 1e-4;
        s.stop_on_rgap = true;
        SolveReport rep = run_homotopy(s, f, g, x0);
        const double frac = double(count_nonzeros(rep.x)) / double(p);
        if (std::abs(frac - target_frac) <= 0.03) return rho;
        (frac > target_frac ? lo : hi) = rho;
    }
    return rho;
}

Problem build_problem(const ExperimentConfig& c, double& rho_used) {
    Problem prob;
    switch (c.model) {
        case ModelKind::Logistic: {
            auto data = std::make_shared<Dataset>(
                c.data_path.empty() ? gen_logistic_data(c.n, c.p, c.sparsity, require_seed(c))
                                    : parse_libsvm(c.data_path));
            const double mu = c.mu_f > 0.0 ? c.mu_f : 1.0 / double(data->n);
            prob.oracle = logistic_elastic_oracle(data, mu);
            prob.x0 = Vector::Zero(data->p);
            rho_used = c.rho > 0.0 ? c.rho : tune_rho(*prob.oracle, prob.x0, 0.10);
            prob.reg = std::make_shared<L1Regularizer>(rho_used);
            break;
        }
        case ModelKind::Poisson: {
            auto data = std::make_shared<Dataset>(
                c.data_path.empty() ? gen_poisson_data(c.n, c.p, c.sparsity, require_seed(c))
                                    : parse_libsvm(c.data_path));
            const double mu = c.mu_f > 0.0 ? c.mu_f : 1.0 / double(data->n);
            prob.oracle = poisson_oracle(data, mu);
            prob.x0 = Vector::Zero(data->p);
            rho_used = c.rho > 0.0 ? c.rho : tune_rho(*prob.oracle, prob.x0, 0.10);
            prob.reg = std::make_shared<L1Regularizer>(rho_used);
            break;
        }
        case ModelKind::DOptimal: {
            const auto vs = gen_design_space(c.design, c.p);
            prob.oracle = logdet_design_oracle(vs);
            prob.reg = std::make_shared<SimplexIndicator>();
            prob.x0 = Vector::Constant(Index(vs.size()), 1.0 / double(vs.size()));
            rho_used = 0.0;
            break;
        }
        case ModelKind::QuadraticL1: {
            prob.oracle = gen_quadratic_oracle(c.p, c.mu_f > 0.0 ? c.mu_f : 1.0, 10.0,
                                               require_seed(c));
            prob.x0 = Vector::Zero(c.p);
            rho_used = c.rho > 0.0 ? c.rho : tune_rho(*prob.oracle, prob.x0, 0.10);
            prob.reg = std::make_shared<L1Regularizer>(rho_used);
            break;
        }
        case ModelKind::Covariance:
            throw PreconditionError("covariance model runs through solver Alg2");
    }
    return prob;
}

SolveReport alg2_to_report(const Alg2Result& res, const Matrix& sigma, double rho) {
    SolveReport rep;
    for (const auto& t : res.trace) {
        IterateRow row;
        row.k = t.k;
        row.tau = t.tau;
        row.lambda_est = t.lambda;
        row.sub_iters = t.sub_iters;
        row.nnz = t.nnz;
        row.kkt = t.min_eig_margin;  // margin column doubles as the health metric
        rep.rows.push_back(row);
    }
    const Index p = sigma.rows();
    Eigen::Map<const Vector> zvec(res.Z.data(), p * p);
    rep.x = zvec;
    rep.iterations = res.iterations;
    // primal objective at Z
    Eigen::LLT<Matrix> llt(res.Z);
    if (llt.info() == Eigen::Success) {
        double logdet = 0.0;
        const Matrix Lm = llt.matrixL();
        for (Index i = 0; i < p; ++i) logdet += std::log(Lm(i, i));
        rep.final_obj = (sigma.cwiseProduct(res.Z)).sum() - 2.0 * logdet +
                        rho * res.Z.cwiseAbs().sum();
    }
    rep.status = res.converged ? ExitStatus::Converged : ExitStatus::IterationCap;
    return rep;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    ExperimentResult result;
    result.model_name = model_name(config.model);
    result.solver_name = solver_name(config.solver);

    if (config.solver == SolverKind::Alg2 || config.model == ModelKind::Covariance) {
        Matrix sigma;
        if (!config.data_path.empty()) {
            sigma = read_matrix_file(config.data_path);
        } else {
            sigma = gen_sparse_invcov(config.p, config.density, require_seed(config)).sigma;
        }
        CovRegularizer reg;
        reg.rho = config.rho > 0.0 ? config.rho : 0.01;
        result.rho_used = reg.rho;
        Alg2Settings s;
        s.eps = config.eps;
        if (config.homotopy.tau0 > 0.0) s.tau0 = config.homotopy.tau0;
        s.max_outer = config.homotopy.max_outer;
        Alg2Result res = run_algorithm2(sigma, reg, config.eps, s);
        result.report = alg2_to_report(res, sigma, reg.rho);
        result.exit_code = res.converged ? 0 : 2;
        return result;
    }

    Problem prob = build_problem(config, result.rho_used);

    switch (config.solver) {
        case SolverKind::HomoPN:
        case SolverKind::HomoQuasiPN: {
            HomotopySettings s = config.homotopy;
            s.eps = config.eps;
            s.metric = config.solver == SolverKind::HomoQuasiPN ? MetricKind::QuasiNewton
                                                                : MetricKind::Newton;
            if (config.model == ModelKind::DOptimal && s.regime == Regime::Practical &&
                s.accept_lambda <= 0.0)
                s.accept_lambda = 0.2;
            result.report = run_homotopy(s, *prob.oracle, *prob.reg, prob.x0);
            break;
        }
        case SolverKind::PG:
        case SolverKind::APG:
        case SolverKind::DampedPN: {
            BaselineSettings s;
            s.eps = config.eps;
            s.max_iter = config.max_iter;
            s.method = config.solver == SolverKind::PG ? BaselineMethod::PG
                       : config.solver == SolverKind::APG ? BaselineMethod::APG_LS_Restart
                                                          : BaselineMethod::DampedPN;
            result.report = s.method == BaselineMethod::PG
                                ? prox_grad(*prob.oracle, *prob.reg, s, prob.x0)
                            : s.method == BaselineMethod::APG_LS_Restart
                                ? apg_ls_restart(*prob.oracle, *prob.reg, s, prob.x0)
                                : damped_pn(*prob.oracle, *prob.reg, s, prob.x0);
            break;
        }
        case SolverKind::Alg2:
            break;  // handled above
    }

    result.exit_code = result.report.status == ExitStatus::Converged    ? 0
                       : result.report.status == ExitStatus::IterationCap ? 2
                                                                          : 1;
    return result;
}

std::string trace_csv_string(const SolveReport& report) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "k,tau,obj,lambda_est,kkt,wall_ms,sub_iters,nnz\n";
    for (const auto& r : report.rows) {
        os << r.k << ',' << r.tau << ',' << r.obj << ',' << r.lambda_est << ',' << r.kkt << ','
           << r.wall_ms << ',' << r.sub_iters << ',' << r.nnz << '\n';
    }
    return os.str();
}

void write_trace_csv(const SolveReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    out << trace_csv_string(report);
}

void write_summary_json(const ExperimentResult& result, const ExperimentConfig& config,
                        const std::string& path) {
    nlohmann::json j;
    j["model"] = result.model_name;
    j["solver"] = result.solver_name;
    j["eps"] = config.eps;
    j["rho"] = result.rho_used;
    j["iterations"] = result.report.iterations;
    j["time_ms"] = result.report.total_ms;
    j["final_obj"] = result.report.final_obj;
    j["final_rgap"] = result.report.final_rgap;
    j["converged"] = result.report.status == ExitStatus::Converged;
    j["exit_code"] = result.exit_code;
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

} // namespace hpvm::bench
