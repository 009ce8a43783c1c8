#pragma once

#include "hpvm/baselines.hpp"
#include "hpvm/dataset.hpp"
#include "hpvm/homotopy.hpp"
#include "hpvm/kkt.hpp"
#include "hpvm/oracles.hpp"
#include "hpvm/pdp.hpp"
#include "hpvm/report.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace hpvm::bench {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// LIBSVM-format lines "<label> <index>:<value> ...", 1-based indices.
// Feature count defaults to the maximum index seen.
Dataset parse_libsvm(const std::string& path, Index p_override = 0);
Dataset parse_libsvm_stream(std::istream& in, const std::string& name, Index p_override = 0);
void write_libsvm(const Dataset& data, std::ostream& out);

// Deterministic design spaces. The chi3 family lives on a q x q grid with
// q = ceil(sqrt(p)): r_i = 2 i / q - 1 and t_j = j / q (this grid reading
// reproduces the published optimal values; the per-p reading does not).
enum class DesignKind { Chi1, Chi2, Chi3, Chi4, Chi1_8, Chi2_10, Chi3_10 };
DesignKind design_kind_from_string(const std::string& s);
std::vector<Vector> gen_design_space(DesignKind kind, Index p);

// Sparse inverse-covariance instance: Theta has +-0.5 off-diagonal entries
// at the given density, diagonal shifted by |lambda_min| + 1; Sigma is its
// inverse, symmetrized. Deterministic in the seed.
struct InvCovInstance {
    Matrix sigma;
    Matrix theta_true;
};
InvCovInstance gen_sparse_invcov(Index p, double density, std::uint64_t seed);

// Poisson regression data with min-max scaled features in [0,1] and counts
// drawn at a planted sparse coefficient vector.
Dataset gen_poisson_data(Index n, Index p, double sparsity, std::uint64_t seed);

// Binary classification data with standard normal features and labels from
// a planted sparse coefficient vector.
Dataset gen_logistic_data(Index n, Index p, double sparsity, std::uint64_t seed);

// Random strongly convex quadratic f(x) = 0.5 x'Qx + q'x.
OraclePtr gen_quadratic_oracle(Index p, double mu, double condition, std::uint64_t seed);

using hpvm::kkt_residual;
using hpvm::relative_gap;

// Sigma matrix file: first token p, optional "sparse" marker; dense payload
// is row-major whitespace floats, sparse payload is (i, j, v) triples.
Matrix read_matrix_file(const std::string& path);
void write_matrix_file(const Matrix& m, const std::string& path, bool sparse = false);

// ---------------- experiment configuration ----------------

enum class ModelKind { Logistic, Poisson, DOptimal, Covariance, QuadraticL1 };
enum class SolverKind { HomoPN, HomoQuasiPN, PG, APG, DampedPN, Alg2 };

struct ExperimentConfig {
    ModelKind model = ModelKind::QuadraticL1;
    SolverKind solver = SolverKind::HomoPN;

    std::string data_path;      // empty: use the generator
    DesignKind design = DesignKind::Chi1;
    Index n = 100, p = 10;
    double density = 0.1;
    double sparsity = 0.1;
    std::uint64_t seed = 0;
    bool has_seed = false;

    double rho = 0.0;           // <= 0: auto-tune to ~10% nonzeros
    double mu_f = 0.0;          // <= 0: 1/n
    double eps = 1e-6;
    HomotopySettings homotopy;
    long max_iter = 20000;

    std::string trace_path;
    std::string summary_path;
};

// Flat INI-style "key = value" file with [section] headers; keys are
// "section.key" in the returned map.
std::map<std::string, std::string> parse_config_file(const std::string& path);
ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv);

struct ExperimentResult {
    SolveReport report;
    int exit_code = 1;  // 0 converged, 2 iteration cap, 1 error
    double rho_used = 0.0;
    std::string model_name;
    std::string solver_name;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

void write_trace_csv(const SolveReport& report, const std::string& path);
void write_summary_json(const ExperimentResult& result, const ExperimentConfig& config,
                        const std::string& path);
std::string trace_csv_string(const SolveReport& report);

} // namespace hpvm::bench
