#include "hpvm/bench.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdlib>
#include <iostream>

namespace {

void apply_thread_cap() {
    if (const char* env = std::getenv("HPVM_THREADS")) {
        const int n = std::atoi(env);
        Eigen::setNbThreads(n > 0 ? n : 1);
    } else {
        Eigen::setNbThreads(1);
    }
}

} // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"Homotopy proximal variable-metric solvers and benchmarks"};
    app.require_subcommand(1);

    auto* solve = app.add_subcommand("solve", "Run one experiment");
    std::string config_path, model, data, solver, design, trace_out, summary_out, regime;
    double rho = -1.0, tau0 = -1.0, sigma = -1.0, eps = -1.0, mu_f = -1.0, density = -1.0;
    long n = -1, p = -1;
    long long seed = -1;
    solve->add_option("--config", config_path, "Config file (key = value with [sections])");
    solve->add_option("--model", model, "logistic|poisson|doptimal|covariance|quadratic_l1");
    solve->add_option("--data", data, "Input data path (LIBSVM or matrix file)");
    solve->add_option("--solver", solver, "HomoPN|HomoQuasiPN|PG|APG|DampedPN|Alg2");
    solve->add_option("--design", design, "Design space kind for doptimal");
    solve->add_option("--regime", regime, "strongly_convex|self_concordant|barrier|practical");
    solve->add_option("--rho", rho, "Regularization weight");
    solve->add_option("--tau0", tau0, "Initial homotopy parameter");
    solve->add_option("--sigma", sigma, "Contraction factor override");
    solve->add_option("--eps", eps, "Target accuracy");
    solve->add_option("--mu_f", mu_f, "Strong convexity weight");
    solve->add_option("--density", density, "Generator density");
    solve->add_option("--n", n, "Generator sample count");
    solve->add_option("--p", p, "Generator dimension");
    solve->add_option("--seed", seed, "Generator seed");
    solve->add_option("--trace", trace_out, "Per-iteration CSV output");
    solve->add_option("--summary", summary_out, "Summary JSON output");

    CLI11_PARSE(app, argc, argv);

    try {
        std::map<std::string, std::string> kv;
        if (!config_path.empty()) kv = hpvm::bench::parse_config_file(config_path);
        // flags override file keys
        if (!model.empty()) kv["model.kind"] = model;
        if (!data.empty()) kv["model.data"] = data;
        if (!design.empty()) kv["model.design"] = design;
        if (!solver.empty()) kv["solver.kind"] = solver;
        if (!regime.empty()) kv["solver.regime"] = regime;
        if (rho >= 0.0) kv["regularizer.rho"] = std::to_string(rho);
        if (tau0 >= 0.0) kv["solver.tau0"] = std::to_string(tau0);
        if (sigma >= 0.0) kv["solver.sigma"] = std::to_string(sigma);
        if (eps >= 0.0) kv["solver.eps"] = std::to_string(eps);
        if (mu_f >= 0.0) kv["model.mu_f"] = std::to_string(mu_f);
        if (density >= 0.0) kv["model.density"] = std::to_string(density);
        if (n >= 0) kv["model.n"] = std::to_string(n);
        if (p >= 0) kv["model.p"] = std::to_string(p);
        if (seed >= 0) kv["model.seed"] = std::to_string(seed);

        hpvm::bench::ExperimentConfig config = hpvm::bench::config_from_map(kv);
        if (!trace_out.empty()) config.trace_path = trace_out;
        if (!summary_out.empty()) config.summary_path = summary_out;

        const auto result = hpvm::bench::run_experiment(config);
        if (!config.trace_path.empty())
            hpvm::bench::write_trace_csv(result.report, config.trace_path);
        if (!config.summary_path.empty())
            hpvm::bench::write_summary_json(result, config, config.summary_path);

        std::cout << result.model_name << "/" << result.solver_name
                  << ": iters=" << result.report.iterations
                  << " obj=" << result.report.final_obj << " rgap=" << result.report.final_rgap
                  << " time_ms=" << result.report.total_ms << "\n";
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
