#pragma once

#include "hpvm/types.hpp"

#include <string>
#include <vector>

namespace hpvm {

enum class ExitStatus { Converged, IterationCap, Failed };

struct IterateRow {
    long k = 0;
    double tau = 0.0;
    double obj = 0.0;
    double lambda_est = 0.0;
    double kkt = 0.0;
    double wall_ms = 0.0;
    long sub_iters = 0;
    long nnz = 0;
};

struct SolveReport {
    std::vector<IterateRow> rows;
    Vector x;
    long iterations = 0;
    double total_ms = 0.0;
    double final_obj = 0.0;
    double final_rgap = 0.0;
    ExitStatus status = ExitStatus::Failed;
    std::string message;

    // Optional per-iterate snapshots for audits (enabled by callers).
    std::vector<Vector> iterates;
    std::vector<double> taus;
    std::vector<double> deltas;
};

inline long count_nonzeros(const Vector& x) {
    long nnz = 0;
    for (Index i = 0; i < x.size(); ++i)
        if (x[i] != 0.0) ++nnz;
    return nnz;
}

} // namespace hpvm
