#pragma once

#include "hpvm/types.hpp"

#include <utility>
#include <vector>

namespace hpvm {

struct InvalidDatasetError : PreconditionError {
    using PreconditionError::PreconditionError;
};

// Sparse-row dataset {(a_i, y_i)}.
struct Dataset {
    using Entry = std::pair<Index, double>;  // (feature index, value)

    Index n = 0;  // samples
    Index p = 0;  // features
    std::vector<std::vector<Entry>> rows;
    Vector labels;

    double row_dot(Index i, const Vector& x) const {
        double s = 0.0;
        for (const auto& [j, v] : rows[i]) s += v * x[j];
        return s;
    }

    // out += coef * a_i
    void add_row(Index i, double coef, Vector& out) const {
        for (const auto& [j, v] : rows[i]) out[j] += coef * v;
    }

    double row_sq_norm(Index i) const {
        double s = 0.0;
        for (const auto& [j, v] : rows[i]) s += v * v;
        return s;
    }

    double max_row_norm() const {
        double m = 0.0;
        for (Index i = 0; i < n; ++i) m = std::max(m, row_sq_norm(i));
        return std::sqrt(m);
    }

    Vector apply(const Vector& x) const {  // A x
        Vector out(n);
        for (Index i = 0; i < n; ++i) out[i] = row_dot(i, x);
        return out;
    }

    Vector apply_transpose(const Vector& u) const {  // A' u
        Vector out = Vector::Zero(p);
        for (Index i = 0; i < n; ++i) add_row(i, u[i], out);
        return out;
    }

    Matrix dense() const {
        Matrix A = Matrix::Zero(n, p);
        for (Index i = 0; i < n; ++i)
            for (const auto& [j, v] : rows[i]) A(i, j) = v;
        return A;
    }
};

} // namespace hpvm
