#pragma once

#include "hpvm/types.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace hpvm {

// Deterministic start vector for iterative eigenvalue estimates.
inline Vector eig_start_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(double(i + 1));
    v /= v.norm();
    return v;
}

// Largest eigenvalue of a symmetric PSD operator by power iteration.
// Relative tolerance on the Rayleigh quotient; iteration capped.
inline double power_iteration_lmax(const MatVec& op, Index n, double tol = 1e-6,
                                   int max_iter = 200) {
    Vector v = eig_start_vector(n);
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector w = op(v);
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        w /= nw;
        const double next = w.dot(op(w));
        if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) {
            return next;
        }
        lambda = next;
        v = w;
    }
    return lambda;
}

struct EigenExtremes {
    double lmin = 0.0;
    double lmax = 0.0;
};

// Extreme eigenvalues of a symmetric operator via Lanczos with full
// reorthogonalization. Multiplication-only; exact (to roundoff) when
// max_iter >= n. Used where factorizations are off limits.
inline EigenExtremes lanczos_extremes(const MatVec& op, Index n, int max_iter = 0) {
    if (max_iter <= 0) max_iter = int(std::min<Index>(n, 160));
    const int m = int(std::min<Index>(n, max_iter));

    Matrix Q(n, m);
    Vector alpha(m), beta(m);
    Vector q = eig_start_vector(n);
    Vector q_prev = Vector::Zero(n);
    double b_prev = 0.0;
    int k = 0;
    for (; k < m; ++k) {
        Q.col(k) = q;
        Vector w = op(q);
        alpha[k] = q.dot(w);
        w -= alpha[k] * q + b_prev * q_prev;
        // full reorthogonalization, twice
        for (int pass = 0; pass < 2; ++pass)
            w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
        const double b = w.norm();
        beta[k] = b;
        if (b < 1e-14) {
            ++k;
            break;
        }
        q_prev = q;
        q = w / b;
        b_prev = b;
    }

    Matrix T = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(T);
    EigenExtremes out;
    out.lmin = es.eigenvalues().minCoeff();
    out.lmax = es.eigenvalues().maxCoeff();
    return out;
}

} // namespace hpvm
