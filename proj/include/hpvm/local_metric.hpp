#pragma once

#include "hpvm/eig.hpp"
#include "hpvm/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <memory>
#include <optional>
#include <vector>

namespace hpvm {

// Symmetric positive (semi)definite metric H defining ||u||_H and, where a
// factorization exists, solves and the dual norm ||v||_H^* = ||v||_{H^-1}.
// Dense metrics cache an LLT; operator metrics expose products only and
// estimate extreme eigenvalues by Lanczos (0.9 safety on lambda_min, since
// Ritz values bound it from above).
class LocalMetric {
public:
    static LocalMetric dense(Matrix H) {
        LocalMetric m;
        m.dense_ = std::move(H);
        m.n_ = m.dense_->rows();
        return m;
    }

    static LocalMetric scaled_identity(double c, Index n) {
        LocalMetric m;
        m.scalar_ = c;
        m.n_ = n;
        return m;
    }

    static LocalMetric diagonal(Vector d) {
        LocalMetric m;
        m.diag_ = std::move(d);
        m.n_ = m.diag_->size();
        return m;
    }

    static LocalMetric from_op(MatVec op, Index n, int lanczos_iters = 0) {
        LocalMetric m;
        m.op_ = std::move(op);
        m.n_ = n;
        m.lanczos_iters_ = lanczos_iters;
        return m;
    }

    using SubmatrixFn = std::function<Matrix(const std::vector<Index>&)>;

    void set_precond_hint(Vector d) { precond_ = std::move(d); }
    void set_submatrix_fn(SubmatrixFn fn) { submatrix_ = std::move(fn); }
    bool has_submatrix() const { return submatrix_ || dense_ || diag_ || scalar_; }
    Matrix submatrix(const std::vector<Index>& idx) const {
        if (submatrix_) return (*submatrix_)(idx);
        const Index s = Index(idx.size());
        Matrix out = Matrix::Zero(s, s);
        if (dense_) {
            for (Index a = 0; a < s; ++a)
                for (Index b = 0; b < s; ++b) out(a, b) = (*dense_)(idx[a], idx[b]);
        } else if (diag_) {
            for (Index a = 0; a < s; ++a) out(a, a) = (*diag_)[idx[a]];
        } else if (scalar_) {
            out.diagonal().setConstant(*scalar_);
        } else {
            throw PreconditionError("LocalMetric: no submatrix access");
        }
        return out;
    }
    bool has_precond_hint() const {
        return precond_.has_value() || dense_.has_value() || diag_.has_value();
    }
    Vector precond_hint() const {
        if (precond_) return *precond_;
        if (dense_) return dense_->diagonal();
        if (diag_) return *diag_;
        throw PreconditionError("LocalMetric: no preconditioner hint");
    }

    Index size() const { return n_; }
    bool is_scaled_identity() const { return scalar_.has_value(); }
    double scalar() const { return *scalar_; }
    bool has_factorization() const { return !op_; }

    Vector apply(const Vector& u) const {
        if (scalar_) return *scalar_ * u;
        if (diag_) return diag_->cwiseProduct(u);
        if (dense_) return *dense_ * u;
        return (*op_)(u);
    }

    double quadform(const Vector& u) const { return u.dot(apply(u)); }
    double norm(const Vector& u) const { return std::sqrt(std::max(quadform(u), 0.0)); }

    Vector solve(const Vector& v) const {
        if (scalar_) return v / *scalar_;
        if (diag_) return v.cwiseQuotient(*diag_);
        if (dense_) {
            ensure_llt();
            return llt_->solve(v);
        }
        throw PreconditionError("LocalMetric: solve unavailable for operator metrics");
    }

    double dual_norm(const Vector& v) const {
        return std::sqrt(std::max(v.dot(solve(v)), 0.0));
    }

    double lambda_max() const {
        ensure_extremes();
        return lmax_;
    }

    // Safe lower bound (may be 0 for semidefinite metrics).
    double lambda_min() const {
        ensure_extremes();
        return lmin_;
    }

private:
    void ensure_llt() const {
        if (!llt_) {
            llt_.emplace();
            llt_->compute(*dense_);
            audit::count_cholesky();
            if (llt_->info() != Eigen::Success)
                throw NumericError("LocalMetric: factorization failed (not positive definite)");
        }
    }

    void ensure_extremes() const {
        if (have_extremes_) return;
        if (scalar_) {
            lmin_ = lmax_ = *scalar_;
        } else if (diag_) {
            lmin_ = diag_->minCoeff();
            lmax_ = diag_->maxCoeff();
        } else if (dense_) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(*dense_, Eigen::EigenvaluesOnly);
            lmin_ = es.eigenvalues().minCoeff();
            lmax_ = es.eigenvalues().maxCoeff();
        } else {
            const auto ext = lanczos_extremes(*op_, n_, lanczos_iters_);
            lmax_ = 1.01 * ext.lmax;
            // Ritz values only bound lambda_min from above; trust the 0.9
            // safety factor only when the Krylov space was exhausted.
            lmin_ = n_ <= 200 ? 0.9 * std::max(ext.lmin, 0.0) : 0.0;
        }
        lmin_ = std::max(lmin_, 0.0);
        have_extremes_ = true;
    }

    Index n_ = 0;
    std::optional<Vector> precond_;
    std::optional<SubmatrixFn> submatrix_;
    std::optional<double> scalar_;
    std::optional<Vector> diag_;
    std::optional<Matrix> dense_;
    std::optional<MatVec> op_;
    int lanczos_iters_ = 0;

    mutable std::optional<Eigen::LLT<Matrix>> llt_;
    mutable bool have_extremes_ = false;
    mutable double lmin_ = 0.0, lmax_ = 0.0;
};

} // namespace hpvm
