#pragma once

#include "hpvm/regularizer.hpp"
#include "hpvm/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

namespace hpvm {

// Twice-differentiable convex model term f together with its analytic
// constants. Gradients and Hessians are exact; domain_check reports strict
// interior membership for barrier-type models.
class SmoothOracle {
public:
    virtual ~SmoothOracle() = default;

    virtual Index dim() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;

    virtual bool has_dense_hessian() const { return true; }
    virtual Matrix hessian(const Vector& x) const {
        (void)x;
        throw PreconditionError("oracle: dense Hessian not available");
    }
    virtual MatVec hessian_op(const Vector& x) const {
        Matrix H = hessian(x);
        return [H](const Vector& u) { return Vector(H * u); };
    }
    // <hessian(x) u, u>
    virtual double hessian_quadform(const Vector& x, const Vector& u) const {
        return u.dot(hessian_op(x)(u));
    }
    // diag(hessian(x)); used as a preconditioner hint for subproblem solves
    virtual bool has_hessian_diag() const { return has_dense_hessian(); }
    virtual Vector hessian_diag(const Vector& x) const { return hessian(x).diagonal(); }
    // principal submatrix of hessian(x); enables active-face subproblem polish
    virtual Matrix hessian_submatrix(const Vector& x, const std::vector<Index>& idx) const {
        const Matrix H = hessian(x);
        Matrix S(idx.size(), idx.size());
        for (size_t a = 0; a < idx.size(); ++a)
            for (size_t b = 0; b < idx.size(); ++b) S(a, b) = H(idx[a], idx[b]);
        return S;
    }

    virtual bool domain_check(const Vector& x) const {
        (void)x;
        return true;
    }

    // mu_f: strong convexity modulus (0 when absent).
    virtual double mu() const { return 0.0; }
    // L_f: gradient Lipschitz constant (+inf when unavailable).
    virtual double lip() const { return kInf; }
    // M_f: self-concordance parameter (2 = standard), absent when unknown.
    virtual std::optional<double> self_concordance() const { return std::nullopt; }
    // nu_f: barrier parameter, absent for non-barrier models.
    virtual std::optional<double> barrier_parameter() const { return std::nullopt; }

    // Fenchel conjugate access when analytic (needed by the dual framework).
    virtual bool has_conjugate() const { return false; }
    virtual double conj_value(const Vector& y) const {
        (void)y;
        throw PreconditionError("oracle: conjugate not available");
    }
    virtual Vector conj_gradient(const Vector& y) const {
        (void)y;
        throw PreconditionError("oracle: conjugate not available");
    }
    virtual Matrix conj_hessian(const Vector& y) const {
        (void)y;
        throw PreconditionError("oracle: conjugate not available");
    }
};

using OraclePtr = std::shared_ptr<SmoothOracle>;

// M_f-to-standard conversion of Proposition-style generalized
// self-concordance: a (M_f, kappa)-generalized self-concordant and
// mu_f-strongly convex f is M_hat-self-concordant with
// M_hat = M_f / sqrt(mu_f)^(3 - kappa).
inline double self_concordance_convert(double M_f, double kappa, double mu_f) {
    if (!(mu_f > 0.0)) throw PreconditionError("self_concordance_convert: mu_f must be > 0");
    if (!(kappa > 0.0 && kappa <= 3.0))
        throw PreconditionError("self_concordance_convert: kappa must be in (0, 3]");
    return M_f / std::pow(std::sqrt(mu_f), 3.0 - kappa);
}

// Multiplying f by (M_hat/2)^2 makes it standard self-concordant.
inline double standardize_scale(double M_hat) {
    return M_hat > 2.0 ? (M_hat / 2.0) * (M_hat / 2.0) : 1.0;
}

// f(x) = 0.5 x'Qx + q'x with Q symmetric positive definite.
class QuadraticOracle final : public SmoothOracle {
public:
    QuadraticOracle(Matrix Q, Vector q) : Q_(std::move(Q)), q_(std::move(q)) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(Q_);
        mu_ = es.eigenvalues().minCoeff();
        lip_ = es.eigenvalues().maxCoeff();
        if (!(mu_ > 0.0)) throw PreconditionError("QuadraticOracle: Q must be positive definite");
        llt_.compute(Q_);
    }

    Index dim() const override { return q_.size(); }
    double value(const Vector& x) const override { return 0.5 * x.dot(Q_ * x) + q_.dot(x); }
    Vector gradient(const Vector& x) const override { return Q_ * x + q_; }
    Matrix hessian(const Vector&) const override { return Q_; }
    double hessian_quadform(const Vector&, const Vector& u) const override {
        return u.dot(Q_ * u);
    }

    double mu() const override { return mu_; }
    double lip() const override { return lip_; }
    // quadratics satisfy the standard self-concordance inequality trivially
    std::optional<double> self_concordance() const override { return 2.0; }

    bool has_conjugate() const override { return true; }
    double conj_value(const Vector& y) const override {
        Vector d = llt_.solve(y - q_);
        return 0.5 * d.dot(y - q_);
    }
    Vector conj_gradient(const Vector& y) const override {
        audit::count_cholesky();
        return llt_.solve(y - q_);
    }
    Matrix conj_hessian(const Vector&) const override {
        audit::count_inversion();
        return llt_.solve(Matrix::Identity(q_.size(), q_.size()));
    }

    const Matrix& Q() const { return Q_; }

private:
    Matrix Q_;
    Vector q_;
    Eigen::LLT<Matrix> llt_;
    double mu_ = 0.0, lip_ = 0.0;
};

// c * f; used together with ScaledRegularizer to standardize generalized
// self-concordant models (the minimizer of c f + c g equals that of f + g).
class ScaledOracle final : public SmoothOracle {
public:
    ScaledOracle(std::shared_ptr<const SmoothOracle> inner, double scale)
        : f_(std::move(inner)), c_(scale) {
        if (!(c_ > 0.0)) throw PreconditionError("ScaledOracle: scale must be > 0");
    }

    Index dim() const override { return f_->dim(); }
    double value(const Vector& x) const override { return c_ * f_->value(x); }
    Vector gradient(const Vector& x) const override { return c_ * f_->gradient(x); }
    bool has_dense_hessian() const override { return f_->has_dense_hessian(); }
    Matrix hessian(const Vector& x) const override { return c_ * f_->hessian(x); }
    MatVec hessian_op(const Vector& x) const override {
        auto op = f_->hessian_op(x);
        const double c = c_;
        return [op, c](const Vector& u) { return Vector(c * op(u)); };
    }
    double hessian_quadform(const Vector& x, const Vector& u) const override {
        return c_ * f_->hessian_quadform(x, u);
    }
    bool has_hessian_diag() const override { return f_->has_hessian_diag(); }
    Vector hessian_diag(const Vector& x) const override { return c_ * f_->hessian_diag(x); }
    Matrix hessian_submatrix(const Vector& x, const std::vector<Index>& idx) const override {
        return c_ * f_->hessian_submatrix(x, idx);
    }
    bool domain_check(const Vector& x) const override { return f_->domain_check(x); }

    double mu() const override { return c_ * f_->mu(); }
    double lip() const override { return c_ * f_->lip(); }
    std::optional<double> self_concordance() const override {
        if (auto m = f_->self_concordance()) return *m / std::sqrt(c_);
        return std::nullopt;
    }

    double scale() const { return c_; }

private:
    std::shared_ptr<const SmoothOracle> f_;
    double c_;
};

} // namespace hpvm
