#pragma once

#include "hpvm/homotopy.hpp"
#include "hpvm/oracle.hpp"
#include "hpvm/regularizer.hpp"

#include <functional>
#include <string>
#include <vector>

namespace hpvm::verify {

// -------- finite differences --------

using ScalarFn = std::function<double(const Vector&)>;
using VectorFn = std::function<Vector(const Vector&)>;

// Central differences with adaptive h in {1e-4, 1e-5, 1e-6}: evaluates all
// three and returns the mean of the least-disagreeing pair.
Vector fd_gradient(const ScalarFn& fun, const Vector& x, double h = 0.0);
Matrix fd_hessian(const VectorFn& gradfun, const Vector& x, double h = 0.0);

// <d3 f(x)[u] u, u> by differencing the Hessian quadratic form along u.
double fd_third_directional(const SmoothOracle& f, const Vector& x, const Vector& u,
                            double h = 1e-4);

// -------- reference solutions of the tau-parameterized problem --------

struct ReferenceSolution {
    double tau = 1.0;
    Vector x;
    double residual = kInf;  // KKT residual of the tau-problem at x
    bool reached_target = false;
    std::string method;
};

// Smooth part of the tau-problem: tau f(x) - (1 - tau) <xi0, x>.
class TauProblemOracle final : public SmoothOracle {
public:
    TauProblemOracle(const SmoothOracle& f, Vector xi0, double tau)
        : f_(&f), xi0_(std::move(xi0)), tau_(tau) {
        if (!(tau > 0.0 && tau <= 1.0))
            throw PreconditionError("TauProblemOracle: tau must be in (0, 1]");
    }

    Index dim() const override { return f_->dim(); }
    double value(const Vector& x) const override {
        return tau_ * f_->value(x) - (1.0 - tau_) * xi0_.dot(x);
    }
    Vector gradient(const Vector& x) const override {
        return tau_ * f_->gradient(x) - (1.0 - tau_) * xi0_;
    }
    bool has_dense_hessian() const override { return f_->has_dense_hessian(); }
    Matrix hessian(const Vector& x) const override { return tau_ * f_->hessian(x); }
    MatVec hessian_op(const Vector& x) const override {
        auto op = f_->hessian_op(x);
        const double t = tau_;
        return [op, t](const Vector& u) { return Vector(t * op(u)); };
    }
    double hessian_quadform(const Vector& x, const Vector& u) const override {
        return tau_ * f_->hessian_quadform(x, u);
    }
    bool domain_check(const Vector& x) const override { return f_->domain_check(x); }
    double mu() const override { return tau_ * f_->mu(); }
    double lip() const override { return tau_ * f_->lip(); }

private:
    const SmoothOracle* f_;
    Vector xi0_;
    double tau_;
};

// Long-run composite solve of the tau-problem polished by proximal-Newton
// steps (support-polished to machine precision for l1-type regularizers).
ReferenceSolution reference_solution(const SmoothOracle& f, const Regularizer& g,
                                     const Vector& xi0, double tau, double target = 1e-12,
                                     const Vector* warm = nullptr);

// High-accuracy primal solution of
//   min_{X > 0} tr(Sigma X) - logdet X + rho ||X||_1
// by monotone APG with backtracking and domain safeguarding. Independent of
// the dual Algorithm-2 path.
Matrix reference_invcov(const Matrix& sigma, double rho, double tol = 1e-10,
                        long max_iter = 200000);

// -------- brute-force prox --------

// Minimizer of g(u) + ||u - x||^2 / (2 gamma) without using g.prox:
// joint coarse grid + cyclic golden-section refinement for dim <= 4 and
// separable g; water-filling bisection for the simplex indicator;
// projected-subgradient fallback otherwise.
Vector brute_prox(const Regularizer& g, const Vector& x, double gamma);

// -------- theorem audits --------

struct AuditCheck {
    std::string inequality;
    long k = 0;
    bool applicable = true;
    bool pass = true;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct AuditReport {
    std::vector<AuditCheck> checks;
    bool all_pass = true;

    void add(const AuditCheck& c) {
        checks.push_back(c);
        if (c.applicable && !c.pass) all_pass = false;
    }
    std::string to_json() const;
};

struct TheoremTrace {
    std::vector<Vector> xs;      // x^0..x^K
    std::vector<double> taus;    // tau_0..tau_K
    std::vector<double> deltas;  // delta_k used to produce x^{k+1}
    std::vector<ReferenceSolution> refs;  // x*_{tau_k}, aligned with xs
    Vector x_star;               // reference at tau = 1 when available
    bool has_x_star = false;
};

// Evaluates every displayed inequality of the selected regime per iteration;
// `tol` is an additive slack covering the resolution of the reference
// solutions (distances below it cannot be measured).
AuditReport audit_theorem(const SmoothOracle& f, const Regularizer& g, Regime regime,
                          const TheoremConstants& c, const TheoremTrace& trace, double beta,
                          double tol = 1e-9);

// Local-norm distance ||a - b||_{hess f(at)}.
double local_distance(const SmoothOracle& f, const Vector& at, const Vector& a, const Vector& b);

} // namespace hpvm::verify
