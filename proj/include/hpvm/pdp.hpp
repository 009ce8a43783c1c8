#pragma once

#include "hpvm/oracle.hpp"
#include "hpvm/regularizer.hpp"
#include "hpvm/subsolver.hpp"

#include <memory>
#include <vector>

namespace hpvm {

// Fenchel dual of min f(x) + psi(Dx):
//   min_y Psi(y) = f*(-D'y) + psi*(y),
// with phi(y) := f*(-D'y), grad phi = -D grad f*(-D'y),
// hess phi = D hess f*(-D'y) D'.
struct DualProblem {
    std::shared_ptr<const SmoothOracle> primal;
    Matrix D;
    RegularizerPtr psi;
    RegularizerPtr psi_conj;

    Index n() const { return D.rows(); }

    double phi_value(const Vector& y) const { return primal->conj_value(-D.transpose() * y); }
    Vector phi_gradient(const Vector& y) const {
        return -D * primal->conj_gradient(-D.transpose() * y);
    }
    Matrix phi_hessian(const Vector& y) const {
        return D * primal->conj_hessian(-D.transpose() * y) * D.transpose();
    }
    // grad phi_tau(y) = grad phi(y) - (1/tau - 1) xi0
    Vector phi_shifted_gradient(const Vector& y, double tau, const Vector& xi0) const {
        Vector g = phi_gradient(y);
        if (tau < 1.0) g -= (1.0 / tau - 1.0) * xi0;
        return g;
    }
};

// Requires an oracle with an analytic conjugate and full-row-rank D.
DualProblem build_dual(std::shared_ptr<const SmoothOracle> oracle, Matrix D, RegularizerPtr psi);

// SmoothOracle view of phi so generic solvers can run on the dual problem.
class DualPhiOracle final : public SmoothOracle {
public:
    explicit DualPhiOracle(DualProblem dual) : dual_(std::move(dual)) {}

    Index dim() const override { return dual_.n(); }
    double value(const Vector& y) const override { return dual_.phi_value(y); }
    Vector gradient(const Vector& y) const override { return dual_.phi_gradient(y); }
    Matrix hessian(const Vector& y) const override { return dual_.phi_hessian(y); }
    std::optional<double> self_concordance() const override {
        return dual_.primal->self_concordance();
    }
    const DualProblem& dual() const { return dual_; }

private:
    DualProblem dual_;
};

// Dualized subproblem over z (primal space of Dx):
//   Q(z) = 0.5 <H z, z> - <h, z> + (1/tau) psi(tau z),
// H = hess phi(y_k)^{-1} applied through linear solves, never inverted.
struct DualizedSubproblem {
    QuadraticModel model;
    RegularizerPtr reg;  // (1/tau) psi(tau .)
    Vector h;
};

DualizedSubproblem dualize_subproblem(const Vector& y_k, double tau_next, const DualProblem& dual,
                                      const Vector& xi0);

// Solves the dualized subproblem until the stationarity residual
// e = H z - h + xi, xi in d psi(tau z), satisfies ||e||_{y_k} <= delta.
struct DualizedSolve {
    Vector z;
    Vector e_tilde;
    double e_norm_yk = 0.0;
    long iterations = 0;
};

DualizedSolve solve_dualized(const DualProblem& dual, const Vector& y_k, double tau_next,
                             const Vector& xi0, double delta, long iter_cap = 20000);

// y_{k+1} = y_k - hess phi(y_k)^{-1}(grad phi_tau(y_k) + z_{k+1}) + e_tilde.
// xi0 defaults to the zero anchor subgradient.
Vector recover_dual_iterate(const Vector& z_next, const Vector& y_k, double tau_next,
                            const DualProblem& dual, const Vector& e_tilde,
                            const Vector* xi0 = nullptr);

// x = grad f*(-D'y).
Vector recover_primal(const Vector& y, const DualProblem& dual);

// ---------------- covariance estimation (matrix form) ----------------

// Elementwise l1 weight on the covariance subproblem variable; diagonal
// optionally excluded.
struct CovRegularizer {
    double rho = 0.0;          // 0 disables the regularizer
    bool include_diag = true;  // the model applies the weight to all entries

    double value(const Matrix& x) const;
    Matrix prox(const Matrix& x, double gamma) const;
};

struct CovSubproblem {
    Matrix A;    // Y_k + Sigma; the quadratic is X -> 0.5 tr((A X)^2)
    Matrix C;    // 2 Y_k - Xi_k + Sigma
    double tau = 1.0;
};

// Builds the dual covariance subproblem; multiplications only.
CovSubproblem covariance_subproblem(const Matrix& Y_k, const Matrix& sigma, const Matrix& xi0,
                                    double tau_next);

struct CovSubSolve {
    Matrix Z;
    double e_norm_bound = 0.0;  // certified bound on ||E||_{Y_k}
    long iterations = 0;
    bool certified = false;
};

// Restart-APG over symmetric matrices with operator X -> A X A; certificate
// bounds the stationarity residual in the Y_k-local norm through
// ||E||_F / lambda_min(A), all through matrix products and Lanczos.
CovSubSolve solve_covariance_subproblem(const CovSubproblem& sub, const CovRegularizer& reg,
                                        double delta, long iter_cap = 20000,
                                        const Matrix* warm = nullptr);

// Full-step target of the reconstruction, as a damped update:
// D_k = Y_k + Sigma - (Y_k+Sigma) Z (Y_k+Sigma) - Xi_k; Y_next = Y_k + alpha D_k.
Matrix covariance_step_direction(const Matrix& Y_k, const Matrix& sigma, const Matrix& xi_k,
                                 const Matrix& Z_next);

// lambda_tilde = sqrt(p - 2 tr(W) + tr(W^2)), W = Z (Y + Sigma).
double newton_decrement_cov(const Matrix& Z_next, const Matrix& Y_k, const Matrix& sigma);

// alpha = (lambda - delta0) / (lambda (1 + lambda - delta0)); full step when
// lambda <= delta0.
double damped_alpha(double lambda_tilde, double delta0_bar);

struct Alg2Settings {
    double tau0 = 1e-3;
    double eps = 1e-6;
    long max_outer = 400;
    long sub_cap = 20000;
    double accept_lambda = 1.0;   // tau linesearch acceptance on the decrement
    double full_step_lambda = 0.25;
    int lanczos_iters = 0;        // 0: dimension-capped default
    bool linesearch = true;       // practical tau update; off = plain barrier schedule
};

struct Alg2TraceRow {
    long k = 0;
    double tau = 0.0;
    double lambda = 0.0;
    double alpha = 0.0;
    long nnz = 0;
    double min_eig_margin = 0.0;
    long sub_iters = 0;
};

struct Alg2Result {
    Matrix Y;
    Matrix Z;
    std::vector<Alg2TraceRow> trace;
    bool converged = false;
    long iterations = 0;
    std::uint64_t loop_factorizations = 0;  // audited; must be zero
};

// Inexact primal-dual-primal homotopy proximal-Newton loop for
//   min_{X>0} tr(Sigma X) - logdet X + rho ||X||_1  (dual form iterated),
// inversion- and Cholesky-free between initialization and output.
Alg2Result run_algorithm2(const Matrix& sigma, const CovRegularizer& reg, double eps,
                          const Alg2Settings& settings, const Matrix* Y0 = nullptr);

} // namespace hpvm
