#include "hpvm/pdp.hpp"

#include "hpvm/eig.hpp"
#include "hpvm/homotopy.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace hpvm {

DualProblem build_dual(std::shared_ptr<const SmoothOracle> oracle, Matrix D, RegularizerPtr psi) {
    if (!oracle->has_conjugate())
        throw PreconditionError("build_dual: oracle has no analytic conjugate");
    if (D.rows() > D.cols()) throw PreconditionError("build_dual: D must have n <= p");
    Eigen::FullPivLU<Matrix> lu(D);
    if (lu.rank() < D.rows()) throw PreconditionError("build_dual: D must have full row rank");
    DualProblem dual;
    dual.primal = std::move(oracle);
    dual.D = std::move(D);
    dual.psi_conj = psi->conjugate();
    dual.psi = std::move(psi);
    return dual;
}

DualizedSubproblem dualize_subproblem(const Vector& y_k, double tau_next, const DualProblem& dual,
                                      const Vector& xi0) {
    const Matrix hess = dual.phi_hessian(y_k);
    auto llt = std::make_shared<Eigen::LLT<Matrix>>(hess);
    audit::count_cholesky();
    if (llt->info() != Eigen::Success)
        throw NumericError("dualize_subproblem: hess phi is rank deficient");

    const Vector grad_tau = dual.phi_shifted_gradient(y_k, tau_next, xi0);
    const Vector h = y_k - llt->solve(grad_tau);

    DualizedSubproblem out;
    out.h = h;
    out.model.H = LocalMetric::from_op([llt](const Vector& v) { return Vector(llt->solve(v)); },
                                       y_k.size());
    out.model.anchor = Vector::Zero(y_k.size());
    out.model.grad_anchor = -h;
    out.model.reg_weight = 1.0;  // the tau weight lives inside the regularizer
    out.reg = std::make_shared<TauScaledRegularizer>(dual.psi, tau_next);
    return out;
}

DualizedSolve solve_dualized(const DualProblem& dual, const Vector& y_k, double tau_next,
                             const Vector& xi0, double delta, long iter_cap) {
    DualizedSubproblem sub = dualize_subproblem(y_k, tau_next, dual, xi0);
    const Matrix hess_phi = dual.phi_hessian(y_k);

    const double L = sub.model.H.lambda_max();
    const double step = 1.0 / L;

    Vector z = Vector::Zero(y_k.size());
    Vector zz = z;
    double t = 1.0;
    double fz = sub.model.objective(z, *sub.reg);

    DualizedSolve out;
    for (long it = 0; it < iter_cap; ++it) {
        // stationarity residual at the prox-step point
        const Vector grad_z = sub.model.smooth_gradient(z);
        const Vector zplus = sub.reg->prox(z - step * grad_z, step);
        const Vector e = sub.model.H.apply(zplus - z) - L * (zplus - z);
        const double e_norm = std::sqrt(std::max(e.dot(hess_phi * e), 0.0));
        out.iterations = it + 1;
        if (e_norm <= delta) {
            out.z = zplus;
            out.e_tilde = e;
            out.e_norm_yk = e_norm;
            return out;
        }

        // APG sweep with function-value restart
        const Vector grad_y = sub.model.smooth_gradient(zz);
        Vector u = sub.reg->prox(zz - step * grad_y, step);
        double fu = sub.model.objective(u, *sub.reg);
        if (fu > fz) {
            zz = z;
            t = 1.0;
            u = sub.reg->prox(z - step * sub.model.smooth_gradient(z), step);
            fu = sub.model.objective(u, *sub.reg);
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        zz = u + ((t - 1.0) / t_next) * (u - z);
        t = t_next;
        z = u;
        fz = fu;
    }
    throw UnconvergedSubproblem(z, SubsolveCertificate{out.iterations, kInf, kInf});
}

Vector recover_dual_iterate(const Vector& z_next, const Vector& y_k, double tau_next,
                            const DualProblem& dual, const Vector& e_tilde, const Vector* xi0) {
    const Matrix hess = dual.phi_hessian(y_k);
    Eigen::LLT<Matrix> llt(hess);
    audit::count_cholesky();
    if (llt.info() != Eigen::Success)
        throw NumericError("recover_dual_iterate: hess phi is rank deficient");
    const Vector shift = xi0 ? *xi0 : Vector(Vector::Zero(y_k.size()));
    const Vector grad_tau = dual.phi_shifted_gradient(y_k, tau_next, shift);
    return y_k - llt.solve(Vector(grad_tau + z_next)) + e_tilde;
}

Vector recover_primal(const Vector& y, const DualProblem& dual) {
    const Vector w = -dual.D.transpose() * y;
    return dual.primal->conj_gradient(w);
}

// ---------------- covariance path ----------------

double CovRegularizer::value(const Matrix& x) const {
    if (rho <= 0.0) return 0.0;
    double s = x.cwiseAbs().sum();
    if (!include_diag) s -= x.diagonal().cwiseAbs().sum();
    return rho * s;
}

Matrix CovRegularizer::prox(const Matrix& x, double gamma) const {
    if (rho <= 0.0) return x;
    const double thr = gamma * rho;
    Matrix u = x.unaryExpr([thr](double v) {
        const double a = std::abs(v) - thr;
        return a > 0.0 ? (v > 0.0 ? a : -a) : 0.0;
    });
    if (!include_diag) u.diagonal() = x.diagonal();
    return u;
}

CovSubproblem covariance_subproblem(const Matrix& Y_k, const Matrix& sigma, const Matrix& xi0,
                                    double tau_next) {
    if (!(tau_next > 0.0 && tau_next <= 1.0))
        throw PreconditionError("covariance_subproblem: tau must be in (0, 1]");
    CovSubproblem sub;
    sub.A = Y_k + sigma;
    const double shift = 1.0 / tau_next - 1.0;
    sub.C = 2.0 * Y_k - shift * xi0 + sigma;
    sub.tau = tau_next;
    return sub;
}

namespace {

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

} // namespace

CovSubSolve solve_covariance_subproblem(const CovSubproblem& sub, const CovRegularizer& reg,
                                        double delta, long iter_cap, const Matrix* warm) {
    const Index p = sub.A.rows();
    // extreme eigenvalues of A by Lanczos; products only
    const auto ext = lanczos_extremes(
        [&](const Vector& v) { return Vector(sub.A * v); }, p, int(std::min<Index>(p, 160)));
    const double a_max = 1.01 * std::max(ext.lmax, 1e-300);
    const double a_min = 0.9 * std::max(ext.lmin, 0.0);
    const double L = a_max * a_max;
    const double step = 1.0 / L;
    if (!(a_min > 0.0))
        throw NumericError("covariance subproblem: A must be positive definite");

    // The regularizer weight of the dualized subproblem is invariant for the
    // positively homogeneous l1 term: (1/tau) psi(tau X) = psi(X).
    auto smooth_grad = [&](const Matrix& X) { return sym(sub.A * X * sub.A) - sub.C; };
    auto objective = [&](const Matrix& X) {
        const Matrix AX = sub.A * X;
        return 0.5 * (AX * AX).trace() - (sub.C.cwiseProduct(X)).sum() + reg.value(X);
    };

    Matrix X = warm ? sym(*warm) : Matrix::Zero(p, p);
    Matrix Ymom = X;
    double t = 1.0;
    double fx = objective(X);

    CovSubSolve out;
    for (long it = 0; it < iter_cap; ++it) {
        const Matrix grad_x = smooth_grad(X);
        const Matrix Xplus = reg.prox(X - step * grad_x, step);
        const Matrix E = sym(sub.A * (Xplus - X) * sub.A) - L * (Xplus - X);
        const double bound = E.norm() / a_min;
        if (getenv("HPVM_DEBUG") && it < 2)
            fprintf(stderr,
                    "it=%ld bound=%.3e fx=%.6e L=%.3e amin=%.3e |X|=%.3e |Xp|=%.3e |gx|=%.3e\n",
                    it, bound, fx, L, a_min, X.norm(), Xplus.norm(), grad_x.norm());
        out.iterations = it + 1;
        if (bound <= delta) {
            out.Z = Xplus;
            out.e_norm_bound = bound;
            out.certified = true;
            return out;
        }

        const Matrix grad_y = smooth_grad(Ymom);
        Matrix U = reg.prox(Ymom - step * grad_y, step);
        double fu = objective(U);
        if (fu > fx) {
            Ymom = X;
            t = 1.0;
            U = reg.prox(X - step * grad_x, step);
            fu = objective(U);
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        Ymom = U + ((t - 1.0) / t_next) * (U - X);
        t = t_next;
        X = U;
        fx = fu;
    }
    out.Z = X;
    out.e_norm_bound = kInf;
    out.certified = false;
    return out;
}

Matrix covariance_step_direction(const Matrix& Y_k, const Matrix& sigma, const Matrix& xi_k,
                                 const Matrix& Z_next) {
    const Matrix A = Y_k + sigma;
    return A - A * Z_next * A - xi_k;
}

double newton_decrement_cov(const Matrix& Z_next, const Matrix& Y_k, const Matrix& sigma) {
    const Index p = Y_k.rows();
    const Matrix W = Z_next * (Y_k + sigma);
    const double radicand = double(p) - 2.0 * W.trace() + (W * W).trace();
    if (radicand < -1e-12) throw NumericError("newton_decrement_cov: negative radicand");
    return std::sqrt(std::max(radicand, 0.0));
}

double damped_alpha(double lambda_tilde, double delta0_bar) {
    if (delta0_bar < 0.0) throw PreconditionError("damped_alpha: delta0 must be >= 0");
    if (lambda_tilde <= delta0_bar) return 1.0;
    return (lambda_tilde - delta0_bar) / (lambda_tilde * (1.0 + lambda_tilde - delta0_bar));
}

namespace {

double min_eig_lanczos(const Matrix& S, int iters) {
    const auto ext = lanczos_extremes([&](const Vector& v) { return Vector(S * v); }, S.rows(),
                                      iters > 0 ? iters : int(std::min<Index>(S.rows(), 160)));
    return ext.lmin;
}

} // namespace

Alg2Result run_algorithm2(const Matrix& sigma, const CovRegularizer& reg, double eps,
                          const Alg2Settings& settings, const Matrix* Y0) {
    const Index p = sigma.rows();
    Alg2Result out;

    // Initialization (factorizations permitted here, not in the loop).
    Matrix Y;
    if (Y0) {
        Y = sym(*Y0);
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(sigma, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        Y = (0.1 + std::abs(lmin)) * Matrix::Identity(p, p);
    }
    const Matrix xi0 = Matrix::Zero(p, p);  // 0 is a valid conjugate subgradient anywhere

    const double delta0_bar = 0.1 * eps;
    const double nu = double(p);
    const double dconst = delta_factor(1.0, 0);

    audit::Scope loop_audit;

    double tau = settings.tau0;
    double scale = 1.0;
    Matrix Z = Matrix::Zero(p, p);
    Matrix warm = Z;
    double lambda = kInf;
    long rejects_in_row = 0;

    for (long k = 0; k < settings.max_outer; ++k) {
        // tau update: barrier rule, linesearch-scaled
        double tau_next = tau;
        if (tau < 1.0) {
            const double incr = tau_next_barrier(tau, dconst, nu, 0.0) - tau;
            tau_next = std::min(1.0, tau + (settings.linesearch ? scale : 1.0) * incr);
            if (1.0 - tau_next <= eps) tau_next = 1.0;
        }

        const double shift = 1.0 / tau_next - 1.0;
        const Matrix xi_k = shift * xi0;
        CovSubproblem sub = covariance_subproblem(Y, sigma, xi0, tau_next);
        CovSubSolve sol =
            solve_covariance_subproblem(sub, reg, delta0_bar, settings.sub_cap, &warm);
        const double lambda_k = newton_decrement_cov(sol.Z, Y, sigma);

        // linesearch acceptance on the decrement
        if (settings.linesearch && tau_next > tau && lambda_k > settings.accept_lambda &&
            rejects_in_row < 12) {
            scale = std::max(scale / 4.0, 1e-6);
            ++rejects_in_row;
            continue;
        }

        const Matrix Dk = covariance_step_direction(Y, sigma, xi_k, sol.Z);
        double alpha =
            lambda_k > settings.full_step_lambda ? damped_alpha(lambda_k, delta0_bar) : 1.0;

        // keep Y + Sigma positive definite; products-only check
        Matrix Y_next;
        double margin = 0.0;
        bool ok = false;
        for (int half = 0; half < 8; ++half) {
            Y_next = Y + alpha * Dk;
            margin = min_eig_lanczos(Y_next + sigma, settings.lanczos_iters);
            if (margin > 1e-12) {
                ok = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!ok) {
            if (settings.linesearch && scale > 1e-6) {
                scale = std::max(scale / 4.0, 1e-6);
                ++rejects_in_row;
                if (rejects_in_row >= 16)
                    throw NumericError("algorithm 2: step-rejected cascade exceeded the budget");
                continue;
            }
            throw NumericError("algorithm 2: cannot keep Y + Sigma positive definite");
        }
        rejects_in_row = 0;

        Y = sym(Y_next);
        Z = sol.Z;
        warm = Z;
        tau = tau_next;
        lambda = lambda_k;
        if (settings.linesearch) scale = std::min(scale * 2.0, 1e12);

        Alg2TraceRow row;
        row.k = k;
        row.tau = tau;
        row.lambda = lambda;
        row.alpha = alpha;
        long nnz = 0;
        for (Index i = 0; i < p * p; ++i)
            if (Z.data()[i] != 0.0) ++nnz;
        row.nnz = nnz;
        row.min_eig_margin = margin;
        row.sub_iters = sol.iterations;
        out.trace.push_back(row);

        if (lambda <= eps && 1.0 - tau <= eps) {
            out.converged = true;
            break;
        }
    }

    out.loop_factorizations = loop_audit.total_delta();
    if (out.loop_factorizations != 0)
        throw NumericError("algorithm 2: factorization performed inside the iteration loop");

    out.Y = Y;
    out.Z = Z;
    out.iterations = long(out.trace.size());
    return out;
}

} // namespace hpvm
