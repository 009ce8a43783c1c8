#pragma once

#include "hpvm/oracle.hpp"
#include "hpvm/regularizer.hpp"
#include "hpvm/report.hpp"
#include "hpvm/subsolver.hpp"

#include <functional>
#include <optional>

namespace hpvm {

enum class Regime { StronglyConvexSmooth, SelfConcordant, Barrier, Practical };
enum class MetricKind { Diagonal, QuasiNewton, Newton };

struct HomotopySettings {
    Regime regime = Regime::Practical;
    MetricKind metric = MetricKind::Newton;
    double beta = 0.05;
    double sigma = 0.0;        // <= 0: chosen per regime
    double tau0 = 0.0;         // <= 0: regime default
    double delta_rule = 1.0 / 113.0;
    double eps = 1e-6;
    long max_outer = 300;
    long max_stage1 = 500;
    long max_stage3 = 100;
    long subsolver_cap = 10000;
    // Practical mode: linesearch acceptance threshold on the inexact
    // decrement (defaults to beta) and initial increment scale.
    double accept_lambda = 0.0;
    bool stop_on_rgap = true;  // Stage 3 additionally polishes the KKT residual
    bool record_iterates = false;
};

// -------- parameterized gradients and tau schedules --------

// grad f(x) - (1/tau - 1) xi0, the smooth gradient of the tau-scaled
// optimality condition.
inline Vector shifted_gradient(const SmoothOracle& f, const Vector& x, double tau,
                               const Vector& xi0) {
    if (!(tau > 0.0 && tau <= 1.0))
        throw PreconditionError("shifted_gradient: tau must be in (0, 1]");
    Vector g = f.gradient(x);
    if (tau < 1.0) g -= (1.0 / tau - 1.0) * xi0;
    return g;
}

// sigma = (1 - tau0 + tau0 omega Gamma) / (1 - tau0 + tau0 Gamma), in
// (omega, 1) for omega in (0,1), Gamma > 0.
double sigma_strongly_convex(double tau0, double omega, double gamma_cap);

// tau_k = 1 - (1 - tau0) sigma^k / (tau0 + (1 - tau0) sigma^k).
double tau_schedule_strongly_convex(long k, double tau0, double sigma);

// Delta_k = (sqrt(sigma - 0.01)/10 - sqrt(sigma)^k/18) sqrt(sigma)^k;
// requires sigma > 0.318642 so Delta_k > 0 for all k >= 0.
double delta_factor(double sigma, long k);

// tau_{k+1} = [1 + Delta tau / (2 L_g (1 + Delta) - Delta tau)] tau,
// clamped to 1. L_g is the Lipschitz constant of g w.r.t. the local norm.
double tau_next_sc(double tau_k, double delta_k, double L_g);

// tau_{k+1} = (1 + Delta / ((1 + Delta)(sqrt(nu_f) + c0bar))) tau, clamped.
double tau_next_barrier(double tau_k, double delta_k, double nu_f, double c0bar);

// Smallest grid point sigma in (0.318642, 1] satisfying the regime's
// feasibility inequality (grid step 1e-4); 1 is always feasible.
double sigma_feasible_sc(double tau0, double L_g);
double sigma_feasible_barrier(double tau0, double nu_f, double c0bar);

// -------- theorem constants --------

struct TheoremConstants {
    // strongly convex + smooth (linear-rate theorem)
    double omega = 0.0, m = 0.0, L = 0.0, C = 0.0, Gamma = 0.0, sigma = 0.0, C_hat = 0.0;
    // self-concordant / barrier theorems
    double C0_bar = 0.0, C0 = 0.0, c0_bar = 0.0, theta_f = 0.0, C1_tilde = 0.0, nu_f = 0.0;
    // initialization theorem
    double Theta = 0.0, M0 = 0.0, t0 = 0.0;
    long j_max = 0;

    // omega(t) = t - ln(1 + t)
    static double omega_of(double t) { return t - std::log1p(t); }
};

// Constants of the strongly convex + smooth theorem for metric bounds
// m I <= H <= L I; requires omega < 1.
TheoremConstants theorem_constants_strongly_convex(const SmoothOracle& f, const Regularizer& g,
                                                   const Vector& x0, const Vector& xi0,
                                                   double tau0, double m, double L);

// -------- metric selection --------

struct QuasiNewtonState {
    Matrix B;
    long since_reset = 0;
    bool initialized = false;
    Vector prev_x, prev_grad;
    long reset_period = 20;

    void reset_to_hessian_diag(const SmoothOracle& f, const Vector& x);
    // Powell-damped BFGS update from a step/gradient-difference pair.
    void update(const Vector& s, const Vector& y);
};

LocalMetric metric_select(const HomotopySettings& settings, const SmoothOracle& f,
                          const Vector& x, QuasiNewtonState* qn = nullptr);

// -------- one homotopy step --------

struct HomotopyState {
    long k = 0;
    Vector x;
    double tau = 0.0;
    Vector xi0;
    double lambda_est = 0.0;
    double delta_used = 0.0;
    SubsolveCertificate cert;
};

struct StepRejected : NumericError {
    explicit StepRejected(Vector point)
        : NumericError("homotopy step left the domain"), point(std::move(point)) {}
    Vector point;
};

// Performs the scaled-prox update at tau_next with metric H_k and target
// accuracy delta_k; records lambda_est = ||x_next - x||_{x} in the local
// norm of f at x. strict_delta selects throw-on-uncertified behavior.
HomotopyState hpvm_step(const HomotopyState& state, const SmoothOracle& f, const Regularizer& g,
                        const LocalMetric& H_k, double delta_k, double tau_next, long sub_cap,
                        bool strict_delta = false);

// -------- stage 1 --------

struct InitFailure : NumericError {
    using NumericError::NumericError;
};

// alpha_j = (zeta - delta) / ((1 + zeta - delta) zeta) of the damped scheme.
inline double damped_step_alpha(double zeta, double delta) {
    if (!(zeta > delta && delta >= 0.0))
        throw PreconditionError("damped_step_alpha: need zeta > delta >= 0");
    return (zeta - delta) / ((1.0 + zeta - delta) * zeta);
}

// t0 of the auxiliary t-path: shrinks below 1 only when the start residual
// is large in the local dual norm.
inline double stage1_t0(double local_dual_norm, double beta) {
    const double threshold = (1.0 + 2.0 * beta) / beta;
    return local_dual_norm > threshold
               ? 1.0 - beta / ((1.0 + 2.0 * beta) * local_dual_norm)
               : 1.0;
}

struct Stage1Result {
    Vector x0;
    long iterations = 0;
    double final_decrement = 0.0;
    TheoremConstants constants;  // Theta/M0/t0/j_max for the auxiliary scheme
};

// Damped-step proximal-Newton iterations at fixed tau0 from x_hat0, stopping
// at the decrement heuristic zeta <= 0.9 beta / (1 + 0.9 beta).
Stage1Result damped_step_init(const Vector& x_hat0, const Vector& xi_hat0, double tau0,
                              double beta, const SmoothOracle& f, const Regularizer& g,
                              long max_iters = 500, long sub_cap = 10000);

// tau0 choice when g is mu_g-strongly convex.
double tau0_strongly_convex_g(const Vector& x0, const Vector& xi0, double beta,
                              const SmoothOracle& f, const Regularizer& g);

// Auxiliary homotopy (t-path) initialization; requires f self-concordant and
// strongly convex.
Stage1Result auxiliary_homotopy_init(const Vector& x_hat0, double tau0, double beta,
                                     const SmoothOracle& f, const Regularizer& g,
                                     long sub_cap = 10000);

// -------- full three-stage driver --------

SolveReport run_homotopy(const HomotopySettings& settings, const SmoothOracle& f,
                         const Regularizer& g, const Vector& x_start);

} // namespace hpvm
