#include "hpvm/homotopy.hpp"

#include "hpvm/kkt.hpp"

#include <chrono>
#include <cmath>

namespace hpvm {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

constexpr double kSigmaFloor = 0.318642;  // below this Delta_0 <= 0

} // namespace

double sigma_strongly_convex(double tau0, double omega, double gamma_cap) {
    if (!(omega > 0.0 && omega < 1.0))
        throw PreconditionError("sigma_strongly_convex: omega must be in (0, 1)");
    if (!(gamma_cap > 0.0)) throw PreconditionError("sigma_strongly_convex: Gamma must be > 0");
    if (!(tau0 > 0.0 && tau0 < 1.0))
        throw PreconditionError("sigma_strongly_convex: tau0 must be in (0, 1)");
    return (1.0 - tau0 + tau0 * omega * gamma_cap) / (1.0 - tau0 + tau0 * gamma_cap);
}

double tau_schedule_strongly_convex(long k, double tau0, double sigma) {
    if (!(sigma > 0.0 && sigma < 1.0))
        throw PreconditionError("tau_schedule: sigma must be in (0, 1)");
    if (!(tau0 > 0.0 && tau0 < 1.0)) throw PreconditionError("tau_schedule: tau0 must be in (0, 1)");
    const double sk = std::pow(sigma, double(k));
    return 1.0 - (1.0 - tau0) * sk / (tau0 + (1.0 - tau0) * sk);
}

double delta_factor(double sigma, long k) {
    if (!(sigma > kSigmaFloor))
        throw PreconditionError("delta_factor: sigma must exceed 0.318642");
    const double rk = std::pow(std::sqrt(sigma), double(k));
    return (0.1 * std::sqrt(sigma - 0.01) - rk / 18.0) * rk;
}

double tau_next_sc(double tau_k, double delta_k, double L_g) {
    if (!(tau_k > 0.0 && tau_k < 1.0)) throw PreconditionError("tau_next_sc: tau_k must be in (0,1)");
    if (delta_k < 0.0) throw PreconditionError("tau_next_sc: Delta_k must be >= 0");
    if (!(L_g > 0.0) || !std::isfinite(L_g))
        throw PreconditionError("tau_next_sc: L_g must be positive and finite");
    const double denom = 2.0 * L_g * (1.0 + delta_k) - delta_k * tau_k;
    if (!(denom > 0.0)) throw PreconditionError("tau_next_sc: nonpositive denominator");
    return std::min(1.0, (1.0 + delta_k * tau_k / denom) * tau_k);
}

double tau_next_barrier(double tau_k, double delta_k, double nu_f, double c0bar) {
    if (!(tau_k > 0.0 && tau_k < 1.0))
        throw PreconditionError("tau_next_barrier: tau_k must be in (0,1)");
    if (!(nu_f >= 1.0)) throw PreconditionError("tau_next_barrier: nu_f must be >= 1");
    if (c0bar < 0.0) throw PreconditionError("tau_next_barrier: c0bar must be >= 0");
    const double mult = 1.0 + delta_k / ((1.0 + delta_k) * (std::sqrt(nu_f) + c0bar));
    return std::min(1.0, mult * tau_k);
}

namespace {

// Grid scan over (0.318642, 1], step 1e-4, returning the smallest sigma for
// which feasible(sigma) holds; sigma = 1 is always feasible.
template <typename Feasible>
double sigma_grid(Feasible feasible) {
    const double step = 1e-4;
    for (double sigma = kSigmaFloor + step; sigma < 1.0; sigma += step) {
        if (feasible(sigma)) return sigma;
    }
    return 1.0;
}

} // namespace

double sigma_feasible_sc(double tau0, double L_g) {
    if (!(tau0 > 0.0 && tau0 < 1.0))
        throw PreconditionError("sigma_feasible_sc: tau0 must be in (0,1)");
    return sigma_grid([&](double sigma) {
        const double rhs = 0.1 * std::sqrt(sigma - 0.01) - 1.0 / 18.0;
        if (!(rhs > 0.0)) return false;
        const double a = 2.0 * L_g * (1.0 - tau0) * (1.0 - std::sqrt(sigma));
        const double denom = tau0 - a;
        if (!(denom > 0.0)) return false;
        return a / denom <= rhs;
    });
}

double sigma_feasible_barrier(double tau0, double nu_f, double c0bar) {
    if (!(tau0 > 0.0 && tau0 < 1.0))
        throw PreconditionError("sigma_feasible_barrier: tau0 must be in (0,1)");
    return sigma_grid([&](double sigma) {
        const double c0 = 0.1 * std::sqrt(sigma - 0.01) - 1.0 / 18.0;
        if (!(c0 > 0.0)) return false;
        const double t = 1.0 - tau0 * c0 / ((1.0 - tau0) * (1.0 + c0) * (std::sqrt(nu_f) + c0bar));
        return sigma >= t * t;
    });
}

TheoremConstants theorem_constants_strongly_convex(const SmoothOracle& f, const Regularizer& g,
                                                   const Vector& x0, const Vector& xi0,
                                                   double tau0, double m, double L) {
    const double mu = f.mu();
    const double lf = f.lip();
    if (!(mu > 0.0) || !std::isfinite(lf))
        throw PreconditionError("theorem constants: need mu_f > 0 and finite L_f");
    TheoremConstants c;
    c.m = m;
    c.L = L;
    const double inner = (L - 2.0 * mu) * m + lf * lf;
    if (!(inner >= 0.0) || !(std::sqrt(inner) / m < 1.0))
        throw PreconditionError("theorem constants: omega >= 1 for these metric bounds");
    c.omega = std::sqrt(inner) / m;
    const double resid = (f.gradient(x0) + xi0).norm();
    c.C = resid / mu;
    const double lg = g.lipschitz(x0.size());
    if (!std::isfinite(lg)) throw PreconditionError("theorem constants: g must be Lipschitz");
    c.Gamma = resid / (c.omega * (lg + xi0.norm()));
    c.sigma = sigma_strongly_convex(tau0, c.omega, c.Gamma);
    c.C_hat = c.C + (1.0 - tau0) * c.omega * (lg + xi0.norm()) / (tau0 * tau0 * tau0 * mu);
    return c;
}

void QuasiNewtonState::reset_to_hessian_diag(const SmoothOracle& f, const Vector& x) {
    Vector d;
    if (f.has_dense_hessian()) {
        d = f.hessian(x).diagonal();
    } else {
        // fall back to the quadratic form against coordinate directions
        d.resize(x.size());
        Vector e = Vector::Zero(x.size());
        for (Index i = 0; i < x.size(); ++i) {
            e[i] = 1.0;
            d[i] = f.hessian_quadform(x, e);
            e[i] = 0.0;
        }
    }
    d = d.cwiseMax(1e-12);
    B = d.asDiagonal();
    since_reset = 0;
    initialized = true;
}

void QuasiNewtonState::update(const Vector& s, const Vector& y) {
    if (s.norm() < 1e-300) return;
    const Vector Bs = B * s;
    const double sBs = s.dot(Bs);
    const double sy = s.dot(y);
    if (!(sBs > 0.0)) return;
    Vector yt = y;
    double syt = sy;
    if (sy < 0.2 * sBs) {  // Powell damping keeps B positive definite
        const double theta = 0.8 * sBs / (sBs - sy);
        yt = theta * y + (1.0 - theta) * Bs;
        syt = s.dot(yt);
    }
    B += yt * yt.transpose() / syt - Bs * Bs.transpose() / sBs;
    ++since_reset;
}

LocalMetric metric_select(const HomotopySettings& settings, const SmoothOracle& f,
                          const Vector& x, QuasiNewtonState* qn) {
    switch (settings.metric) {
        case MetricKind::Diagonal: {
            const double mu = f.mu();
            const double lf = f.lip();
            if (!(mu > 0.0) || !std::isfinite(lf))
                throw PreconditionError("diagonal metric needs mu_f > 0 and finite L_f");
            return LocalMetric::scaled_identity(lf * lf / mu, f.dim());
        }
        case MetricKind::QuasiNewton: {
            if (qn == nullptr)
                throw PreconditionError("quasi-Newton metric requires persistent state");
            if (!qn->initialized || qn->since_reset >= qn->reset_period)
                qn->reset_to_hessian_diag(f, x);
            return LocalMetric::dense(qn->B);
        }
        case MetricKind::Newton: {
            if (!f.has_dense_hessian()) {
                LocalMetric m = LocalMetric::from_op(f.hessian_op(x), f.dim());
                if (f.has_hessian_diag()) m.set_precond_hint(f.hessian_diag(x));
                const SmoothOracle* fp = &f;
                Vector xc = x;
                m.set_submatrix_fn([fp, xc](const std::vector<Index>& idx) {
                    return fp->hessian_submatrix(xc, idx);
                });
                return m;
            }
            Matrix H = f.hessian(x);
            Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
            const double tr = H.trace();
            if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(tr, 0.0)) {
                H.diagonal().array() += 1e-12 * tr;  // near-singular Hessian
            }
            return LocalMetric::dense(std::move(H));
        }
    }
    throw PreconditionError("metric_select: unknown metric");
}

HomotopyState hpvm_step(const HomotopyState& state, const SmoothOracle& f, const Regularizer& g,
                        const LocalMetric& H_k, double delta_k, double tau_next, long sub_cap,
                        bool strict_delta) {
    if (!(tau_next > 0.0 && tau_next <= 1.0))
        throw PreconditionError("hpvm_step: tau_next must be in (0, 1]");

    QuadraticModel model;
    model.H = H_k;
    model.anchor = state.x;
    model.grad_anchor = shifted_gradient(f, state.x, tau_next, state.xi0);
    model.reg_weight = 1.0 / tau_next;

    SubsolveResult res = strict_delta
                             ? solve_scaled_prox(model, g, delta_k, sub_cap, &state.x)
                             : solve_scaled_prox_best(model, g, delta_k, sub_cap, &state.x);

    if (!f.domain_check(res.x)) throw StepRejected(res.x);

    HomotopyState next;
    next.k = state.k + 1;
    next.x = res.x;
    next.tau = tau_next;
    next.xi0 = state.xi0;
    const Vector dx = res.x - state.x;
    next.lambda_est = std::sqrt(std::max(f.hessian_quadform(state.x, dx), 0.0));
    next.delta_used = delta_k;
    next.cert = res.cert;
    return next;
}

Stage1Result damped_step_init(const Vector& x_hat0, const Vector& xi_hat0, double tau0,
                              double beta, const SmoothOracle& f, const Regularizer& g,
                              long max_iters, long sub_cap) {
    if (!(tau0 > 0.0 && tau0 < 1.0))
        throw PreconditionError("damped_step_init: tau0 must be in (0,1)");
    const double stop_zeta = 0.9 * beta / (1.0 + 0.9 * beta);

    Vector x = x_hat0;
    double zeta_prev = 1.0;
    Stage1Result out;
    for (long j = 0; j < max_iters; ++j) {
        QuadraticModel model;
        model.H = LocalMetric::dense(f.hessian(x));
        model.anchor = x;
        model.grad_anchor = shifted_gradient(f, x, tau0, xi_hat0);
        model.reg_weight = 1.0 / tau0;

        double delta_try = std::max(zeta_prev / 20.0, 1e-12);
        SubsolveResult res = solve_scaled_prox_best(model, g, delta_try, sub_cap);
        double zeta = model.H.norm(res.x - x);
        // enforce delta_hat <= zeta/10 a posteriori
        for (int retry = 0; retry < 8 && res.cert.delta_achieved > zeta / 10.0 && zeta > 0.0;
             ++retry) {
            res = solve_scaled_prox_best(model, g, zeta / 20.0, sub_cap, &res.x);
            zeta = model.H.norm(res.x - x);
        }
        const double delta_hat = std::min(res.cert.delta_achieved, zeta / 10.0);
        out.iterations = j + 1;
        out.final_decrement = zeta;
        if (zeta <= stop_zeta) {
            out.x0 = res.x;  // terminal full step
            return out;
        }
        const double alpha = damped_step_alpha(zeta, delta_hat);
        x = (1.0 - alpha) * x + alpha * res.x;
        if (!f.domain_check(x)) throw InitFailure("damped_step_init: iterate left the domain");
        zeta_prev = zeta;
    }
    throw InitFailure("damped_step_init: iteration cap exceeded");
}

double tau0_strongly_convex_g(const Vector& x0, const Vector& xi0, double beta,
                              const SmoothOracle& f, const Regularizer& g) {
    const double mu_g = g.strong_convexity();
    if (!(mu_g > 0.0)) throw PreconditionError("tau0_strongly_convex_g: g is not strongly convex");
    const double resid = (f.gradient(x0) + xi0).norm();
    if (!(resid > 0.0)) throw PreconditionError("tau0_strongly_convex_g: x0 is already optimal");
    const double lmax = power_iteration_lmax(f.hessian_op(x0), f.dim());
    return beta * mu_g / ((1.0 + beta) * std::sqrt(lmax) * resid);
}

Stage1Result auxiliary_homotopy_init(const Vector& x_hat0, double tau0, double beta,
                                     const SmoothOracle& f, const Regularizer& g, long sub_cap) {
    if (!(f.mu() > 0.0))
        throw PreconditionError("auxiliary_homotopy_init: f must be strongly convex");
    if (!(beta > 0.0 && beta <= 0.05))
        throw PreconditionError("auxiliary_homotopy_init: beta must be in (0, 0.05]");

    const Vector xi0 = g.subgradient_select(x_hat0);
    const Vector resid = f.gradient(x_hat0) + xi0;

    TheoremConstants c;
    c.Theta = std::sqrt(99.0 * beta / 500.0) - 10.0 * beta / 9.0;
    c.M0 = resid.norm() / std::sqrt(f.mu());

    const LocalMetric H0 = LocalMetric::dense(f.hessian(x_hat0));
    const double local_dual = H0.dual_norm(resid);
    c.t0 = stage1_t0(local_dual, beta);
    c.j_max = long(std::floor(c.t0 * c.M0 * (1.0 + c.Theta) / c.Theta));

    const double step = c.Theta / (c.M0 * (1.0 + c.Theta));

    Stage1Result out;
    out.constants = c;
    Vector x = x_hat0;
    double lambda_proxy = beta;
    for (long j = 0;; ++j) {
        const double t = std::max(c.t0 - double(j + 1) * step, 0.0);
        QuadraticModel model;
        model.H = LocalMetric::dense(f.hessian(x));
        model.anchor = x;
        model.grad_anchor = shifted_gradient(f, x, tau0, xi0);
        model.grad_anchor -= t * resid;
        model.reg_weight = 1.0 / tau0;

        const double delta_j = std::max(lambda_proxy / 113.0, 1e-11);
        SubsolveResult res = solve_scaled_prox_best(model, g, delta_j, sub_cap, &x);
        lambda_proxy = model.H.norm(res.x - x);
        x = res.x;
        if (!f.domain_check(x))
            throw InitFailure("auxiliary_homotopy_init: iterate left the domain");
        out.iterations = j + 1;
        if (t == 0.0) break;
        if (j > c.j_max + 2)
            throw InitFailure("auxiliary_homotopy_init: exceeded the iteration budget");
    }
    out.x0 = x;
    out.final_decrement = lambda_proxy;
    return out;
}

namespace {

// Approximate analytic center of f by damped Newton with domain backtracking.
Vector analytic_center(const SmoothOracle& f, const Vector& start, int iters = 60) {
    Vector x = start;
    for (int i = 0; i < iters; ++i) {
        const LocalMetric H = LocalMetric::dense(f.hessian(x));
        const Vector grad = f.gradient(x);
        const Vector dir = -H.solve(grad);
        const double lambda = std::sqrt(std::max(grad.dot(-dir), 0.0));
        double alpha = lambda > 0.25 ? 1.0 / (1.0 + lambda) : 1.0;
        Vector trial = x + alpha * dir;
        int bt = 0;
        while (!f.domain_check(trial) && bt < 60) {
            alpha *= 0.5;
            trial = x + alpha * dir;
            ++bt;
        }
        if (bt >= 60) break;
        x = trial;
        if (lambda < 1e-10) break;
    }
    return x;
}

double barrier_c0bar(const SmoothOracle& f, const Vector& xi0, const Vector& x_start) {
    if (xi0.norm() == 0.0) return 0.0;
    const double nu = f.barrier_parameter().value_or(1.0);
    const double theta_f = nu + 2.0 * std::sqrt(nu);
    const Vector xf = analytic_center(f, x_start);
    const LocalMetric H = LocalMetric::dense(f.hessian(xf));
    return theta_f * H.dual_norm(xi0);
}

struct RunContext {
    const HomotopySettings* settings;
    const SmoothOracle* f_orig;
    const Regularizer* g_orig;
    const SmoothOracle* f;  // possibly standardized
    const Regularizer* g;
    double scale = 1.0;
    Clock::time_point t0;

    // (1/tau)-scaled composite value of the tau-problem; shares its
    // minimizer with F_tau and is cheap to evaluate.
    double tau_objective(const Vector& x, double tau, const Vector& xi0) const {
        double v = f->value(x) + g->value(x) / tau;
        if (tau < 1.0) v -= (1.0 / tau - 1.0) * xi0.dot(x);
        return v;
    }

    double objective(const Vector& x) const { return f_orig->value(x) + g_orig->value(x); }

    void push_row(SolveReport& rep, long k, double tau, const HomotopyState* st,
                  long sub_iters) const {
        IterateRow row;
        row.k = k;
        row.tau = tau;
        const Vector& x = st->x;
        row.obj = objective(x);
        row.lambda_est = st->lambda_est;
        row.kkt = kkt_residual(*f_orig, *g_orig, x);
        row.wall_ms = ms_since(t0);
        row.sub_iters = sub_iters;
        row.nnz = count_nonzeros(x);
        rep.rows.push_back(row);
        if (settings->record_iterates) {
            rep.iterates.push_back(x);
            rep.taus.push_back(tau);
            rep.deltas.push_back(st->delta_used);
        }
    }
};

// Full proximal-Newton step with an objective-monotonicity guard: when the
// full step increases the tau-objective, fall back to a damped step along
// the model direction (the model solution is a descent direction).
HomotopyState guarded_step(const RunContext& ctx, const HomotopyState& st, const LocalMetric& H,
                           double delta, double tau_next, long cap) {
    HomotopyState next = hpvm_step(st, *ctx.f, *ctx.g, H, delta, tau_next, cap);
    const double f_old = ctx.tau_objective(st.x, tau_next, st.xi0);
    double f_new = ctx.tau_objective(next.x, tau_next, st.xi0);
    if (f_new <= f_old + 1e-12 * std::abs(f_old) || !(next.lambda_est > 0.0)) return next;

    const double zeta = next.lambda_est;
    double alpha = damped_step_alpha(zeta, std::min(next.delta_used, 0.5 * zeta));
    for (int bt = 0; bt < 10; ++bt) {
        Vector x_d = st.x + alpha * (next.x - st.x);
        if (ctx.f->domain_check(x_d) && ctx.g->in_domain(x_d)) {
            f_new = ctx.tau_objective(x_d, tau_next, st.xi0);
            if (f_new <= f_old + 1e-12 * std::abs(f_old)) {
                next.x = std::move(x_d);
                next.lambda_est = alpha * zeta;
                return next;
            }
        }
        alpha *= 0.5;
    }
    throw StepRejected(next.x);
}

void finalize(SolveReport& rep, const RunContext& ctx, const HomotopyState& st,
              ExitStatus status, const std::string& msg = "") {
    rep.x = st.x;
    rep.iterations = long(rep.rows.size());
    rep.total_ms = ms_since(ctx.t0);
    rep.final_obj = ctx.objective(st.x);
    rep.final_rgap = relative_gap(*ctx.f_orig, *ctx.g_orig, st.x);
    rep.status = status;
    rep.message = msg;
}

// Stage 3: fixed tau, full proximal-Newton refinement.
void stage3(RunContext& ctx, SolveReport& rep, HomotopyState& st, QuasiNewtonState* qn) {
    const HomotopySettings& s = *ctx.settings;
    const double sqrt_scale = std::sqrt(ctx.scale);
    const double delta_floor = 0.1 * s.eps;
    double lambda_prev = std::max(st.lambda_est, s.beta);
    Vector prev_grad;
    auto done = [&](bool stepped) {
        const double rgap = s.stop_on_rgap ? relative_gap(*ctx.f_orig, *ctx.g_orig, st.x) : 0.0;
        if (rgap <= 1e-2 * s.eps && stepped) return true;  // KKT already dominates
        const bool lambda_ok = stepped && st.lambda_est / sqrt_scale <= s.eps;
        return lambda_ok && rgap <= s.eps;
    };
    for (long j = 0; j < s.max_stage3; ++j) {
        if (done(j > 0)) {
            finalize(rep, ctx, st, ExitStatus::Converged);
            return;
        }
        const LocalMetric H = metric_select(s, *ctx.f, st.x, qn);
        const double delta = std::max(s.delta_rule * lambda_prev, delta_floor);
        if (qn) prev_grad = ctx.f->gradient(st.x);
        HomotopyState next;
        try {
            next = guarded_step(ctx, st, H, delta, st.tau, s.subsolver_cap);
        } catch (const StepRejected&) {
            finalize(rep, ctx, st, ExitStatus::Failed, "stage 3 step left the domain");
            return;
        }
        if (qn) qn->update(next.x - st.x, ctx.f->gradient(next.x) - prev_grad);
        lambda_prev = std::max(next.lambda_est, delta_floor);
        st = next;
        ctx.push_row(rep, long(rep.rows.size()), st.tau, &st, st.cert.iterations);
    }
    finalize(rep, ctx, st, done(true) ? ExitStatus::Converged : ExitStatus::IterationCap);
}

void run_regime_schedule(RunContext& ctx, SolveReport& rep, HomotopyState st,
                         QuasiNewtonState* qn) {
    const HomotopySettings& s = *ctx.settings;
    const Regime regime = s.regime;
    const double eps = s.eps;

    double sigma = s.sigma;
    double L_g_local = kInf;
    double nu = 0.0, c0bar = 0.0;
    if (regime == Regime::SelfConcordant) {
        const double lg2 = ctx.g->lipschitz(ctx.f->dim());
        if (std::isfinite(lg2) && ctx.f->mu() > 0.0) L_g_local = lg2 / std::sqrt(ctx.f->mu());
        if (!std::isfinite(L_g_local))
            throw PreconditionError(
                "self-concordant regime needs a Lipschitz regularizer and mu_f > 0");
        if (sigma <= 0.0) sigma = sigma_feasible_sc(st.tau, L_g_local);
    } else if (regime == Regime::Barrier) {
        nu = ctx.f->barrier_parameter().value_or(0.0);
        if (!(nu >= 1.0)) throw PreconditionError("barrier regime needs a barrier oracle");
        c0bar = barrier_c0bar(*ctx.f, st.xi0, st.x);
        if (sigma <= 0.0) sigma = sigma_feasible_barrier(st.tau, nu, c0bar);
    }

    const double delta_floor = 0.1 * eps;
    double lambda_prev = s.beta;
    for (long k = 0; k < s.max_outer; ++k) {
        if (st.tau >= 1.0) break;
        const double dk = delta_factor(sigma, k);
        double tau_next = regime == Regime::SelfConcordant
                              ? tau_next_sc(st.tau, dk, L_g_local)
                              : tau_next_barrier(st.tau, dk, nu, c0bar);
        if (1.0 - tau_next <= eps) tau_next = 1.0;
        const LocalMetric H = metric_select(s, *ctx.f, st.x, qn);
        const double delta = std::max(s.delta_rule * lambda_prev, delta_floor);
        Vector prev_grad;
        if (qn) prev_grad = ctx.f->gradient(st.x);
        HomotopyState next = hpvm_step(st, *ctx.f, *ctx.g, H, delta, tau_next, s.subsolver_cap);
        if (qn) qn->update(next.x - st.x, ctx.f->gradient(next.x) - prev_grad);
        lambda_prev = std::max(next.lambda_est, delta_floor);
        st = next;
        ctx.push_row(rep, long(rep.rows.size()), st.tau, &st, st.cert.iterations);
    }
    stage3(ctx, rep, st, qn);
}

void run_practical(RunContext& ctx, SolveReport& rep, HomotopyState st, QuasiNewtonState* qn) {
    const HomotopySettings& s = *ctx.settings;
    // Jumps are accepted while the decrement stays inside the damped-Newton
    // region; in-place refinement repairs it below the repair level before
    // the next jump.
    const double accept = s.accept_lambda > 0.0 ? s.accept_lambda : 0.8;
    const double repair = std::min(0.3, accept);
    const double delta_floor = 0.1 * s.eps;

    // Longer-step linesearch in u = tau/(1-tau) space; u-multiplicative
    // candidates reach tau ~ 1 in a logarithmic number of accepted jumps.
    auto tau_candidate = [](double tau, double sc) {
        const double u = tau / (1.0 - tau);
        const double u_next = u * (1.0 + 0.2 * sc);
        return u_next / (1.0 + u_next);
    };

    double lambda_prev = s.beta;
    double scale = 1.0;
    Vector prev_grad;

    auto take_step = [&](double tau_cand, long cap) {
        const LocalMetric H = metric_select(s, *ctx.f, st.x, qn);
        const double delta = std::max(s.delta_rule * lambda_prev, delta_floor);
        if (qn) prev_grad = ctx.f->gradient(st.x);
        HomotopyState next = guarded_step(ctx, st, H, delta, tau_cand, cap);
        if (qn) qn->update(next.x - st.x, ctx.f->gradient(next.x) - prev_grad);
        return next;
    };
    // crude settling steps need no tight subsolves
    const long settle_cap = std::min<long>(s.subsolver_cap, 3000);

    // settle at tau0 first (cheap stand-in for Stage 1)
    {
        HomotopyState settled = take_step(st.tau, settle_cap);
        lambda_prev = std::max(settled.lambda_est, delta_floor);
        st = settled;
        ctx.push_row(rep, 0, st.tau, &st, st.cert.iterations);
    }

    for (long k = 1; k < s.max_outer; ++k) {
        if (st.tau >= 1.0) break;

        if (lambda_prev > repair) {
            // not yet settled at the current tau: refine in place
            HomotopyState next = take_step(st.tau, settle_cap);
            lambda_prev = std::max(next.lambda_est, delta_floor);
            st = next;
            ctx.push_row(rep, long(rep.rows.size()), st.tau, &st, st.cert.iterations);
            continue;
        }

        double tau_cand = std::min(1.0, tau_candidate(st.tau, scale));
        if (1.0 - tau_cand <= s.eps) tau_cand = 1.0;
        if (tau_cand - st.tau < 1e-16 * std::max(st.tau, 1.0)) break;  // saturation

        long sub_iters = 0;
        try {
            HomotopyState next = take_step(tau_cand, s.subsolver_cap);
            sub_iters = next.cert.iterations;
            lambda_prev = std::max(next.lambda_est, delta_floor);
            // guarded steps always advance; lambda only modulates the scale
            if (next.lambda_est <= accept)
                scale = std::min(scale * (next.lambda_est <= 0.1 * accept ? 8.0 : 4.0), 1e12);
            else
                scale = std::max(scale / 2.0, 1e-6);
            st = next;
        } catch (const StepRejected&) {
            scale = std::max(scale / 2.0, 1e-6);
        }
        ctx.push_row(rep, long(rep.rows.size()), st.tau, &st, sub_iters);
    }
    stage3(ctx, rep, st, qn);
}

} // namespace

SolveReport run_homotopy(const HomotopySettings& settings, const SmoothOracle& f,
                         const Regularizer& g, const Vector& x_start) {
    RunContext ctx;
    ctx.settings = &settings;
    ctx.f_orig = &f;
    ctx.g_orig = &g;
    ctx.t0 = Clock::now();

    // Standardize generalized self-concordant models so the beta/delta
    // thresholds of the theory apply (iterates are invariant, thresholds are
    // stated in standard-self-concordance units).
    std::shared_ptr<SmoothOracle> scaled_f;
    std::shared_ptr<Regularizer> scaled_g;
    ctx.f = &f;
    ctx.g = &g;
    if (settings.regime == Regime::SelfConcordant || settings.regime == Regime::Barrier) {
        const double m_hat = f.self_concordance().value_or(2.0);
        const double c = standardize_scale(m_hat);
        if (c != 1.0) {
            auto borrow_f = std::shared_ptr<const SmoothOracle>(std::shared_ptr<void>(), &f);
            auto borrow_g = std::shared_ptr<const Regularizer>(std::shared_ptr<void>(), &g);
            scaled_f = std::make_shared<ScaledOracle>(borrow_f, c);
            scaled_g = std::make_shared<ScaledRegularizer>(borrow_g, c);
            ctx.f = scaled_f.get();
            ctx.g = scaled_g.get();
            ctx.scale = c;
        }
    }

    SolveReport rep;
    HomotopyState st;
    st.x = x_start;
    st.xi0 = ctx.g->subgradient_select(x_start);
    if (!ctx.f->domain_check(x_start) || !ctx.g->in_domain(x_start))
        throw DomainError("run_homotopy: start point outside dom F");

    QuasiNewtonState qn_state;
    QuasiNewtonState* qn = settings.metric == MetricKind::QuasiNewton ? &qn_state : nullptr;

    try {
        switch (settings.regime) {
            case Regime::StronglyConvexSmooth: {
                const double tau0 = settings.tau0 > 0.0 ? settings.tau0 : 0.5;
                st.tau = tau0;
                HomotopySettings local = settings;
                local.metric = MetricKind::Diagonal;
                RunContext lctx = ctx;
                lctx.settings = &local;
                const double mu = ctx.f->mu(), lf = ctx.f->lip();
                if (!(mu > 0.0) || !std::isfinite(lf))
                    throw PreconditionError("strongly convex regime needs mu_f > 0, finite L_f");
                const double mL = lf * lf / mu;
                double sigma = settings.sigma;
                if (sigma <= 0.0) {
                    const TheoremConstants c = theorem_constants_strongly_convex(
                        *ctx.f, *ctx.g, x_start, st.xi0, tau0, mL, mL);
                    sigma = c.sigma;
                }
                double lambda_prev = settings.beta;
                for (long k = 1; k < settings.max_outer; ++k) {
                    double tau_next = tau_schedule_strongly_convex(k, tau0, sigma);
                    if (1.0 - tau_next <= settings.eps) tau_next = 1.0;
                    const LocalMetric H = metric_select(local, *ctx.f, st.x, nullptr);
                    HomotopyState next = hpvm_step(st, *ctx.f, *ctx.g, H,
                                                   std::max(settings.delta_rule * lambda_prev,
                                                            0.1 * settings.eps),
                                                   tau_next, settings.subsolver_cap);
                    lambda_prev = std::max(next.lambda_est, 0.1 * settings.eps);
                    st = next;
                    lctx.push_row(rep, long(rep.rows.size()), st.tau, &st, st.cert.iterations);
                    if (st.tau >= 1.0) break;
                }
                stage3(lctx, rep, st, nullptr);
                rep.x = st.x;
                return rep;
            }
            case Regime::SelfConcordant:
            case Regime::Barrier: {
                const double tau0 = settings.tau0 > 0.0 ? settings.tau0 : 0.5;
                st.tau = tau0;
                if (ctx.g->strongly_convex()) {
                    st.tau = std::min(
                        tau0_strongly_convex_g(st.x, st.xi0, settings.beta, *ctx.f, *ctx.g), 0.5);
                } else if (settings.regime == Regime::SelfConcordant && ctx.f->mu() > 0.0) {
                    Stage1Result s1 = auxiliary_homotopy_init(st.x, st.tau, settings.beta, *ctx.f,
                                                              *ctx.g, settings.subsolver_cap);
                    st.x = s1.x0;
                } else {
                    Stage1Result s1 =
                        damped_step_init(st.x, st.xi0, st.tau, settings.beta, *ctx.f, *ctx.g,
                                         settings.max_stage1, settings.subsolver_cap);
                    st.x = s1.x0;
                }
                run_regime_schedule(ctx, rep, st, qn);
                return rep;
            }
            case Regime::Practical: {
                st.tau = settings.tau0 > 0.0 ? settings.tau0 : 1e-3;
                run_practical(ctx, rep, st, qn);
                return rep;
            }
        }
    } catch (const UnconvergedSubproblem& e) {
        st.x = e.best_point;
        finalize(rep, ctx, st, ExitStatus::Failed, e.what());
        return rep;
    }
    throw PreconditionError("run_homotopy: unknown regime");
}

} // namespace hpvm
