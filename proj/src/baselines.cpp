#include "hpvm/baselines.hpp"

#include "hpvm/kkt.hpp"
#include "hpvm/local_metric.hpp"
#include "hpvm/subsolver.hpp"

#include <chrono>
#include <cmath>

namespace hpvm {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void push_row(SolveReport& rep, Clock::time_point t0, long k, double obj, double lambda,
              double kkt, long sub_iters, const Vector& x) {
    IterateRow row;
    row.k = k;
    row.tau = 1.0;
    row.obj = obj;
    row.lambda_est = lambda;
    row.kkt = kkt;
    row.wall_ms = ms_since(t0);
    row.sub_iters = sub_iters;
    row.nnz = count_nonzeros(x);
    rep.rows.push_back(row);
}

void finish(SolveReport& rep, const SmoothOracle& f, const Regularizer& g, const Vector& x,
            Clock::time_point t0, ExitStatus status) {
    rep.x = x;
    rep.iterations = long(rep.rows.size());
    rep.total_ms = ms_since(t0);
    rep.final_obj = f.value(x) + g.value(x);
    rep.final_rgap = relative_gap(f, g, x);
    rep.status = status;
}

} // namespace

SolveReport prox_grad(const SmoothOracle& f, const Regularizer& g, const BaselineSettings& s,
                      const Vector& x0) {
    const double lf = f.lip();
    if (!std::isfinite(lf) || !(lf > 0.0))
        throw PreconditionError("prox_grad: finite L_f required");
    const auto t0 = Clock::now();
    SolveReport rep;
    Vector x = x0;
    for (long k = 0; k < s.max_iter; ++k) {
        const Vector grad = f.gradient(x);
        const Vector u = g.prox(x - grad / lf, 1.0 / lf);
        const double kkt = (x - u).norm() * lf / std::max(1.0, grad.norm());
        const double obj = f.value(x) + g.value(x);
        const double rgap = kkt / std::max(1.0, std::abs(obj));
        if (s.trace_every_iter || rgap <= s.eps)
            push_row(rep, t0, k, obj, (x - u).norm(), kkt, 0, x);
        if (rgap <= s.eps) {
            finish(rep, f, g, x, t0, ExitStatus::Converged);
            return rep;
        }
        x = u;
    }
    finish(rep, f, g, x, t0, ExitStatus::IterationCap);
    return rep;
}

SolveReport apg_ls_restart(const SmoothOracle& f, const Regularizer& g, const BaselineSettings& s,
                           const Vector& x0) {
    const auto t0 = Clock::now();
    SolveReport rep;
    Vector x = x0;
    Vector y = x0;
    double t = 1.0;
    double L = std::isfinite(f.lip()) ? f.lip() : 1.0;
    double fx = f.value(x);

    for (long k = 0; k < s.max_iter; ++k) {
        const double kkt = kkt_residual(f, g, x);
        const double obj = fx + g.value(x);
        const double rgap = kkt / std::max(1.0, std::abs(obj));
        if (s.trace_every_iter || rgap <= s.eps) push_row(rep, t0, k, obj, 0.0, kkt, 0, x);
        if (rgap <= s.eps) {
            finish(rep, f, g, x, t0, ExitStatus::Converged);
            return rep;
        }

        const double fy = f.value(y);
        const Vector grad_y = f.gradient(y);
        // backtracking: halve the step until the quadratic upper bound holds
        Vector u;
        double fu = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            u = g.prox(y - grad_y / L, 1.0 / L);
            bool ok = f.domain_check(u);
            if (ok) {
                fu = f.value(u);
                const Vector d = u - y;
                ok = fu <= fy + grad_y.dot(d) + 0.5 * L * d.squaredNorm() + 1e-14;
            }
            if (ok) break;
            L *= 2.0;
        }

        const double F_new = fu + g.value(u);
        const double F_old = fx + g.value(x);
        if (F_new > F_old) {  // function-value restart: drop momentum
            y = x;
            t = 1.0;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = u + ((t - 1.0) / t_next) * (u - x);
        if (!f.domain_check(y)) y = u;
        t = t_next;
        x = u;
        fx = fu;
    }
    finish(rep, f, g, x, t0, ExitStatus::IterationCap);
    return rep;
}

SolveReport damped_pn(const SmoothOracle& f, const Regularizer& g, const BaselineSettings& s,
                      const Vector& x0) {
    const auto t0 = Clock::now();
    SolveReport rep;
    Vector x = x0;
    double zeta_prev = 1.0;

    for (long k = 0; k < s.max_iter; ++k) {
        const double kkt = kkt_residual(f, g, x);
        const double obj = f.value(x) + g.value(x);
        const double rgap = kkt / std::max(1.0, std::abs(obj));

        QuadraticModel model;
        model.H = f.has_dense_hessian() ? LocalMetric::dense(f.hessian(x))
                                        : LocalMetric::from_op(f.hessian_op(x), f.dim());
        model.anchor = x;
        model.grad_anchor = f.gradient(x);
        model.reg_weight = 1.0;

        SubsolveResult res =
            solve_scaled_prox_best(model, g, std::max(zeta_prev / 20.0, 1e-12), s.sub_cap, &x);
        double zeta = model.H.norm(res.x - x);
        for (int retry = 0; retry < 6 && res.cert.delta_achieved > zeta / 10.0 && zeta > 0.0;
             ++retry) {
            res = solve_scaled_prox_best(model, g, zeta / 20.0, s.sub_cap, &res.x);
            zeta = model.H.norm(res.x - x);
        }
        push_row(rep, t0, k, obj, zeta, kkt, res.cert.iterations, x);
        if (rgap <= s.eps || zeta <= s.eps) {
            finish(rep, f, g, x, t0, ExitStatus::Converged);
            return rep;
        }

        const double delta_hat = std::min(res.cert.delta_achieved, zeta / 10.0);
        double alpha = zeta > s.full_step_zeta
                           ? (zeta - delta_hat) / ((1.0 + zeta - delta_hat) * zeta)
                           : 1.0;
        Vector trial = (1.0 - alpha) * x + alpha * res.x;
        int halves = 0;
        while (!f.domain_check(trial) && halves < 60) {
            alpha *= 0.5;
            trial = (1.0 - alpha) * x + alpha * res.x;
            ++halves;
        }
        if (halves >= 60) {
            finish(rep, f, g, x, t0, ExitStatus::Failed);
            return rep;
        }
        x = trial;
        zeta_prev = zeta;
    }
    finish(rep, f, g, x, t0, ExitStatus::IterationCap);
    return rep;
}

} // namespace hpvm
