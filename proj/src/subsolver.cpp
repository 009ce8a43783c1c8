#include "hpvm/subsolver.hpp"

#include "hpvm/eig.hpp"

#include <cmath>
#include <limits>

namespace hpvm {
namespace {

// Upper bound on P(xplus) - P(xbar) from a subgradient residual s of P at
// xplus: strong convexity gives ||s||^2/(2 mu); a bounded domain gives
// ||s|| * diam; indicators with a linear minimization oracle give the
// Frank-Wolfe gap directly.
double gap_upper_bound(const QuadraticModel& model, const Regularizer& g, const Vector& xplus,
                       const Vector& s_vec) {
    double bound = kInf;
    const double s_norm = s_vec.norm();
    const double mu = model.H.lambda_min();
    if (mu > 0.0) bound = std::min(bound, s_norm * s_norm / (2.0 * mu));
    const double diam = g.domain_diameter();
    if (std::isfinite(diam)) bound = std::min(bound, s_norm * diam);
    if (g.is_indicator() && g.has_linear_min()) {
        const Vector grad = model.smooth_gradient(xplus);
        const double fw = grad.dot(xplus) - g.linear_min(grad);
        bound = std::min(bound, fw);
    }
    return std::max(bound, 0.0);
}

} // namespace

Vector prox_grad_mapping(const QuadraticModel& model, const Regularizer& g, const Vector& x,
                         double step) {
    if (!(step > 0.0)) throw PreconditionError("prox_grad_mapping: step must be > 0");
    const Vector u = g.prox(x - step * model.smooth_gradient(x), step * model.reg_weight);
    return (x - u) / step;
}

SubsolveResult solve_scaled_prox_best(const QuadraticModel& model, const Regularizer& g,
                                      double delta, long iter_cap, const Vector* warm_start) {
    if (delta < 0.0) throw PreconditionError("solve_scaled_prox: delta must be >= 0");
    const double target = 0.5 * delta * delta;

    SubsolveResult out;

    // Scaled-identity metric: the model minimizer is a single prox step from
    // the anchor.
    if (model.H.is_scaled_identity()) {
        const double c = model.H.scalar();
        out.x = g.prox(model.anchor - model.grad_anchor / c, model.reg_weight / c);
        out.cert = {1, 0.0, 0.0};
        out.certified = true;
        return out;
    }

    const Index p = model.anchor.size();

    // Diagonal (Jacobi) preconditioning when the regularizer supports
    // weighted proxes and the Hessian diagonal is strongly nonuniform.
    bool precond = false;
    Vector dvec, gamma;
    double L = 0.0;
    if (model.H.has_precond_hint() && g.has_weighted_prox()) {
        Vector d = model.H.precond_hint();
        const double dmax = d.maxCoeff();
        if (dmax > 0.0) {
            d = d.cwiseMax(1e-12 * dmax);
            if (dmax / d.minCoeff() > 16.0) {
                precond = true;
                dvec = d;
                const Vector dis = d.cwiseSqrt().cwiseInverse();
                L = 1.02 * power_iteration_lmax(
                               [&](const Vector& v) {
                                   return Vector(
                                       dis.cwiseProduct(model.H.apply(dis.cwiseProduct(v))));
                               },
                               p, 1e-4, 200);
                L = std::max(L, 1e-300);
                gamma = (L * dvec).cwiseInverse();
            }
        }
    }
    if (!precond) L = std::max(model.H.lambda_max(), 1e-300);
    const double step = 1.0 / L;

    auto prox_from = [&](const Vector& z, const Vector& grad_z) {
        if (precond)
            return g.prox_weighted(z - gamma.cwiseProduct(grad_z),
                                   Vector(model.reg_weight * gamma));
        return g.prox(z - step * grad_z, step * model.reg_weight);
    };
    // subgradient residual of P at the prox point u stepped from z
    auto residual_at = [&](const Vector& u, const Vector& z) {
        if (precond) return Vector(model.H.apply(u - z) - L * dvec.cwiseProduct(u - z));
        return Vector(model.H.apply(u - z) - L * (u - z));
    };

    const long check_gap = p <= 512 ? 8 : 16;

    Vector x = warm_start ? *warm_start : model.anchor;
    if (!g.in_domain(x)) x = g.prox(x, 1.0);
    Vector y = x;
    double t = 1.0;
    double fx = model.objective(x, g);

    Vector x_best = x;
    double f_best = fx;

    double best_gap = kInf;
    Vector best_pt = x;

    // When prox steps shrink to the numerical floor the model is solved as
    // far as doubles allow; return the best certificate found. Stagnation of
    // the model objective with near-zero steps is treated the same way.
    const double floor_step = 1e-11;
    double stag_ref = kInf;
    int stag = 0;

    // Active-face polish: once the support of the best iterate is stable,
    // solve the dense face-restricted model (exact descent of the full
    // model) and re-certify in the full space.
    const bool can_restrict = model.H.has_submatrix() && g.coordinate_restrictable();
    const Index restrict_limit = std::min<Index>(p / 4, 600);
    std::vector<Index> last_support;
    bool restrict_tried = false;

    long it = 0;
    for (; it < iter_cap; ++it) {
        // certificate sweep from the best point so far (every iteration at
        // first, then backed off; certificates cost extra products)
        if (it < 32 || it % check_gap == 0) {
            const Vector grad_b = model.smooth_gradient(x_best);
            const Vector xplus = prox_from(x_best, grad_b);
            const double step_norm = (xplus - x_best).norm();
            const Vector s_vec = residual_at(xplus, x_best);
            const double gap = gap_upper_bound(model, g, xplus, s_vec);
            if (gap < best_gap) {
                best_gap = gap;
                best_pt = xplus;
            }
            const double f_plus = model.objective(xplus, g);
            if (f_plus < f_best) {
                f_best = f_plus;
                x_best = xplus;
            }
            if (best_gap <= target) {
                out.x = best_pt;
                out.cert = {it + 1, best_gap, std::sqrt(2.0 * best_gap)};
                out.certified = true;
                return out;
            }

            if (can_restrict && it >= 16) {
                std::vector<Index> support;
                for (Index i = 0; i < p; ++i)
                    if (x_best[i] != 0.0) support.push_back(i);
                if (support != last_support) {
                    last_support = support;
                    restrict_tried = false;
                } else if (!restrict_tried && !support.empty() &&
                           Index(support.size()) <= restrict_limit) {
                    restrict_tried = true;
                    QuadraticModel mr;
                    mr.H = LocalMetric::dense(model.H.submatrix(support));
                    mr.anchor.resize(Index(support.size()));
                    mr.grad_anchor.resize(Index(support.size()));
                    for (size_t a = 0; a < support.size(); ++a) {
                        mr.anchor[Index(a)] = x_best[support[a]];
                        mr.grad_anchor[Index(a)] = grad_b[support[a]];
                    }
                    mr.reg_weight = model.reg_weight;
                    SubsolveResult rres =
                        solve_scaled_prox_best(mr, g, 0.7 * delta, 30000, &mr.anchor);
                    Vector x_emb = Vector::Zero(p);
                    for (size_t a = 0; a < support.size(); ++a)
                        x_emb[support[a]] = rres.x[Index(a)];
                    const double f_emb = model.objective(x_emb, g);
                    if (f_emb < f_best) {
                        f_best = f_emb;
                        x_best = x_emb;
                        x = x_best;  // restart momentum from the jump point
                        y = x;
                        t = 1.0;
                        fx = f_best;
                    }
                    // full-space certificate at the polished point
                    const Vector grad_e = model.smooth_gradient(x_best);
                    const Vector xe = prox_from(x_best, grad_e);
                    const Vector se = residual_at(xe, x_best);
                    const double gap_e = gap_upper_bound(model, g, xe, se);
                    if (gap_e < best_gap) {
                        best_gap = gap_e;
                        best_pt = xe;
                    }
                    const double f_xe = model.objective(xe, g);
                    if (f_xe < f_best) {
                        f_best = f_xe;
                        x_best = xe;
                    }
                    if (best_gap <= target) {
                        out.x = best_pt;
                        out.cert = {it + 1, best_gap, std::sqrt(2.0 * best_gap)};
                        out.certified = true;
                        return out;
                    }
                }
            }

            if (step_norm <= floor_step * (1.0 + x_best.norm())) break;
            if (step_norm <= 1e-7 * (1.0 + x_best.norm())) {
                if (f_best < stag_ref - 1e-14 * std::abs(f_best)) {
                    stag_ref = f_best;
                    stag = 0;
                } else if (++stag >= 25) {
                    break;
                }
            } else {
                stag = 0;
            }
        }

        // APG step with function-value restart
        const Vector grad_y = model.smooth_gradient(y);
        Vector u = prox_from(y, grad_y);
        double fu = model.objective(u, g);
        if (fu > fx) {
            // restart momentum at the last main iterate
            y = x;
            t = 1.0;
            const Vector grad_r = model.smooth_gradient(y);
            u = prox_from(y, grad_r);
            fu = model.objective(u, g);
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = u + ((t - 1.0) / t_next) * (u - x);
        t = t_next;
        x = u;
        fx = fu;
        if (fx < f_best) {
            f_best = fx;
            x_best = x;
        }
    }

    out.x = best_pt;
    out.cert = {it, best_gap, std::isfinite(best_gap) ? std::sqrt(2.0 * best_gap) : kInf};
    out.certified = best_gap <= target;
    return out;
}

SubsolveResult solve_scaled_prox(const QuadraticModel& model, const Regularizer& g, double delta,
                                 long iter_cap, const Vector* warm_start) {
    SubsolveResult r = solve_scaled_prox_best(model, g, delta, iter_cap, warm_start);
    if (!r.certified) throw UnconvergedSubproblem(r.x, r.cert);
    return r;
}

} // namespace hpvm
