#include "hpvm/verify.hpp"

#include "hpvm/kkt.hpp"
#include "hpvm/prox.hpp"
#include "hpvm/subsolver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace hpvm::verify {
namespace {

const double kFdSteps[3] = {1e-4, 1e-5, 1e-6};

} // namespace

Vector fd_gradient(const ScalarFn& fun, const Vector& x, double h) {
    const Index p = x.size();
    auto central = [&](double step) {
        Vector g(p);
        Vector e = x;
        for (Index i = 0; i < p; ++i) {
            const double xi = x[i];
            e[i] = xi + step;
            const double fp = fun(e);
            e[i] = xi - step;
            const double fm = fun(e);
            e[i] = xi;
            g[i] = (fp - fm) / (2.0 * step);
        }
        return g;
    };
    if (h > 0.0) return central(h);
    Vector cands[3];
    for (int i = 0; i < 3; ++i) cands[i] = central(kFdSteps[i]);
    int bi = 0, bj = 1;
    double best = kInf;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double d = (cands[i] - cands[j]).norm();
            if (d < best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    return 0.5 * (cands[bi] + cands[bj]);
}

Matrix fd_hessian(const VectorFn& gradfun, const Vector& x, double h) {
    const Index p = x.size();
    auto central = [&](double step) {
        Matrix H(p, p);
        Vector e = x;
        for (Index i = 0; i < p; ++i) {
            const double xi = x[i];
            e[i] = xi + step;
            const Vector gp = gradfun(e);
            e[i] = xi - step;
            const Vector gm = gradfun(e);
            e[i] = xi;
            H.col(i) = (gp - gm) / (2.0 * step);
        }
        return Matrix(0.5 * (H + H.transpose()));
    };
    if (h > 0.0) return central(h);
    Matrix cands[3];
    for (int i = 0; i < 3; ++i) cands[i] = central(kFdSteps[i]);
    int bi = 0, bj = 1;
    double best = kInf;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double d = (cands[i] - cands[j]).norm();
            if (d < best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    return 0.5 * (cands[bi] + cands[bj]);
}

double fd_third_directional(const SmoothOracle& f, const Vector& x, const Vector& u, double h) {
    const double qp = f.hessian_quadform(x + h * u, u);
    const double qm = f.hessian_quadform(x - h * u, u);
    return (qp - qm) / (2.0 * h);
}

double local_distance(const SmoothOracle& f, const Vector& at, const Vector& a, const Vector& b) {
    return std::sqrt(std::max(f.hessian_quadform(at, a - b), 0.0));
}

namespace {

// Tightens an l1-supported candidate to machine precision by Newton steps on
// the reduced smooth system; returns false when the support is unusable.
bool l1_support_polish(const TauProblemOracle& ftau, double rho, Vector& x, double& resid,
                       const SmoothOracle& f_orig, const Regularizer& g) {
    const Index p = x.size();
    std::vector<Index> support;
    for (Index i = 0; i < p; ++i)
        if (x[i] != 0.0) support.push_back(i);
    const Index s = Index(support.size());
    if (s == 0) {
        resid = kkt_residual(ftau, g, x);
        return resid <= 1e-12;
    }
    Vector sign(s);
    for (Index a = 0; a < s; ++a) sign[a] = x[support[a]] > 0.0 ? 1.0 : -1.0;

    Vector xs = x;
    for (int it = 0; it < 60; ++it) {
        const Vector grad = ftau.gradient(xs);
        Vector r(s);
        for (Index a = 0; a < s; ++a) r[a] = grad[support[a]] + rho * sign[a];
        if (r.norm() < 1e-15 * std::max(1.0, grad.norm())) break;
        const Matrix H = ftau.hessian(xs);
        Matrix Hs(s, s);
        for (Index a = 0; a < s; ++a)
            for (Index b = 0; b < s; ++b) Hs(a, b) = H(support[a], support[b]);
        Eigen::LLT<Matrix> llt(Hs);
        if (llt.info() != Eigen::Success) return false;
        const Vector d = llt.solve(r);
        for (Index a = 0; a < s; ++a) xs[support[a]] -= d[a];
    }
    // sign consistency and off-support dual feasibility
    for (Index a = 0; a < s; ++a)
        if (xs[support[a]] * sign[a] <= 0.0) return false;
    const Vector grad = ftau.gradient(xs);
    for (Index i = 0; i < p; ++i) {
        const bool on = xs[i] != 0.0;
        if (!on && std::abs(grad[i]) > rho * (1.0 + 1e-9)) return false;
    }
    const double r2 = kkt_residual(ftau, g, xs);
    if (r2 < resid) {
        x = xs;
        resid = r2;
    }
    (void)f_orig;
    return resid <= 1e-12;
}

} // namespace

ReferenceSolution reference_solution(const SmoothOracle& f, const Regularizer& g,
                                     const Vector& xi0, double tau, double target,
                                     const Vector* warm) {
    TauProblemOracle ftau(f, xi0, tau);
    ReferenceSolution out;
    out.tau = tau;
    out.method = "apg+newton";

    Vector x = warm ? *warm : Vector(Vector::Zero(f.dim()));
    if (!ftau.domain_check(x) || !g.in_domain(x)) {
        if (warm) x = Vector::Zero(f.dim());
        if (!ftau.domain_check(x) || !g.in_domain(x))
            throw DomainError("reference_solution: no feasible start");
    }

    // Phase 1: composite gradient descent with backtracking to get into the
    // Newton basin.
    double L = std::isfinite(ftau.lip()) ? ftau.lip() : 1.0;
    double fx = ftau.value(x);
    for (int it = 0; it < 4000; ++it) {
        const Vector grad = ftau.gradient(x);
        Vector u;
        for (int bt = 0; bt < 80; ++bt) {
            u = g.prox(x - grad / L, 1.0 / L);
            if (ftau.domain_check(u)) {
                const double fu = ftau.value(u);
                const Vector d = u - x;
                if (fu <= fx + grad.dot(d) + 0.5 * L * d.squaredNorm() + 1e-14) {
                    fx = fu;
                    break;
                }
            }
            L *= 2.0;
        }
        const double move = (u - x).norm();
        x = u;
        if (move < 1e-9 * std::max(1.0, x.norm())) break;
        L = std::max(L * 0.7, 1e-12);
    }

    // Phase 2: proximal-Newton polish.
    out.residual = kkt_residual(ftau, g, x);
    for (int it = 0; it < 60 && out.residual > target; ++it) {
        QuadraticModel model;
        model.H = ftau.has_dense_hessian()
                      ? LocalMetric::dense(ftau.hessian(x))
                      : LocalMetric::from_op(ftau.hessian_op(x), ftau.dim());
        model.anchor = x;
        model.grad_anchor = ftau.gradient(x);
        model.reg_weight = 1.0;
        SubsolveResult res = solve_scaled_prox_best(model, g, 1e-14, 200000, &x);
        if (!ftau.domain_check(res.x)) break;
        const double r = kkt_residual(ftau, g, res.x);
        if (r >= out.residual) break;
        x = res.x;
        out.residual = r;
    }

    // Phase 3: support polish for plain l1.
    if (const auto* l1 = dynamic_cast<const L1Regularizer*>(&g)) {
        l1_support_polish(ftau, l1->rho(), x, out.residual, f, g);
    }

    out.x = x;
    out.reached_target = out.residual <= target * 100.0;  // 1e-10 acceptance line
    return out;
}

Matrix reference_invcov(const Matrix& sigma, double rho, double tol, long max_iter) {
    const Index p = sigma.rows();
    auto chol = [&](const Matrix& X) {
        Eigen::LLT<Matrix> llt(X);
        audit::count_cholesky();
        return llt;
    };
    auto value = [&](const Matrix& X, const Eigen::LLT<Matrix>& llt) {
        double logdet = 0.0;
        const Matrix Lm = llt.matrixL();
        for (Index i = 0; i < p; ++i) logdet += std::log(Lm(i, i));
        return (sigma.cwiseProduct(X)).sum() - 2.0 * logdet;
    };

    Matrix X = Matrix::Identity(p, p);
    Eigen::LLT<Matrix> llt = chol(X);
    double fx = value(X, llt);
    Matrix Y = X;
    double t = 1.0;
    double L = 1.0;

    auto soft = [&](const Matrix& M, double thr) {
        return Matrix(M.unaryExpr([thr](double v) {
            const double a = std::abs(v) - thr;
            return a > 0.0 ? (v > 0.0 ? a : -a) : 0.0;
        }));
    };

    for (long it = 0; it < max_iter; ++it) {
        audit::count_inversion();
        Eigen::LLT<Matrix> llty = chol(Y);
        bool y_ok = llty.info() == Eigen::Success;
        if (!y_ok) {
            Y = X;
            t = 1.0;
            llty = chol(Y);
            y_ok = llty.info() == Eigen::Success;
        }
        const Matrix Yinv = llty.solve(Matrix::Identity(p, p));
        const Matrix grad = sigma - Yinv;
        const double fy = value(Y, llty);

        Matrix U;
        double fu = 0.0;
        bool ok = false;
        for (int bt = 0; bt < 80; ++bt) {
            U = soft(Y - grad / L, rho / L);
            Eigen::LLT<Matrix> lltu(U);
            audit::count_cholesky();
            if (lltu.info() == Eigen::Success && U.diagonal().minCoeff() > 0.0) {
                fu = value(U, lltu);
                const Matrix D = U - Y;
                if (fu <= fy + (grad.cwiseProduct(D)).sum() + 0.5 * L * D.squaredNorm() + 1e-13) {
                    ok = true;
                    break;
                }
            }
            L *= 2.0;
        }
        if (!ok) throw NumericError("reference_invcov: linesearch failed");

        const double F_new = fu + rho * U.cwiseAbs().sum();
        const double F_old = fx + rho * X.cwiseAbs().sum();
        if (F_new > F_old) {
            Y = X;
            t = 1.0;
            continue;
        }

        // optimality: 0 in grad f(U) + rho sign(U)
        Eigen::LLT<Matrix> lltu = chol(U);
        audit::count_inversion();
        const Matrix Uinv = lltu.solve(Matrix::Identity(p, p));
        const Matrix gU = sigma - Uinv;
        double viol = 0.0;
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j) {
                const double gij = gU(i, j);
                viol = std::max(viol, U(i, j) != 0.0
                                          ? std::abs(gij + rho * (U(i, j) > 0.0 ? 1.0 : -1.0))
                                          : std::max(std::abs(gij) - rho, 0.0));
            }

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        Y = U + ((t - 1.0) / t_next) * (U - X);
        t = t_next;
        X = U;
        fx = fu;
        if (viol <= tol) return X;
        L = std::max(L * 0.9, 1e-8);
    }
    return X;
}

namespace {

double prox_objective(const Regularizer& g, const Vector& x, double gamma, const Vector& u) {
    const double gv = g.value(u);
    if (!std::isfinite(gv)) return kInf;
    return gv + (u - x).squaredNorm() / (2.0 * gamma);
}

// golden-section scan on one coordinate
void golden_refine(const Regularizer& g, const Vector& x, double gamma, Vector& u, Index i,
                   double lo, double hi) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    auto eval = [&](double v) {
        u[i] = v;
        return prox_objective(g, x, gamma, u);
    };
    double fc = eval(c), fd = eval(d);
    for (int it = 0; it < 120 && (b - a) > 1e-13; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = eval(d);
        }
    }
    u[i] = 0.5 * (a + b);
    // exact zero is a kink candidate for l1-type terms
    const double f_mid = prox_objective(g, x, gamma, u);
    const double saved = u[i];
    u[i] = 0.0;
    if (prox_objective(g, x, gamma, u) >= f_mid) u[i] = saved;
}

Vector brute_prox_simplex(const Vector& x) {
    // water-filling: find theta with sum max(x_i - theta, 0) = 1 by bisection
    double lo = x.minCoeff() - 1.0, hi = x.maxCoeff();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        double s = 0.0;
        for (Index i = 0; i < x.size(); ++i) s += std::max(x[i] - mid, 0.0);
        (s > 1.0 ? lo : hi) = mid;
    }
    const double theta = 0.5 * (lo + hi);
    Vector u(x.size());
    for (Index i = 0; i < x.size(); ++i) u[i] = std::max(x[i] - theta, 0.0);
    return u;
}

} // namespace

Vector brute_prox(const Regularizer& g, const Vector& x, double gamma) {
    if (dynamic_cast<const SimplexIndicator*>(&g)) return brute_prox_simplex(x);

    const Index p = x.size();
    const double range = x.cwiseAbs().maxCoeff() + 1.0;

    Vector u = Vector::Zero(p);
    if (p <= 4) {
        // coarse joint grid
        const int n_grid = p <= 2 ? 41 : 15;
        std::vector<int> idx(p, 0);
        Vector cand(p);
        double best = kInf;
        Vector best_u = u;
        bool done = false;
        while (!done) {
            for (Index i = 0; i < p; ++i)
                cand[i] = -range + 2.0 * range * idx[i] / double(n_grid - 1);
            const double val = prox_objective(g, x, gamma, cand);
            if (val < best) {
                best = val;
                best_u = cand;
            }
            Index c = 0;
            while (c < p && ++idx[c] == n_grid) {
                idx[c] = 0;
                ++c;
            }
            done = c == p;
        }
        u = best_u;
    } else {
        // projected subgradient, step c/k
        u = x;
        double best = prox_objective(g, x, gamma, u);
        Vector best_u = u;
        for (long k = 1; k <= 1000000; ++k) {
            const Vector sub = g.subgradient_select(u) + (u - x) / gamma;
            u -= (range / double(k)) * sub;
            const double val = prox_objective(g, x, gamma, u);
            if (val < best) {
                best = val;
                best_u = u;
            }
        }
        u = best_u;
    }

    // cyclic golden-section refinement (separable regularizers)
    for (int sweep = 0; sweep < 200; ++sweep) {
        const Vector before = u;
        for (Index i = 0; i < p; ++i)
            golden_refine(g, x, gamma, u, i, u[i] - range, u[i] + range);
        if ((u - before).lpNorm<Eigen::Infinity>() < 1e-12) break;
    }
    return u;
}

std::string AuditReport::to_json() const {
    std::ostringstream os;
    os << "{\n  \"all_pass\": " << (all_pass ? "true" : "false") << ",\n  \"checks\": [\n";
    for (size_t i = 0; i < checks.size(); ++i) {
        const auto& c = checks[i];
        os << "    {\"inequality\": \"" << c.inequality << "\", \"k\": " << c.k
           << ", \"applicable\": " << (c.applicable ? "true" : "false")
           << ", \"pass\": " << (c.pass ? "true" : "false") << ", \"lhs\": " << c.lhs
           << ", \"rhs\": " << c.rhs << "}" << (i + 1 < checks.size() ? "," : "") << "\n";
    }
    os << "  ]\n}\n";
    return os.str();
}

AuditReport audit_theorem(const SmoothOracle& f, const Regularizer& g, Regime regime,
                          const TheoremConstants& c, const TheoremTrace& trace, double beta,
                          double tol) {
    (void)g;
    AuditReport rep;
    const size_t K = trace.xs.size();
    if (trace.taus.size() != K || trace.refs.size() != K)
        throw PreconditionError("audit_theorem: trace arrays must align");

    const double tau0 = trace.taus.empty() ? 0.0 : trace.taus[0];

    for (size_t k = 0; k < K; ++k) {
        const Vector& xk = trace.xs[k];
        const ReferenceSolution& ref = trace.refs[k];
        const double sk = std::pow(c.sigma, double(k));
        const double rk = std::pow(std::sqrt(c.sigma), double(k));

        if (regime == Regime::StronglyConvexSmooth) {
            AuditCheck a;
            a.inequality = "||x^k - x*_{tau_k}||_2 <= C sigma^k";
            a.k = long(k);
            a.lhs = (xk - ref.x).norm();
            a.rhs = c.C * sk;
            a.pass = a.lhs <= a.rhs + tol;
            rep.add(a);

            AuditCheck b;
            b.inequality = "1 - tau_k <= ((1-tau0)/tau0) sigma^k";
            b.k = long(k);
            b.lhs = 1.0 - trace.taus[k];
            b.rhs = (1.0 - tau0) / tau0 * sk;
            b.pass = b.lhs <= b.rhs + tol;
            rep.add(b);

            if (trace.has_x_star) {
                AuditCheck h;
                h.inequality = "||x^k - x*||_2 <= C_hat sigma^k";
                h.k = long(k);
                h.lhs = (xk - trace.x_star).norm();
                h.rhs = c.C_hat * sk;
                h.pass = h.lhs <= h.rhs + tol;
                rep.add(h);
            }
        } else {
            AuditCheck a;
            a.inequality = "lambda_k <= beta sigma^k";
            a.k = long(k);
            a.lhs = local_distance(f, ref.x, xk, ref.x);
            a.rhs = beta * sk;
            a.pass = a.lhs <= a.rhs + tol;
            rep.add(a);

            AuditCheck b;
            b.k = long(k);
            b.lhs = 1.0 - trace.taus[k];
            if (regime == Regime::SelfConcordant) {
                b.inequality = "1 - tau_k <= ((1-tau0)/tau0) sqrt(sigma)^k";
                b.rhs = (1.0 - tau0) / tau0 * rk;
            } else {
                b.inequality = "1 - tau_k <= C0 sqrt(sigma)^k / ((1+C0)(sqrt(nu)+c0)(1-sqrt(s)))";
                const double denom =
                    (1.0 + c.C0) * (std::sqrt(c.nu_f) + c.c0_bar) * (1.0 - std::sqrt(c.sigma));
                b.rhs = denom > 0.0 ? c.C0 * rk / denom : kInf;
            }
            b.pass = b.lhs <= b.rhs + tol;
            rep.add(b);
        }

        // Newton contraction bound between consecutive iterates
        if (k + 1 < K && regime != Regime::StronglyConvexSmooth) {
            const ReferenceSolution& ref_next = trace.refs[k + 1];
            const double lam_hat = local_distance(f, ref_next.x, xk, ref_next.x);
            const double lam_next = local_distance(f, ref_next.x, trace.xs[k + 1], ref_next.x);
            const double disc = 1.0 - 4.0 * lam_hat + 2.0 * lam_hat * lam_hat;
            AuditCheck nb;
            nb.inequality = "lambda_{k+1} <= psi(lhat) lhat^2 + delta_k/(1-lhat)";
            nb.k = long(k);
            nb.applicable = disc > 0.0 && lam_hat < 1.0;
            if (nb.applicable) {
                const double delta_k = k < trace.deltas.size() ? trace.deltas[k] : 0.0;
                nb.lhs = lam_next;
                nb.rhs = (3.0 - 2.0 * lam_hat) / disc * lam_hat * lam_hat +
                         delta_k / (1.0 - lam_hat);
                nb.pass = nb.lhs <= nb.rhs + tol;
            }
            rep.add(nb);
        }
    }
    return rep;
}

} // namespace hpvm::verify
