#pragma once

#include "hpvm/eig.hpp"
#include "hpvm/oracle.hpp"
#include "hpvm/regularizer.hpp"

namespace hpvm {

// Scaled fixed-point defect of the composite problem:
//   r(x) = ||x - prox_{g/L}(x - grad f(x)/L)||_2 * L / max(1, ||grad f(x)||_2)
// with L = L_f when finite, else lambda_max(hessian(x)). Zero exactly at
// optima. Domain violations map to +inf.
inline double kkt_residual(const SmoothOracle& f, const Regularizer& g, const Vector& x) {
    if (!f.domain_check(x) || !g.in_domain(x)) return kInf;
    try {
        const Vector grad = f.gradient(x);
        double lhat = f.lip();
        if (!std::isfinite(lhat)) {
            lhat = power_iteration_lmax(f.hessian_op(x), f.dim(), 1e-6, 200);
        }
        if (!(lhat > 0.0)) lhat = 1.0;
        const Vector u = g.prox(x - grad / lhat, 1.0 / lhat);
        return (x - u).norm() * lhat / std::max(1.0, grad.norm());
    } catch (const DomainError&) {
        return kInf;
    }
}

inline double relative_gap(const SmoothOracle& f, const Regularizer& g, const Vector& x) {
    const double r = kkt_residual(f, g, x);
    if (!std::isfinite(r)) return r;
    const double obj = f.value(x) + g.value(x);
    return r / std::max(1.0, std::abs(obj));
}

} // namespace hpvm
