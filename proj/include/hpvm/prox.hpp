#pragma once

#include "hpvm/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hpvm {

constexpr double kQuietInf = std::numeric_limits<double>::infinity();

// Componentwise soft threshold: sign(x_i) * max(|x_i| - gamma, 0).
inline Vector prox_l1(const Vector& x, double gamma) {
    if (!(gamma > 0.0)) {
        if (gamma == 0.0) return x;
        throw PreconditionError("prox_l1: gamma must be > 0");
    }
    Vector u(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double a = std::abs(x[i]) - gamma;
        u[i] = a > 0.0 ? (x[i] > 0.0 ? a : -a) : 0.0;
    }
    return u;
}

// Euclidean projection onto the standard simplex {u >= 0, sum u = 1},
// sort-and-threshold.
inline Vector project_simplex(const Vector& x) {
    const Index p = x.size();
    if (p < 1) throw PreconditionError("project_simplex: empty input");
    std::vector<double> s(x.data(), x.data() + p);
    std::sort(s.begin(), s.end(), std::greater<double>());
    double cum = 0.0;
    double theta = 0.0;
    Index k = 0;
    for (Index i = 0; i < p; ++i) {
        cum += s[i];
        const double t = (cum - 1.0) / double(i + 1);
        if (t < s[i]) {
            theta = t;
            k = i + 1;
        }
    }
    (void)k;
    Vector u(p);
    for (Index i = 0; i < p; ++i) u[i] = std::max(x[i] - theta, 0.0);
    return u;
}

// Projection onto the simplex in the diagonal metric diag(1/gammas):
// argmin sum (u_i - v_i)^2 / (2 gamma_i) over the simplex. KKT form
// u_i = max(v_i - gamma_i theta, 0) with theta found by a safeguarded
// Newton iteration on the piecewise-linear sum constraint.
inline Vector project_simplex_weighted(const Vector& v, const Vector& gammas) {
    const Index p = v.size();
    if (gammas.size() != p) throw PreconditionError("weighted projection: size mismatch");
    double lo = kQuietInf, hi = -kQuietInf;
    for (Index i = 0; i < p; ++i) {
        if (!(gammas[i] > 0.0)) throw PreconditionError("weighted projection: gammas must be > 0");
        lo = std::min(lo, (v[i] - 1.0) / gammas[i]);
        hi = std::max(hi, v[i] / gammas[i]);
    }
    auto eval = [&](double theta, double& deriv) {
        double sum = 0.0;
        deriv = 0.0;
        for (Index i = 0; i < p; ++i) {
            const double u = v[i] - gammas[i] * theta;
            if (u > 0.0) {
                sum += u;
                deriv -= gammas[i];
            }
        }
        return sum - 1.0;
    };
    double theta = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double deriv = 0.0;
        const double r = eval(theta, deriv);
        if (std::abs(r) <= 1e-15) break;
        (r > 0.0 ? lo : hi) = theta;
        double next = deriv < 0.0 ? theta - r / deriv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == theta) break;
        theta = next;
    }
    Vector u(p);
    for (Index i = 0; i < p; ++i) u[i] = std::max(v[i] - gammas[i] * theta, 0.0);
    return u;
}

// Elastic-net prox for rho1*||.||_1 + (rho2/2)*||.||^2: shrink then scale.
inline Vector prox_elastic_net(const Vector& x, double gamma, double rho1, double rho2) {
    return prox_l1(x, gamma * rho1) / (1.0 + gamma * rho2);
}

} // namespace hpvm
