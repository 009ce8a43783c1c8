#pragma once

#include "hpvm/local_metric.hpp"
#include "hpvm/regularizer.hpp"
#include "hpvm/types.hpp"

namespace hpvm {

// The composite quadratic subproblem
//   P(x) = <grad_anchor, x - anchor> + 0.5 <H (x - anchor), x - anchor>
//          + reg_weight * g(x),
// i.e. one scaled-prox evaluation with metric H and regularizer weight
// 1/tau. grad_anchor carries the tau-shifted gradient at the anchor.
struct QuadraticModel {
    LocalMetric H;
    Vector anchor;
    Vector grad_anchor;
    double reg_weight = 1.0;  // 1/tau >= 1

    Vector linear_term() const { return grad_anchor - H.apply(anchor); }

    double smooth_value(const Vector& x) const {
        const Vector d = x - anchor;
        return grad_anchor.dot(d) + 0.5 * H.quadform(d);
    }

    Vector smooth_gradient(const Vector& x) const {
        return H.apply(x - anchor) + grad_anchor;
    }

    double objective(const Vector& x, const Regularizer& g) const {
        return smooth_value(x) + reg_weight * g.value(x);
    }
};

// Certifies Definition-style inexactness: gap_bound is a one-sided upper
// bound on P(x) - P(xbar); delta_achieved = sqrt(2 gap_bound) then bounds
// ||x - xbar||_H.
struct SubsolveCertificate {
    long iterations = 0;
    double gap_bound = 0.0;
    double delta_achieved = 0.0;
};

struct SubsolveResult {
    Vector x;
    SubsolveCertificate cert;
    bool certified = false;
};

struct UnconvergedSubproblem : NumericError {
    UnconvergedSubproblem(Vector best, SubsolveCertificate c)
        : NumericError("subproblem not certified within iteration cap"),
          best_point(std::move(best)),
          cert(c) {}
    Vector best_point;
    SubsolveCertificate cert;
};

// Scaled generalized gradient mapping of the model at x with the given step:
// (x - prox_{step * reg_weight * g}(x - step * grad_smooth(x))) / step.
// Zero exactly at the minimizer of P.
Vector prox_grad_mapping(const QuadraticModel& model, const Regularizer& g, const Vector& x,
                         double step);

// Restart-APG solve of the model to certified gap <= delta^2 / 2.
// Throws UnconvergedSubproblem when the cap is reached uncertified.
SubsolveResult solve_scaled_prox(const QuadraticModel& model, const Regularizer& g, double delta,
                                 long iter_cap = 10000, const Vector* warm_start = nullptr);

// As above but returns the best certificate found instead of throwing.
SubsolveResult solve_scaled_prox_best(const QuadraticModel& model, const Regularizer& g,
                                      double delta, long iter_cap = 10000,
                                      const Vector* warm_start = nullptr);

} // namespace hpvm
