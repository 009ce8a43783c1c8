#pragma once

#include "hpvm/oracle.hpp"
#include "hpvm/regularizer.hpp"
#include "hpvm/report.hpp"

namespace hpvm {

enum class BaselineMethod { PG, APG_LS_Restart, DampedPN };

struct BaselineSettings {
    BaselineMethod method = BaselineMethod::PG;
    double eps = 1e-6;
    long max_iter = 20000;
    long sub_cap = 10000;            // DampedPN subproblem budget
    double full_step_zeta = 0.2;     // DampedPN switches to full steps below this
    bool trace_every_iter = true;
};

// x_{k+1} = prox_{g/L_f}(x_k - grad f(x_k)/L_f); stops at rgap <= eps.
SolveReport prox_grad(const SmoothOracle& f, const Regularizer& g, const BaselineSettings& s,
                      const Vector& x0);

// FISTA-style momentum with backtracking (halving) linesearch and
// function-value restart.
SolveReport apg_ls_restart(const SmoothOracle& f, const Regularizer& g, const BaselineSettings& s,
                           const Vector& x0);

// Standalone damped-step proximal Newton at fixed tau = 1.
SolveReport damped_pn(const SmoothOracle& f, const Regularizer& g, const BaselineSettings& s,
                      const Vector& x0);

} // namespace hpvm
