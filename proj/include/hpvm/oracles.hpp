#pragma once

#include "hpvm/dataset.hpp"
#include "hpvm/oracle.hpp"

#include <memory>
#include <vector>

namespace hpvm {

// Hessians are materialized only up to this dimension; larger models expose
// matrix-vector products. The D-optimal Hessian has rank <= m(m+1)/2, so the
// product form is both necessary and cheap at scale.
constexpr Index kDenseHessianLimit = 2000;

// f(x) = (1/n) sum log(1 + exp(-y_i a_i'x)) + (mu_f/2)||x||^2.
//
// L_f = ||A||^2/(2n) + mu_f with the spectral norm estimated by power
// iteration. The generalized self-concordance pair (gsc_M, gsc_kappa)
// defaults to (max_i ||a_i||_2, 2); it is configurable because the constant
// depends on the convention used for the logistic loss.
OraclePtr logistic_elastic_oracle(std::shared_ptr<const Dataset> data, double mu_f,
                                  double gsc_kappa = 2.0, double gsc_M = -1.0);

// f(x) = (1/n) sum (y_i exp(-a_i'x/2) + exp(a_i'x/2)) + (mu_f/2)||x||^2,
// M_f = max_i ||a_i||_2 / sqrt(mu_f).
OraclePtr poisson_oracle(std::shared_ptr<const Dataset> data, double mu_f);

// f(w) = -logdet(sum_i w_i v_i v_i') on {w : sum_i w_i v_i v_i' > 0};
// nu_f = m, standard self-concordant barrier.
OraclePtr logdet_design_oracle(const std::vector<Vector>& design_vectors);

// Dual covariance model over vec(Y): phi(Y) = -logdet(Y + Sigma) on
// {Y : Y + Sigma > 0}; nu_f = p.
OraclePtr covariance_dual_oracle(const Matrix& sigma);

} // namespace hpvm
