#pragma once

#include "hpvm/prox.hpp"
#include "hpvm/types.hpp"

#include <limits>
#include <memory>

namespace hpvm {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Proper closed convex regularizer g with a tractable proximal operator.
//
// prox(x, gamma) evaluates argmin_u g(u) + ||u - x||^2 / (2 gamma).
// subgradient_select picks a member of the subdifferential; at points where
// 0 is a valid choice it returns 0 (this activates the f_tau = tau f
// simplification of the homotopy parameterization).
class Regularizer {
public:
    virtual ~Regularizer() = default;

    virtual double value(const Vector& x) const = 0;
    virtual Vector prox(const Vector& x, double gamma) const = 0;
    virtual Vector subgradient_select(const Vector& x) const = 0;

    // argmin g(u) + sum_i (u_i - x_i)^2 / (2 gamma_i); enables diagonally
    // preconditioned subproblem solves.
    virtual bool has_weighted_prox() const { return false; }
    virtual Vector prox_weighted(const Vector& x, const Vector& gammas) const {
        (void)x;
        (void)gammas;
        throw PreconditionError("regularizer: weighted prox not available");
    }
    virtual bool in_domain(const Vector&) const { return true; }

    // Euclidean Lipschitz constant over dom g (dimension-dependent for
    // separable norms); +inf for indicators.
    virtual double lipschitz(Index dim) const = 0;
    virtual double strong_convexity() const { return 0.0; }
    bool strongly_convex() const { return strong_convexity() > 0.0; }

    virtual bool is_indicator() const { return false; }
    // Euclidean diameter of dom g; +inf when unbounded.
    virtual double domain_diameter() const { return kInf; }
    // For indicators with a cheap linear minimization oracle:
    // min_{u in dom g} <c, u>. Used for Frank-Wolfe gap certificates.
    virtual double linear_min(const Vector& c) const {
        (void)c;
        throw PreconditionError("regularizer: no linear minimization oracle");
    }
    virtual bool has_linear_min() const { return false; }

    virtual std::shared_ptr<Regularizer> conjugate() const {
        throw PreconditionError("regularizer: conjugate not available");
    }

    // True when the same regularizer applies verbatim to any coordinate
    // subvector (separable terms and the simplex restricted to its face).
    virtual bool coordinate_restrictable() const { return false; }
};

using RegularizerPtr = std::shared_ptr<Regularizer>;

class ZeroRegularizer final : public Regularizer {
public:
    double value(const Vector&) const override { return 0.0; }
    Vector prox(const Vector& x, double) const override { return x; }
    Vector subgradient_select(const Vector& x) const override { return Vector::Zero(x.size()); }
    double lipschitz(Index) const override { return 0.0; }
    bool has_weighted_prox() const override { return true; }
    Vector prox_weighted(const Vector& x, const Vector&) const override { return x; }
    bool coordinate_restrictable() const override { return true; }
    std::shared_ptr<Regularizer> conjugate() const override;
};

// Indicator of {0}; the conjugate of the zero regularizer.
class OriginIndicator final : public Regularizer {
public:
    double value(const Vector& x) const override { return in_domain(x) ? 0.0 : kInf; }
    Vector prox(const Vector& x, double) const override { return Vector::Zero(x.size()); }
    Vector subgradient_select(const Vector& x) const override {
        if (!in_domain(x)) throw DomainError("origin indicator: point is not 0");
        return Vector::Zero(x.size());
    }
    bool in_domain(const Vector& x) const override {
        return x.lpNorm<Eigen::Infinity>() <= 1e-14;
    }
    double lipschitz(Index) const override { return kInf; }
    bool is_indicator() const override { return true; }
    double domain_diameter() const override { return 0.0; }
    double linear_min(const Vector&) const override { return 0.0; }
    bool has_linear_min() const override { return true; }
};

inline std::shared_ptr<Regularizer> ZeroRegularizer::conjugate() const {
    return std::make_shared<OriginIndicator>();
}

// rho * ||x||_1
class L1Regularizer final : public Regularizer {
public:
    explicit L1Regularizer(double rho) : rho_(rho) {
        if (!(rho > 0.0)) throw PreconditionError("L1Regularizer: rho must be > 0");
    }

    double value(const Vector& x) const override { return rho_ * x.lpNorm<1>(); }
    Vector prox(const Vector& x, double gamma) const override { return prox_l1(x, gamma * rho_); }
    bool has_weighted_prox() const override { return true; }
    Vector prox_weighted(const Vector& x, const Vector& gammas) const override {
        Vector u(x.size());
        for (Index i = 0; i < x.size(); ++i) {
            const double a = std::abs(x[i]) - gammas[i] * rho_;
            u[i] = a > 0.0 ? (x[i] > 0.0 ? a : -a) : 0.0;
        }
        return u;
    }

    // sign(x_i) at nonzeros, 0 at zeros.
    Vector subgradient_select(const Vector& x) const override {
        Vector xi(x.size());
        for (Index i = 0; i < x.size(); ++i)
            xi[i] = x[i] > 0.0 ? rho_ : (x[i] < 0.0 ? -rho_ : 0.0);
        return xi;
    }

    double lipschitz(Index dim) const override { return rho_ * std::sqrt(double(dim)); }
    bool coordinate_restrictable() const override { return true; }
    double rho() const { return rho_; }

    std::shared_ptr<Regularizer> conjugate() const override;

private:
    double rho_;
};

// rho1 * ||x||_1 + (rho2/2) * ||x||^2
class ElasticNetRegularizer final : public Regularizer {
public:
    ElasticNetRegularizer(double rho1, double rho2) : rho1_(rho1), rho2_(rho2) {
        if (!(rho1 >= 0.0) || !(rho2 >= 0.0))
            throw PreconditionError("ElasticNetRegularizer: weights must be >= 0");
    }

    double value(const Vector& x) const override {
        return rho1_ * x.lpNorm<1>() + 0.5 * rho2_ * x.squaredNorm();
    }
    Vector prox(const Vector& x, double gamma) const override {
        return prox_elastic_net(x, gamma, rho1_, rho2_);
    }
    bool has_weighted_prox() const override { return true; }
    Vector prox_weighted(const Vector& x, const Vector& gammas) const override {
        Vector u(x.size());
        for (Index i = 0; i < x.size(); ++i) {
            const double a = std::abs(x[i]) - gammas[i] * rho1_;
            u[i] = a > 0.0 ? (x[i] > 0.0 ? a : -a) / (1.0 + gammas[i] * rho2_) : 0.0;
        }
        return u;
    }
    Vector subgradient_select(const Vector& x) const override {
        Vector xi = rho2_ * x;
        for (Index i = 0; i < x.size(); ++i)
            xi[i] += x[i] > 0.0 ? rho1_ : (x[i] < 0.0 ? -rho1_ : 0.0);
        return xi;
    }
    double lipschitz(Index) const override { return kInf; }
    double strong_convexity() const override { return rho2_; }
    bool coordinate_restrictable() const override { return true; }

private:
    double rho1_, rho2_;
};

// Indicator of the standard simplex.
class SimplexIndicator final : public Regularizer {
public:
    double value(const Vector& x) const override { return in_domain(x) ? 0.0 : kInf; }
    Vector prox(const Vector& x, double) const override { return project_simplex(x); }
    bool has_weighted_prox() const override { return true; }
    Vector prox_weighted(const Vector& x, const Vector& gammas) const override {
        return project_simplex_weighted(x, gammas);
    }
    // 0 is in the normal cone at every feasible point.
    Vector subgradient_select(const Vector& x) const override {
        if (!in_domain(x)) throw DomainError("simplex indicator: point not in simplex");
        return Vector::Zero(x.size());
    }
    bool in_domain(const Vector& x) const override {
        return x.minCoeff() >= -1e-12 && std::abs(x.sum() - 1.0) <= 1e-10;
    }
    double lipschitz(Index) const override { return kInf; }
    bool is_indicator() const override { return true; }
    double domain_diameter() const override { return std::sqrt(2.0); }
    double linear_min(const Vector& c) const override { return c.minCoeff(); }
    bool has_linear_min() const override { return true; }
    bool coordinate_restrictable() const override { return true; }
};

// Indicator of the box {||x||_inf <= radius}; the conjugate of the l1 norm.
class BoxIndicator final : public Regularizer {
public:
    explicit BoxIndicator(double radius) : radius_(radius) {
        if (!(radius > 0.0)) throw PreconditionError("BoxIndicator: radius must be > 0");
    }

    double value(const Vector& x) const override { return in_domain(x) ? 0.0 : kInf; }
    Vector prox(const Vector& x, double) const override {
        return x.cwiseMax(-radius_).cwiseMin(radius_);
    }
    bool has_weighted_prox() const override { return true; }
    Vector prox_weighted(const Vector& x, const Vector&) const override {
        return x.cwiseMax(-radius_).cwiseMin(radius_);
    }
    Vector subgradient_select(const Vector& x) const override {
        if (!in_domain(x)) throw DomainError("box indicator: point outside box");
        return Vector::Zero(x.size());
    }
    bool in_domain(const Vector& x) const override {
        return x.lpNorm<Eigen::Infinity>() <= radius_ * (1.0 + 1e-12);
    }
    double lipschitz(Index) const override { return kInf; }
    bool is_indicator() const override { return true; }
    bool coordinate_restrictable() const override { return true; }
    double radius() const { return radius_; }

    std::shared_ptr<Regularizer> conjugate() const override {
        return std::make_shared<L1Regularizer>(radius_);
    }

private:
    double radius_;
};

inline std::shared_ptr<Regularizer> L1Regularizer::conjugate() const {
    return std::make_shared<BoxIndicator>(rho_);
}

// z -> (1/tau) psi(tau z); the regularizer of the dualized subproblem.
// prox_{gamma phi}(v) = prox_{gamma tau psi}(tau v) / tau.
class TauScaledRegularizer final : public Regularizer {
public:
    TauScaledRegularizer(std::shared_ptr<const Regularizer> inner, double tau)
        : g_(std::move(inner)), tau_(tau) {
        if (!(tau_ > 0.0 && tau_ <= 1.0))
            throw PreconditionError("TauScaledRegularizer: tau must be in (0, 1]");
    }

    double value(const Vector& z) const override { return g_->value(tau_ * z) / tau_; }
    Vector prox(const Vector& z, double gamma) const override {
        return g_->prox(tau_ * z, gamma * tau_) / tau_;
    }
    bool has_weighted_prox() const override { return g_->has_weighted_prox(); }
    Vector prox_weighted(const Vector& z, const Vector& gammas) const override {
        return g_->prox_weighted(tau_ * z, Vector(tau_ * gammas)) / tau_;
    }
    Vector subgradient_select(const Vector& z) const override {
        return g_->subgradient_select(tau_ * z);
    }
    bool in_domain(const Vector& z) const override { return g_->in_domain(tau_ * z); }
    double lipschitz(Index dim) const override { return g_->lipschitz(dim); }
    double strong_convexity() const override { return tau_ * g_->strong_convexity(); }
    bool is_indicator() const override { return g_->is_indicator(); }
    double domain_diameter() const override { return g_->domain_diameter() / tau_; }
    double linear_min(const Vector& c) const override { return g_->linear_min(c) / tau_; }
    bool has_linear_min() const override { return g_->has_linear_min(); }
    bool coordinate_restrictable() const override { return g_->coordinate_restrictable(); }

private:
    std::shared_ptr<const Regularizer> g_;
    double tau_;
};

// c * g(x); used to bring self-concordant models to standard form without
// changing the minimizer of f + g.
class ScaledRegularizer final : public Regularizer {
public:
    ScaledRegularizer(std::shared_ptr<const Regularizer> inner, double scale)
        : g_(std::move(inner)), c_(scale) {
        if (!(c_ > 0.0)) throw PreconditionError("ScaledRegularizer: scale must be > 0");
    }

    double value(const Vector& x) const override { return c_ * g_->value(x); }
    Vector prox(const Vector& x, double gamma) const override { return g_->prox(x, c_ * gamma); }
    bool has_weighted_prox() const override { return g_->has_weighted_prox(); }
    Vector prox_weighted(const Vector& x, const Vector& gammas) const override {
        return g_->prox_weighted(x, Vector(c_ * gammas));
    }
    Vector subgradient_select(const Vector& x) const override {
        return c_ * g_->subgradient_select(x);
    }
    bool in_domain(const Vector& x) const override { return g_->in_domain(x); }
    double lipschitz(Index dim) const override { return c_ * g_->lipschitz(dim); }
    double strong_convexity() const override { return c_ * g_->strong_convexity(); }
    bool is_indicator() const override { return g_->is_indicator(); }
    double domain_diameter() const override { return g_->domain_diameter(); }
    double linear_min(const Vector& c) const override { return g_->linear_min(c); }
    bool has_linear_min() const override { return g_->has_linear_min(); }

private:
    std::shared_ptr<const Regularizer> g_;
    double c_;
};

} // namespace hpvm
