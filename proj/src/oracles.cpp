#include "hpvm/oracles.hpp"

#include "hpvm/eig.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace hpvm {
namespace {

// log(1 + exp(-z)) without overflow
double log1pexp_neg(double z) {
    if (z > 0.0) return std::log1p(std::exp(-z));
    return -z + std::log1p(std::exp(z));
}

// ||A||_2 via power iteration on A'A, 1e-6 relative, 200-iteration cap.
double spectral_norm(const Dataset& data) {
    MatVec op = [&data](const Vector& v) { return data.apply_transpose(data.apply(v)); };
    const double l = power_iteration_lmax(op, data.p, 1e-6, 200);
    return std::sqrt(std::max(l, 0.0));
}

class LogisticOracle final : public SmoothOracle {
public:
    LogisticOracle(std::shared_ptr<const Dataset> data, double mu_f, double kappa, double M_raw)
        : data_(std::move(data)), mu_(mu_f) {
        if (!(mu_ > 0.0)) throw PreconditionError("logistic oracle: mu_f must be > 0");
        if (data_->n < 1) throw InvalidDatasetError("logistic oracle: empty dataset");
        for (Index i = 0; i < data_->n; ++i) {
            const double y = data_->labels[i];
            if (y != 1.0 && y != -1.0)
                throw InvalidDatasetError("logistic oracle: label outside {-1,+1}");
        }
        const double norm_a = spectral_norm(*data_);
        lip_ = norm_a * norm_a / (2.0 * double(data_->n)) + mu_;
        if (M_raw < 0.0) M_raw = data_->max_row_norm();
        kappa_ = kappa;
        m_hat_ = self_concordance_convert(M_raw, kappa, mu_);
    }

    Index dim() const override { return data_->p; }

    double value(const Vector& x) const override {
        double s = 0.0;
        for (Index i = 0; i < data_->n; ++i)
            s += log1pexp_neg(data_->labels[i] * data_->row_dot(i, x));
        return s / double(data_->n) + 0.5 * mu_ * x.squaredNorm();
    }

    Vector gradient(const Vector& x) const override {
        Vector g = mu_ * x;
        const double inv_n = 1.0 / double(data_->n);
        for (Index i = 0; i < data_->n; ++i) {
            const double y = data_->labels[i];
            const double z = y * data_->row_dot(i, x);
            // d/dz log(1+e^{-z}) = -1/(1+e^z)
            const double w = -inv_n * y / (1.0 + std::exp(z));
            data_->add_row(i, w, g);
        }
        return g;
    }

    bool has_dense_hessian() const override { return data_->p <= kDenseHessianLimit; }

    Matrix hessian(const Vector& x) const override {
        if (!has_dense_hessian()) return SmoothOracle::hessian(x);
        Matrix H = mu_ * Matrix::Identity(data_->p, data_->p);
        const double inv_n = 1.0 / double(data_->n);
        for (Index i = 0; i < data_->n; ++i) {
            const double z = data_->labels[i] * data_->row_dot(i, x);
            const double s = 1.0 / (1.0 + std::exp(-z));
            const double w = inv_n * s * (1.0 - s);
            for (const auto& [j1, v1] : data_->rows[i])
                for (const auto& [j2, v2] : data_->rows[i]) H(j1, j2) += w * v1 * v2;
        }
        return H;
    }

    MatVec hessian_op(const Vector& x) const override {
        Vector w(data_->n);
        for (Index i = 0; i < data_->n; ++i) {
            const double z = data_->labels[i] * data_->row_dot(i, x);
            const double s = 1.0 / (1.0 + std::exp(-z));
            w[i] = s * (1.0 - s) / double(data_->n);
        }
        auto data = data_;
        const double mu = mu_;
        return [data, w, mu](const Vector& u) {
            Vector au = data->apply(u);
            Vector out = data->apply_transpose(Vector(w.cwiseProduct(au)));
            out += mu * u;
            return out;
        };
    }

    double mu() const override { return mu_; }
    double lip() const override { return lip_; }
    std::optional<double> self_concordance() const override { return m_hat_; }

private:
    std::shared_ptr<const Dataset> data_;
    double mu_, lip_ = kInf, m_hat_ = 0.0, kappa_ = 2.0;
};

class PoissonOracle final : public SmoothOracle {
public:
    PoissonOracle(std::shared_ptr<const Dataset> data, double mu_f)
        : data_(std::move(data)), mu_(mu_f) {
        if (!(mu_ > 0.0)) throw PreconditionError("poisson oracle: mu_f must be > 0");
        if (data_->n < 1) throw InvalidDatasetError("poisson oracle: empty dataset");
        for (Index i = 0; i < data_->n; ++i)
            if (data_->labels[i] < 0.0)
                throw InvalidDatasetError("poisson oracle: negative count label");
        m_hat_ = data_->max_row_norm() / std::sqrt(mu_);
    }

    Index dim() const override { return data_->p; }

    double value(const Vector& x) const override {
        double s = 0.0;
        for (Index i = 0; i < data_->n; ++i) {
            const double u = data_->row_dot(i, x);
            s += data_->labels[i] * std::exp(-0.5 * u) + std::exp(0.5 * u);
        }
        return s / double(data_->n) + 0.5 * mu_ * x.squaredNorm();
    }

    Vector gradient(const Vector& x) const override {
        Vector g = mu_ * x;
        const double inv_n = 1.0 / double(data_->n);
        for (Index i = 0; i < data_->n; ++i) {
            const double u = data_->row_dot(i, x);
            const double w =
                inv_n * 0.5 * (std::exp(0.5 * u) - data_->labels[i] * std::exp(-0.5 * u));
            data_->add_row(i, w, g);
        }
        return g;
    }

    bool has_dense_hessian() const override { return data_->p <= kDenseHessianLimit; }

    Matrix hessian(const Vector& x) const override {
        Matrix H = mu_ * Matrix::Identity(data_->p, data_->p);
        const double inv_n = 1.0 / double(data_->n);
        for (Index i = 0; i < data_->n; ++i) {
            const double u = data_->row_dot(i, x);
            const double w =
                inv_n * 0.25 * (std::exp(0.5 * u) + data_->labels[i] * std::exp(-0.5 * u));
            for (const auto& [j1, v1] : data_->rows[i])
                for (const auto& [j2, v2] : data_->rows[i]) H(j1, j2) += w * v1 * v2;
        }
        return H;
    }

    double mu() const override { return mu_; }
    std::optional<double> self_concordance() const override { return m_hat_; }

private:
    std::shared_ptr<const Dataset> data_;
    double mu_, m_hat_;
};

class LogDetDesignOracle final : public SmoothOracle {
public:
    explicit LogDetDesignOracle(const std::vector<Vector>& vs) {
        if (vs.empty()) throw PreconditionError("design oracle: no vectors");
        m_ = vs[0].size();
        p_ = Index(vs.size());
        if (p_ < m_) throw PreconditionError("design oracle: p must be >= m");
        V_.resize(m_, p_);
        for (Index i = 0; i < p_; ++i) {
            if (vs[i].size() != m_)
                throw PreconditionError("design oracle: inconsistent vector sizes");
            V_.col(i) = vs[i];
        }
    }

    Index dim() const override { return p_; }

    double value(const Vector& w) const override {
        const Matrix L = chol_moment(w);
        double logdet = 0.0;
        for (Index i = 0; i < m_; ++i) logdet += std::log(L(i, i));
        return -2.0 * logdet;
    }

    Vector gradient(const Vector& w) const override {
        const Matrix G = whitened(w);
        return -G.colwise().squaredNorm().transpose();
    }

    bool has_dense_hessian() const override { return p_ <= kDenseHessianLimit; }

    Matrix hessian(const Vector& w) const override {
        if (!has_dense_hessian()) return SmoothOracle::hessian(w);
        const Matrix G = whitened(w);
        const Matrix S = G.transpose() * G;
        return S.cwiseProduct(S);
    }

    // (H u)_i = g_i' (G diag(u) G') g_i, O(p m^2) per product; the K
    // accumulation skips zero entries of u (simplex iterates are sparse).
    MatVec hessian_op(const Vector& w) const override {
        auto G = std::make_shared<Matrix>(whitened(w));
        const Index m = m_;
        auto K = std::make_shared<Matrix>(m, m);
        auto KG = std::make_shared<Matrix>(m, G->cols());
        return [G, K, KG, m](const Vector& u) {
            K->setZero();
            for (Index i = 0; i < u.size(); ++i)
                if (u[i] != 0.0) K->noalias() += u[i] * G->col(i) * G->col(i).transpose();
            KG->noalias() = *K * *G;
            Vector out(u.size());
            for (Index i = 0; i < u.size(); ++i) out[i] = G->col(i).dot(KG->col(i));
            return out;
        };
    }

    double hessian_quadform(const Vector& w, const Vector& u) const override {
        const Matrix G = whitened(w);
        Matrix K = Matrix::Zero(m_, m_);
        for (Index i = 0; i < u.size(); ++i)
            if (u[i] != 0.0) K.noalias() += u[i] * G.col(i) * G.col(i).transpose();
        return K.squaredNorm();  // tr(K^2) with symmetric K
    }

    bool has_hessian_diag() const override { return true; }
    Vector hessian_diag(const Vector& w) const override {
        const Matrix G = whitened(w);
        return G.colwise().squaredNorm().array().square().matrix().transpose();
    }

    Matrix hessian_submatrix(const Vector& w, const std::vector<Index>& idx) const override {
        const Matrix G = whitened(w);
        const Index s = Index(idx.size());
        Matrix sub(s, m_);
        for (Index a = 0; a < s; ++a) sub.row(a) = G.col(idx[a]).transpose();
        const Matrix S = sub * sub.transpose();
        return S.cwiseProduct(S);
    }

    bool domain_check(const Vector& w) const override {
        Matrix M = moment(w);
        Eigen::LLT<Matrix> llt(M);
        audit::count_cholesky();
        return llt.info() == Eigen::Success && M.diagonal().minCoeff() > 0.0;
    }

    std::optional<double> self_concordance() const override { return 2.0; }
    std::optional<double> barrier_parameter() const override { return double(m_); }

    const Matrix& design_matrix() const { return V_; }

private:
    Matrix moment(const Vector& w) const {
        return V_ * w.asDiagonal() * V_.transpose();
    }

    Matrix chol_moment(const Vector& w) const {
        Eigen::LLT<Matrix> llt(moment(w));
        audit::count_cholesky();
        if (llt.info() != Eigen::Success)
            throw DomainError("design oracle: moment matrix not positive definite");
        return llt.matrixL();
    }

    // G = L^{-1} V with M(w) = L L'
    Matrix whitened(const Vector& w) const {
        const Matrix L = chol_moment(w);
        return L.triangularView<Eigen::Lower>().solve(V_);
    }

    Index m_ = 0, p_ = 0;
    Matrix V_;
};

class CovarianceDualOracle final : public SmoothOracle {
public:
    explicit CovarianceDualOracle(const Matrix& sigma) : sigma_(sigma), p_(sigma.rows()) {
        if (sigma_.rows() != sigma_.cols())
            throw PreconditionError("covariance dual oracle: Sigma must be square");
        if (!sigma_.isApprox(sigma_.transpose(), 1e-12))
            throw PreconditionError("covariance dual oracle: Sigma must be symmetric");
    }

    Index dim() const override { return p_ * p_; }

    double value(const Vector& y) const override {
        const Matrix L = chol_shifted(unvec(y));
        double logdet = 0.0;
        for (Index i = 0; i < p_; ++i) logdet += std::log(L(i, i));
        return -2.0 * logdet;
    }

    Vector gradient(const Vector& y) const override {
        Eigen::LLT<Matrix> llt = llt_shifted(unvec(y));
        audit::count_inversion();
        Matrix inv = llt.solve(Matrix::Identity(p_, p_));
        return -vec(inv);
    }

    bool has_dense_hessian() const override { return p_ * p_ <= kDenseHessianLimit; }

    Matrix hessian(const Vector& y) const override {
        Eigen::LLT<Matrix> llt = llt_shifted(unvec(y));
        audit::count_inversion();
        Matrix inv = llt.solve(Matrix::Identity(p_, p_));
        Matrix H(p_ * p_, p_ * p_);
        // Hessian action X -> inv * X * inv, expanded columnwise
        for (Index j = 0; j < p_ * p_; ++j) {
            Matrix E = Matrix::Zero(p_, p_);
            E(j % p_, j / p_) = 1.0;
            H.col(j) = vec(Matrix(inv * E * inv));
        }
        return H;
    }

    MatVec hessian_op(const Vector& y) const override {
        Eigen::LLT<Matrix> llt = llt_shifted(unvec(y));
        audit::count_inversion();
        Matrix inv = llt.solve(Matrix::Identity(p_, p_));
        const Index p = p_;
        return [inv, p](const Vector& u) {
            Matrix U = Eigen::Map<const Matrix>(u.data(), p, p);
            return Vector(Eigen::Map<const Vector>(Matrix(inv * U * inv).eval().data(), p * p));
        };
    }

    bool domain_check(const Vector& y) const override {
        Matrix S = unvec(y) + sigma_;
        Eigen::LLT<Matrix> llt(S);
        audit::count_cholesky();
        return llt.info() == Eigen::Success && S.diagonal().minCoeff() > 0.0;
    }

    std::optional<double> self_concordance() const override { return 2.0; }
    std::optional<double> barrier_parameter() const override { return double(p_); }

private:
    Matrix unvec(const Vector& y) const { return Eigen::Map<const Matrix>(y.data(), p_, p_); }
    static Vector vec(const Matrix& m) {
        return Eigen::Map<const Vector>(m.data(), m.size());
    }

    Eigen::LLT<Matrix> llt_shifted(const Matrix& y) const {
        Eigen::LLT<Matrix> llt(Matrix(y + sigma_));
        audit::count_cholesky();
        if (llt.info() != Eigen::Success)
            throw DomainError("covariance dual oracle: Y + Sigma not positive definite");
        return llt;
    }

    Matrix chol_shifted(const Matrix& y) const { return llt_shifted(y).matrixL(); }

    Matrix sigma_;
    Index p_;
};

} // namespace

OraclePtr logistic_elastic_oracle(std::shared_ptr<const Dataset> data, double mu_f,
                                  double gsc_kappa, double gsc_M) {
    return std::make_shared<LogisticOracle>(std::move(data), mu_f, gsc_kappa, gsc_M);
}

OraclePtr poisson_oracle(std::shared_ptr<const Dataset> data, double mu_f) {
    return std::make_shared<PoissonOracle>(std::move(data), mu_f);
}

OraclePtr logdet_design_oracle(const std::vector<Vector>& design_vectors) {
    return std::make_shared<LogDetDesignOracle>(design_vectors);
}

OraclePtr covariance_dual_oracle(const Matrix& sigma) {
    return std::make_shared<CovarianceDualOracle>(sigma);
}

} // namespace hpvm
